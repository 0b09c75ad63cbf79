//! Finite posets as Alexandrov spaces, monotone maps and finite categories.

pub mod category;
pub mod map;
pub mod poset;
pub mod slice;

pub use category::{Arrow, FinCategory};
pub use map::MonotoneMap;
pub use poset::{Covering, FinPoset, Open, PointSet, DEFAULT_OPEN_LIMIT, MAX_POINTS};
pub use slice::{slice_site, Slice};

pub mod corpus;
pub mod error;
pub mod flabby;
pub mod homalg;
pub mod internal;
pub mod io;
pub mod sheafcore;
pub mod site;
pub mod suite;

pub use error::{Error, Result};

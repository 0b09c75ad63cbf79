//! Exact integer and modular linear algebra, finitely presented modules,
//! cochain complexes and sheaf cohomology.

pub mod complex;
pub mod linalg;
pub mod matrix;
pub mod module;
pub mod ring;
pub mod snf;

pub use complex::{CohomologyGroup, CohomologyTable, Complex};
pub use matrix::IntMatrix;
pub use module::{FPModule, InvariantFactors};
pub use ring::Ring;
pub use snf::{smith_normal_form, smith_normal_form_exact, try_smith_normal_form, BigSnf, Snf};
pub mod resolution;

pub use resolution::{
    cohomology_on, default_nmax, godement_map, godement_resolution, godement_resolution_with, higher_direct_image,
    induced_map, order_complex_cohomology, sheaf_cohomology, sheaf_cohomology_with, stalk_formula_check, Resolution,
    SectionCohomology, StalkMismatch, Strategy,
};

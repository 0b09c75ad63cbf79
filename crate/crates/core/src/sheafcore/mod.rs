//! Sheaves of finite sets and of finitely presented modules on finite
//! posets, presheaves on finite categories, and their morphisms.

pub mod mod_sheaf;
pub mod morphism;
pub mod presheaf;
pub mod set_sheaf;
pub mod vect;

pub use mod_sheaf::{ElementTable, ModSheaf, Sections};
pub use morphism::{ModMorphism, SetMorphism, ShortExact};
pub use presheaf::Presheaf;
pub use set_sheaf::{Section, SetSheaf};
pub use vect::{HomSpace, VectMono, VectSheaf};

/// A sheaf in either flavor.
#[derive(Clone, Debug)]
pub enum AnySheaf {
    Set(SetSheaf),
    Mod(ModSheaf),
}

impl AnySheaf {
    pub fn site(&self) -> &crate::site::FinPoset {
        match self {
            AnySheaf::Set(f) => f.site(),
            AnySheaf::Mod(f) => f.site(),
        }
    }
}

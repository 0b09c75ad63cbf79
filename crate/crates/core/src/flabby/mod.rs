pub mod checks;
pub mod envelope;
pub mod godement;
pub mod injective;
pub mod subterminal;

pub use checks::{
    is_flabby_local, is_flabby_local_mod, is_flabby_traditional, is_flabby_traditional_mod,
    is_strongly_flabby, is_strongly_flabby_mod, is_strongly_flabby_presheaf, Counterexample,
    FlabbyReport,
};
pub use subterminal::{
    enumerate_subterminals, presheaf_subterminals, subterminal_object, PresheafSubterminals,
    SubterminalObject, SubterminalPart,
};
pub use injective::{
    extension_test, extension_test_set, indicator, injectivity_obstruction, injectivity_witness,
    internal_hom, is_injective_field,
};
pub use envelope::{candidate_envelope, Envelope, EnvelopeAxioms};
pub use godement::{godement_embed, godement_embed_set};

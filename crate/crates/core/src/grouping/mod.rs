//! Confidence scores and stem-keyed faceting of generated questions.

mod confidence;
mod facet;
mod stem;

pub use confidence::{inter_confidence, intra_confidence};
pub use facet::{apply_knobs, group_by_stem, Confidence, FacetMember, Knobs, QuestionFacet};
pub use stem::{stem_key, stem_word};

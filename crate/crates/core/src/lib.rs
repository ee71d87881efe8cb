//! Text-side pipeline for answer-pivoted question generation.
//!
//! * [`text`] reviews raw paragraphs for unprocessable content, applies user
//!   edits and tokenizes with a character offset map.
//! * [`answers`] extracts candidate pivotal answers, snaps custom selections
//!   to token boundaries and encodes a chosen answer with BIO tags.
//! * [`grouping`] turns beam scores into confidences and groups answers into
//!   stem-keyed facets.

pub mod answers;
mod error;
pub mod grouping;
pub mod question;
pub mod text;

pub use answers::{
    decode_bio, encode_bio, extract_candidates, validate_custom_span, Annotator, AnswerSpan,
    BioTag, BioTaggedInput, CandidateKind, HeuristicAnnotator, HttpAnnotator, SpanSource,
};
pub use error::{Error, Result};
pub use grouping::{
    apply_knobs, group_by_stem, inter_confidence, intra_confidence, stem_key, Confidence,
    FacetMember, Knobs, QuestionFacet,
};
pub use question::GeneratedQuestion;
pub use text::{apply_edits, review_paragraph, tokenize, FlagKind, Paragraph, ReviewFlag, TextEdit};

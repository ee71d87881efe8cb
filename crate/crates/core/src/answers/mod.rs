//! Pivotal answer selection: candidates, custom spans and BIO encoding.

mod annotator;
mod bio;
mod heuristic;
mod http;

pub use annotator::{
    extract_candidates, parse_annotation, Annotation, AnnotatedEntity, AnnotatedPhrase,
    AnnotatedToken, Annotator,
};
pub use bio::{decode_bio, encode_bio, BioTag, BioTaggedInput};
pub use heuristic::HeuristicAnnotator;
pub use http::HttpAnnotator;

use serde::{Deserialize, Serialize};

use crate::text::Paragraph;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanSource {
    NamedEntity,
    NounPhrase,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    NamedEntity,
    NounPhrase,
}

impl From<CandidateKind> for SpanSource {
    fn from(kind: CandidateKind) -> Self {
        match kind {
            CandidateKind::NamedEntity => SpanSource::NamedEntity,
            CandidateKind::NounPhrase => SpanSource::NounPhrase,
        }
    }
}

/// A pivotal answer: a token-aligned range of the paragraph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnswerSpan {
    /// Code point range into the raw text, end exclusive.
    pub char_range: (usize, usize),
    /// First and last token index, inclusive.
    pub token_range: (usize, usize),
    pub surface: String,
    pub source: SpanSource,
}

impl AnswerSpan {
    /// Builds the span covering tokens `first..=last`.
    pub fn from_tokens(paragraph: &Paragraph, first: usize, last: usize, source: SpanSource) -> Result<Self> {
        if first > last || last >= paragraph.len() {
            return Err(Error::SpanMisaligned(format!(
                "token range ({first}, {last}) invalid for {} tokens",
                paragraph.len()
            )));
        }
        let start = paragraph.token_char_offsets[first].0;
        let end = paragraph.token_char_offsets[last].1;
        Ok(Self {
            char_range: (start, end),
            token_range: (first, last),
            surface: paragraph.slice(start, end).to_owned(),
            source,
        })
    }

    pub fn token_len(&self) -> usize {
        self.token_range.1 - self.token_range.0 + 1
    }

    /// Checks that the span is consistent with `paragraph`.
    pub fn check(&self, paragraph: &Paragraph) -> Result<()> {
        let expected = Self::from_tokens(paragraph, self.token_range.0, self.token_range.1, self.source)?;
        if expected.char_range != self.char_range || expected.surface != self.surface {
            return Err(Error::SpanMisaligned(format!(
                "char range {:?} does not match tokens {:?}",
                self.char_range, self.token_range
            )));
        }
        Ok(())
    }
}

/// Token range touched by a code point range, or `None` if it covers no token.
pub(crate) fn covering_tokens(paragraph: &Paragraph, start: usize, end: usize) -> Option<(usize, usize)> {
    let mut hit = paragraph
        .token_char_offsets
        .iter()
        .enumerate()
        .filter(|(_, &(ts, te))| ts < end && te > start)
        .map(|(i, _)| i);
    let first = hit.next()?;
    let last = hit.next_back().unwrap_or(first);
    Some((first, last))
}

/// Snaps a user selection outward to token boundaries.
pub fn validate_custom_span(paragraph: &Paragraph, char_range: (usize, usize)) -> Result<AnswerSpan> {
    let (start, end) = char_range;
    let len = paragraph.char_len();
    if start > end || end > len {
        return Err(Error::RangeOutOfBounds { start, end, len });
    }
    if start == end {
        return Err(Error::EmptySpan { start, end });
    }
    let (first, last) = covering_tokens(paragraph, start, end).ok_or(Error::EmptySpan { start, end })?;
    AnswerSpan::from_tokens(paragraph, first, last, SpanSource::Custom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn para() -> Paragraph {
        tokenize("Gandhi was born in India in 1869.").unwrap()
    }

    #[test]
    fn aligned_range_is_kept() {
        let p = para();
        let s = validate_custom_span(&p, (28, 32)).unwrap();
        assert_eq!(s.surface, "1869");
        assert_eq!(s.token_range, (6, 6));
        assert_eq!(s.source, SpanSource::Custom);
    }

    #[test]
    fn mid_word_range_snaps_to_token() {
        let s = validate_custom_span(&para(), (29, 31)).unwrap();
        assert_eq!(s.surface, "1869");
        assert_eq!(s.char_range, (28, 32));
    }

    #[test]
    fn partial_words_snap_outward() {
        // "in Ind"
        let s = validate_custom_span(&para(), (16, 22)).unwrap();
        assert_eq!(s.surface, "in India");
        assert_eq!(s.token_range, (3, 4));
    }

    #[test]
    fn whitespace_only_range_is_empty() {
        assert_eq!(validate_custom_span(&para(), (6, 7)), Err(Error::EmptySpan { start: 6, end: 7 }));
        assert_eq!(validate_custom_span(&para(), (3, 3)), Err(Error::EmptySpan { start: 3, end: 3 }));
    }

    #[test]
    fn out_of_bounds() {
        assert!(matches!(validate_custom_span(&para(), (30, 99)), Err(Error::RangeOutOfBounds { .. })));
    }

    #[test]
    fn check_detects_tampering() {
        let p = para();
        let mut s = validate_custom_span(&p, (0, 6)).unwrap();
        assert!(s.check(&p).is_ok());
        s.char_range.1 = 5;
        assert!(matches!(s.check(&p), Err(Error::SpanMisaligned(_))));
    }
}

use serde::{Deserialize, Serialize};

use super::{covering_tokens, AnswerSpan, CandidateKind};
use crate::text::Paragraph;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedToken {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedEntity {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedPhrase {
    pub start: usize,
    pub end: usize,
}

/// Annotator response. Offsets are code point indices into the request text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    #[serde(default)]
    pub tokens: Vec<AnnotatedToken>,
    #[serde(default)]
    pub entities: Vec<AnnotatedEntity>,
    #[serde(default)]
    pub noun_phrases: Vec<AnnotatedPhrase>,
}

/// Linguistic backend producing named entities and noun phrases.
pub trait Annotator: Send + Sync {
    fn annotate(&self, text: &str) -> Result<Annotation>;
}

/// Parses and sanity-checks an annotator response body.
pub fn parse_annotation(body: &[u8]) -> Result<Annotation> {
    let ann: Annotation =
        serde_json::from_slice(body).map_err(|e| Error::MalformedAnnotation(e.to_string()))?;
    let ranges = ann
        .tokens
        .iter()
        .map(|t| (t.start, t.end))
        .chain(ann.entities.iter().map(|e| (e.start, e.end)))
        .chain(ann.noun_phrases.iter().map(|p| (p.start, p.end)));
    for (start, end) in ranges {
        if start > end {
            return Err(Error::MalformedAnnotation(format!("inverted range {start}..{end}")));
        }
    }
    Ok(ann)
}

/// Candidate pivotal answers of one kind, snapped to the paragraph's tokens,
/// sorted by offset with exact duplicates removed.
///
/// Nested candidates (an entity inside a noun phrase) are both kept.
pub fn extract_candidates(
    paragraph: &Paragraph,
    kind: CandidateKind,
    annotator: &dyn Annotator,
) -> Result<Vec<AnswerSpan>> {
    if paragraph.is_empty() {
        return Err(Error::EmptyInput);
    }
    let ann = annotator.annotate(&paragraph.raw_text)?;
    let ranges: Vec<(usize, usize)> = match kind {
        CandidateKind::NamedEntity => ann.entities.iter().map(|e| (e.start, e.end)).collect(),
        CandidateKind::NounPhrase => ann.noun_phrases.iter().map(|p| (p.start, p.end)).collect(),
    };
    let len = paragraph.char_len();
    let mut spans = Vec::with_capacity(ranges.len());
    for (start, end) in ranges {
        if start > end || end > len {
            continue;
        }
        if let Some((first, last)) = covering_tokens(paragraph, start, end) {
            spans.push(AnswerSpan::from_tokens(paragraph, first, last, kind.into())?);
        }
    }
    spans.sort_by_key(|s| s.char_range);
    spans.dedup_by_key(|s| s.char_range);
    Ok(spans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    struct Canned(Annotation);

    impl Annotator for Canned {
        fn annotate(&self, _: &str) -> Result<Annotation> {
            Ok(self.0.clone())
        }
    }

    struct Down;

    impl Annotator for Down {
        fn annotate(&self, _: &str) -> Result<Annotation> {
            Err(Error::AnnotatorUnavailable("connection refused".into()))
        }
    }

    #[test]
    fn snaps_sorts_and_dedups() {
        let p = tokenize("Gandhi was born in India in 1869.").unwrap();
        let ann = Annotation {
            entities: vec![
                AnnotatedEntity { start: 28, end: 32, label: "DATE".into() },
                AnnotatedEntity { start: 0, end: 6, label: "PERSON".into() },
                AnnotatedEntity { start: 1, end: 4, label: "PERSON".into() },
                AnnotatedEntity { start: 6, end: 7, label: "X".into() },
                AnnotatedEntity { start: 30, end: 90, label: "X".into() },
            ],
            ..Default::default()
        };
        let spans = extract_candidates(&p, CandidateKind::NamedEntity, &Canned(ann)).unwrap();
        let surfaces: Vec<_> = spans.iter().map(|s| s.surface.as_str()).collect();
        assert_eq!(surfaces, ["Gandhi", "1869"]);
        assert!(spans.iter().all(|s| s.source == crate::SpanSource::NamedEntity));
    }

    #[test]
    fn backend_failure_propagates() {
        let p = tokenize("it rains").unwrap();
        assert!(matches!(
            extract_candidates(&p, CandidateKind::NounPhrase, &Down),
            Err(Error::AnnotatorUnavailable(_))
        ));
    }

    #[test]
    fn parse_rejects_garbage_and_inverted_ranges() {
        assert!(parse_annotation(b"not json").is_err());
        assert!(parse_annotation(br#"{"entities":[{"start":5,"end":2,"label":"X"}]}"#).is_err());
        let ok = parse_annotation(br#"{"tokens":[{"text":"a","start":0,"end":1}],"noun_phrases":[{"start":0,"end":1}]}"#)
            .unwrap();
        assert_eq!(ok.noun_phrases.len(), 1);
        assert!(ok.entities.is_empty());
    }
}

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";

/// `[CLS] question [SEP] paragraph [SEP]` with segment ids and the
/// paragraph token behind each packed position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedSequence {
    pub tokens: Vec<String>,
    pub segment_ids: Vec<u8>,
    pub paragraph_index: Vec<Option<usize>>,
}

impl PackedSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Packed positions holding paragraph tokens.
    pub fn paragraph_range(&self) -> Range<usize> {
        let start = self.segment_ids.iter().position(|&s| s == 1).unwrap_or(self.len());
        start..self.len().saturating_sub(1).max(start)
    }
}

/// Packs a question and a paragraph; the paragraph tail is dropped to fit
/// `max_len`, the question never is.
pub fn pack(question: &[String], paragraph: &[String], max_len: usize) -> Result<PackedSequence> {
    if question.is_empty() || paragraph.is_empty() {
        return Err(Error::Text(qgen_core::Error::EmptyInput));
    }
    let budget = max_len.saturating_sub(3);
    if question.len() > budget {
        return Err(Error::QuestionTooLong { len: question.len(), max_len });
    }
    let kept = paragraph.len().min(budget - question.len());
    let mut tokens = Vec::with_capacity(question.len() + kept + 3);
    tokens.push(CLS.to_owned());
    tokens.extend(question.iter().cloned());
    tokens.push(SEP.to_owned());
    tokens.extend(paragraph[..kept].iter().cloned());
    tokens.push(SEP.to_owned());
    let q_part = question.len() + 2;
    let segment_ids = (0..tokens.len()).map(|i| u8::from(i >= q_part)).collect();
    let paragraph_index = (0..tokens.len())
        .map(|i| (i >= q_part && i < q_part + kept).then(|| i - q_part))
        .collect();
    Ok(PackedSequence { tokens, segment_ids, paragraph_index })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn layout() {
        let p = pack(&toks("who ?"), &toks("Gandhi ."), 16).unwrap();
        assert_eq!(p.tokens, toks("[CLS] who ? [SEP] Gandhi . [SEP]"));
        assert_eq!(p.segment_ids, [0, 0, 0, 0, 1, 1, 1]);
        assert_eq!(p.paragraph_range(), 4..6);
        assert_eq!(p.paragraph_index[4..], [Some(0), Some(1), None]);
    }

    #[test]
    fn truncates_paragraph_tail() {
        let p = pack(&toks("who ?"), &toks("a b c d e"), 8).unwrap();
        assert_eq!(p.tokens, toks("[CLS] who ? [SEP] a b c [SEP]"));
        assert_eq!(p.tokens.iter().filter(|t| *t == SEP).count(), 2);
    }

    #[test]
    fn question_too_long() {
        assert!(matches!(
            pack(&toks("a b c"), &toks("x"), 5),
            Err(Error::QuestionTooLong { len: 3, max_len: 5 })
        ));
        assert!(pack(&[], &toks("x"), 5).is_err());
    }
}

//! Paragraph review, user edits and tokenization.
//!
//! All offsets in this module are Unicode code point (`char`) indices into
//! the raw text, never byte offsets.

mod edit;
mod review;
mod tokenize;

pub use edit::{apply_edits, TextEdit};
pub use review::{review_paragraph, FlagKind, ReviewFlag};
pub use tokenize::tokenize;

use serde::{Deserialize, Serialize};

/// A tokenized paragraph. Everything downstream is anchored to its offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub id: String,
    pub raw_text: String,
    pub tokens: Vec<String>,
    /// Per-token `(start, end)` code point range, end exclusive.
    pub token_char_offsets: Vec<(usize, usize)>,
}

impl Paragraph {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn char_len(&self) -> usize {
        self.raw_text.chars().count()
    }

    /// Substring of the raw text between two code point offsets.
    pub fn slice(&self, start: usize, end: usize) -> &str {
        slice_chars(&self.raw_text, start, end)
    }

    /// Rebuilds the raw text from the tokens, taking inter-token gaps from
    /// the original text.
    pub fn reconstruct(&self) -> String {
        let mut out = String::with_capacity(self.raw_text.len());
        let mut cursor = 0;
        for (tok, &(start, end)) in self.tokens.iter().zip(&self.token_char_offsets) {
            out.push_str(self.slice(cursor, start));
            out.push_str(tok);
            cursor = end;
        }
        out.push_str(self.slice(cursor, self.char_len()));
        out
    }
}

/// Byte index of the `char_idx`-th code point, or `text.len()` past the end.
pub(crate) fn byte_index(text: &str, char_idx: usize) -> usize {
    text.char_indices()
        .nth(char_idx)
        .map(|(b, _)| b)
        .unwrap_or(text.len())
}

pub(crate) fn slice_chars(text: &str, start: usize, end: usize) -> &str {
    let b0 = byte_index(text, start);
    let b1 = byte_index(text, end);
    &text[b0..b1.max(b0)]
}

/// Maps every byte offset that starts a char to its code point index.
pub(crate) fn byte_to_char_map(text: &str) -> Vec<usize> {
    let mut map = vec![0; text.len() + 1];
    let mut n = 0;
    for (b, c) in text.char_indices() {
        for slot in &mut map[b..b + c.len_utf8()] {
            *slot = n;
        }
        n += 1;
    }
    map[text.len()] = n;
    map
}

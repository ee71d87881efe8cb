use serde::{Deserialize, Serialize};

use super::byte_index;
use crate::{Error, Result};

/// Replace the code point range `start..end` with `replacement`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextEdit {
    pub start: usize,
    pub end: usize,
    pub replacement: String,
}

impl TextEdit {
    pub fn new(start: usize, end: usize, replacement: impl Into<String>) -> Self {
        Self { start, end, replacement: replacement.into() }
    }
}

/// Applies non-overlapping edits right to left so that every range refers to
/// the original text. Touching ranges (`a.end == b.start`) are allowed.
pub fn apply_edits(raw_text: &str, edits: &[TextEdit]) -> Result<String> {
    let len = raw_text.chars().count();
    let mut sorted: Vec<&TextEdit> = edits.iter().collect();
    sorted.sort_by_key(|e| (e.start, e.end));
    for e in &sorted {
        if e.start > e.end || e.end > len {
            return Err(Error::RangeOutOfBounds { start: e.start, end: e.end, len });
        }
    }
    for pair in sorted.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        // Two insertions at the same point have no defined order.
        if b.start < a.end || (a.start == a.end && b.start == b.end && a.start == b.start) {
            return Err(Error::OverlappingEdits(b.start));
        }
    }
    let mut out = raw_text.to_owned();
    for e in sorted.iter().rev() {
        let b0 = byte_index(&out, e.start);
        let b1 = byte_index(&out, e.end);
        out.replace_range(b0..b1, &e.replacement);
    }
    Ok(out)
}

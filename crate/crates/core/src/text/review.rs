use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{byte_to_char_map, slice_chars};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagKind {
    NonAscii,
    Url,
}

/// Content the user has to edit or remove before generation can proceed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewFlag {
    pub kind: FlagKind,
    pub char_range: (usize, usize),
    pub excerpt: String,
    pub message: String,
}

fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(?:https?://|www\.)\S+").expect("valid url regex"))
}

fn is_trailing_punct(c: char) -> bool {
    matches!(c, '.' | ',' | ';' | ':' | '!' | '?' | ')' | ']' | '}' | '"' | '\'')
}

/// Finds URLs as code point ranges, trailing sentence punctuation excluded.
fn url_ranges(text: &str) -> Vec<(usize, usize)> {
    let b2c = byte_to_char_map(text);
    url_regex()
        .find_iter(text)
        .map(|m| {
            let mut end_byte = m.end();
            let matched = m.as_str();
            let scheme = if matched.to_ascii_lowercase().starts_with("www.") {
                4
            } else {
                matched.find("://").map_or(0, |i| i + 3)
            };
            let mut open = matched.matches('(').count();
            let mut close = matched.matches(')').count();
            for (i, c) in matched.char_indices().rev() {
                if i < scheme || !is_trailing_punct(c) {
                    break;
                }
                // a closing paren that pairs with one inside the URL stays
                if c == ')' && close <= open {
                    break;
                }
                match c {
                    ')' => close -= 1,
                    '(' => open -= 1,
                    _ => {}
                }
                end_byte = m.start() + i;
            }
            (b2c[m.start()], b2c[end_byte])
        })
        .collect()
}

fn non_ascii_runs(text: &str) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut open: Option<usize> = None;
    let mut n = 0;
    for (i, c) in text.chars().enumerate() {
        match (c.is_ascii(), open) {
            (false, None) => open = Some(i),
            (true, Some(s)) => {
                runs.push((s, i));
                open = None;
            }
            _ => {}
        }
        n = i + 1;
    }
    if let Some(s) = open {
        runs.push((s, n));
    }
    runs
}

/// Flags every maximal non-ASCII run and every URL, sorted by start offset.
///
/// Flags never overlap: a non-ASCII run inside a URL is reported as part of
/// the URL flag only.
pub fn review_paragraph(raw_text: &str) -> Result<Vec<ReviewFlag>> {
    if raw_text.trim().is_empty() {
        return Err(Error::EmptyInput);
    }
    let urls = url_ranges(raw_text);
    let mut flags: Vec<ReviewFlag> = urls
        .iter()
        .map(|&(s, e)| ReviewFlag {
            kind: FlagKind::Url,
            char_range: (s, e),
            excerpt: slice_chars(raw_text, s, e).to_owned(),
            message: "URL found; remove it or replace it with plain text".into(),
        })
        .collect();
    for (s, e) in non_ascii_runs(raw_text) {
        if urls.iter().any(|&(us, ue)| s < ue && e > us) {
            continue;
        }
        flags.push(ReviewFlag {
            kind: FlagKind::NonAscii,
            char_range: (s, e),
            excerpt: slice_chars(raw_text, s, e).to_owned(),
            message: "non-ASCII characters found; edit or remove them".into(),
        });
    }
    flags.sort_by_key(|f| f.char_range);
    Ok(flags)
}

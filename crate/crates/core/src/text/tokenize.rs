use super::Paragraph;
use crate::{Error, Result};

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || (!c.is_ascii() && !c.is_alphanumeric() && !c.is_whitespace())
}

/// Rule-based tokenizer: split on whitespace, then peel leading and trailing
/// punctuation off each chunk as single-character tokens.
pub fn tokenize(raw_text: &str) -> Result<Paragraph> {
    if raw_text.trim().is_empty() {
        return Err(Error::EmptyInput);
    }
    let chars: Vec<char> = raw_text.chars().collect();
    let mut tokens = Vec::new();
    let mut offsets = Vec::new();
    let mut push = |s: usize, e: usize| {
        tokens.push(chars[s..e].iter().collect::<String>());
        offsets.push((s, e));
    };

    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let (mut lo, hi) = (start, i);
        while lo < hi && is_punct(chars[lo]) {
            push(lo, lo + 1);
            lo += 1;
        }
        let mut trailing = hi;
        while trailing > lo && is_punct(chars[trailing - 1]) {
            trailing -= 1;
        }
        if lo < trailing {
            push(lo, trailing);
        }
        while trailing < hi {
            push(trailing, trailing + 1);
            trailing += 1;
        }
    }

    Ok(Paragraph { id: paragraph_id(raw_text), raw_text: raw_text.to_owned(), tokens, token_char_offsets: offsets })
}

// FNV-1a; only needs to be stable within one build.
fn paragraph_id(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("p{h:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(text: &str) -> Vec<String> {
        tokenize(text).unwrap().tokens
    }

    #[test]
    fn splits_sentence_punctuation() {
        assert_eq!(toks("Gandhi was born."), ["Gandhi", "was", "born", "."]);
        assert_eq!(toks("1909, India"), ["1909", ",", "India"]);
    }

    #[test]
    fn keeps_inner_punctuation() {
        assert_eq!(toks("(don't) stop..."), ["(", "don't", ")", "stop", ".", ".", "."]);
        assert_eq!(toks("3.14"), ["3.14"]);
    }

    #[test]
    fn offsets_are_code_points() {
        let p = tokenize("é x").unwrap();
        assert_eq!(p.token_char_offsets, vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn empty_rejected() {
        assert_eq!(tokenize(" \n "), Err(Error::EmptyInput));
    }

    proptest! {
        #[test]
        fn round_trip_and_invariants(text in "[ -~\t\n]{1,80}") {
            prop_assume!(!text.trim().is_empty());
            let p = tokenize(&text).unwrap();
            prop_assert_eq!(p.reconstruct(), text.clone());
            let mut prev_end = 0;
            for (tok, &(s, e)) in p.tokens.iter().zip(&p.token_char_offsets) {
                prop_assert!(s < e && s >= prev_end);
                prop_assert_eq!(p.slice(s, e), tok.as_str());
                prop_assert!(p.slice(prev_end, s).chars().all(char::is_whitespace));
                prev_end = e;
            }
        }
    }
}

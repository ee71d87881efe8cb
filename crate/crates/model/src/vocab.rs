//! Fixed vocabulary and the per-example dynamic dictionary.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const BOS: usize = 2;
pub const EOS: usize = 3;
pub const SPECIALS: [&str; 4] = ["<pad>", "<unk>", "<s>", "</s>"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(tokens: Vec<String>) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { tokens, index }
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

impl Vocabulary {
    /// Reserved tokens followed by the most frequent tokens (ties broken
    /// lexicographically) up to `max_size` entries in total.
    pub fn build<'a, I, S>(sequences: I, max_size: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = &'a String>,
    {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for seq in sequences {
            for tok in seq {
                *counts.entry(tok.as_str()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> =
            counts.into_iter().filter(|(t, _)| !SPECIALS.contains(t)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let tokens = SPECIALS
            .iter()
            .map(|s| s.to_string())
            .chain(ranked.into_iter().map(|(t, _)| t.to_owned()))
            .take(max_size.max(SPECIALS.len()))
            .collect::<Vec<_>>();
        tokens.into()
    }

    /// Checks the reserved prefix, for vocabularies read from disk.
    pub fn from_tokens(tokens: Vec<String>) -> Option<Self> {
        let ok = tokens.len() >= SPECIALS.len() && tokens.iter().zip(SPECIALS).all(|(t, s)| t == s);
        let vocab: Self = tokens.into();
        (ok && vocab.index.len() == vocab.tokens.len()).then_some(vocab)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn index_or_unk(&self, token: &str) -> usize {
        self.get(token).unwrap_or(UNK)
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Extension of the fixed vocabulary with the source-only tokens of one
/// example. Dynamic indices start at `vocab.len()`; matching is
/// case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicDictionary {
    base: usize,
    tokens: Vec<String>,
    /// Extended index of every source position.
    source_indices: Vec<usize>,
}

impl DynamicDictionary {
    pub fn new(vocab: &Vocabulary, source: &[String]) -> Self {
        let base = vocab.len();
        let mut tokens: Vec<String> = Vec::new();
        let source_indices = source
            .iter()
            .map(|tok| match vocab.get(tok) {
                Some(i) => i,
                None => match tokens.iter().position(|t| t == tok) {
                    Some(p) => base + p,
                    None => {
                        tokens.push(tok.clone());
                        base + tokens.len() - 1
                    }
                },
            })
            .collect();
        Self { base, tokens, source_indices }
    }

    /// Size of the extended vocabulary.
    pub fn extended_len(&self) -> usize {
        self.base + self.tokens.len()
    }

    pub fn dynamic_tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    /// Extended index of a target token: fixed index, else dynamic index,
    /// else the unknown index.
    pub fn target_index(&self, vocab: &Vocabulary, token: &str) -> usize {
        vocab
            .get(token)
            .or_else(|| self.tokens.iter().position(|t| t == token).map(|p| self.base + p))
            .unwrap_or(UNK)
    }

    /// Fixed-vocabulary index to feed back as decoder input.
    pub fn input_index(&self, ext: usize) -> usize {
        if ext >= self.base {
            UNK
        } else {
            ext
        }
    }

    pub fn is_dynamic(&self, ext: usize) -> bool {
        ext >= self.base
    }

    pub fn resolve<'a>(&'a self, vocab: &'a Vocabulary, ext: usize) -> Option<&'a str> {
        if ext >= self.base {
            self.tokens.get(ext - self.base).map(String::as_str)
        } else {
            vocab.token(ext)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn build_orders_by_frequency_then_text() {
        let data = [s(&["b", "a", "b", "c"]), s(&["a", "b"])];
        let v = Vocabulary::build(data.iter(), 6);
        assert_eq!(v.tokens(), s(&["<pad>", "<unk>", "<s>", "</s>", "b", "a"]).as_slice());
        assert_eq!(v.index_or_unk("c"), UNK);
    }

    #[test]
    fn dynamic_indices_cover_exactly_source_oov() {
        let v = Vocabulary::build([s(&["born", "in"])].iter(), 10);
        let src = s(&["Gandhi", "born", "in", "Porbandar", "Gandhi"]);
        let d = DynamicDictionary::new(&v, &src);
        assert_eq!(d.dynamic_tokens(), s(&["Gandhi", "Porbandar"]).as_slice());
        let base = v.len();
        assert_eq!(d.source_indices(), [base, v.get("born").unwrap(), v.get("in").unwrap(), base + 1, base]);
        assert_eq!(d.extended_len(), base + 2);
        assert_eq!(d.target_index(&v, "Porbandar"), base + 1);
        assert_eq!(d.target_index(&v, "gandhi"), UNK);
        assert_eq!(d.input_index(base + 1), UNK);
        assert_eq!(d.resolve(&v, base), Some("Gandhi"));
        for &i in d.source_indices() {
            assert!(d.is_dynamic(i) == v.get(d.resolve(&v, i).unwrap()).is_none());
        }
    }

    #[test]
    fn from_tokens_requires_reserved_prefix() {
        assert!(Vocabulary::from_tokens(s(&["<pad>", "<unk>", "<s>", "</s>", "x"])).is_some());
        assert!(Vocabulary::from_tokens(s(&["x", "<unk>", "<s>", "</s>"])).is_none());
        assert!(Vocabulary::from_tokens(s(&["<pad>", "<unk>", "<s>", "</s>", "x", "x"])).is_none());
    }
}

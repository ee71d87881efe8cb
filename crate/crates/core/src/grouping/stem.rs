use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

pub fn stem_word(word: &str) -> String {
    stemmer().stem(&word.to_lowercase()).into_owned()
}

/// Facet key of an answer surface: lowercased per-word stems joined by
/// single spaces.
pub fn stem_key(surface: &str) -> String {
    surface.split_whitespace().map(stem_word).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inflections_share_a_stem() {
        assert_eq!(stem_key("switching"), "switch");
        assert_eq!(stem_key("switches"), "switch");
        assert_eq!(stem_key("Switched"), "switch");
    }

    #[test]
    fn multiword_keys() {
        assert_eq!(stem_key("running shoes"), "run shoe");
        assert_eq!(stem_key("  New   Delhi "), "new delhi");
    }

    #[test]
    fn distinct_answers_stay_distinct() {
        assert_ne!(stem_key("India"), stem_key("1869"));
        assert_eq!(stem_key("1869"), "1869");
    }
}

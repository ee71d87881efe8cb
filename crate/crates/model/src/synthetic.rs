//! Seeded toy datasets that are learnable by construction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qgen_core::BioTaggedInput;

use crate::filter::FilterExample;
use crate::qg::TrainExample;

const FILLER: [&str; 24] = [
    "the", "a", "of", "in", "and", "was", "to", "on", "city", "river", "near", "old", "north", "south", "by",
    "with", "from", "built", "large", "small", "town", "hill", "at", "for",
];

const SYLLABLES: [&str; 16] =
    ["ka", "lo", "mi", "ra", "te", "vu", "zen", "dor", "bel", "sha", "qui", "nor", "fa", "gri", "po", "wex"];

/// Capitalized pseudo-name from two or three syllables.
pub fn pseudo_name(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(2..=3);
    let mut name: String = (0..n).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect();
    name[..1].make_ascii_uppercase();
    name
}

/// Copy task: a paragraph of filler words and names with one name (or a
/// two-name span) tagged as the answer; the target question is
/// `what is <span> ?`. Names are drawn fresh, so nearly all of them fall
/// outside any small vocabulary and must be copied.
pub fn copy_task(count: usize, seed: u64) -> Vec<TrainExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(6..=10);
            let mut tokens: Vec<String> = (0..len)
                .map(|_| {
                    if rng.gen_bool(0.25) {
                        pseudo_name(&mut rng)
                    } else {
                        FILLER.choose(&mut rng).expect("non-empty").to_string()
                    }
                })
                .collect();
            let span_len = rng.gen_range(1..=2);
            let first = rng.gen_range(0..=len - span_len);
            let last = first + span_len - 1;
            for tok in &mut tokens[first..=last] {
                *tok = pseudo_name(&mut rng);
            }
            let mut target = vec!["what".to_string(), "is".to_string()];
            target.extend(tokens[first..=last].iter().cloned());
            target.push("?".to_string());
            TrainExample { source: BioTaggedInput::from_token_range(tokens, first, last).expect("span in range"), target }
        })
        .collect()
}

/// Answerability task: a question `where is the <key> ?` over a paragraph of
/// filler words; the question is answerable exactly when the key word
/// occurs in the paragraph, and the answer is the token after it.
pub fn answerability_task(count: usize, seed: u64) -> Vec<FilterExample> {
    const KEYS: [&str; 6] = ["castle", "bridge", "tower", "market", "temple", "harbor"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let key = *KEYS.choose(&mut rng).expect("non-empty");
            let len = rng.gen_range(6..=10);
            let mut paragraph: Vec<String> =
                (0..len).map(|_| FILLER.choose(&mut rng).expect("non-empty").to_string()).collect();
            // a different key as a distractor
            if rng.gen_bool(0.5) {
                let other = *KEYS.iter().filter(|k| **k != key).collect::<Vec<_>>().choose(&mut rng).expect("non-empty");
                let at = rng.gen_range(0..len);
                paragraph[at] = other.to_string();
            }
            let answerable = i % 2 == 0;
            let answer = answerable.then(|| {
                let at = rng.gen_range(0..len - 1);
                paragraph[at] = key.to_string();
                paragraph[at + 1] = pseudo_name(&mut rng);
                (at + 1, at + 1)
            });
            let question = ["where", "is", "the", key, "?"].map(String::from).to_vec();
            FilterExample { question, paragraph, answer }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn copy_task_shapes() {
        let data = copy_task(50, 3);
        assert_eq!(data, copy_task(50, 3));
        for ex in &data {
            let (first, last) = qgen_core::decode_bio(&ex.source).unwrap();
            assert_eq!(ex.target[2..ex.target.len() - 1], ex.source.tokens[first..=last]);
        }
    }

    #[test]
    fn answerability_is_key_determined() {
        for ex in answerability_task(100, 5) {
            let key = &ex.question[3];
            assert_eq!(ex.paragraph.contains(key), ex.answer.is_some());
            if let Some((i, _)) = ex.answer {
                assert_eq!(&ex.paragraph[i - 1], key);
            }
        }
    }
}

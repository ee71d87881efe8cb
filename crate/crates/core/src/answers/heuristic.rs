use super::annotator::{AnnotatedEntity, AnnotatedPhrase, AnnotatedToken, Annotation, Annotator};
use crate::text::tokenize;
use crate::Result;

/// Capitalized words that start sentences without naming anything.
const SENTENCE_STARTERS: &[&str] = &[
    "A", "About", "After", "Although", "An", "And", "As", "At", "Because", "Before", "But", "By",
    "During", "Each", "Every", "For", "From", "He", "Her", "Here", "His", "How", "However", "I",
    "If", "In", "It", "Its", "Many", "Most", "My", "No", "Not", "Of", "On", "One", "Or", "Our",
    "She", "Since", "So", "Some", "That", "The", "Their", "There", "These", "They", "This",
    "Those", "Thus", "To", "Under", "Unlike", "We", "What", "When", "Where", "Which", "While",
    "Who", "Why", "With", "You",
];

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "some", "any", "each", "every", "no",
    "my", "your", "his", "her", "its", "our", "their",
];

const FUNCTION_WORDS: &[&str] = &[
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them", "in", "on", "at",
    "by", "for", "from", "with", "about", "of", "to", "into", "over", "under", "after", "before",
    "during", "between", "through", "without", "within", "upon", "against", "and", "or", "but",
    "nor", "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "do",
    "does", "did", "will", "would", "can", "could", "shall", "should", "may", "might", "must",
    "who", "what", "when", "where", "why", "how", "which", "whom", "whose", "not", "also",
    "very", "then", "than", "there", "here", "as", "if", "so", "because", "while", "although",
    "became", "become", "made", "make", "said", "says", "known", "led", "won", "took", "born",
    "given", "taken", "seen", "written", "built", "began", "begun", "got", "went", "came",
];

const ADJECTIVES: &[&str] = &[
    "new", "old", "great", "large", "small", "big", "good", "bad", "first", "last", "long",
    "short", "high", "low", "young", "important", "famous", "many", "several", "early", "late",
    "major", "other", "same", "such", "own", "political", "national", "local", "public",
];

const ADJECTIVE_SUFFIXES: &[&str] = &["ous", "ful", "ive", "able", "ible", "ical", "less", "ish"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pos {
    Det,
    Adj,
    Num,
    Noun,
    Proper,
    Verb,
    Function,
    Punct,
}

/// Dependency-free fallback annotator: capitalization and gazetteer lookups
/// for entities, a lexicon-driven `DT? (JJ|CD)* NN+` chunker for noun
/// phrases.
#[derive(Debug, Clone, Default)]
pub struct HeuristicAnnotator {
    gazetteer: Vec<Vec<String>>,
}

impl HeuristicAnnotator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds known entity names (matched token-wise, case-sensitively).
    pub fn with_gazetteer<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for name in names {
            if let Ok(p) = tokenize(name.as_ref()) {
                self.gazetteer.push(p.tokens);
            }
        }
        self
    }
}

fn is_number(tok: &str) -> bool {
    tok.chars().next().is_some_and(|c| c.is_ascii_digit())
        && tok.chars().all(|c| c.is_ascii_digit() || c == ',' || c == '.')
}

fn is_capitalized(tok: &str) -> bool {
    tok.chars().next().is_some_and(char::is_uppercase)
}

fn is_sentence_end(tok: &str) -> bool {
    matches!(tok, "." | "!" | "?")
}

fn tag(tokens: &[String]) -> Vec<Pos> {
    let mut tags = Vec::with_capacity(tokens.len());
    let mut sentence_start = true;
    for tok in tokens {
        let lower = tok.to_lowercase();
        let pos = if tok.chars().all(|c| c.is_ascii_punctuation()) {
            Pos::Punct
        } else if is_number(tok) {
            Pos::Num
        } else if is_capitalized(tok) && !(sentence_start && SENTENCE_STARTERS.contains(&tok.as_str())) {
            Pos::Proper
        } else if DETERMINERS.contains(&lower.as_str()) {
            Pos::Det
        } else if FUNCTION_WORDS.contains(&lower.as_str()) {
            Pos::Function
        } else if ADJECTIVES.contains(&lower.as_str())
            || ADJECTIVE_SUFFIXES.iter().any(|s| lower.len() > s.len() + 2 && lower.ends_with(s))
        {
            Pos::Adj
        } else if lower.ends_with("ly") && lower.len() > 4 {
            Pos::Function
        } else if lower.ends_with("ed") && lower.len() > 4
            || lower.ends_with("ing") && lower.len() > 5 && !matches!(tags.last(), Some(Pos::Det | Pos::Adj))
        {
            Pos::Verb
        } else {
            Pos::Noun
        };
        sentence_start = is_sentence_end(tok);
        tags.push(pos);
    }
    tags
}

fn entity_ranges(tokens: &[String], tags: &[Pos], gazetteer: &[Vec<String>]) -> Vec<(usize, usize, &'static str)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        match tags[i] {
            Pos::Proper => {
                let start = i;
                while i + 1 < tokens.len() && tags[i + 1] == Pos::Proper {
                    i += 1;
                }
                out.push((start, i, "ENTITY"));
            }
            Pos::Num => {
                let label = match tokens[i].parse::<u32>() {
                    Ok(y) if tokens[i].len() == 4 && (1000..=2100).contains(&y) => "DATE",
                    _ => "NUMBER",
                };
                out.push((i, i, label));
            }
            _ => {}
        }
        i += 1;
    }
    for name in gazetteer.iter().filter(|n| !n.is_empty()) {
        for start in 0..tokens.len().saturating_sub(name.len() - 1) {
            if tokens[start..start + name.len()] == name[..] {
                out.push((start, start + name.len() - 1, "ENTITY"));
            }
        }
    }
    out
}

fn noun_phrase_ranges(tags: &[Pos]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        let start = i;
        let mut j = i;
        if tags[j] == Pos::Det {
            j += 1;
        }
        while j < tags.len() && matches!(tags[j], Pos::Adj | Pos::Num) {
            j += 1;
        }
        let head = j;
        while j < tags.len() && matches!(tags[j], Pos::Noun | Pos::Proper) {
            j += 1;
        }
        if j > head {
            out.push((start, j - 1));
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

impl Annotator for HeuristicAnnotator {
    fn annotate(&self, text: &str) -> Result<Annotation> {
        let p = tokenize(text)?;
        let tags = tag(&p.tokens);
        let offs = &p.token_char_offsets;
        Ok(Annotation {
            tokens: p
                .tokens
                .iter()
                .zip(offs)
                .map(|(t, &(start, end))| AnnotatedToken { text: t.clone(), start, end })
                .collect(),
            entities: entity_ranges(&p.tokens, &tags, &self.gazetteer)
                .into_iter()
                .map(|(f, l, label)| AnnotatedEntity { start: offs[f].0, end: offs[l].1, label: label.into() })
                .collect(),
            noun_phrases: noun_phrase_ranges(&tags)
                .into_iter()
                .map(|(f, l)| AnnotatedPhrase { start: offs[f].0, end: offs[l].1 })
                .collect(),
        })
    }
}

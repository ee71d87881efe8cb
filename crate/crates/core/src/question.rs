use serde::{Deserialize, Serialize};

use crate::answers::AnswerSpan;

/// One decoded question for a pivotal answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedQuestion {
    /// Surface tokens; copied source-only tokens are already resolved.
    pub tokens: Vec<String>,
    /// Sum of emitted-token log-probabilities (always `<= 0`).
    pub beam_score: f64,
    /// `[question_len][source_len]` decoder attention, one row per token.
    pub attention: Vec<Vec<f64>>,
    pub intra_confidence: f64,
    pub answer: AnswerSpan,
    /// Set when no hypothesis finished within the decode budget and this is
    /// the best partial one.
    #[serde(default)]
    pub truncated: bool,
}

impl GeneratedQuestion {
    pub fn text(&self) -> String {
        detokenize(&self.tokens)
    }
}

/// Joins tokens with spaces, attaching closing punctuation to the left.
pub fn detokenize(tokens: &[String]) -> String {
    let mut out = String::new();
    for tok in tokens {
        let attach = matches!(tok.as_str(), "?" | "." | "," | "!" | ";" | ":" | ")" | "'s");
        if !out.is_empty() && !attach && !out.ends_with('(') {
            out.push(' ');
        }
        out.push_str(tok);
    }
    out
}

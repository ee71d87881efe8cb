//! SQuAD-style JSON (v1.1 and v2.0 with `is_impossible`) and its conversion
//! into training examples.

use serde::{Deserialize, Serialize};

use qgen_core::{encode_bio, tokenize, validate_custom_span, BioTaggedInput, BioTag, Paragraph};

use crate::filter::FilterExample;
use crate::qg::TrainExample;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquadFile {
    #[serde(default)]
    pub version: Option<String>,
    pub data: Vec<SquadArticle>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquadArticle {
    #[serde(default)]
    pub title: String,
    pub paragraphs: Vec<SquadParagraph>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquadParagraph {
    pub context: String,
    pub qas: Vec<SquadQa>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquadQa {
    #[serde(default)]
    pub id: String,
    pub question: String,
    #[serde(default)]
    pub answers: Vec<SquadAnswer>,
    #[serde(default)]
    pub is_impossible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquadAnswer {
    pub text: String,
    /// Offset in code points into `context`.
    pub answer_start: usize,
}

pub fn parse_squad(bytes: &[u8]) -> Result<SquadFile> {
    Ok(serde_json::from_slice(bytes)?)
}

pub fn load_squad(path: &std::path::Path) -> Result<SquadFile> {
    parse_squad(&std::fs::read(path)?)
}

/// Resolves an answer to a token range, rejecting answers whose text does not
/// match the context at `answer_start`.
fn answer_tokens(p: &Paragraph, ans: &SquadAnswer) -> Result<(usize, usize)> {
    let len = ans.text.chars().count();
    let end = ans
        .answer_start
        .checked_add(len)
        .ok_or_else(|| Error::Dataset("answer offset overflow".into()))?;
    let found: String = p.raw_text.chars().skip(ans.answer_start).take(len).collect();
    if found != ans.text || end > p.char_len() {
        return Err(Error::Dataset(format!("answer {:?} not found at offset {}", ans.text, ans.answer_start)));
    }
    let span = validate_custom_span(p, (ans.answer_start, end))?;
    Ok(span.token_range)
}

/// Cuts `len` tokens to at most `max` around the inclusive token range,
/// returning the window start.
fn window_start(len: usize, first: usize, last: usize, max: usize) -> usize {
    if len <= max {
        return 0;
    }
    let span = last + 1 - first;
    if span >= max {
        return first;
    }
    let before = (max - span) / 2;
    first.saturating_sub(before).min(len - max)
}

fn window_tagged(tagged: BioTaggedInput, first: usize, last: usize, max: usize) -> BioTaggedInput {
    let start = window_start(tagged.len(), first, last, max);
    let end = (start + max).min(tagged.len());
    let mut tokens = tagged.tokens[start..end].to_vec();
    let mut tags = tagged.tags[start..end].to_vec();
    // an answer longer than the window keeps its leading B
    if tags.first() == Some(&BioTag::I) {
        tags[0] = BioTag::B;
    }
    tokens.truncate(max);
    tags.truncate(max);
    BioTaggedInput { tokens, tags }
}

/// Question-generation examples: one per answerable question, using its first
/// answer as the pivot. Sources longer than `max_source_len` are windowed
/// around the answer. Returns the examples and the number of skipped
/// questions (impossible, unanswered or misaligned).
pub fn qg_examples(file: &SquadFile, max_source_len: usize) -> (Vec<TrainExample>, usize) {
    let mut out = Vec::new();
    let mut skipped = 0;
    for para in file.data.iter().flat_map(|a| &a.paragraphs) {
        let Ok(p) = tokenize(&para.context) else {
            skipped += para.qas.len();
            continue;
        };
        for qa in &para.qas {
            let built = (|| -> Result<Option<TrainExample>> {
                let Some(ans) = qa.answers.first().filter(|_| !qa.is_impossible) else { return Ok(None) };
                let (first, last) = answer_tokens(&p, ans)?;
                let span = qgen_core::AnswerSpan::from_tokens(&p, first, last, qgen_core::SpanSource::Custom)?;
                let tagged = window_tagged(encode_bio(&p, &span)?, first, last, max_source_len);
                let target = tokenize(&qa.question)?.tokens;
                Ok(Some(TrainExample { source: tagged, target }))
            })();
            match built {
                Ok(Some(ex)) => out.push(ex),
                _ => skipped += 1,
            }
        }
    }
    (out, skipped)
}

/// Answerability examples with paragraph tokens windowed to
/// `max_paragraph_len` around the answer (or from the start when
/// impossible). Returns the examples and the number skipped.
pub fn filter_examples(file: &SquadFile, max_paragraph_len: usize) -> (Vec<FilterExample>, usize) {
    let mut out = Vec::new();
    let mut skipped = 0;
    for para in file.data.iter().flat_map(|a| &a.paragraphs) {
        let Ok(p) = tokenize(&para.context) else {
            skipped += para.qas.len();
            continue;
        };
        for qa in &para.qas {
            let built = (|| -> Result<FilterExample> {
                let question = tokenize(&qa.question)?.tokens;
                let answer = match qa.answers.first() {
                    Some(ans) if !qa.is_impossible => Some(answer_tokens(&p, ans)?),
                    None if !qa.is_impossible => return Err(Error::Dataset("answerable question without answer".into())),
                    _ => None,
                };
                let (first, last) = answer.unwrap_or((0, 0));
                let start = window_start(p.len(), first, last, max_paragraph_len);
                let end = (start + max_paragraph_len).min(p.len());
                let answer = match answer {
                    Some((f, l)) if l < end => Some((f - start, l - start)),
                    Some(_) => return Err(Error::Dataset("answer longer than the window".into())),
                    None => None,
                };
                Ok(FilterExample { question, paragraph: p.tokens[start..end].to_vec(), answer })
            })();
            match built {
                Ok(ex) => out.push(ex),
                Err(_) => skipped += 1,
            }
        }
    }
    (out, skipped)
}

use serde::{Deserialize, Serialize};

use super::AnswerSpan;
use crate::text::Paragraph;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BioTag {
    B,
    I,
    O,
}

impl BioTag {
    pub fn index(self) -> usize {
        match self {
            BioTag::B => 0,
            BioTag::I => 1,
            BioTag::O => 2,
        }
    }
}

/// Source tokens with the pivotal answer marked as one `B I*` block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BioTaggedInput {
    pub tokens: Vec<String>,
    pub tags: Vec<BioTag>,
}

impl BioTaggedInput {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tags `tokens[first..=last]` directly, for training data that has no
    /// [`Paragraph`].
    pub fn from_token_range(tokens: Vec<String>, first: usize, last: usize) -> Result<Self> {
        if first > last || last >= tokens.len() {
            return Err(Error::SpanMisaligned(format!(
                "token range ({first}, {last}) invalid for {} tokens",
                tokens.len()
            )));
        }
        let tags = (0..tokens.len())
            .map(|i| match i {
                i if i == first => BioTag::B,
                i if i > first && i <= last => BioTag::I,
                _ => BioTag::O,
            })
            .collect();
        Ok(Self { tokens, tags })
    }
}

pub fn encode_bio(paragraph: &Paragraph, span: &AnswerSpan) -> Result<BioTaggedInput> {
    span.check(paragraph)?;
    BioTaggedInput::from_token_range(paragraph.tokens.clone(), span.token_range.0, span.token_range.1)
}

/// Inverse of [`encode_bio`]: the inclusive token range of the `B I*` block.
pub fn decode_bio(tagged: &BioTaggedInput) -> Result<(usize, usize)> {
    if tagged.tags.len() != tagged.tokens.len() {
        return Err(Error::MalformedTags(format!(
            "{} tags for {} tokens",
            tagged.tags.len(),
            tagged.tokens.len()
        )));
    }
    let mut block: Option<(usize, usize)> = None;
    let mut prev = BioTag::O;
    for (i, &tag) in tagged.tags.iter().enumerate() {
        match tag {
            BioTag::B if block.is_some() => {
                return Err(Error::MalformedTags(format!("second B at {i}")));
            }
            BioTag::B => block = Some((i, i)),
            BioTag::I if prev == BioTag::O => {
                return Err(Error::MalformedTags(format!("I at {i} does not continue a B")));
            }
            BioTag::I => {
                if let Some(b) = block.as_mut() {
                    b.1 = i;
                }
            }
            BioTag::O => {}
        }
        prev = tag;
    }
    block.ok_or_else(|| Error::MalformedTags("no B tag".into()))
}

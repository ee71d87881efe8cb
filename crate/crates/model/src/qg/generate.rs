use rayon::prelude::*;

use qgen_core::{encode_bio, intra_confidence, AnswerSpan, GeneratedQuestion, Paragraph};

use super::beam::{beam_search, BeamConfig, StepModel};
use super::model::{DecoderState, EncodedParagraph, QgModel};
use crate::vocab::UNK;
use crate::Result;

/// A beam hypothesis with indices resolved to surface tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedQuestion {
    pub tokens: Vec<String>,
    pub indices: Vec<usize>,
    pub beam_score: f64,
    pub attention: Vec<Vec<f64>>,
    pub finished: bool,
}

struct Bound<'a> {
    model: &'a QgModel,
    encoded: &'a EncodedParagraph,
}

impl StepModel for Bound<'_> {
    type State = DecoderState;

    fn initial(&self) -> DecoderState {
        self.model.initial_state(self.encoded)
    }

    fn step(&self, state: &DecoderState, prev: usize) -> Result<(DecoderState, Vec<f64>, Vec<f64>)> {
        let out = self.model.decode_step(state, prev, self.encoded)?;
        Ok((out.state, out.distribution, out.attention))
    }
}

impl QgModel {
    pub fn beam_config(&self) -> BeamConfig {
        let mut cfg = BeamConfig::new(self.config.beam_width, self.config.max_decode_len);
        cfg.length_normalize = self.config.length_normalize;
        cfg
    }

    /// Beam search over an encoded paragraph. An emitted unknown token is
    /// replaced by the source token with the highest attention at that step.
    pub fn beam_search(&self, encoded: &EncodedParagraph, config: &BeamConfig) -> Result<Vec<DecodedQuestion>> {
        let hyps = beam_search(&Bound { model: self, encoded }, config)?;
        Ok(hyps
            .into_iter()
            .map(|h| {
                let tokens = h
                    .tokens
                    .iter()
                    .zip(&h.attention)
                    .map(|(&idx, attn)| {
                        if idx == UNK {
                            let best = attn
                                .iter()
                                .enumerate()
                                .max_by(|a, b| a.1.total_cmp(b.1))
                                .map_or(0, |(i, _)| i);
                            encoded.source.tokens[best].clone()
                        } else {
                            encoded.dictionary.resolve(&self.vocab, idx).unwrap_or("<unk>").to_owned()
                        }
                    })
                    .collect();
                DecodedQuestion {
                    tokens,
                    indices: h.tokens,
                    beam_score: h.score,
                    attention: h.attention,
                    finished: h.finished,
                }
            })
            .collect())
    }
}

/// Generates questions for every span independently (in parallel), in input
/// order.
pub fn generate_questions(
    model: &QgModel,
    paragraph: &Paragraph,
    spans: &[AnswerSpan],
) -> Result<Vec<(AnswerSpan, Vec<GeneratedQuestion>)>> {
    generate_questions_with(model, paragraph, spans, &model.beam_config())
}

/// [`generate_questions`] with explicit beam settings.
pub fn generate_questions_with(
    model: &QgModel,
    paragraph: &Paragraph,
    spans: &[AnswerSpan],
    beam: &BeamConfig,
) -> Result<Vec<(AnswerSpan, Vec<GeneratedQuestion>)>> {
    spans
        .par_iter()
        .map(|span| {
            let tagged = encode_bio(paragraph, span)?;
            let encoded = model.encode(&tagged)?;
            let questions = model
                .beam_search(&encoded, beam)?
                .into_iter()
                .map(|q| {
                    Ok(GeneratedQuestion {
                        intra_confidence: intra_confidence(q.beam_score)?,
                        tokens: q.tokens,
                        beam_score: q.beam_score,
                        attention: q.attention,
                        answer: span.clone(),
                        truncated: !q.finished,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((span.clone(), questions))
        })
        .collect()
}

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::calibrate::{calibrate_threshold, Calibration};
use super::encoder::{ContextEncoder, RecurrentContextEncoder};
use super::pack::{pack, PackedSequence};
use super::score::{is_answerable, score_hidden, FilterVerdict, SpanScores};
use crate::checkpoint::{Checkpoint, CheckpointKind};
use crate::config::FilterConfig;
use crate::nn::{clip_grad_norm, Adam, Grads, Optimizer, ParamId, Params, Tape};
use crate::vocab::Vocabulary;
use crate::{Error, Result};

/// A question with its paragraph; `answer` is an inclusive paragraph token
/// range, `None` when the question cannot be answered from the paragraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterExample {
    pub question: Vec<String>,
    pub paragraph: Vec<String>,
    pub answer: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FinetuneReport {
    /// Mean loss (start plus end cross-entropy, halved) per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Start and end vectors `S`, `E` over a pluggable contextual encoder.
#[derive(Debug, Clone)]
pub struct SpanScorer<E = RecurrentContextEncoder> {
    pub config: FilterConfig,
    pub encoder: E,
    pub params: Params,
    start: ParamId,
    end: ParamId,
    /// Threshold `V` on `s_null - s_best`.
    pub threshold: f64,
}

impl<E: ContextEncoder> SpanScorer<E> {
    /// Adds `S` and `E` to `params`, which must already hold the encoder's
    /// parameters.
    pub fn with_encoder(config: FilterConfig, mut params: Params, encoder: E) -> Result<Self> {
        config.validate()?;
        let h = encoder.hidden_size();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(7));
        let start = params.add_uniform("span.start", h, 1, config.param_init, &mut rng);
        let end = params.add_uniform("span.end", h, 1, config.param_init, &mut rng);
        Ok(Self { config, encoder, params, start, end, threshold: 0.0 })
    }

    pub fn start_vector(&self) -> &[f64] {
        &self.params.get(self.start).data
    }

    pub fn end_vector(&self) -> &[f64] {
        &self.params.get(self.end).data
    }

    pub fn pack(&self, question: &[String], paragraph: &[String]) -> Result<PackedSequence> {
        pack(question, paragraph, self.config.max_seq_len)
    }

    /// Contextual vectors for every packed position, without dropout.
    pub fn hidden(&self, packed: &PackedSequence) -> Result<Vec<Vec<f64>>> {
        let mut tape = Tape::new(&self.params);
        let vars = self.encoder.forward(&mut tape, packed, None)?;
        Ok(vars.iter().map(|&v| tape.value(v).data.clone()).collect())
    }

    pub fn score_packed(&self, packed: &PackedSequence) -> Result<SpanScores> {
        let hidden = self.hidden(packed)?;
        score_hidden(
            &hidden,
            self.start_vector(),
            self.end_vector(),
            packed.paragraph_range(),
            self.config.max_span_len,
        )
    }

    pub fn score(&self, question: &[String], paragraph: &[String]) -> Result<SpanScores> {
        self.score_packed(&self.pack(question, paragraph)?)
    }

    /// Scores and applies the stored threshold.
    pub fn verdict(&self, question: &[String], paragraph: &[String]) -> Result<FilterVerdict> {
        Ok(is_answerable(self.score(question, paragraph)?, self.threshold))
    }

    /// Packed `(start, end)` the example is trained towards; `(0, 0)` (the
    /// `[CLS]` position) when unanswerable or cut off by truncation.
    pub fn supervised_span(&self, packed: &PackedSequence, example: &FilterExample) -> (usize, usize) {
        let range = packed.paragraph_range();
        match example.answer {
            Some((f, l)) if f <= l && l < range.len() => (range.start + f, range.start + l),
            _ => (0, 0),
        }
    }

    pub fn loss_and_grads(&self, example: &FilterExample, dropout_seed: Option<u64>) -> Result<(f64, Grads)> {
        let packed = self.pack(&example.question, &example.paragraph)?;
        let (gold_start, gold_end) = self.supervised_span(&packed, example);
        let range = packed.paragraph_range();
        // candidates are [CLS] followed by the paragraph positions
        let target = |pos: usize| if pos == 0 { 0 } else { 1 + pos - range.start };

        let mut rng = dropout_seed.map(ChaCha8Rng::seed_from_u64);
        let mut tape = Tape::new(&self.params);
        let states = self.encoder.forward(&mut tape, &packed, rng.as_mut())?;
        let memory = tape.stack_rows(&states);
        let s = tape.param(self.start);
        let e = tape.param(self.end);
        let start_all = tape.matmul(memory, s);
        let end_all = tape.matmul(memory, e);
        let pick = |tape: &mut Tape, all| {
            let cls = tape.slice(all, 0, 1);
            let para = tape.slice(all, range.start, range.len());
            tape.concat(&[cls, para])
        };
        let start_logits = pick(&mut tape, start_all);
        let end_logits = pick(&mut tape, end_all);
        let ls = tape.cross_entropy(start_logits, target(gold_start));
        let le = tape.cross_entropy(end_logits, target(gold_end));
        let both = tape.add(ls, le);
        let loss = tape.scale_const(both, 0.5);
        let value = tape.value(loss).item();
        let mut grads = Grads::new();
        tape.backward(loss, &mut grads);
        Ok((value, grads))
    }

    /// Adam over shuffled minibatches with gradient clipping.
    pub fn finetune(&mut self, data: &[FilterExample]) -> Result<FinetuneReport> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let cfg = self.config.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xf11e);
        let mut optim = Adam::new(cfg.learning_rate);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut report = FinetuneReport::default();
        let mut step = 0u64;
        for epoch in 1..=cfg.epochs {
            order.shuffle(&mut rng);
            let mut total = 0.0;
            for chunk in order.chunks(cfg.batch_size) {
                let this = &*self;
                let (loss, mut grads) = chunk
                    .par_iter()
                    .map(|&i| {
                        let seed = (cfg.dropout > 0.0).then_some(cfg.seed ^ (step << 20) ^ i as u64);
                        this.loss_and_grads(&data[i], seed)
                    })
                    .try_reduce(|| (0.0, Grads::new()), |a, b| Ok((a.0 + b.0, a.1.merge(b.1))))?;
                if !loss.is_finite() {
                    return Err(Error::DivergedLoss { epoch });
                }
                grads.scale(1.0 / chunk.len() as f64);
                clip_grad_norm(&mut grads, cfg.max_grad_norm);
                optim.step(&mut self.params, &grads);
                total += loss;
                step += 1;
            }
            report.epoch_losses.push(total / data.len() as f64);
            log::info!("filter epoch {epoch}: loss {:.4}", total / data.len() as f64);
        }
        Ok(report)
    }

    /// `(s_null - s_best, answerable)` for each example.
    pub fn diffs(&self, data: &[FilterExample]) -> Result<Vec<(f64, bool)>> {
        data.par_iter()
            .map(|ex| Ok((self.score(&ex.question, &ex.paragraph)?.diff(), ex.answer.is_some())))
            .collect()
    }

    /// Calibrates and stores the threshold on a validation set.
    pub fn calibrate(&mut self, validation: &[FilterExample]) -> Result<Calibration> {
        let cal = calibrate_threshold(&self.diffs(validation)?)?;
        self.threshold = cal.threshold;
        Ok(cal)
    }

    /// Fraction of examples whose verdict matches their label.
    pub fn accuracy(&self, data: &[FilterExample]) -> Result<f64> {
        let diffs = self.diffs(data)?;
        Ok(super::threshold_accuracy(&diffs, self.threshold))
    }
}

impl SpanScorer<RecurrentContextEncoder> {
    pub fn new(config: FilterConfig, vocab: Vocabulary) -> Result<Self> {
        config.validate()?;
        let mut params = Params::new();
        let encoder = RecurrentContextEncoder::new(&config, vocab, &mut params);
        Self::with_encoder(config, params, encoder)
    }

    /// Builds the vocabulary from the examples, then a fresh model.
    pub fn for_examples(config: FilterConfig, data: &[FilterExample]) -> Result<Self> {
        let texts = data.iter().flat_map(|ex| [ex.question.as_slice(), ex.paragraph.as_slice()]);
        let vocab = RecurrentContextEncoder::build_vocab(texts, config.vocab_size);
        Self::new(config, vocab)
    }

    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        Checkpoint::from_params(
            CheckpointKind::AnswerabilityFilter,
            serde_json::to_value(&self.config)?,
            self.encoder.vocab.tokens().to_vec(),
            &self.params,
            serde_json::json!({ "threshold": crate::nonfinite::serialize(&self.threshold, serde_json::value::Serializer)? }),
        )
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        if ckpt.kind != CheckpointKind::AnswerabilityFilter {
            return Err(Error::Checkpoint(format!("expected an answerability filter, found {:?}", ckpt.kind)));
        }
        let config: FilterConfig = serde_json::from_value(ckpt.config.clone())?;
        let vocab = Vocabulary::from_tokens(ckpt.vocab.clone())
            .ok_or_else(|| Error::Checkpoint("vocabulary lacks the reserved tokens".into()))?;
        let mut model = Self::new(config, vocab)?;
        ckpt.load_into(&mut model.params)?;
        if let Some(v) = ckpt.meta.get("threshold") {
            model.threshold = crate::nonfinite::deserialize(v.clone())?;
        }
        Ok(model)
    }
}

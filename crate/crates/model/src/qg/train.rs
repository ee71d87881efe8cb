use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use qgen_core::BioTaggedInput;

use super::beam::BeamConfig;
use super::model::QgModel;
use crate::nn::{clip_grad_norm, Grads, Optimizer, Sgd};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainExample {
    pub source: BioTaggedInput,
    pub target: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Mean per-token training loss of each epoch.
    pub epoch_losses: Vec<f64>,
    /// Mean per-token validation loss of each epoch, when a validation set
    /// was given.
    pub validation_losses: Vec<f64>,
    /// Learning rate used during each epoch.
    pub learning_rates: Vec<f64>,
    /// Per-batch mean per-token loss, in order.
    pub step_losses: Vec<f64>,
}

fn batch_grads(model: &QgModel, batch: &[&TrainExample], seed: u64) -> Result<(f64, usize, Grads)> {
    batch
        .par_iter()
        .enumerate()
        .map(|(i, ex)| {
            let dropout = (model.config.dropout > 0.0).then_some(seed.wrapping_add(i as u64));
            model.loss_and_grads(&ex.source, &ex.target, dropout)
        })
        .try_reduce(
            || (0.0, 0, Grads::new()),
            |(la, ta, ga), (lb, tb, gb)| Ok((la + lb, ta + tb, ga.merge(gb))),
        )
}

/// Mean per-token negative log-likelihood without dropout.
pub fn evaluate_loss(model: &QgModel, data: &[TrainExample]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (loss, tokens) = data
        .par_iter()
        .map(|ex| model.loss_and_grads(&ex.source, &ex.target, None).map(|(l, t, _)| (l, t)))
        .try_reduce(|| (0.0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok(loss / tokens as f64)
}

/// Minibatch SGD with gradient clipping. The learning rate is multiplied by
/// `lr_decay` whenever the monitored loss (validation if given, otherwise
/// training) fails to improve, and after every epoch from `start_decay_at`.
pub fn train(model: &mut QgModel, data: &[TrainExample], validation: Option<&[TrainExample]>) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if validation.is_some_and(<[_]>::is_empty) {
        return Err(Error::EmptyDataset);
    }
    let cfg = model.config.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut optim = Sgd::new(cfg.learning_rate);
    let mut report = TrainReport::default();
    let mut best = f64::INFINITY;
    let mut step: u64 = 0;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        report.learning_rates.push(optim.learning_rate());
        let mut epoch_loss = 0.0;
        let mut epoch_tokens = 0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&TrainExample> = chunk.iter().map(|&i| &data[i]).collect();
            let (loss, tokens, mut grads) = batch_grads(model, &batch, cfg.seed.wrapping_mul(1_000_003) ^ step)?;
            if !loss.is_finite() {
                return Err(Error::DivergedLoss { epoch });
            }
            grads.scale(1.0 / batch.len() as f64);
            clip_grad_norm(&mut grads, cfg.max_grad_norm);
            optim.step(&mut model.params, &grads);
            report.step_losses.push(loss / tokens as f64);
            epoch_loss += loss;
            epoch_tokens += tokens;
            step += 1;
        }
        let train_loss = epoch_loss / epoch_tokens as f64;
        report.epoch_losses.push(train_loss);
        let monitored = match validation {
            Some(v) => {
                let l = evaluate_loss(model, v)?;
                if !l.is_finite() {
                    return Err(Error::DivergedLoss { epoch });
                }
                report.validation_losses.push(l);
                l
            }
            None => train_loss,
        };
        log::info!("epoch {epoch}: train {train_loss:.4} monitored {monitored:.4} lr {}", optim.learning_rate());
        let scheduled = cfg.start_decay_at.is_some_and(|s| epoch >= s);
        if scheduled || monitored >= best {
            optim.set_learning_rate(optim.learning_rate() * cfg.lr_decay);
        }
        best = best.min(monitored);
    }
    Ok(report)
}

/// Greedy free-running decoding scored position by position against the
/// reference; the denominator is the longer of the two sequences.
pub fn token_accuracy(model: &QgModel, data: &[TrainExample]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut greedy = BeamConfig::new(1, model.config.max_decode_len);
    greedy.length_normalize = false;
    let (hits, total) = data
        .par_iter()
        .map(|ex| {
            let encoded = model.encode(&ex.source)?;
            let best = model.beam_search(&encoded, &greedy)?.into_iter().next();
            let predicted = best.map(|q| q.tokens).unwrap_or_default();
            let hits = predicted.iter().zip(&ex.target).filter(|(a, b)| a == b).count();
            Ok::<_, Error>((hits, predicted.len().max(ex.target.len())))
        })
        .try_reduce(|| (0, 0), |a: (usize, usize), b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok(if total == 0 { 1.0 } else { hits as f64 / total as f64 })
}

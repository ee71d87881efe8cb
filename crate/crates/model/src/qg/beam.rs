use std::cmp::Ordering;

use crate::vocab::{BOS, EOS, PAD};
use crate::{Error, Result};

/// A decoder that can be stepped one token at a time.
pub trait StepModel {
    type State: Clone;

    fn initial(&self) -> Self::State;

    /// Returns the next state, a probability distribution over output
    /// indices, and the attention row used for it.
    fn step(&self, state: &Self::State, prev: usize) -> Result<(Self::State, Vec<f64>, Vec<f64>)>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamConfig {
    pub width: usize,
    /// Maximum number of decoding steps; the end token counts as a step.
    pub max_len: usize,
    pub bos: usize,
    pub eos: usize,
    /// Indices that may never be emitted.
    pub banned: Vec<usize>,
    pub length_normalize: bool,
}

impl BeamConfig {
    pub fn new(width: usize, max_len: usize) -> Self {
        Self { width, max_len, bos: BOS, eos: EOS, banned: vec![PAD, BOS], length_normalize: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    /// Emitted indices, end token excluded.
    pub tokens: Vec<usize>,
    /// Sum of log-probabilities of every emitted index, end token included.
    pub score: f64,
    /// One attention row per entry of `tokens`.
    pub attention: Vec<Vec<f64>>,
    /// `false` for a partial hypothesis returned because nothing finished.
    pub finished: bool,
}

impl Hypothesis {
    fn rank(&self, normalize: bool) -> f64 {
        if normalize {
            self.score / (self.tokens.len() + usize::from(self.finished)).max(1) as f64
        } else {
            self.score
        }
    }
}

struct Live<S> {
    hyp: Hypothesis,
    state: S,
    last: usize,
}

/// Beam search. Returns up to `width` finished hypotheses, best first. If no
/// hypothesis finishes within `max_len` steps, returns the best partial one
/// with `finished == false`.
pub fn beam_search<M: StepModel>(model: &M, config: &BeamConfig) -> Result<Vec<Hypothesis>> {
    if config.width == 0 || config.max_len == 0 {
        return Err(Error::InvalidConfig("beam width and max length must be positive".into()));
    }
    let norm = config.length_normalize;
    let mut live = vec![Live {
        hyp: Hypothesis { tokens: Vec::new(), score: 0.0, attention: Vec::new(), finished: false },
        state: model.initial(),
        last: config.bos,
    }];
    let mut finished: Vec<Hypothesis> = Vec::new();

    for _ in 0..config.max_len {
        let mut stepped = Vec::with_capacity(live.len());
        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        for (h, l) in live.iter().enumerate() {
            let (state, probs, attn) = model.step(&l.state, l.last)?;
            for (tok, &p) in probs.iter().enumerate() {
                if p > 0.0 && !config.banned.contains(&tok) {
                    candidates.push((l.hyp.score + p.ln(), h, tok));
                }
            }
            stepped.push((state, attn));
        }
        let rank = |&(score, h, _): &(f64, usize, usize)| {
            if norm {
                score / (live[h].hyp.tokens.len() + 1) as f64
            } else {
                score
            }
        };
        candidates.sort_by(|a, b| {
            rank(b).partial_cmp(&rank(a)).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
        });
        candidates.truncate(config.width);

        let mut next = Vec::with_capacity(candidates.len());
        for (score, h, tok) in candidates {
            let parent = &live[h];
            if tok == config.eos {
                finished.push(Hypothesis { score, finished: true, ..parent.hyp.clone() });
            } else {
                let mut hyp = parent.hyp.clone();
                hyp.tokens.push(tok);
                hyp.attention.push(stepped[h].1.clone());
                hyp.score = score;
                next.push(Live { hyp, state: stepped[h].0.clone(), last: tok });
            }
        }
        let best_live = next.iter().map(|l| l.hyp.score).fold(f64::NEG_INFINITY, f64::max);
        live = next;
        if live.is_empty() {
            break;
        }
        // Scores only decrease, so once `width` finished hypotheses beat every
        // live one nothing can change the result.
        if !norm && finished.len() >= config.width {
            let mut scores: Vec<f64> = finished.iter().map(|f| f.score).collect();
            scores.sort_by(|a, b| b.total_cmp(a));
            if scores[config.width - 1] >= best_live {
                break;
            }
        }
    }

    if finished.is_empty() {
        let best = live
            .into_iter()
            .map(|l| l.hyp)
            .max_by(|a, b| a.rank(norm).total_cmp(&b.rank(norm)))
            .ok_or_else(|| Error::InvalidConfig("no hypothesis could be extended".into()))?;
        return Ok(vec![best]);
    }
    finished.sort_by(|a, b| b.rank(norm).total_cmp(&a.rank(norm)));
    finished.truncate(config.width);
    Ok(finished)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fixed next-token tables indexed by (step, previous token).
    struct Table {
        probs: Vec<Vec<Vec<f64>>>,
    }

    const A: usize = 4;
    const B: usize = 5;

    impl StepModel for Table {
        type State = usize;

        fn initial(&self) -> usize {
            0
        }

        fn step(&self, step: &usize, prev: usize) -> Result<(usize, Vec<f64>, Vec<f64>)> {
            let row = prev.min(self.probs[*step].len() - 1);
            Ok((step + 1, self.probs[*step][row].clone(), vec![1.0]))
        }
    }

    fn dist(eos: f64, a: f64, b: f64) -> Vec<f64> {
        vec![0.0, 0.0, 0.0, eos, a, b]
    }

    #[test]
    fn wide_beam_beats_greedy_trap() {
        // Greedy takes `a` (0.6) and then ends with 0.5; `b` (0.4) ends with
        // certainty, and 0.4 > 0.6 * 0.5.
        let trap = Table {
            probs: vec![
                vec![dist(0.0, 0.6, 0.4)],
                vec![vec![0.0; 6], vec![0.0; 6], dist(1.0, 0.0, 0.0), dist(1.0, 0.0, 0.0), dist(0.5, 0.25, 0.25), dist(1.0, 0.0, 0.0)],
                vec![dist(1.0, 0.0, 0.0)],
            ],
        };
        let greedy = beam_search(&trap, &BeamConfig::new(1, 3)).unwrap();
        assert_eq!(greedy[0].tokens, [A]);
        assert!((greedy[0].score - (0.6f64 * 0.5).ln()).abs() < 1e-12);
        let wide = beam_search(&trap, &BeamConfig::new(4, 3)).unwrap();
        assert_eq!(wide[0].tokens, [B]);
        assert!(wide.windows(2).all(|w| w[0].score >= w[1].score));
        assert!(wide.iter().all(|h| h.attention.len() == h.tokens.len() && h.score <= 0.0));
    }

    #[test]
    fn unfinished_returns_best_partial() {
        let never_ends = Table { probs: vec![vec![dist(0.0, 0.7, 0.3)]; 3] };
        let out = beam_search(&never_ends, &BeamConfig::new(2, 3)).unwrap();
        assert_eq!(out.len(), 1);
        assert!(!out[0].finished);
        assert_eq!(out[0].tokens, [A, A, A]);
    }

    #[test]
    fn zero_width_is_rejected() {
        let t = Table { probs: vec![vec![dist(1.0, 0.0, 0.0)]] };
        assert!(beam_search(&t, &BeamConfig::new(0, 3)).is_err());
    }
}

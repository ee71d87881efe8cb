use crate::{Error, Result};

/// Logistic normalization `e^x / (1 + e^x)` of a beam score.
pub fn intra_confidence(beam_score: f64) -> Result<f64> {
    if !beam_score.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    Ok(if beam_score >= 0.0 {
        1.0 / (1.0 + (-beam_score).exp())
    } else {
        let e = beam_score.exp();
        e / (1.0 + e)
    })
}

/// Min-max normalizes each answer's best intra-question confidence over all
/// answers. When every value is equal, all answers get `1.0`.
pub fn inter_confidence(per_answer_max: &[f64]) -> Result<Vec<f64>> {
    if per_answer_max.is_empty() {
        return Err(Error::EmptyInput);
    }
    if per_answer_max.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let lo = per_answer_max.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = per_answer_max.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return Ok(vec![1.0; per_answer_max.len()]);
    }
    Ok(per_answer_max.iter().map(|&p| (p - lo) / (hi - lo)).collect())
}

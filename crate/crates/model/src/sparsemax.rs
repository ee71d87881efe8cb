//! Sparsemax: Euclidean projection of a score vector onto the probability
//! simplex.

use crate::{Error, Result};

/// Sort-threshold sparsemax. The support size `k` is the largest index (in
/// descending order) with `1 + k * z_(k) > sum_{i<=k} z_(i)`; the output is
/// `max(z - tau, 0)` with `tau = (sum_{i<=k} z_(i) - 1) / k`.
pub fn sparsemax(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::ShapeMismatch("sparsemax of an empty vector".into()));
    }
    if scores.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    Ok(sparsemax_unchecked(scores))
}

pub(crate) fn sparsemax_unchecked(scores: &[f64]) -> Vec<f64> {
    let tau = threshold(scores);
    scores.iter().map(|&z| (z - tau).max(0.0)).collect()
}

fn threshold(scores: &[f64]) -> f64 {
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut support_sum = sorted[0];
    let mut support = 1;
    for (i, &z) in sorted.iter().enumerate() {
        cumsum += z;
        let k = (i + 1) as f64;
        if 1.0 + k * z > cumsum {
            support = i + 1;
            support_sum = cumsum;
        }
    }
    (support_sum - 1.0) / support as f64
}

/// Vector-Jacobian product of sparsemax: on the support `S = {i : p_i > 0}`
/// the result is `g_i - mean_{j in S} g_j`, and zero elsewhere.
pub fn sparsemax_backward(output: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
    if output.len() != upstream.len() {
        return Err(Error::ShapeMismatch(format!(
            "sparsemax output has {} entries, gradient {}",
            output.len(),
            upstream.len()
        )));
    }
    Ok(sparsemax_backward_unchecked(output, upstream))
}

pub(crate) fn sparsemax_backward_unchecked(output: &[f64], upstream: &[f64]) -> Vec<f64> {
    let (sum, n) = output
        .iter()
        .zip(upstream)
        .filter(|(p, _)| **p > 0.0)
        .fold((0.0, 0usize), |(s, n), (_, g)| (s + g, n + 1));
    let mean = if n == 0 { 0.0 } else { sum / n as f64 };
    output
        .iter()
        .zip(upstream)
        .map(|(&p, &g)| if p > 0.0 { g - mean } else { 0.0 })
        .collect()
}

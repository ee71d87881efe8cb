use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    #[serde(with = "crate::nonfinite")]
    pub threshold: f64,
    /// Accuracy of the threshold on the calibration set.
    pub accuracy: f64,
    /// Only one label was present; `threshold` is `+inf`.
    pub degenerate: bool,
}

/// Accuracy of "answerable iff diff <= threshold" over `(diff, answerable)`.
pub fn threshold_accuracy(samples: &[(f64, bool)], threshold: f64) -> f64 {
    let correct = samples.iter().filter(|&&(d, ans)| (d <= threshold) == ans).count();
    correct as f64 / samples.len() as f64
}

/// Picks the threshold that maximizes accuracy over `(diff, answerable)`
/// pairs. Candidates are the midpoints between consecutive distinct diffs
/// plus one unit beyond either end; the lowest best candidate wins.
pub fn calibrate_threshold(samples: &[(f64, bool)]) -> Result<Calibration> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if samples.iter().any(|(d, _)| d.is_nan()) {
        return Err(Error::NonFiniteInput);
    }
    let answerable = samples.iter().filter(|s| s.1).count();
    if answerable == 0 || answerable == samples.len() {
        return Ok(Calibration {
            threshold: f64::INFINITY,
            accuracy: answerable as f64 / samples.len() as f64,
            degenerate: true,
        });
    }

    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Threshold below everything: all predicted unanswerable.
    let mut correct = samples.len() - answerable;
    let mut best = (correct, sorted[0].0 - 1.0);
    let mut i = 0;
    while i < sorted.len() {
        let value = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == value {
            if sorted[i].1 {
                correct += 1;
            } else {
                correct -= 1;
            }
            i += 1;
        }
        let threshold = match sorted.get(i) {
            Some(next) => midpoint(value, next.0),
            None => value + 1.0,
        };
        if correct > best.0 {
            best = (correct, threshold);
        }
    }
    Ok(Calibration { threshold: best.1, accuracy: best.0 as f64 / samples.len() as f64, degenerate: false })
}

fn midpoint(a: f64, b: f64) -> f64 {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => a + (b - a) / 2.0,
        (false, true) => b - 1.0,
        (true, false) => a + 1.0,
        (false, false) => 0.0,
    }
}

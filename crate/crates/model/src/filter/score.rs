use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Null and best-span scores of one packed sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanScores {
    pub s_null: f64,
    /// `-inf` when no paragraph position exists.
    #[serde(with = "crate::nonfinite")]
    pub s_best: f64,
    /// Packed `(i, j)` with `i <= j`.
    pub best_span: Option<(usize, usize)>,
}

impl SpanScores {
    pub fn diff(&self) -> f64 {
        self.s_null - self.s_best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub s_null: f64,
    #[serde(with = "crate::nonfinite")]
    pub s_best: f64,
    pub best_span: Option<(usize, usize)>,
    #[serde(with = "crate::nonfinite")]
    pub threshold: f64,
    pub answerable: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `s_null = S·C + E·C` with `C = hidden[0]`, and the best
/// `S·T_i + E·T_j` over paragraph positions `i <= j < i + max_span_len`.
/// Ties keep the earliest `(i, j)`.
pub fn score_hidden(
    hidden: &[Vec<f64>],
    start: &[f64],
    end: &[f64],
    paragraph: Range<usize>,
    max_span_len: usize,
) -> Result<SpanScores> {
    let h = start.len();
    if end.len() != h || hidden.is_empty() || hidden.iter().any(|t| t.len() != h) {
        return Err(Error::ShapeMismatch(format!("start/end width {h} against the hidden states")));
    }
    if paragraph.end > hidden.len() || paragraph.start == 0 && !paragraph.is_empty() {
        return Err(Error::ShapeMismatch(format!("paragraph range {paragraph:?} in {} positions", hidden.len())));
    }
    let c = &hidden[0];
    let s_null = dot(start, c) + dot(end, c);
    let starts: Vec<f64> = paragraph.clone().map(|i| dot(start, &hidden[i])).collect();
    let ends: Vec<f64> = paragraph.clone().map(|j| dot(end, &hidden[j])).collect();
    let mut best = (f64::NEG_INFINITY, None);
    for (a, &si) in starts.iter().enumerate() {
        for (b, &ej) in ends.iter().enumerate().skip(a).take(max_span_len) {
            let s = si + ej;
            if best.1.is_none() || s > best.0 {
                best = (s, Some((paragraph.start + a, paragraph.start + b)));
            }
        }
    }
    Ok(SpanScores { s_null, s_best: best.0, best_span: best.1 })
}

/// Answerable unless `s_null - s_best > threshold`.
pub fn is_answerable(scores: SpanScores, threshold: f64) -> FilterVerdict {
    FilterVerdict {
        s_null: scores.s_null,
        s_best: scores.s_best,
        best_span: scores.best_span,
        threshold,
        answerable: scores.diff().partial_cmp(&threshold) != Some(std::cmp::Ordering::Greater),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_example() {
        let hidden = vec![vec![1.0, 1.0], vec![2.0, 0.0], vec![0.0, 2.0]];
        let s = score_hidden(&hidden, &[1.0, 0.0], &[0.0, 1.0], 1..3, 30).unwrap();
        assert_eq!(s.s_null, 2.0);
        assert_eq!(s.s_best, 4.0);
        assert_eq!(s.best_span, Some((1, 2)));
        assert!(is_answerable(s, 0.0).answerable);
    }

    #[test]
    fn zero_vectors() {
        let hidden = vec![vec![0.3, -1.0], vec![2.0, 5.0]];
        let s = score_hidden(&hidden, &[0.0, 0.0], &[0.0, 0.0], 1..2, 30).unwrap();
        assert_eq!((s.s_null, s.s_best), (0.0, 0.0));
    }

    #[test]
    fn threshold_boundary() {
        let s = SpanScores { s_null: 5.0, s_best: 1.0, best_span: Some((1, 1)) };
        assert!(!is_answerable(s, 0.0).answerable);
        assert!(is_answerable(s, 4.0).answerable);
        let empty = SpanScores { s_null: 0.0, s_best: f64::NEG_INFINITY, best_span: None };
        assert!(!is_answerable(empty, 10.0).answerable);
        assert!(is_answerable(empty, f64::INFINITY).answerable);
    }

    #[test]
    fn span_cap() {
        let hidden = vec![vec![0.0, 0.0], vec![5.0, 0.0], vec![0.0, 0.0], vec![0.0, 5.0]];
        let s = score_hidden(&hidden, &[1.0, 0.0], &[0.0, 1.0], 1..4, 2).unwrap();
        assert_eq!((s.s_best, s.best_span), (5.0, Some((1, 1))));
        let s = score_hidden(&hidden, &[1.0, 0.0], &[0.0, 1.0], 1..4, 3).unwrap();
        assert_eq!((s.s_best, s.best_span), (10.0, Some((1, 3))));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(score_hidden(&[vec![1.0]], &[1.0, 2.0], &[1.0], 1..1, 3).is_err());
        assert!(score_hidden(&[vec![1.0]], &[1.0], &[1.0], 0..1, 3).is_err());
        assert!(score_hidden(&[vec![1.0]], &[1.0], &[1.0], 1..2, 3).is_err());
    }

    proptest! {
        #[test]
        fn raising_threshold_is_monotone(
            s_null in -10.0..10.0f64, s_best in -10.0..10.0f64, v in -10.0..10.0f64, dv in 0.0..5.0f64
        ) {
            let s = SpanScores { s_null, s_best, best_span: Some((1, 1)) };
            prop_assert!(!is_answerable(s, v).answerable || is_answerable(s, v + dv).answerable);
        }
    }
}

use std::collections::HashMap;

use super::{Grads, ParamId, Params};

pub trait Optimizer {
    fn step(&mut self, params: &mut Params, grads: &Grads);
    fn learning_rate(&self) -> f64;
    fn set_learning_rate(&mut self, lr: f64);
}

/// Rescales `grads` so their global L2 norm is at most `max_norm`. Returns
/// the norm before clipping.
pub fn clip_grad_norm(grads: &mut Grads, max_norm: f64) -> f64 {
    let norm = grads.norm();
    if norm > max_norm && norm > 0.0 {
        grads.scale(max_norm / norm);
    }
    norm
}

/// Applies `update(param_slice, grad_slice, offset)` to every touched entry.
fn for_each_grad(params: &mut Params, grads: &Grads, mut update: impl FnMut(ParamId, &mut [f64], &[f64], usize)) {
    for id in grads.touched().collect::<Vec<_>>() {
        if params.is_frozen(id) {
            continue;
        }
        let cols = params.get(id).cols;
        if let Some(g) = grads.dense(id) {
            update(id, &mut params.get_mut(id).data, g, 0);
        }
        if let Some(rows) = grads.rows(id) {
            for (&r, g) in rows {
                update(id, params.get_mut(id).row_mut(r), g, r * cols);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sgd {
    pub lr: f64,
}

impl Sgd {
    pub fn new(lr: f64) -> Self {
        Self { lr }
    }
}

impl Optimizer for Sgd {
    fn step(&mut self, params: &mut Params, grads: &Grads) {
        let lr = self.lr;
        for_each_grad(params, grads, |_, p, g, _| {
            for (p, g) in p.iter_mut().zip(g) {
                *p -= lr * g;
            }
        });
    }

    fn learning_rate(&self) -> f64 {
        self.lr
    }

    fn set_learning_rate(&mut self, lr: f64) {
        self.lr = lr;
    }
}

/// Adam with bias correction. Sparse embedding rows are updated lazily.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    moments: HashMap<ParamId, (Vec<f64>, Vec<f64>)>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, moments: HashMap::new() }
    }
}

impl Optimizer for Adam {
    fn step(&mut self, params: &mut Params, grads: &Grads) {
        self.t += 1;
        let (b1, b2, eps, lr) = (self.beta1, self.beta2, self.eps, self.lr);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let sizes: HashMap<ParamId, usize> = grads.touched().map(|id| (id, params.get(id).len())).collect();
        let moments = &mut self.moments;
        for_each_grad(params, grads, |id, p, g, offset| {
            let (m, v) = moments.entry(id).or_insert_with(|| (vec![0.0; sizes[&id]], vec![0.0; sizes[&id]]));
            for (i, (p, g)) in p.iter_mut().zip(g).enumerate() {
                let (m, v) = (&mut m[offset + i], &mut v[offset + i]);
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            }
        });
    }

    fn learning_rate(&self) -> f64 {
        self.lr
    }

    fn set_learning_rate(&mut self, lr: f64) {
        self.lr = lr;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Tape, Tensor};

    fn quadratic_step(opt: &mut dyn Optimizer, params: &mut Params) -> f64 {
        let id = params.ids().next().unwrap();
        let mut grads = Grads::new();
        let loss = {
            let mut t = Tape::new(params);
            let x = t.param(id);
            let sq = t.mul(x, x);
            t.backward(sq, &mut grads);
            t.value(sq).item()
        };
        opt.step(params, &grads);
        loss
    }

    #[test]
    fn optimizers_descend() {
        for opt in [&mut Sgd::new(0.1) as &mut dyn Optimizer, &mut Adam::new(0.1)] {
            let mut params = Params::new();
            params.add("x", Tensor::scalar(3.0));
            let first = quadratic_step(opt, &mut params);
            let mut last = first;
            for _ in 0..50 {
                last = quadratic_step(opt, &mut params);
            }
            assert!(last < first * 0.1, "{last} vs {first}");
        }
    }

    #[test]
    fn clipping_bounds_the_norm() {
        let mut params = Params::new();
        let id = params.add("x", Tensor::column(vec![0.0, 0.0]));
        let mut grads = Grads::new();
        grads.add_dense(id, &[30.0, 40.0]);
        assert_eq!(clip_grad_norm(&mut grads, 5.0), 50.0);
        assert!((grads.norm() - 5.0).abs() < 1e-12);
    }
}

use std::collections::HashMap;

use super::tensor::dot;
use super::{Grads, ParamId, Params, Tensor};
use crate::sparsemax::{sparsemax_backward_unchecked, sparsemax_unchecked};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Const,
    Param(ParamId),
    EmbedRow(ParamId, usize),
    Add(Var, Var),
    Mul(Var, Var),
    MatMul(Var, Var),
    TMatMul(Var, Var),
    Tanh(Var),
    Sigmoid(Var),
    OneMinus(Var),
    Concat(Vec<Var>),
    Slice(Var, usize),
    StackRows(Vec<Var>),
    Softmax(Var),
    Sparsemax(Var),
    ScaleBy(Var, Var),
    ScaleConst(Var, f64),
    Scatter(Var, Vec<usize>),
    Sum(Vec<Var>),
    Nll(Var, usize, f64),
    CrossEntropy(Var, usize),
}

#[derive(Debug)]
struct Node {
    value: Option<Tensor>,
    op: Op,
}

/// Records a computation over [`Params`] for reverse-mode differentiation.
///
/// Parameter nodes borrow their values from the parameter store; every other
/// node owns its value.
pub struct Tape<'p> {
    params: &'p Params,
    nodes: Vec<Node>,
    param_vars: HashMap<ParamId, Var>,
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p Params) -> Self {
        Self { params, nodes: Vec::with_capacity(256), param_vars: HashMap::new() }
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value: Some(value), op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        match (&self.nodes[v.0].op, &self.nodes[v.0].value) {
            (Op::Param(id), _) => self.params.get(*id),
            (_, Some(t)) => t,
            (_, None) => unreachable!("non-parameter node without a value"),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Const)
    }

    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(&v) = self.param_vars.get(&id) {
            return v;
        }
        self.nodes.push(Node { value: None, op: Op::Param(id) });
        let v = Var(self.nodes.len() - 1);
        self.param_vars.insert(id, v);
        v
    }

    /// Row `row` of an embedding matrix, as a column vector.
    pub fn embed(&mut self, table: ParamId, row: usize) -> Var {
        let t = self.params.get(table);
        let value = Tensor::column(t.row(row).to_vec());
        self.push(value, Op::EmbedRow(table, row))
    }

    fn binary(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Var {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.shape(), y.shape(), "elementwise op on mismatched shapes");
        let data = x.data.iter().zip(&y.data).map(|(p, q)| f(*p, *q)).collect();
        let t = Tensor::from_vec(x.rows, x.cols, data);
        self.push(t, op)
    }

    fn unary(&mut self, a: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let x = self.value(a);
        let t = Tensor::from_vec(x.rows, x.cols, x.data.iter().map(|v| f(*v)).collect());
        self.push(t, op)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |p, q| p + q, Op::Add(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |p, q| p * q, Op::Mul(a, b))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.cols, y.rows, "matmul shape mismatch");
        let mut out = Tensor::zeros(x.rows, y.cols);
        for i in 0..x.rows {
            let xr = x.row(i);
            let orow = &mut out.data[i * y.cols..(i + 1) * y.cols];
            for (k, &xv) in xr.iter().enumerate() {
                if xv == 0.0 {
                    continue;
                }
                for (o, yv) in orow.iter_mut().zip(y.row(k)) {
                    *o += xv * yv;
                }
            }
        }
        self.push(out, Op::MatMul(a, b))
    }

    /// `a^T b`.
    pub fn tmatmul(&mut self, a: Var, b: Var) -> Var {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.rows, y.rows, "tmatmul shape mismatch");
        let mut out = Tensor::zeros(x.cols, y.cols);
        for k in 0..x.rows {
            let (xr, yr) = (x.row(k), y.row(k));
            for (i, &xv) in xr.iter().enumerate() {
                if xv == 0.0 {
                    continue;
                }
                for (o, yv) in out.row_mut(i).iter_mut().zip(yr) {
                    *o += xv * yv;
                }
            }
        }
        self.push(out, Op::TMatMul(a, b))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(a, f64::tanh, Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.unary(a, stable_sigmoid, Op::Sigmoid(a))
    }

    pub fn one_minus(&mut self, a: Var) -> Var {
        self.unary(a, |v| 1.0 - v, Op::OneMinus(a))
    }

    pub fn scale_const(&mut self, a: Var, c: f64) -> Var {
        self.unary(a, |v| v * c, Op::ScaleConst(a, c))
    }

    /// Stacks column vectors vertically.
    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let mut data = Vec::new();
        for &p in parts {
            let t = self.value(p);
            assert_eq!(t.cols, 1, "concat expects column vectors");
            data.extend_from_slice(&t.data);
        }
        self.push(Tensor::column(data), Op::Concat(parts.to_vec()))
    }

    /// Rows `start..start + len` of a column vector.
    pub fn slice(&mut self, a: Var, start: usize, len: usize) -> Var {
        let t = Tensor::column(self.value(a).data[start..start + len].to_vec());
        self.push(t, Op::Slice(a, start))
    }

    /// Builds an `n x d` matrix whose rows are the given `d x 1` vectors.
    pub fn stack_rows(&mut self, rows: &[Var]) -> Var {
        let d = self.value(rows[0]).len();
        let mut data = Vec::with_capacity(d * rows.len());
        for &r in rows {
            let t = self.value(r);
            assert_eq!(t.len(), d, "stack_rows expects equal-length vectors");
            data.extend_from_slice(&t.data);
        }
        self.push(Tensor::from_vec(rows.len(), d, data), Op::StackRows(rows.to_vec()))
    }

    pub fn softmax(&mut self, a: Var) -> Var {
        let t = Tensor::column(softmax(&self.value(a).data));
        self.push(t, Op::Softmax(a))
    }

    pub fn sparsemax(&mut self, a: Var) -> Var {
        let t = Tensor::column(sparsemax_unchecked(&self.value(a).data));
        self.push(t, Op::Sparsemax(a))
    }

    /// Multiplies vector `v` by the `1 x 1` node `s`.
    pub fn scale_by(&mut self, v: Var, s: Var) -> Var {
        let k = self.value(s).item();
        let x = self.value(v);
        let t = Tensor::from_vec(x.rows, x.cols, x.data.iter().map(|e| e * k).collect());
        self.push(t, Op::ScaleBy(v, s))
    }

    /// `out[indices[i]] += v[i]` into a zero vector of length `size`.
    pub fn scatter(&mut self, v: Var, indices: &[usize], size: usize) -> Var {
        let x = self.value(v);
        assert_eq!(x.len(), indices.len(), "scatter index count mismatch");
        let mut data = vec![0.0; size];
        for (&i, &e) in indices.iter().zip(&x.data) {
            data[i] += e;
        }
        self.push(Tensor::column(data), Op::Scatter(v, indices.to_vec()))
    }

    /// Elementwise sum of equally shaped nodes.
    pub fn sum(&mut self, parts: &[Var]) -> Var {
        let first = self.value(parts[0]);
        let mut t = Tensor::zeros(first.rows, first.cols);
        for &p in parts {
            for (o, v) in t.data.iter_mut().zip(&self.value(p).data) {
                *o += v;
            }
        }
        self.push(t, Op::Sum(parts.to_vec()))
    }

    /// `-ln(p[index] + eps)` for a probability vector `p`.
    pub fn nll(&mut self, probs: Var, index: usize, eps: f64) -> Var {
        let p = self.value(probs).data[index];
        self.push(Tensor::scalar(-(p + eps).ln()), Op::Nll(probs, index, eps))
    }

    /// `-log_softmax(logits)[index]`.
    pub fn cross_entropy(&mut self, logits: Var, index: usize) -> Var {
        let z = &self.value(logits).data;
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        let loss = lse - z[index];
        self.push(Tensor::scalar(loss), Op::CrossEntropy(logits, index))
    }

    /// Backpropagates from scalar `loss`, accumulating into `grads`.
    pub fn backward(&self, loss: Var, grads: &mut Grads) {
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        adj[loss.0] = Some(vec![1.0; self.value(loss).len()]);

        fn acc(adj: &mut [Option<Vec<f64>>], v: Var, g: &[f64]) {
            match &mut adj[v.0] {
                Some(a) => a.iter_mut().zip(g).for_each(|(x, y)| *x += y),
                slot @ None => *slot = Some(g.to_vec()),
            }
        }

        for idx in (0..=loss.0).rev() {
            let Some(g) = adj[idx].take() else { continue };
            let node = &self.nodes[idx];
            let out = node.value.as_ref();
            match &node.op {
                Op::Const => {}
                Op::Param(id) => {
                    if !self.params.is_frozen(*id) {
                        grads.add_dense(*id, &g);
                    }
                }
                Op::EmbedRow(id, row) => {
                    if !self.params.is_frozen(*id) {
                        grads.add_row(*id, *row, &g);
                    }
                }
                Op::Add(a, b) => {
                    acc(&mut adj, *a, &g);
                    acc(&mut adj, *b, &g);
                }
                Op::Mul(a, b) => {
                    let (x, y) = (&self.value(*a).data, &self.value(*b).data);
                    let ga: Vec<f64> = g.iter().zip(y).map(|(g, y)| g * y).collect();
                    let gb: Vec<f64> = g.iter().zip(x).map(|(g, x)| g * x).collect();
                    acc(&mut adj, *a, &ga);
                    acc(&mut adj, *b, &gb);
                }
                Op::MatMul(a, b) => {
                    let (x, y) = (self.value(*a), self.value(*b));
                    let (m, k, n) = (x.rows, x.cols, y.cols);
                    // dA = G B^T, dB = A^T G
                    let mut ga = vec![0.0; m * k];
                    let mut gb = vec![0.0; k * n];
                    for i in 0..m {
                        let grow = &g[i * n..(i + 1) * n];
                        for kk in 0..k {
                            ga[i * k + kk] = dot(grow, y.row(kk));
                            let xv = x.data[i * k + kk];
                            if xv != 0.0 {
                                for (o, gv) in gb[kk * n..(kk + 1) * n].iter_mut().zip(grow) {
                                    *o += xv * gv;
                                }
                            }
                        }
                    }
                    acc(&mut adj, *a, &ga);
                    acc(&mut adj, *b, &gb);
                }
                Op::TMatMul(a, b) => {
                    let (x, y) = (self.value(*a), self.value(*b));
                    let (k, m, n) = (x.rows, x.cols, y.cols);
                    // out = X^T Y: dX = Y G^T, dY = X G
                    let mut ga = vec![0.0; k * m];
                    let mut gb = vec![0.0; k * n];
                    for kk in 0..k {
                        let (xr, yr) = (x.row(kk), y.row(kk));
                        for i in 0..m {
                            let grow = &g[i * n..(i + 1) * n];
                            ga[kk * m + i] = dot(yr, grow);
                            let xv = xr[i];
                            if xv != 0.0 {
                                for (o, gv) in gb[kk * n..(kk + 1) * n].iter_mut().zip(grow) {
                                    *o += xv * gv;
                                }
                            }
                        }
                    }
                    acc(&mut adj, *a, &ga);
                    acc(&mut adj, *b, &gb);
                }
                Op::Tanh(a) => {
                    let y = &out.expect("value").data;
                    let ga: Vec<f64> = g.iter().zip(y).map(|(g, y)| g * (1.0 - y * y)).collect();
                    acc(&mut adj, *a, &ga);
                }
                Op::Sigmoid(a) => {
                    let y = &out.expect("value").data;
                    let ga: Vec<f64> = g.iter().zip(y).map(|(g, y)| g * y * (1.0 - y)).collect();
                    acc(&mut adj, *a, &ga);
                }
                Op::OneMinus(a) => {
                    let ga: Vec<f64> = g.iter().map(|v| -v).collect();
                    acc(&mut adj, *a, &ga);
                }
                Op::ScaleConst(a, c) => {
                    let ga: Vec<f64> = g.iter().map(|v| v * c).collect();
                    acc(&mut adj, *a, &ga);
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let n = self.value(p).len();
                        acc(&mut adj, p, &g[offset..offset + n]);
                        offset += n;
                    }
                }
                Op::Slice(a, start) => {
                    let mut ga = vec![0.0; self.value(*a).len()];
                    ga[*start..*start + g.len()].copy_from_slice(&g);
                    acc(&mut adj, *a, &ga);
                }
                Op::StackRows(rows) => {
                    let d = g.len() / rows.len();
                    for (i, &r) in rows.iter().enumerate() {
                        acc(&mut adj, r, &g[i * d..(i + 1) * d]);
                    }
                }
                Op::Softmax(a) => {
                    let y = &out.expect("value").data;
                    let gy = dot(&g, y);
                    let ga: Vec<f64> = g.iter().zip(y).map(|(g, y)| y * (g - gy)).collect();
                    acc(&mut adj, *a, &ga);
                }
                Op::Sparsemax(a) => {
                    let ga = sparsemax_backward_unchecked(&out.expect("value").data, &g);
                    acc(&mut adj, *a, &ga);
                }
                Op::ScaleBy(v, s) => {
                    let k = self.value(*s).item();
                    let x = &self.value(*v).data;
                    let gv: Vec<f64> = g.iter().map(|e| e * k).collect();
                    acc(&mut adj, *v, &gv);
                    acc(&mut adj, *s, &[dot(&g, x)]);
                }
                Op::Scatter(v, indices) => {
                    let gv: Vec<f64> = indices.iter().map(|&i| g[i]).collect();
                    acc(&mut adj, *v, &gv);
                }
                Op::Sum(parts) => {
                    for &p in parts {
                        acc(&mut adj, p, &g);
                    }
                }
                Op::Nll(p, index, eps) => {
                    let pv = self.value(*p);
                    let mut gp = vec![0.0; pv.len()];
                    gp[*index] = -g[0] / (pv.data[*index] + eps);
                    acc(&mut adj, *p, &gp);
                }
                Op::CrossEntropy(z, index) => {
                    let mut sm = softmax(&self.value(*z).data);
                    sm[*index] -= 1.0;
                    sm.iter_mut().for_each(|v| *v *= g[0]);
                    acc(&mut adj, *z, &sm);
                }
            }
        }
    }
}

pub(crate) fn stable_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    /// Central-difference check of d(loss)/d(param) for every entry.
    fn grad_check(params: &mut Params, build: impl Fn(&mut Tape) -> Var) {
        let mut grads = Grads::new();
        {
            let mut tape = Tape::new(params);
            let loss = build(&mut tape);
            tape.backward(loss, &mut grads);
        }
        let h = 1e-6;
        for id in params.ids().collect::<Vec<_>>() {
            let shape = params.get(id).shape();
            let analytic = grads.to_dense(id, shape);
            for i in 0..params.get(id).len() {
                let orig = params.get(id).data[i];
                params.get_mut(id).data[i] = orig + h;
                let up = { let mut t = Tape::new(params); let l = build(&mut t); t.value(l).item() };
                params.get_mut(id).data[i] = orig - h;
                let down = { let mut t = Tape::new(params); let l = build(&mut t); t.value(l).item() };
                params.get_mut(id).data[i] = orig;
                let numeric = (up - down) / (2.0 * h);
                let a = analytic.data[i];
                let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
                assert!(err < 1e-4, "{}[{i}]: analytic {a} numeric {numeric}", params.name(id));
            }
        }
    }

    #[test]
    fn every_op_backpropagates() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut params = Params::new();
        let w = params.add_uniform("w", 4, 3, 0.8, &mut rng);
        let x = params.add_uniform("x", 3, 1, 0.8, &mut rng);
        let e = params.add_uniform("emb", 5, 4, 0.8, &mut rng);
        let s = params.add_uniform("s", 1, 1, 0.8, &mut rng);
        grad_check(&mut params, |t| {
            let w = t.param(w);
            let x = t.param(x);
            let s = t.param(s);
            let h = t.matmul(w, x);
            let row = t.embed(e, 2);
            let sum = t.add(h, row);
            let th = t.tanh(sum);
            let sg = t.sigmoid(h);
            let m = t.mul(th, sg);
            let cat = t.concat(&[m, x]);
            let sl = t.slice(cat, 1, 4);
            let mat = t.stack_rows(&[sl, th, row]);
            let scores = t.matmul(mat, sl);
            let att = t.sparsemax(scores);
            let ctx = t.tmatmul(mat, att);
            let sm = t.softmax(ctx);
            let gate = t.sigmoid(s);
            let inv = t.one_minus(gate);
            let a = t.scale_by(sm, gate);
            let b = t.scale_by(att, inv);
            let a = t.scatter(a, &[0, 1, 2, 3], 6);
            let b = t.scatter(b, &[4, 5, 4], 6);
            let dist = t.sum(&[a, b]);
            let l1 = t.nll(dist, 4, 1e-12);
            let l2 = t.cross_entropy(ctx, 1);
            let l = t.sum(&[l1, l2]);
            t.scale_const(l, 0.5)
        });
    }

    #[test]
    fn frozen_params_get_no_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut params = Params::new();
        let e = params.add_uniform("emb", 3, 2, 0.5, &mut rng);
        params.set_frozen(e, true);
        let mut tape = Tape::new(&params);
        let r = tape.embed(e, 1);
        let l = tape.cross_entropy(r, 0);
        let mut grads = Grads::new();
        tape.backward(l, &mut grads);
        assert_eq!(grads.touched().count(), 0);
    }

    #[test]
    fn params_are_shared_within_a_tape() {
        let params = {
            let mut p = Params::new();
            p.add("a", Tensor::scalar(2.0));
            p
        };
        let id = params.ids().next().unwrap();
        let mut tape = Tape::new(&params);
        let a = tape.param(id);
        assert_eq!(a, tape.param(id));
        let sq = tape.mul(a, a);
        let mut grads = Grads::new();
        tape.backward(sq, &mut grads);
        assert_eq!(grads.to_dense(id, (1, 1)).item(), 4.0);
    }
}

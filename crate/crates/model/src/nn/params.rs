use std::collections::HashMap;

use rand::Rng;

use super::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub(crate) usize);

/// Named parameter tensors of one model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    names: Vec<String>,
    values: Vec<Tensor>,
    frozen: Vec<bool>,
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> ParamId {
        self.names.push(name.into());
        self.values.push(value);
        self.frozen.push(false);
        ParamId(self.values.len() - 1)
    }

    /// Adds a parameter initialized uniformly in `[-scale, scale]`.
    pub fn add_uniform<R: Rng + ?Sized>(
        &mut self,
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        scale: f64,
        rng: &mut R,
    ) -> ParamId {
        let data = (0..rows * cols).map(|_| rng.gen_range(-scale..=scale)).collect();
        self.add(name, Tensor::from_vec(rows, cols, data))
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.values[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn set_frozen(&mut self, id: ParamId, frozen: bool) {
        self.frozen[id.0] = frozen;
    }

    pub fn is_frozen(&self, id: ParamId) -> bool {
        self.frozen[id.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.values)
    }

    pub fn total_size(&self) -> usize {
        self.values.iter().map(Tensor::len).sum()
    }
}

/// Accumulated gradients. Embedding lookups keep sparse per-row gradients so
/// large vocabularies do not allocate a dense gradient per example.
#[derive(Debug, Clone, Default)]
pub struct Grads {
    dense: HashMap<ParamId, Vec<f64>>,
    rows: HashMap<ParamId, HashMap<usize, Vec<f64>>>,
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

impl Grads {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_dense(&mut self, id: ParamId, grad: &[f64]) {
        match self.dense.get_mut(&id) {
            Some(g) => add_into(g, grad),
            None => {
                self.dense.insert(id, grad.to_vec());
            }
        }
    }

    pub fn add_row(&mut self, id: ParamId, row: usize, grad: &[f64]) {
        let rows = self.rows.entry(id).or_default();
        match rows.get_mut(&row) {
            Some(g) => add_into(g, grad),
            None => {
                rows.insert(row, grad.to_vec());
            }
        }
    }

    pub fn merge(mut self, other: Grads) -> Grads {
        for (id, g) in other.dense {
            self.add_dense(id, &g);
        }
        for (id, rows) in other.rows {
            for (r, g) in rows {
                self.add_row(id, r, &g);
            }
        }
        self
    }

    pub fn scale(&mut self, factor: f64) {
        let all = self.dense.values_mut().chain(self.rows.values_mut().flat_map(|r| r.values_mut()));
        for g in all {
            g.iter_mut().for_each(|v| *v *= factor);
        }
    }

    /// L2 norm over all entries (sparse rows counted once per row).
    pub fn norm(&self) -> f64 {
        let dense = self.dense.values().flatten();
        let sparse = self.rows.values().flat_map(|r| r.values().flatten());
        dense.chain(sparse).map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Dense view of the gradient of `id`, for tests and optimizers.
    pub fn to_dense(&self, id: ParamId, shape: (usize, usize)) -> Tensor {
        let mut t = Tensor::zeros(shape.0, shape.1);
        if let Some(g) = self.dense.get(&id) {
            add_into(&mut t.data, g);
        }
        if let Some(rows) = self.rows.get(&id) {
            for (&r, g) in rows {
                add_into(t.row_mut(r), g);
            }
        }
        t
    }

    pub fn touched(&self) -> impl Iterator<Item = ParamId> + '_ {
        let mut ids: Vec<ParamId> = self.dense.keys().chain(self.rows.keys()).copied().collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter()
    }

    pub(crate) fn dense(&self, id: ParamId) -> Option<&Vec<f64>> {
        self.dense.get(&id)
    }

    pub(crate) fn rows(&self, id: ParamId) -> Option<&HashMap<usize, Vec<f64>>> {
        self.rows.get(&id)
    }
}

use rand::Rng;

use super::{ParamId, Params, Tape, Tensor, Var};
use crate::config::CellKind;

#[derive(Debug, Clone, Copy)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: Option<ParamId>,
    pub inputs: usize,
    pub outputs: usize,
}

impl Linear {
    pub fn new<R: Rng + ?Sized>(
        params: &mut Params,
        name: &str,
        inputs: usize,
        outputs: usize,
        bias: bool,
        init: f64,
        rng: &mut R,
    ) -> Self {
        let weight = params.add_uniform(format!("{name}.weight"), outputs, inputs, init, rng);
        let bias = bias.then(|| params.add(format!("{name}.bias"), Tensor::zeros(outputs, 1)));
        Self { weight, bias, inputs, outputs }
    }

    pub fn forward(&self, tape: &mut Tape, x: Var) -> Var {
        let w = tape.param(self.weight);
        let y = tape.matmul(w, x);
        match self.bias {
            Some(b) => {
                let b = tape.param(b);
                tape.add(y, b)
            }
            None => y,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Embedding {
    pub table: ParamId,
    pub dim: usize,
}

impl Embedding {
    pub fn new<R: Rng + ?Sized>(params: &mut Params, name: &str, rows: usize, dim: usize, init: f64, rng: &mut R) -> Self {
        Self { table: params.add_uniform(format!("{name}.table"), rows, dim, init, rng), dim }
    }

    pub fn forward(&self, tape: &mut Tape, index: usize) -> Var {
        tape.embed(self.table, index)
    }
}

/// Hidden state of a recurrent cell; `cell` is only used by LSTMs.
#[derive(Debug, Clone, Copy)]
pub struct CellState {
    pub hidden: Var,
    pub cell: Option<Var>,
}

/// One recurrent cell. LSTM gates are packed `[input, forget, candidate,
/// output]`; GRU gates `[reset, update]` plus a separate candidate transform.
#[derive(Debug, Clone, Copy)]
pub struct RecurrentCell {
    pub kind: CellKind,
    pub hidden: usize,
    gates: Linear,
    candidate_in: Option<Linear>,
    candidate_hidden: Option<Linear>,
}

impl RecurrentCell {
    pub fn new<R: Rng + ?Sized>(
        params: &mut Params,
        name: &str,
        kind: CellKind,
        inputs: usize,
        hidden: usize,
        init: f64,
        rng: &mut R,
    ) -> Self {
        match kind {
            CellKind::Lstm => {
                let gates = Linear::new(params, &format!("{name}.gates"), inputs + hidden, 4 * hidden, true, init, rng);
                // forget gate bias starts at 1
                let bias = params.get_mut(gates.bias.expect("lstm gates have a bias"));
                bias.data[hidden..2 * hidden].iter_mut().for_each(|v| *v = 1.0);
                Self { kind, hidden, gates, candidate_in: None, candidate_hidden: None }
            }
            CellKind::Gru => Self {
                kind,
                hidden,
                gates: Linear::new(params, &format!("{name}.gates"), inputs + hidden, 2 * hidden, true, init, rng),
                candidate_in: Some(Linear::new(params, &format!("{name}.cand_in"), inputs, hidden, true, init, rng)),
                candidate_hidden: Some(Linear::new(params, &format!("{name}.cand_hidden"), hidden, hidden, true, init, rng)),
            },
        }
    }

    pub fn zero_state(&self, tape: &mut Tape) -> CellState {
        let hidden = tape.constant(Tensor::zeros(self.hidden, 1));
        let cell = matches!(self.kind, CellKind::Lstm).then(|| tape.constant(Tensor::zeros(self.hidden, 1)));
        CellState { hidden, cell }
    }

    pub fn step(&self, tape: &mut Tape, x: Var, state: CellState) -> CellState {
        let h = self.hidden;
        let xh = tape.concat(&[x, state.hidden]);
        let pre = self.gates.forward(tape, xh);
        match self.kind {
            CellKind::Lstm => {
                let i = tape.slice(pre, 0, h);
                let f = tape.slice(pre, h, h);
                let g = tape.slice(pre, 2 * h, h);
                let o = tape.slice(pre, 3 * h, h);
                let (i, f, g, o) = (tape.sigmoid(i), tape.sigmoid(f), tape.tanh(g), tape.sigmoid(o));
                let prev_c = state.cell.expect("lstm state has a cell");
                let keep = tape.mul(f, prev_c);
                let write = tape.mul(i, g);
                let c = tape.add(keep, write);
                let tc = tape.tanh(c);
                let hidden = tape.mul(o, tc);
                CellState { hidden, cell: Some(c) }
            }
            CellKind::Gru => {
                let r = tape.slice(pre, 0, h);
                let z = tape.slice(pre, h, h);
                let (r, z) = (tape.sigmoid(r), tape.sigmoid(z));
                let cx = self.candidate_in.expect("gru candidate").forward(tape, x);
                let ch = self.candidate_hidden.expect("gru candidate").forward(tape, state.hidden);
                let gated = tape.mul(r, ch);
                let pre_n = tape.add(cx, gated);
                let n = tape.tanh(pre_n);
                let zc = tape.one_minus(z);
                let a = tape.mul(zc, n);
                let b = tape.mul(z, state.hidden);
                CellState { hidden: tape.add(a, b), cell: None }
            }
        }
    }
}

/// Stacked bidirectional recurrent layers. Each direction has `hidden / 2`
/// units so concatenated outputs have `hidden` dimensions.
#[derive(Debug, Clone)]
pub struct BiRecurrent {
    layers: Vec<(RecurrentCell, RecurrentCell)>,
    pub hidden: usize,
}

/// Outputs of a [`BiRecurrent`] pass.
pub struct BiOutput {
    pub states: Vec<Var>,
    /// Final forward state concatenated with final backward state, top layer.
    pub last_hidden: Var,
    pub last_cell: Option<Var>,
}

impl BiRecurrent {
    #[allow(clippy::too_many_arguments)]
    pub fn new<R: Rng + ?Sized>(
        params: &mut Params,
        name: &str,
        kind: CellKind,
        inputs: usize,
        hidden: usize,
        layers: usize,
        init: f64,
        rng: &mut R,
    ) -> Self {
        let half = hidden / 2;
        let layers = (0..layers)
            .map(|l| {
                let input = if l == 0 { inputs } else { hidden };
                (
                    RecurrentCell::new(params, &format!("{name}.l{l}.fwd"), kind, input, half, init, rng),
                    RecurrentCell::new(params, &format!("{name}.l{l}.bwd"), kind, input, half, init, rng),
                )
            })
            .collect();
        Self { layers, hidden }
    }

    /// Runs all layers. `dropout` is called between stacked layers with the
    /// layer outputs and returns (possibly masked) replacements.
    pub fn forward(
        &self,
        tape: &mut Tape,
        inputs: &[Var],
        mut dropout: impl FnMut(&mut Tape, Var) -> Var,
    ) -> BiOutput {
        let mut xs = inputs.to_vec();
        let mut last_hidden = None;
        let mut last_cell = None;
        for (l, (fwd, bwd)) in self.layers.iter().enumerate() {
            if l > 0 {
                xs = xs.into_iter().map(|x| dropout(tape, x)).collect();
            }
            let mut f_states = Vec::with_capacity(xs.len());
            let mut s = fwd.zero_state(tape);
            for &x in &xs {
                s = fwd.step(tape, x, s);
                f_states.push(s);
            }
            let mut b_states = vec![None; xs.len()];
            let mut s = bwd.zero_state(tape);
            for (t, &x) in xs.iter().enumerate().rev() {
                s = bwd.step(tape, x, s);
                b_states[t] = Some(s);
            }
            let f_last = *f_states.last().expect("non-empty input");
            let b_first = b_states[0].expect("backward state");
            last_hidden = Some(tape.concat(&[f_last.hidden, b_first.hidden]));
            last_cell = match (f_last.cell, b_first.cell) {
                (Some(a), Some(b)) => Some(tape.concat(&[a, b])),
                _ => None,
            };
            xs = f_states
                .iter()
                .zip(&b_states)
                .map(|(f, b)| tape.concat(&[f.hidden, b.expect("backward state").hidden]))
                .collect();
        }
        BiOutput { states: xs, last_hidden: last_hidden.expect("at least one layer"), last_cell }
    }
}

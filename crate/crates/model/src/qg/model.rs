use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qgen_core::BioTaggedInput;

use crate::checkpoint::{Checkpoint, CheckpointKind};
use crate::config::{CellKind, QgConfig};
use crate::nn::{BiRecurrent, CellState, Embedding, Grads, Linear, Params, RecurrentCell, Tape, Tensor, Var};
use crate::vocab::{DynamicDictionary, Vocabulary, BOS, EOS};
use crate::{Error, Result};

/// Floor inside `ln` for target probabilities; sparsemax can put exactly zero
/// copy mass on a target.
pub(crate) const NLL_EPS: f64 = 1e-10;

#[derive(Debug, Clone)]
struct Layout {
    word: Embedding,
    tag: Embedding,
    shape: Option<Embedding>,
    encoder: BiRecurrent,
    bridge_hidden: Vec<Linear>,
    bridge_cell: Vec<Linear>,
    decoder: Vec<RecurrentCell>,
    attention: Linear,
    combine: Linear,
    output: Linear,
    gate: Linear,
}

impl Layout {
    fn build(config: &QgConfig, vocab_len: usize, params: &mut Params, rng: &mut ChaCha8Rng) -> Self {
        let init = config.param_init;
        let h = config.hidden_size;
        let emb = config.embedding_dim;
        let word = Embedding::new(params, "word", vocab_len, emb, init, rng);
        let tag = Embedding::new(params, "bio_tag", 3, config.tag_embedding_dim, init, rng);
        let shape = config
            .word_shape_features
            .then(|| Embedding::new(params, "word_shape", 4, config.shape_embedding_dim, init, rng));
        let enc_in = emb + config.tag_embedding_dim + shape.map_or(0, |s| s.dim);
        let encoder = BiRecurrent::new(params, "encoder", config.cell, enc_in, h, config.encoder_layers, init, rng);
        let mut bridge_hidden = Vec::new();
        let mut bridge_cell = Vec::new();
        let mut decoder = Vec::new();
        for l in 0..config.decoder_layers {
            bridge_hidden.push(Linear::new(params, &format!("bridge.l{l}.hidden"), h, h, true, init, rng));
            if config.cell == CellKind::Lstm {
                bridge_cell.push(Linear::new(params, &format!("bridge.l{l}.cell"), h, h, true, init, rng));
            }
            let input = if l == 0 { emb + h } else { h };
            decoder.push(RecurrentCell::new(params, &format!("decoder.l{l}"), config.cell, input, h, init, rng));
        }
        // Small attention weights keep the initial sparsemax support wide, so
        // copy targets start out with non-zero mass.
        let attention = Linear::new(params, "attention", h, h, false, init * 0.1, rng);
        let combine = Linear::new(params, "combine", 2 * h, h, true, init, rng);
        let output = Linear::new(params, "output", h, vocab_len, true, init, rng);
        let gate = Linear::new(params, "copy_gate", 2 * h + emb, 1, true, init, rng);
        Self { word, tag, shape, encoder, bridge_hidden, bridge_cell, decoder, attention, combine, output, gate }
    }
}

/// Encoder output for one BIO-tagged source sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedParagraph {
    /// One `hidden_size` vector per source token.
    pub token_states: Vec<Vec<f64>>,
    /// Fixed-length summary of the whole paragraph (final forward state
    /// joined with final backward state).
    pub summary: Vec<f64>,
    pub summary_cell: Option<Vec<f64>>,
    pub source: BioTaggedInput,
    pub dictionary: DynamicDictionary,
}

/// Recurrent decoder state between inference steps.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    layers: Vec<(Vec<f64>, Option<Vec<f64>>)>,
    feed: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    pub state: DecoderState,
    /// Probabilities over the fixed vocabulary followed by the dynamic
    /// dictionary.
    pub distribution: Vec<f64>,
    /// Sparsemax attention over source positions.
    pub attention: Vec<f64>,
}

pub(crate) struct EncGraph {
    pub memory: Var,
    pub summary: Var,
    pub summary_cell: Option<Var>,
    pub states: Vec<Var>,
}

#[derive(Clone)]
pub(crate) struct DecVars {
    pub layers: Vec<CellState>,
    pub feed: Var,
}

pub(crate) struct StepVars {
    pub state: DecVars,
    pub distribution: Var,
    pub attention: Var,
}

fn word_shape(token: &str) -> usize {
    let mut chars = token.chars();
    match chars.next() {
        Some(c) if c.is_ascii_digit() => 2,
        Some(c) if c.is_uppercase() => 1,
        Some(c) if c.is_lowercase() => 0,
        _ => 3,
    }
}

/// Inverted dropout as a closure over an optional RNG.
pub(crate) fn dropout_fn(rate: f64, rng: Option<&mut ChaCha8Rng>) -> impl FnMut(&mut Tape, Var) -> Var + '_ {
    let mut rng = rng;
    move |tape: &mut Tape, x: Var| match rng.as_deref_mut() {
        Some(r) if rate > 0.0 => {
            let n = tape.value(x).len();
            let keep = 1.0 - rate;
            let mask = (0..n).map(|_| if r.gen::<f64>() < keep { 1.0 / keep } else { 0.0 }).collect();
            let mask = tape.constant(Tensor::column(mask));
            tape.mul(x, mask)
        }
        _ => x,
    }
}

#[derive(Debug, Clone)]
pub struct QgModel {
    pub config: QgConfig,
    pub vocab: Vocabulary,
    pub params: Params,
    layout: Layout,
    identity: Vec<usize>,
}

impl QgModel {
    /// Randomly initialized model (uniform in `±param_init`, seeded by
    /// `config.seed`).
    pub fn new(config: QgConfig, vocab: Vocabulary) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut params = Params::new();
        let layout = Layout::build(&config, vocab.len(), &mut params, &mut rng);
        let identity = (0..vocab.len()).collect();
        Ok(Self { config, vocab, params, layout, identity })
    }

    /// Overwrites word vectors from a text embedding file and, if configured,
    /// freezes them. Returns how many vocabulary entries were found.
    pub fn load_pretrained_embeddings(&mut self, path: &std::path::Path) -> Result<usize> {
        let table = self.layout.word.table;
        let found = super::load_text_embeddings(path, &self.vocab, self.params.get_mut(table))?;
        if self.config.embeddings_frozen {
            self.params.set_frozen(table, true);
        }
        Ok(found)
    }

    pub fn embeddings_frozen(&self) -> bool {
        self.params.is_frozen(self.layout.word.table)
    }

    pub fn dictionary(&self, source: &[String]) -> DynamicDictionary {
        DynamicDictionary::new(&self.vocab, source)
    }

    pub(crate) fn encode_graph(
        &self,
        tape: &mut Tape,
        tagged: &BioTaggedInput,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<EncGraph> {
        let n = tagged.len();
        if n == 0 || tagged.tags.len() != n {
            return Err(Error::ShapeMismatch(format!("{} tokens with {} tags", n, tagged.tags.len())));
        }
        if n > self.config.max_source_len {
            return Err(Error::SequenceTooLong { len: n, max: self.config.max_source_len });
        }
        let l = &self.layout;
        let inputs: Vec<Var> = tagged
            .tokens
            .iter()
            .zip(&tagged.tags)
            .map(|(tok, tag)| {
                let w = l.word.forward(tape, self.vocab.index_or_unk(tok));
                let t = l.tag.forward(tape, tag.index());
                match l.shape {
                    Some(s) => {
                        let s = s.forward(tape, word_shape(tok));
                        tape.concat(&[w, t, s])
                    }
                    None => tape.concat(&[w, t]),
                }
            })
            .collect();
        let out = l.encoder.forward(tape, &inputs, dropout_fn(self.config.dropout, rng));
        let memory = tape.stack_rows(&out.states);
        Ok(EncGraph { memory, summary: out.last_hidden, summary_cell: out.last_cell, states: out.states })
    }

    pub(crate) fn init_graph(&self, tape: &mut Tape, summary: Var, summary_cell: Option<Var>) -> DecVars {
        let l = &self.layout;
        let layers = (0..self.config.decoder_layers)
            .map(|i| {
                let pre = l.bridge_hidden[i].forward(tape, summary);
                let hidden = tape.tanh(pre);
                let cell = l.bridge_cell.get(i).map(|b| {
                    let pre = b.forward(tape, summary_cell.unwrap_or(summary));
                    tape.tanh(pre)
                });
                CellState { hidden, cell }
            })
            .collect();
        let feed = tape.constant(Tensor::zeros(self.config.hidden_size, 1));
        DecVars { layers, feed }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn step_graph(
        &self,
        tape: &mut Tape,
        state: &DecVars,
        prev_input: usize,
        memory: Var,
        source_indices: &[usize],
        extended_len: usize,
        gate_override: Option<f64>,
    ) -> StepVars {
        let l = &self.layout;
        let emb = l.word.forward(tape, prev_input);
        let mut x = tape.concat(&[emb, state.feed]);
        let mut layers = Vec::with_capacity(state.layers.len());
        for (cell, &s) in l.decoder.iter().zip(&state.layers) {
            let next = cell.step(tape, x, s);
            x = next.hidden;
            layers.push(next);
        }
        let top = x;
        let query = l.attention.forward(tape, top);
        let scores = tape.matmul(memory, query);
        let attention = tape.sparsemax(scores);
        let context = tape.tmatmul(memory, attention);
        let joined = tape.concat(&[top, context]);
        let pre = l.combine.forward(tape, joined);
        let feed = tape.tanh(pre);
        let logits = l.output.forward(tape, feed);
        let generate = tape.softmax(logits);
        let gate = match gate_override {
            Some(g) => tape.constant(Tensor::scalar(g)),
            None => {
                let gate_in = tape.concat(&[top, context, emb]);
                let pre = l.gate.forward(tape, gate_in);
                tape.sigmoid(pre)
            }
        };
        let copy_weight = tape.one_minus(gate);
        let gen_part = tape.scale_by(generate, gate);
        let copy_part = tape.scale_by(attention, copy_weight);
        let gen_ext = tape.scatter(gen_part, &self.identity, extended_len);
        let copy_ext = tape.scatter(copy_part, source_indices, extended_len);
        let distribution = tape.sum(&[gen_ext, copy_ext]);
        StepVars { state: DecVars { layers, feed }, distribution, attention }
    }

    /// Runs the encoder in inference mode (no dropout).
    pub fn encode(&self, tagged: &BioTaggedInput) -> Result<EncodedParagraph> {
        let mut tape = Tape::new(&self.params);
        let g = self.encode_graph(&mut tape, tagged, None)?;
        Ok(EncodedParagraph {
            token_states: g.states.iter().map(|&v| tape.value(v).data.clone()).collect(),
            summary: tape.value(g.summary).data.clone(),
            summary_cell: g.summary_cell.map(|v| tape.value(v).data.clone()),
            source: tagged.clone(),
            dictionary: self.dictionary(&tagged.tokens),
        })
    }

    pub fn initial_state(&self, encoded: &EncodedParagraph) -> DecoderState {
        let mut tape = Tape::new(&self.params);
        let summary = tape.constant(Tensor::column(encoded.summary.clone()));
        let cell = encoded.summary_cell.clone().map(|c| tape.constant(Tensor::column(c)));
        let vars = self.init_graph(&mut tape, summary, cell);
        self.read_state(&tape, &vars)
    }

    fn read_state(&self, tape: &Tape, vars: &DecVars) -> DecoderState {
        DecoderState {
            layers: vars
                .layers
                .iter()
                .map(|s| (tape.value(s.hidden).data.clone(), s.cell.map(|c| tape.value(c).data.clone())))
                .collect(),
            feed: tape.value(vars.feed).data.clone(),
        }
    }

    pub fn decode_step(&self, state: &DecoderState, prev: usize, encoded: &EncodedParagraph) -> Result<StepOutput> {
        self.decode_step_with_gate(state, prev, encoded, None)
    }

    /// Like [`decode_step`](Self::decode_step), optionally pinning the
    /// generate/copy gate (`1.0` = generate only, `0.0` = copy only).
    pub fn decode_step_with_gate(
        &self,
        state: &DecoderState,
        prev: usize,
        encoded: &EncodedParagraph,
        gate: Option<f64>,
    ) -> Result<StepOutput> {
        let ext_len = encoded.dictionary.extended_len();
        if prev >= ext_len {
            return Err(Error::ShapeMismatch(format!("token {prev} outside extended vocabulary of {ext_len}")));
        }
        if state.layers.len() != self.config.decoder_layers || state.feed.len() != self.config.hidden_size {
            return Err(Error::ShapeMismatch("decoder state does not match the model".into()));
        }
        let h = self.config.hidden_size;
        let mut tape = Tape::new(&self.params);
        let rows: Vec<f64> = encoded.token_states.iter().flatten().copied().collect();
        let memory = tape.constant(Tensor::from_vec(encoded.token_states.len(), h, rows));
        let vars = DecVars {
            layers: state
                .layers
                .iter()
                .map(|(hid, cell)| CellState {
                    hidden: tape.constant(Tensor::column(hid.clone())),
                    cell: cell.as_ref().map(|c| tape.constant(Tensor::column(c.clone()))),
                })
                .collect(),
            feed: tape.constant(Tensor::column(state.feed.clone())),
        };
        let input = encoded.dictionary.input_index(prev);
        let out = self.step_graph(&mut tape, &vars, input, memory, encoded.dictionary.source_indices(), ext_len, gate);
        Ok(StepOutput {
            state: self.read_state(&tape, &out.state),
            distribution: tape.value(out.distribution).data.clone(),
            attention: tape.value(out.attention).data.clone(),
        })
    }

    /// Teacher-forced loss of one example (sum of per-token negative
    /// log-likelihoods, end token included) and its gradients.
    ///
    /// `dropout_seed` enables dropout; `None` evaluates deterministically.
    pub fn loss_and_grads(
        &self,
        source: &BioTaggedInput,
        target: &[String],
        dropout_seed: Option<u64>,
    ) -> Result<(f64, usize, Grads)> {
        let mut rng = dropout_seed.map(ChaCha8Rng::seed_from_u64);
        let mut tape = Tape::new(&self.params);
        let enc = self.encode_graph(&mut tape, source, rng.as_mut())?;
        let dict = self.dictionary(&source.tokens);
        let mut state = self.init_graph(&mut tape, enc.summary, enc.summary_cell);
        let mut prev = BOS;
        let mut losses = Vec::with_capacity(target.len() + 1);
        let gold = target.iter().map(|t| dict.target_index(&self.vocab, t)).chain(std::iter::once(EOS));
        for ext in gold {
            let step = self.step_graph(
                &mut tape,
                &state,
                dict.input_index(prev),
                enc.memory,
                dict.source_indices(),
                dict.extended_len(),
                None,
            );
            losses.push(tape.nll(step.distribution, ext, NLL_EPS));
            state = step.state;
            prev = ext;
        }
        let total = tape.sum(&losses);
        let loss = tape.value(total).item();
        let mut grads = Grads::new();
        tape.backward(total, &mut grads);
        Ok((loss, losses.len(), grads))
    }

    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        Checkpoint::from_params(
            CheckpointKind::QuestionGenerator,
            serde_json::to_value(&self.config)?,
            self.vocab.tokens().to_vec(),
            &self.params,
            serde_json::json!({ "embeddings_frozen": self.embeddings_frozen() }),
        )
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        if ckpt.kind != CheckpointKind::QuestionGenerator {
            return Err(Error::Checkpoint(format!("expected a question generator, found {:?}", ckpt.kind)));
        }
        let config: QgConfig = serde_json::from_value(ckpt.config.clone())?;
        let vocab = Vocabulary::from_tokens(ckpt.vocab.clone())
            .ok_or_else(|| Error::Checkpoint("vocabulary lacks the reserved tokens".into()))?;
        let mut model = Self::new(config, vocab)?;
        ckpt.load_into(&mut model.params)?;
        if ckpt.meta.get("embeddings_frozen").and_then(|v| v.as_bool()) == Some(true) {
            model.params.set_frozen(model.layout.word.table, true);
        }
        Ok(model)
    }
}

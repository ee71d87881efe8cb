use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::pack::PackedSequence;
use crate::config::FilterConfig;
use crate::nn::{BiRecurrent, Embedding, Params, Tape, Var};
use crate::qg::dropout_fn;
use crate::vocab::{Vocabulary, SPECIALS};
use crate::Result;

/// Produces one `hidden_size` vector per packed position on a tape whose
/// parameters the encoder registered in the shared [`Params`].
pub trait ContextEncoder: Send + Sync {
    fn hidden_size(&self) -> usize;

    fn forward(&self, tape: &mut Tape, packed: &PackedSequence, dropout: Option<&mut ChaCha8Rng>) -> Result<Vec<Var>>;
}

/// Word plus segment embeddings through a bidirectional recurrent stack.
/// Tokens are lowercased before lookup.
#[derive(Debug, Clone)]
pub struct RecurrentContextEncoder {
    pub vocab: Vocabulary,
    word: Embedding,
    segment: Embedding,
    rnn: BiRecurrent,
    dropout: f64,
}

impl RecurrentContextEncoder {
    pub fn new(config: &FilterConfig, vocab: Vocabulary, params: &mut Params) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let init = config.param_init;
        let word = Embedding::new(params, "encoder.word", vocab.len(), config.embedding_dim, init, &mut rng);
        let segment = Embedding::new(params, "encoder.segment", 2, config.embedding_dim, init, &mut rng);
        let rnn = BiRecurrent::new(
            params,
            "encoder.rnn",
            config.cell,
            config.embedding_dim,
            config.hidden_size,
            config.encoder_layers,
            init,
            &mut rng,
        );
        Self { vocab, word, segment, rnn, dropout: config.dropout }
    }

    /// Lowercased vocabulary over questions and paragraphs, with the packing
    /// markers always present.
    pub fn build_vocab<'a>(texts: impl IntoIterator<Item = &'a [String]>, max_size: usize) -> Vocabulary {
        let markers = [super::CLS.to_lowercase(), super::SEP.to_lowercase()];
        let mut counts = std::collections::HashMap::new();
        for tok in texts.into_iter().flatten() {
            *counts.entry(tok.to_lowercase()).or_insert(0usize) += 1;
        }
        let mut rest: Vec<(String, usize)> = counts
            .into_iter()
            .filter(|(t, _)| !markers.contains(t) && !SPECIALS.contains(&t.as_str()))
            .collect();
        rest.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let tokens: Vec<String> = SPECIALS
            .iter()
            .map(|s| s.to_string())
            .chain(markers)
            .chain(rest.into_iter().map(|(t, _)| t))
            .take(max_size.max(SPECIALS.len() + 2))
            .collect();
        tokens.into()
    }
}

impl ContextEncoder for RecurrentContextEncoder {
    fn hidden_size(&self) -> usize {
        self.rnn.hidden
    }

    fn forward(&self, tape: &mut Tape, packed: &PackedSequence, dropout: Option<&mut ChaCha8Rng>) -> Result<Vec<Var>> {
        let inputs: Vec<Var> = packed
            .tokens
            .iter()
            .zip(&packed.segment_ids)
            .map(|(tok, &seg)| {
                let w = self.word.forward(tape, self.vocab.index_or_unk(&tok.to_lowercase()));
                let s = self.segment.forward(tape, usize::from(seg));
                tape.add(w, s)
            })
            .collect();
        let mut drop = dropout_fn(self.dropout, dropout);
        let inputs: Vec<Var> = inputs.into_iter().map(|x| drop(tape, x)).collect();
        Ok(self.rnn.forward(tape, &inputs, &mut drop).states)
    }
}

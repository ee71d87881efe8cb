//! Model and training configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    #[default]
    Lstm,
    Gru,
}

/// Question generator configuration. Defaults:
/// 300-d frozen word embeddings, a 2-layer bidirectional encoder and a
/// 1-layer decoder with 600 hidden units, dropout 0.3, SGD from 0.1 with
/// annealing, 20 epochs of batch 64.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QgConfig {
    pub embedding_dim: usize,
    pub encoder_layers: usize,
    pub decoder_layers: usize,
    pub hidden_size: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub beam_width: usize,
    pub max_decode_len: usize,
    pub vocab_size: usize,
    pub embeddings_frozen: bool,
    /// Optional 300-d text embedding file (`word v1 v2 ...` per line).
    pub embeddings_path: Option<String>,
    pub cell: CellKind,
    pub tag_embedding_dim: usize,
    /// Adds a word-shape feature channel (lower/capitalized/numeric/other).
    pub word_shape_features: bool,
    pub shape_embedding_dim: usize,
    pub max_source_len: usize,
    /// Divide beam scores by hypothesis length when ranking.
    pub length_normalize: bool,
    /// Learning rate multiplier applied when the epoch loss stops improving
    /// and on every epoch from `start_decay_at` on.
    pub lr_decay: f64,
    pub start_decay_at: Option<usize>,
    pub max_grad_norm: f64,
    pub param_init: f64,
    pub seed: u64,
}

impl Default for QgConfig {
    fn default() -> Self {
        Self {
            embedding_dim: 300,
            encoder_layers: 2,
            decoder_layers: 1,
            hidden_size: 600,
            dropout: 0.3,
            learning_rate: 0.1,
            epochs: 20,
            batch_size: 64,
            beam_width: 5,
            max_decode_len: 30,
            vocab_size: 20_000,
            embeddings_frozen: true,
            embeddings_path: None,
            cell: CellKind::Lstm,
            tag_embedding_dim: 16,
            word_shape_features: false,
            shape_embedding_dim: 8,
            max_source_len: 400,
            length_normalize: false,
            lr_decay: 0.5,
            start_decay_at: None,
            max_grad_norm: 5.0,
            param_init: 0.1,
            seed: 1,
        }
    }
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidConfig(format!("{name} must be positive")));
    }
    Ok(())
}

fn positive_real(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn dropout_range(v: f64) -> Result<()> {
    if !(0.0..1.0).contains(&v) {
        return Err(Error::InvalidConfig(format!("dropout must be in [0, 1), got {v}")));
    }
    Ok(())
}

impl QgConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("embedding_dim", self.embedding_dim),
            ("encoder_layers", self.encoder_layers),
            ("decoder_layers", self.decoder_layers),
            ("hidden_size", self.hidden_size),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("beam_width", self.beam_width),
            ("max_decode_len", self.max_decode_len),
            ("vocab_size", self.vocab_size),
            ("tag_embedding_dim", self.tag_embedding_dim),
            ("shape_embedding_dim", self.shape_embedding_dim),
            ("max_source_len", self.max_source_len),
        ] {
            positive(name, v)?;
        }
        if !self.hidden_size.is_multiple_of(2) {
            return Err(Error::InvalidConfig("hidden_size must be even (split across directions)".into()));
        }
        if self.vocab_size <= crate::vocab::SPECIALS.len() {
            return Err(Error::InvalidConfig("vocab_size must exceed the reserved tokens".into()));
        }
        dropout_range(self.dropout)?;
        positive_real("learning_rate", self.learning_rate)?;
        positive_real("lr_decay", self.lr_decay)?;
        positive_real("max_grad_norm", self.max_grad_norm)?;
        positive_real("param_init", self.param_init)?;
        Ok(())
    }

    /// Reads a TOML or JSON file (by extension); missing keys take defaults.
    pub fn load(path: &Path) -> Result<Self> {
        load_config(path)
    }
}

/// Answerability filter configuration. Fine-tuning defaults: 3 epochs,
/// learning rate 3e-5, batch size 12.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    /// Width `H` of the contextual token vectors.
    pub hidden_size: usize,
    pub embedding_dim: usize,
    pub encoder_layers: usize,
    pub cell: CellKind,
    pub vocab_size: usize,
    pub max_seq_len: usize,
    pub max_span_len: usize,
    pub dropout: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_grad_norm: f64,
    pub param_init: f64,
    pub seed: u64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            hidden_size: 768,
            embedding_dim: 256,
            encoder_layers: 1,
            cell: CellKind::Lstm,
            vocab_size: 30_000,
            max_seq_len: 384,
            max_span_len: 30,
            dropout: 0.1,
            epochs: 3,
            learning_rate: 3e-5,
            batch_size: 12,
            max_grad_norm: 1.0,
            param_init: 0.1,
            seed: 1,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hidden_size", self.hidden_size),
            ("embedding_dim", self.embedding_dim),
            ("encoder_layers", self.encoder_layers),
            ("max_span_len", self.max_span_len),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
        ] {
            positive(name, v)?;
        }
        if !self.hidden_size.is_multiple_of(2) {
            return Err(Error::InvalidConfig("hidden_size must be even (split across directions)".into()));
        }
        if self.max_seq_len < 4 {
            return Err(Error::InvalidConfig("max_seq_len must leave room for [CLS], two [SEP] and a token".into()));
        }
        if self.vocab_size <= crate::vocab::SPECIALS.len() {
            return Err(Error::InvalidConfig("vocab_size must exceed the reserved tokens".into()));
        }
        dropout_range(self.dropout)?;
        positive_real("learning_rate", self.learning_rate)?;
        positive_real("max_grad_norm", self.max_grad_norm)?;
        positive_real("param_init", self.param_init)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        load_config(path)
    }
}

fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        Ok(serde_json::from_str(&text)?)
    } else {
        toml::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

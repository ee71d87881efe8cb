//! Self-describing binary checkpoint:
//!
//! ```text
//! magic "QGENCKPT" | u32 version | u8 kind | u32 header_len | header JSON | f64 LE payload
//! ```
//!
//! The header carries the model config, vocabulary, parameter names and
//! shapes (in payload order) and free-form metadata.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::nn::{Params, Tensor};
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"QGENCKPT";
pub const FORMAT_VERSION: u32 = 1;
const PREFIX_LEN: usize = 8 + 4 + 1 + 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckpointKind {
    QuestionGenerator,
    AnswerabilityFilter,
}

impl CheckpointKind {
    fn code(self) -> u8 {
        match self {
            Self::QuestionGenerator => 1,
            Self::AnswerabilityFilter => 2,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Self::QuestionGenerator),
            2 => Some(Self::AnswerabilityFilter),
            _ => None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ParamEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    config: serde_json::Value,
    vocab: Vec<String>,
    params: Vec<ParamEntry>,
    #[serde(default)]
    meta: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub kind: CheckpointKind,
    pub config: serde_json::Value,
    pub vocab: Vec<String>,
    pub params: Vec<(String, Tensor)>,
    pub meta: serde_json::Value,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

impl Checkpoint {
    pub fn from_params(
        kind: CheckpointKind,
        config: serde_json::Value,
        vocab: Vec<String>,
        params: &Params,
        meta: serde_json::Value,
    ) -> Result<Self> {
        let params = params.iter().map(|(n, t)| (n.to_owned(), t.clone())).collect();
        Ok(Self { kind, config, vocab, params, meta })
    }

    /// Copies stored tensors into `params` by name. Every parameter of the
    /// target must be present with the same shape.
    pub fn load_into(&self, params: &mut Params) -> Result<()> {
        if self.params.len() != params.len() {
            return Err(bad(format!("checkpoint has {} tensors, model expects {}", self.params.len(), params.len())));
        }
        let ids: Vec<_> = params.ids().collect();
        for id in ids {
            let name = params.name(id).to_owned();
            let stored = self
                .params
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, t)| t)
                .ok_or_else(|| bad(format!("missing tensor {name}")))?;
            let target = params.get_mut(id);
            if target.shape() != stored.shape() {
                return Err(bad(format!("tensor {name}: shape {:?} vs {:?}", stored.shape(), target.shape())));
            }
            target.data.clone_from(&stored.data);
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            params: self
                .params
                .iter()
                .map(|(name, t)| ParamEntry { name: name.clone(), rows: t.rows, cols: t.cols })
                .collect(),
            meta: self.meta.clone(),
        };
        let header = serde_json::to_vec(&header)?;
        let header_len = u32::try_from(header.len()).map_err(|_| bad("header too large"))?;
        let payload: usize = self.params.iter().map(|(_, t)| t.len()).sum();
        let mut out = Vec::with_capacity(PREFIX_LEN + header.len() + payload * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(self.kind.code());
        out.extend_from_slice(&header_len.to_le_bytes());
        out.extend_from_slice(&header);
        for (_, t) in &self.params {
            for v in &t.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < PREFIX_LEN {
            return Err(bad("truncated prefix"));
        }
        if &bytes[..8] != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(bad(format!("unsupported format version {version}")));
        }
        let kind = CheckpointKind::from_code(bytes[12]).ok_or_else(|| bad(format!("unknown kind {}", bytes[12])))?;
        let header_len = u32::from_le_bytes(bytes[13..17].try_into().expect("4 bytes")) as usize;
        let header_end = PREFIX_LEN.checked_add(header_len).filter(|&e| e <= bytes.len()).ok_or_else(|| bad("truncated header"))?;
        let header: Header = serde_json::from_slice(&bytes[PREFIX_LEN..header_end])?;

        let mut payload = &bytes[header_end..];
        let mut params = Vec::with_capacity(header.params.len());
        for entry in header.params {
            let n = entry.rows.checked_mul(entry.cols).ok_or_else(|| bad("tensor size overflow"))?;
            let nbytes = n.checked_mul(8).filter(|&b| b <= payload.len()).ok_or_else(|| bad("truncated payload"))?;
            let (chunk, rest) = payload.split_at(nbytes);
            payload = rest;
            let data: Vec<f64> = chunk.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
            if data.iter().any(|v| !v.is_finite()) {
                return Err(bad(format!("tensor {} holds non-finite values", entry.name)));
            }
            params.push((entry.name, Tensor::from_vec(entry.rows, entry.cols, data)));
        }
        if !payload.is_empty() {
            return Err(bad(format!("{} trailing bytes", payload.len())));
        }
        Ok(Self { kind, config: header.config, vocab: header.vocab, params, meta: header.meta })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

//! Binary checkpoint: magic, version, a JSON header echoing the config and
//! vocabulary, then every parameter array as little-endian `f32`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::array::Array;
use super::config::ModelConfig;
use super::model::Model;
use super::params::ModelParams;
use super::vocab::Vocab;
use super::ModelError;

const MAGIC: &[u8; 8] = b"TABRANK\x01";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    alpha: f64,
    words: Vec<String>,
    chars: Vec<char>,
    arrays: Vec<ArrayInfo>,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct ArrayInfo {
    name: String,
    rows: usize,
    cols: usize,
}

fn corrupt(path: &Path, message: impl Into<String>) -> ModelError {
    ModelError::Checkpoint {
        path: path.display().to_string(),
        message: message.into(),
    }
}

impl Model {
    pub fn to_checkpoint_bytes(&self) -> Vec<u8> {
        let named = self.params.named();
        let header = Header {
            config: self.params.config.clone(),
            alpha: self.params.alpha.data()[0],
            words: self.vocab.words().to_vec(),
            chars: self.vocab.chars().to_vec(),
            arrays: named
                .iter()
                .map(|(name, a)| ArrayInfo {
                    name: name.clone(),
                    rows: a.rows(),
                    cols: a.cols(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header).expect("checkpoint header serializes");
        let mut out = Vec::with_capacity(16 + json.len() + 4 * self.params.parameter_count());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for (_, a) in named {
            for &x in a.data() {
                out.extend_from_slice(&(x as f32).to_le_bytes());
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let io = |e| ModelError::Io {
            path: path.display().to_string(),
            source: e,
        };
        let mut f = fs::File::create(path).map_err(io)?;
        f.write_all(&self.to_checkpoint_bytes()).map_err(io)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model, ModelError> {
        let bytes = fs::read(path).map_err(|e| ModelError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Model::from_checkpoint_bytes(&bytes, path)
    }

    /// Loads a checkpoint and rejects it unless its config equals `expected`.
    pub fn load_expecting(path: &Path, expected: &ModelConfig) -> Result<Model, ModelError> {
        let model = Model::load(path)?;
        if model.config() != expected {
            return Err(ModelError::ConfigMismatch(format!(
                "{} was trained with {:?}, expected {:?}",
                path.display(),
                model.config(),
                expected
            )));
        }
        Ok(model)
    }

    fn from_checkpoint_bytes(bytes: &[u8], path: &Path) -> Result<Model, ModelError> {
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(corrupt(path, "not a tabrank checkpoint"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != VERSION {
            return Err(corrupt(path, format!("unsupported checkpoint version {version}")));
        }
        let hlen = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let body = bytes.get(16..16 + hlen).ok_or_else(|| corrupt(path, "truncated header"))?;
        let header: Header =
            serde_json::from_slice(body).map_err(|e| corrupt(path, format!("bad header: {e}")))?;
        header.config.validate()?;
        let vocab = Vocab::from_entries(header.words, header.chars);
        let mut params = ModelParams::zeros(&header.config, vocab.word_count(), vocab.char_count());
        let mut offset = 16 + hlen;
        let expected: Vec<ArrayInfo> = params
            .named()
            .iter()
            .map(|(name, a)| ArrayInfo {
                name: name.clone(),
                rows: a.rows(),
                cols: a.cols(),
            })
            .collect();
        if expected != header.arrays {
            return Err(corrupt(path, "array table does not match the echoed config"));
        }
        for (_, a) in params.named_mut() {
            let n = a.len() * 4;
            let chunk = bytes.get(offset..offset + n).ok_or_else(|| corrupt(path, "truncated array data"))?;
            for (dst, src) in a.data_mut().iter_mut().zip(chunk.chunks_exact(4)) {
                *dst = f32::from_le_bytes(src.try_into().unwrap()) as f64;
            }
            offset += n;
        }
        if offset != bytes.len() {
            return Err(corrupt(path, "trailing bytes after array data"));
        }
        if let Some(name) = params.first_non_finite() {
            return Err(corrupt(path, format!("array {name} holds non-finite values")));
        }
        Ok(Model { vocab, params })
    }
}

/// Rounds every parameter through `f32`, matching what a save/load cycle
/// yields.
pub fn round_to_f32(params: &mut ModelParams) {
    for (_, a) in params.named_mut() {
        round_array(a);
    }
}

fn round_array(a: &mut Array) {
    for x in a.data_mut() {
        *x = *x as f32 as f64;
    }
}

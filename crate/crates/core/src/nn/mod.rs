//! Char+word CNN sentence encoders and the similarity heads that score a
//! question against a paraphrase, with hand-written reverse-mode gradients.

mod array;
mod checkpoint;
mod config;
mod gradcheck;
mod graph;
mod model;
mod params;
mod tokenize;
mod vocab;
mod word_vectors;

pub use array::Array;
pub use checkpoint::round_to_f32;
pub use config::{ModelConfig, SimilarityMode};
pub use gradcheck::{check_gradients, GroupError};
pub use model::{Model, ScoreGraph, SentenceEmbedding, Side, TokenMatrix};
pub use params::{Conv, ModelParams};
pub use tokenize::tokenize;
pub use vocab::{Vocab, PAD, UNK};
pub use word_vectors::load_word_vectors;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("{what} has length {found}, expected {expected}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("embedding came from the {found:?} encoder, expected {expected:?}")]
    WrongEncoder { expected: Side, found: Side },
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("config mismatch: {0}")]
    ConfigMismatch(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: String, message: String },
    #[error("word vectors line {line}: {message}")]
    WordVectors { line: usize, message: String },
}

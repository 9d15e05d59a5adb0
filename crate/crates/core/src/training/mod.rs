//! Weakly supervised training: candidate labelling, the pairwise hinge loss,
//! Adam, the epoch loop with early stopping, and ensembles.

mod adam;
mod candidates;
mod config_file;
mod ensemble;
mod loss;
mod trainer;

use std::path::PathBuf;

pub use adam::{adam_step, OptimizerState};
pub use candidates::{
    build_candidates, load_candidate_file, write_candidate_file, Candidate, CandidateRecord, CandidateSet,
    TrainingQuestion,
};
pub use config_file::{ConfigFileError, TrainFile};
pub use ensemble::{ensemble_scores, Combiner};
pub use loss::{hinge_loss, HingeLoss};
pub use trainer::{precision_at_1, top_index, train, EpochLog, TrainOutcome};

use crate::nn::{ModelConfig, ModelError};
use crate::par::Execution;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("no question has both a positive and a negative candidate")]
    NoTrainablePairs,
    #[error("non-finite gradient in `{array}` at optimizer step {step}")]
    NonFiniteGradient { array: String, step: u64 },
    #[error("non-finite loss at optimizer step {step}")]
    NonFiniteLoss { step: u64 },
    #[error("ensemble members disagree on architecture: {0}")]
    EnsembleMismatch(String),
    #[error("{path}: {message}")]
    CandidateFile { path: PathBuf, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Table 3 style ablation switches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Ablations {
    pub no_dropout: bool,
    pub no_char_emb: bool,
    pub no_glove: bool,
    pub no_paraphrase: bool,
}

/// How positive/negative pairs are formed each epoch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Pairing {
    /// Positive and negative come from the same question.
    #[default]
    PerQuestion,
    /// Any positive against any negative, each scored against its own question.
    Global,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub theta: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Pairs per optimizer step.
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation improvement before stopping.
    pub patience: usize,
    pub pairs_per_question: usize,
    pub seed: u64,
    pub ablations: Ablations,
    pub pairing: Pairing,
    pub word_vectors: Option<PathBuf>,
    pub model: ModelConfig,
    pub execution: Execution,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            theta: 0.2,
            learning_rate: 7e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 64,
            max_epochs: 50,
            patience: 5,
            pairs_per_question: 50,
            seed: 0,
            ablations: Ablations::default(),
            pairing: Pairing::PerQuestion,
            word_vectors: None,
            model: ModelConfig::default(),
            execution: Execution::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_string()));
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return bad("theta must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad("epsilon must be positive");
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.pairs_per_question == 0 {
            return bad("batch_size, max_epochs and pairs_per_question must be positive");
        }
        self.effective_model_config().validate()?;
        Ok(())
    }

    /// Model config with the ablation switches applied.
    pub fn effective_model_config(&self) -> ModelConfig {
        let mut m = self.model.clone();
        if self.ablations.no_dropout {
            m.keep_prob = 1.0;
        }
        if self.ablations.no_char_emb {
            m.use_char = false;
        }
        if self.ablations.no_paraphrase {
            m.paraphrase_input = false;
        }
        m
    }
}

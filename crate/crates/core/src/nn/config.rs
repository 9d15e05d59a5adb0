use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Which similarity head scores a (question, paraphrase) embedding pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityMode {
    #[serde(rename = "dotproduct")]
    DotProduct,
    Bilin,
    Fc,
    FcBilin,
}

impl SimilarityMode {
    pub const ALL: [SimilarityMode; 4] =
        [SimilarityMode::DotProduct, SimilarityMode::Bilin, SimilarityMode::Fc, SimilarityMode::FcBilin];

    pub fn name(self) -> &'static str {
        match self {
            SimilarityMode::DotProduct => "dotproduct",
            SimilarityMode::Bilin => "bilin",
            SimilarityMode::Fc => "fc",
            SimilarityMode::FcBilin => "fc_bilin",
        }
    }

    pub fn uses_bilinear(self) -> bool {
        matches!(self, SimilarityMode::Bilin | SimilarityMode::FcBilin)
    }

    pub fn uses_fc(self) -> bool {
        matches!(self, SimilarityMode::Fc | SimilarityMode::FcBilin)
    }
}

impl fmt::Display for SimilarityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimilarityMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "dotproduct" | "dot" => Ok(SimilarityMode::DotProduct),
            "bilin" => Ok(SimilarityMode::Bilin),
            "fc" => Ok(SimilarityMode::Fc),
            "fc_bilin" => Ok(SimilarityMode::FcBilin),
            other => Err(ModelError::InvalidConfig(format!("unknown similarity mode `{other}`"))),
        }
    }
}

/// Architecture hyperparameters. Everything here is echoed into checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Word embedding size `d`.
    pub word_dim: usize,
    /// Character embedding size `d_c`.
    pub char_dim: usize,
    /// Character filters per width, `n_c`.
    pub char_filters: usize,
    pub char_widths: Vec<usize>,
    /// Sentence filters per width, `n`.
    pub sentence_filters: usize,
    /// Sentence filter widths `L`.
    pub sentence_widths: Vec<usize>,
    pub hidden: usize,
    pub mode: SimilarityMode,
    /// Probability of keeping an FC hidden unit during training.
    pub keep_prob: f64,
    pub alpha_init: f64,
    /// When false, token rows are word vectors only.
    pub use_char: bool,
    /// When false, candidates are fed to the paraphrase encoder as their
    /// canonical logical form text instead of a paraphrase.
    pub paraphrase_input: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            word_dim: 200,
            char_dim: 16,
            char_filters: 50,
            char_widths: vec![1, 2, 3],
            sentence_filters: 100,
            sentence_widths: vec![2, 4, 6, 8],
            hidden: 500,
            mode: SimilarityMode::FcBilin,
            keep_prob: 0.8,
            alpha_init: 0.5,
            use_char: true,
            paraphrase_input: true,
        }
    }
}

impl ModelConfig {
    /// Row length of the token matrix.
    pub fn token_dim(&self) -> usize {
        if self.use_char {
            self.word_dim + self.char_widths.len() * self.char_filters
        } else {
            self.word_dim
        }
    }

    /// Length of a sentence embedding, `n·|L|`.
    pub fn sentence_dim(&self) -> usize {
        self.sentence_filters * self.sentence_widths.len()
    }

    pub fn max_sentence_width(&self) -> usize {
        self.sentence_widths.iter().copied().max().unwrap_or(1)
    }

    pub fn max_char_width(&self) -> usize {
        self.char_widths.iter().copied().max().unwrap_or(1)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidConfig(m.to_string()));
        if self.word_dim == 0 || self.sentence_filters == 0 || self.hidden == 0 {
            return bad("word_dim, sentence_filters and hidden must be positive");
        }
        if self.sentence_widths.is_empty() || self.sentence_widths.contains(&0) {
            return bad("sentence_widths must be a nonempty list of positive widths");
        }
        if self.use_char
            && (self.char_dim == 0
                || self.char_filters == 0
                || self.char_widths.is_empty()
                || self.char_widths.contains(&0))
        {
            return bad("character CNN dimensions and widths must be positive");
        }
        if !(self.keep_prob > 0.0 && self.keep_prob <= 1.0) {
            return bad("keep_prob must lie in (0, 1]");
        }
        if !self.alpha_init.is_finite() {
            return bad("alpha_init must be finite");
        }
        Ok(())
    }
}

use serde::{Deserialize, Serialize};

use super::array::Array;
use super::config::ModelConfig;
use super::graph::{self, SentenceTrace, SimTrace};
use super::params::ModelParams;
use super::tokenize::tokenize;
use super::vocab::Vocab;
use super::ModelError;

/// Which of the two sentence encoders produced an embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Question,
    Paraphrase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEmbedding {
    pub values: Vec<f64>,
    pub encoder: Side,
}

impl SentenceEmbedding {
    pub fn new(values: Vec<f64>, encoder: Side) -> SentenceEmbedding {
        SentenceEmbedding { values, encoder }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Token matrix plus the number of rows that hold real tokens; the rest are
/// padding.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenMatrix {
    pub values: Array,
    pub real_len: usize,
}

/// Vocabulary plus parameters: everything needed to score text pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub vocab: Vocab,
    pub params: ModelParams,
}

impl Model {
    pub fn new(config: ModelConfig, vocab: Vocab, seed: u64) -> Result<Model, ModelError> {
        config.validate()?;
        let params = ModelParams::init(&config, vocab.word_count(), vocab.char_count(), seed);
        Ok(Model { vocab, params })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.params.config
    }

    /// Row `t` is the word vector of token `t` followed by its pooled
    /// character features; rows past the real tokens are padding.
    pub fn embed_tokens(&self, tokens: &[String]) -> TokenMatrix {
        let enc = graph::encode(&self.vocab, tokens, &self.params);
        let (x, _) = graph::token_matrix(&self.params, &enc);
        TokenMatrix {
            values: Array::from_vec(enc.words.len(), self.config().token_dim(), x),
            real_len: enc.real_len,
        }
    }

    /// Runs one sentence encoder over a token matrix. Matrices shorter than
    /// the widest filter are extended with zero rows.
    pub fn embed_matrix(&self, matrix: &TokenMatrix, side: Side) -> SentenceEmbedding {
        let dt = self.config().token_dim();
        assert_eq!(matrix.values.cols(), dt, "token matrix width does not match the model");
        let mut x = matrix.values.data().to_vec();
        let len = matrix.values.rows().max(self.config().max_sentence_width());
        x.resize(len * dt, 0.0);
        let (values, _) = graph::pool_sentence(&self.params, side, &x, len, matrix.real_len.min(len));
        SentenceEmbedding::new(values, side)
    }

    pub fn embed_text(&self, text: &str, side: Side) -> SentenceEmbedding {
        self.embed_matrix(&self.embed_tokens(&tokenize(text)), side)
    }

    /// Inference-mode similarity of a question embedding and a paraphrase
    /// embedding.
    pub fn similarity(&self, u: &SentenceEmbedding, v: &SentenceEmbedding) -> Result<f64, ModelError> {
        self.check_embedding(u, Side::Question)?;
        self.check_embedding(v, Side::Paraphrase)?;
        Ok(graph::forward_similarity(&self.params, &u.values, &v.values, None).score)
    }

    fn check_embedding(&self, e: &SentenceEmbedding, side: Side) -> Result<(), ModelError> {
        let expected = self.config().sentence_dim();
        if e.len() != expected {
            return Err(ModelError::ShapeMismatch {
                what: "sentence embedding",
                expected,
                found: e.len(),
            });
        }
        if e.encoder != side {
            return Err(ModelError::WrongEncoder {
                expected: side,
                found: e.encoder,
            });
        }
        Ok(())
    }

    /// Scores a question against one paraphrase. With `training` set, FC
    /// dropout is active and its mask is drawn from `seed`.
    pub fn score_pair(&self, question: &str, paraphrase: &str, training: bool, seed: u64) -> f64 {
        let mut graph = ScoreGraph::new(self, &tokenize(question));
        graph.score(&tokenize(paraphrase), training.then_some(seed))
    }

    /// Inference scores of many paraphrases against one question.
    pub fn score_candidates(&self, question: &str, paraphrases: &[String]) -> Vec<f64> {
        let u = self.embed_text(question, Side::Question);
        paraphrases
            .iter()
            .map(|p| {
                let v = self.embed_text(p, Side::Paraphrase);
                graph::forward_similarity(&self.params, &u.values, &v.values, None).score
            })
            .collect()
    }
}

/// A recorded computation: one question scored against any number of
/// paraphrases. `backward` takes d(loss)/d(score) for each scored item.
pub struct ScoreGraph<'m> {
    model: &'m Model,
    question: SentenceTrace,
    items: Vec<(SentenceTrace, SimTrace)>,
}

impl<'m> ScoreGraph<'m> {
    pub fn new(model: &'m Model, question_tokens: &[String]) -> ScoreGraph<'m> {
        let enc = graph::encode(&model.vocab, question_tokens, &model.params);
        ScoreGraph {
            model,
            question: graph::forward_sentence(&model.params, Side::Question, enc),
            items: Vec::new(),
        }
    }

    /// Appends a paraphrase and returns its score.
    pub fn score(&mut self, paraphrase_tokens: &[String], dropout_seed: Option<u64>) -> f64 {
        let params = &self.model.params;
        let enc = graph::encode(&self.model.vocab, paraphrase_tokens, params);
        let p = graph::forward_sentence(params, Side::Paraphrase, enc);
        let sim = graph::forward_similarity(params, &self.question.embedding, &p.embedding, dropout_seed);
        let s = sim.score;
        self.items.push((p, sim));
        s
    }

    pub fn question_embedding(&self) -> SentenceEmbedding {
        SentenceEmbedding::new(self.question.embedding.clone(), Side::Question)
    }

    /// Accumulates `Σ dscores[i] · ∂score_i/∂θ` into `grads`.
    pub fn backward(&self, dscores: &[f64], grads: &mut ModelParams) {
        assert_eq!(dscores.len(), self.items.len(), "one upstream gradient per scored item");
        let params = &self.model.params;
        let u = &self.question.embedding;
        let mut du_total = vec![0.0; u.len()];
        let mut any = false;
        for ((p, sim), &g) in self.items.iter().zip(dscores) {
            if g == 0.0 {
                continue;
            }
            any = true;
            let (du, dv) = graph::backward_similarity(params, u, &p.embedding, sim, g, grads);
            du_total.iter_mut().zip(&du).for_each(|(a, b)| *a += b);
            graph::backward_sentence(params, p, &dv, grads);
        }
        if any {
            graph::backward_sentence(params, &self.question, &du_total, grads);
        }
    }
}

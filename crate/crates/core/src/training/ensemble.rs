use crate::nn::Model;

use super::trainer::top_index;
use super::TrainError;

/// How member scores are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Combiner {
    /// Arithmetic mean of member scores.
    #[default]
    Mean,
    /// Fraction of members whose top candidate is this one.
    Vote,
}

/// Combined per-candidate scores of several models for one question.
pub fn ensemble_scores(
    members: &[Model],
    question: &str,
    texts: &[String],
    combiner: Combiner,
) -> Result<Vec<f64>, TrainError> {
    let Some(first) = members.first() else {
        return Err(TrainError::EnsembleMismatch("ensemble has no members".into()));
    };
    for (i, m) in members.iter().enumerate().skip(1) {
        if m.config() != first.config() {
            return Err(TrainError::EnsembleMismatch(format!("member {i} differs from member 0")));
        }
    }
    let mut combined = vec![0.0; texts.len()];
    for m in members {
        let scores = m.score_candidates(question, texts);
        match combiner {
            Combiner::Mean => combined.iter_mut().zip(&scores).for_each(|(c, s)| *c += s),
            Combiner::Vote => {
                if let Some(top) = top_index(&scores) {
                    combined[top] += 1.0;
                }
            }
        }
    }
    let n = members.len() as f64;
    combined.iter_mut().for_each(|c| *c /= n);
    Ok(combined)
}

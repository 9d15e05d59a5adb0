//! Central finite-difference check of the analytic gradients.

use super::{tokenize, Model, ScoreGraph};

/// Relative gradient error of one parameter array.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupError {
    pub name: String,
    /// `||a − n|| / (||a|| + ||n||)`, or 0 when both gradients vanish.
    pub relative: f64,
}

/// Seeds for the fixed dropout masks, one per paraphrase.
const MASK_SEED: u64 = 100;

fn objective(model: &Model, question: &[String], paraphrases: &[Vec<String>], coeffs: &[f64]) -> f64 {
    let mut g = ScoreGraph::new(model, question);
    paraphrases
        .iter()
        .zip(coeffs)
        .enumerate()
        .map(|(i, (p, c))| c * g.score(p, Some(MASK_SEED + i as u64)))
        .sum()
}

/// Compares backpropagated gradients of `Σ coeffs[i] · score(question,
/// paraphrases[i])` against central differences with step `h`, for every
/// parameter array. Dropout is active with fixed masks, so the objective is
/// a deterministic function of the parameters.
pub fn check_gradients(model: &Model, question: &str, paraphrases: &[&str], coeffs: &[f64], h: f64) -> Vec<GroupError> {
    assert_eq!(paraphrases.len(), coeffs.len(), "one coefficient per paraphrase");
    let q = tokenize(question);
    let ps: Vec<Vec<String>> = paraphrases.iter().map(|p| tokenize(p)).collect();

    let mut graph = ScoreGraph::new(model, &q);
    for (i, p) in ps.iter().enumerate() {
        graph.score(p, Some(MASK_SEED + i as u64));
    }
    let mut grads = model.params.zeros_like();
    graph.backward(coeffs, &mut grads);

    let mut probe = model.clone();
    let mut out = Vec::new();
    for (gi, (name, analytic)) in grads.named().into_iter().enumerate() {
        let analytic = analytic.data();
        let mut diff = 0.0;
        let mut norm_a = 0.0;
        let mut norm_n = 0.0;
        for (k, &a) in analytic.iter().enumerate() {
            let original = probe.params.named_mut()[gi].1.data()[k];
            probe.params.named_mut()[gi].1.data_mut()[k] = original + h;
            let plus = objective(&probe, &q, &ps, coeffs);
            probe.params.named_mut()[gi].1.data_mut()[k] = original - h;
            let minus = objective(&probe, &q, &ps, coeffs);
            probe.params.named_mut()[gi].1.data_mut()[k] = original;
            let n = (plus - minus) / (2.0 * h);
            diff += (a - n) * (a - n);
            norm_a += a * a;
            norm_n += n * n;
        }
        let scale = norm_a.sqrt() + norm_n.sqrt();
        let relative = if scale < 1e-12 { 0.0 } else { diff.sqrt() / scale };
        out.push(GroupError { name, relative });
    }
    out
}

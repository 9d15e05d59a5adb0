use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use super::model::Model;
use super::ModelError;

/// Overwrites word embedding rows from a `token v1 … vd` text file and
/// returns the number of distinct vocabulary words found. Rows for words
/// absent from the file keep their current values.
pub fn load_word_vectors(path: &Path, model: &mut Model) -> Result<usize, ModelError> {
    let text = fs::read_to_string(path).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let d = model.params.config.word_dim;
    let mut hits = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else { continue };
        let values: Vec<f64> = parts
            .map(|p| p.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| ModelError::WordVectors {
                line: i + 1,
                message: format!("unparsable component: {e}"),
            })?;
        if values.len() != d {
            return Err(ModelError::WordVectors {
                line: i + 1,
                message: format!("expected {d} components, found {}", values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::WordVectors {
                line: i + 1,
                message: "non-finite component".to_string(),
            });
        }
        let id = model
            .vocab
            .lookup_word(token)
            .or_else(|| model.vocab.lookup_word(&token.to_lowercase()));
        if let Some(id) = id.filter(|&id| id >= 2) {
            model.params.word_emb.row_mut(id).copy_from_slice(&values);
            hits.insert(id);
        }
    }
    Ok(hits.len())
}

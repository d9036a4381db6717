use rayon::prelude::*;
use serde::Serialize;

use super::TextTable;
use crate::atom::NormalizedSeq;
use crate::error::{Error, Result};
use crate::model::SubwordModel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthEntry {
    pub name: String,
    /// Mean tokens per sequence, unclipped.
    pub avg_tokens: f64,
    /// Signed percent change against the baseline.
    pub delta_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthReport {
    pub baseline: String,
    pub sequences: usize,
    pub entries: Vec<LengthEntry>,
}

impl LengthReport {
    pub fn to_table(&self) -> TextTable {
        let mut t = TextTable::new(["model", "avg_tokens", "delta_pct"]);
        for e in &self.entries {
            t.row([e.name.clone(), format!("{:.2}", e.avg_tokens), format!("{:+.2}", e.delta_pct)]);
        }
        t
    }
}

/// Mean token counts per model and their change relative to
/// `models[baseline]`.
pub fn length_report(
    models: &[(&str, &SubwordModel)],
    corpus: &[NormalizedSeq],
    baseline: usize,
) -> Result<LengthReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if baseline >= models.len() {
        return Err(Error::InvalidParameter(format!(
            "baseline index {baseline} out of range for {} models",
            models.len()
        )));
    }
    let avgs: Vec<f64> = models
        .iter()
        .map(|(_, m)| {
            let total: usize = corpus.par_iter().map(|s| m.encode_ids(s).len()).sum();
            total as f64 / corpus.len() as f64
        })
        .collect();
    let base = avgs[baseline];
    let entries = models
        .iter()
        .zip(&avgs)
        .map(|((name, _), &avg)| LengthEntry {
            name: name.to_string(),
            avg_tokens: avg,
            delta_pct: if base > 0.0 { (avg - base) / base * 100.0 } else { 0.0 },
        })
        .collect();
    Ok(LengthReport {
        baseline: models[baseline].0.to_string(),
        sequences: corpus.len(),
        entries,
    })
}

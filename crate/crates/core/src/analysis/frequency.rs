use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::TextTable;
use crate::atom::NormalizedSeq;
use crate::error::{Error, Result};
use crate::model::{SubwordModel, NUM_RESERVED};
use crate::symbols::render;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyEntry {
    pub rank: usize,
    pub token: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyProfile {
    pub total_tokens: u64,
    /// Tokens that occur at least once, by descending count.
    pub entries: Vec<FrequencyEntry>,
}

impl FrequencyProfile {
    /// `rank,token,count` rows; tokens are rendered and CSV-quoted.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "rank,token,count")?;
        for e in &self.entries {
            let tok = render(&e.token).replace('"', "\"\"");
            writeln!(w, "{},\"{}\",{}", e.rank, tok, e.count)?;
        }
        Ok(())
    }

    pub fn to_table(&self, limit: usize) -> TextTable {
        let mut t = TextTable::new(["rank", "count", "token"]);
        for e in self.entries.iter().take(limit) {
            t.row([e.rank.to_string(), e.count.to_string(), render(&e.token)]);
        }
        t
    }
}

fn token_counts(model: &SubwordModel, corpus: &[NormalizedSeq]) -> Vec<u64> {
    let n = model.vocab_size();
    corpus
        .par_iter()
        .fold(
            || vec![0u64; n],
            |mut acc, seq| {
                for id in model.encode_ids(seq) {
                    acc[id as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Token occurrence counts of the model's encoding of `corpus`.
pub fn frequency_profile(model: &SubwordModel, corpus: &[NormalizedSeq]) -> Result<FrequencyProfile> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let counts = token_counts(model, corpus);
    let mut entries: Vec<(u64, &str)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(id, &c)| (c, model.vocab[id].as_str()))
        .collect();
    entries.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    Ok(FrequencyProfile {
        total_tokens: counts.iter().sum(),
        entries: entries
            .into_iter()
            .enumerate()
            .map(|(i, (count, token))| FrequencyEntry {
                rank: i + 1,
                token: token.to_owned(),
                count,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossLangReport {
    pub f_hi: f64,
    pub f_lo: f64,
    pub tokens: usize,
    /// Frequent (per million) in the first corpus, rare in the second.
    pub specific_a: usize,
    pub specific_b: usize,
    pub fraction: f64,
}

impl CrossLangReport {
    pub fn to_table(&self) -> TextTable {
        let mut t = TextTable::new(["measure", "value"]);
        t.row(["tokens".to_string(), self.tokens.to_string()])
            .row(["specific_a".to_string(), self.specific_a.to_string()])
            .row(["specific_b".to_string(), self.specific_b.to_string()])
            .row(["fraction".to_string(), format!("{:.4}", self.fraction)]);
        t
    }
}

/// Share of vocabulary tokens with per-million frequency at least `f_hi`
/// in one corpus and at most `f_lo` in the other.
pub fn cross_language_report(
    model: &SubwordModel,
    corpus_a: &[NormalizedSeq],
    corpus_b: &[NormalizedSeq],
    f_hi: f64,
    f_lo: f64,
) -> Result<CrossLangReport> {
    if !(f_hi > f_lo && f_lo >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "thresholds need f_hi > f_lo >= 0, got {f_hi} and {f_lo}"
        )));
    }
    if corpus_a.is_empty() || corpus_b.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let per_million = |counts: Vec<u64>| -> Vec<f64> {
        let total: u64 = counts.iter().sum();
        let scale = if total == 0 { 0.0 } else { 1e6 / total as f64 };
        counts.into_iter().map(|c| c as f64 * scale).collect()
    };
    let fa = per_million(token_counts(model, corpus_a));
    let fb = per_million(token_counts(model, corpus_b));
    let (mut specific_a, mut specific_b) = (0, 0);
    for id in NUM_RESERVED..model.vocab_size() {
        if fa[id] >= f_hi && fb[id] <= f_lo {
            specific_a += 1;
        } else if fb[id] >= f_hi && fa[id] <= f_lo {
            specific_b += 1;
        }
    }
    let tokens = model.vocab_size() - NUM_RESERVED;
    Ok(CrossLangReport {
        f_hi,
        f_lo,
        tokens,
        specific_a,
        specific_b,
        fraction: if tokens == 0 { 0.0 } else { (specific_a + specific_b) as f64 / tokens as f64 },
    })
}

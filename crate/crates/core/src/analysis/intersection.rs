use std::collections::BTreeSet;

use serde::Serialize;

use super::{jaccard, TextTable};
use crate::atom::NormalizedSeq;
use crate::model::{SubwordModel, NUM_RESERVED};
use crate::symbols::{symbol_class, SymbolClass, MARKER};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionReport {
    pub pairs: usize,
    /// Pairs where neither side has a textual token; each scores 1.
    pub empty_pairs: usize,
    pub mean_jaccard: f64,
}

impl IntersectionReport {
    pub fn to_table(&self) -> TextTable {
        let mut t = TextTable::new(["pairs", "empty_pairs", "mean_jaccard"]);
        t.row([
            self.pairs.to_string(),
            self.empty_pairs.to_string(),
            format!("{:.4}", self.mean_jaccard),
        ]);
        t
    }
}

/// Textual tokens of an encoding: no punctuation and no structural
/// symbols. Leading markers are stripped.
pub fn textual_tokens(model: &SubwordModel, seq: &NormalizedSeq) -> BTreeSet<String> {
    model
        .encode_ids(seq)
        .into_iter()
        .filter(|&id| id as usize >= NUM_RESERVED)
        .map(|id| model.vocab[id as usize].as_str())
        .filter(|t| {
            t.chars()
                .all(|c| matches!(symbol_class(c), SymbolClass::Word | SymbolClass::Marker))
        })
        .map(|t| t.trim_start_matches(MARKER).to_owned())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Mean Jaccard similarity between input and output textual token sets.
pub fn io_intersection(
    model: &SubwordModel,
    pairs: &[(NormalizedSeq, NormalizedSeq)],
) -> IntersectionReport {
    let mut sum = 0.0;
    let mut empty = 0;
    for (input, output) in pairs {
        let a = textual_tokens(model, input);
        let b = textual_tokens(model, output);
        if a.is_empty() && b.is_empty() {
            empty += 1;
        }
        sum += jaccard(&a, &b);
    }
    IntersectionReport {
        pairs: pairs.len(),
        empty_pairs: empty,
        mean_jaccard: if pairs.is_empty() { 0.0 } else { sum / pairs.len() as f64 },
    }
}

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{jaccard, TextTable};
use crate::atom::{Atom, AtomClass, NormalizedSeq, SourceLang};
use crate::model::{token_display, SubwordModel};
use crate::symbols::MARKER;

/// Splits an identifier at snake_case and CamelCase boundaries.
///
/// Each underscore is a piece of its own. A new piece starts at an
/// uppercase letter that follows a lowercase letter or digit, and at the
/// last uppercase letter of an uppercase run followed by a lowercase letter
/// (`HTTPServer` → `HTTP`, `Server`). Digits stay with what precedes them.
pub fn native_split(identifier: &str) -> Vec<String> {
    let chars: Vec<char> = identifier.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            out.push("_".to_owned());
            continue;
        }
        if c.is_uppercase() && i > 0 {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            let boundary = prev.is_lowercase()
                || prev.is_numeric()
                || (prev.is_uppercase() && next_lower);
            if boundary && !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        }
        cur.push(c);
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ModelAlignment {
    pub name: String,
    /// Mean Jaccard between native pieces and produced tokens.
    pub mean_jaccard: f64,
    /// Same, after natively re-splitting every produced token.
    pub mean_jaccard_resplit: f64,
    /// Share of identifiers with a token that is one uppercase letter.
    pub single_uppercase_rate: f64,
    /// Share with a token made of `_` and one uppercase letter.
    pub underscore_uppercase_rate: f64,
    /// Share with a token spanning two or more CamelCase pieces.
    pub merged_native_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentReport {
    /// Distinct identifiers with at least two native pieces.
    pub candidates: usize,
    /// Of those, identifiers the two models segment differently.
    pub disagreeing: usize,
    pub requested: usize,
    pub sampled: usize,
    /// Fewer disagreeing identifiers than requested; all were used.
    pub insufficient: bool,
    pub models: Vec<ModelAlignment>,
}

impl AlignmentReport {
    pub fn to_table(&self) -> TextTable {
        let mut t = TextTable::new([
            "model",
            "jaccard",
            "jaccard_resplit",
            "single_upper",
            "underscore_upper",
            "merged_native",
        ]);
        for m in &self.models {
            t.row([
                m.name.clone(),
                format!("{:.4}", m.mean_jaccard),
                format!("{:.4}", m.mean_jaccard_resplit),
                format!("{:.4}", m.single_uppercase_rate),
                format!("{:.4}", m.underscore_uppercase_rate),
                format!("{:.4}", m.merged_native_rate),
            ]);
        }
        t
    }
}

/// Produced pieces of an identifier: token texts without markers.
pub(crate) fn identifier_pieces(model: &SubwordModel, identifier: &str) -> Vec<String> {
    let seq = NormalizedSeq::new(vec![Atom::word(identifier)], SourceLang::NaturalText);
    model
        .encode(&seq)
        .tokens
        .iter()
        .map(|t| token_display(t).chars().filter(|&c| c != MARKER).collect::<String>())
        .filter(|t| !t.is_empty())
        .collect()
}

fn is_identifier(word: &str) -> bool {
    word.chars().next().is_some_and(|c| c == '_' || c.is_alphabetic())
}

struct Scores {
    jaccard: f64,
    resplit: f64,
    single_upper: bool,
    underscore_upper: bool,
    merged: bool,
}

fn score(native: &BTreeSet<String>, pieces: &[String]) -> Scores {
    let produced: BTreeSet<String> = pieces.iter().cloned().collect();
    let resplit: BTreeSet<String> = pieces.iter().flat_map(|p| native_split(p)).collect();
    let single_upper = |p: &str| {
        let mut cs = p.chars();
        matches!((cs.next(), cs.next()), (Some(c), None) if c.is_uppercase())
    };
    Scores {
        jaccard: jaccard(native, &produced),
        resplit: jaccard(native, &resplit),
        single_upper: pieces.iter().any(|p| single_upper(p)),
        underscore_upper: pieces
            .iter()
            .any(|p| p.strip_prefix('_').is_some_and(single_upper)),
        merged: pieces
            .iter()
            .any(|p| native_split(p).iter().filter(|s| s.as_str() != "_").count() >= 2),
    }
}

/// Compares how closely two models follow native identifier splits.
///
/// Identifiers are the distinct word atoms of `corpus` that start with a
/// letter or underscore, have at least two native pieces, and are segmented
/// differently by the two models. Up to `sample_size` of them are drawn
/// with `seed`.
pub fn alignment_report(
    models: [(&str, &SubwordModel); 2],
    corpus: &[NormalizedSeq],
    sample_size: usize,
    seed: u64,
) -> AlignmentReport {
    let words: BTreeSet<&str> = corpus
        .iter()
        .flat_map(|s| s.atoms.iter())
        .filter(|a| a.class() == AtomClass::Word && is_identifier(a.text()))
        .map(Atom::text)
        .collect();
    let candidates: Vec<&str> = words
        .into_iter()
        .filter(|w| native_split(w).len() >= 2)
        .collect();
    let mut disagreeing: Vec<(&str, Vec<String>, Vec<String>)> = candidates
        .par_iter()
        .filter_map(|&w| {
            let a = identifier_pieces(models[0].1, w);
            let b = identifier_pieces(models[1].1, w);
            (a != b).then_some((w, a, b))
        })
        .collect();
    let total = disagreeing.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    disagreeing.shuffle(&mut rng);
    disagreeing.truncate(sample_size);
    let n = disagreeing.len();

    let mut out: Vec<ModelAlignment> = models
        .iter()
        .map(|(name, _)| ModelAlignment {
            name: name.to_string(),
            ..Default::default()
        })
        .collect();
    for (w, a, b) in &disagreeing {
        let native: BTreeSet<String> = native_split(w).into_iter().collect();
        for (m, pieces) in out.iter_mut().zip([a, b]) {
            let s = score(&native, pieces);
            m.mean_jaccard += s.jaccard;
            m.mean_jaccard_resplit += s.resplit;
            m.single_uppercase_rate += s.single_upper as u8 as f64;
            m.underscore_uppercase_rate += s.underscore_upper as u8 as f64;
            m.merged_native_rate += s.merged as u8 as f64;
        }
    }
    if n > 0 {
        for m in &mut out {
            m.mean_jaccard /= n as f64;
            m.mean_jaccard_resplit /= n as f64;
            m.single_uppercase_rate /= n as f64;
            m.underscore_uppercase_rate /= n as f64;
            m.merged_native_rate /= n as f64;
        }
    }
    AlignmentReport {
        candidates: candidates.len(),
        disagreeing: total,
        requested: sample_size,
        sampled: n,
        insufficient: total < sample_size,
        models: out,
    }
}

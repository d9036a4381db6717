use serde::Serialize;

use super::TextTable;
use crate::model::SubwordModel;
use crate::symbols::{symbol_class, SymbolClass, MARKER};

const OPENING: [char; 4] = ['(', '[', '{', '<'];
const CLOSING: [char; 4] = [')', ']', '}', '>'];

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BracketClasses {
    pub closing_only: f64,
    pub opening_only: f64,
    pub both: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionReport {
    /// Non-reserved tokens.
    pub tokens: usize,
    pub composite: usize,
    pub punct_only: usize,
    pub composite_fraction: f64,
    pub punct_only_fraction: f64,
    /// Fractions among punctuation-only composite tokens.
    pub bracket_classes: BracketClasses,
}

impl CompositionReport {
    pub fn to_table(&self) -> TextTable {
        let mut t = TextTable::new(["measure", "value"]);
        t.row(["tokens".to_string(), self.tokens.to_string()])
            .row(["composite_fraction".to_string(), format!("{:.4}", self.composite_fraction)])
            .row(["punct_only_fraction".to_string(), format!("{:.4}", self.punct_only_fraction)])
            .row(["closing_only".to_string(), format!("{:.4}", self.bracket_classes.closing_only)])
            .row(["opening_only".to_string(), format!("{:.4}", self.bracket_classes.opening_only)])
            .row(["both".to_string(), format!("{:.4}", self.bracket_classes.both)]);
        t
    }
}

/// A token spans several atoms when a marker appears after its first char.
pub fn is_composite(token: &str) -> bool {
    token.chars().skip(1).any(|c| c == MARKER)
}

/// Classifies the vocabulary by atom span and content.
pub fn vocab_composition(model: &SubwordModel) -> CompositionReport {
    let mut composite = 0;
    let mut punct_only = 0;
    let (mut closing, mut opening, mut both) = (0usize, 0usize, 0usize);
    for tok in model.tokens() {
        if !is_composite(tok) {
            continue;
        }
        composite += 1;
        let no_word = tok.chars().all(|c| symbol_class(c) != SymbolClass::Word);
        if !no_word {
            continue;
        }
        punct_only += 1;
        let has_open = tok.chars().any(|c| OPENING.contains(&c));
        let has_close = tok.chars().any(|c| CLOSING.contains(&c));
        match (has_open, has_close) {
            (true, true) => both += 1,
            (true, false) => opening += 1,
            (false, true) => closing += 1,
            (false, false) => {}
        }
    }
    let n = model.tokens().len();
    let frac = |k: usize, d: usize| if d == 0 { 0.0 } else { k as f64 / d as f64 };
    CompositionReport {
        tokens: n,
        composite,
        punct_only,
        composite_fraction: frac(composite, n),
        punct_only_fraction: frac(punct_only, n),
        bracket_classes: BracketClasses {
            closing_only: frac(closing, punct_only),
            opening_only: frac(opening, punct_only),
            both: frac(both, punct_only),
        },
    }
}

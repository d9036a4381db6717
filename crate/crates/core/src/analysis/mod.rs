//! Corpus and vocabulary measurements.

mod alignment;
mod composition;
mod frequency;
mod intersection;
mod length;
mod table;

pub use alignment::{alignment_report, native_split, AlignmentReport, ModelAlignment};
pub use composition::{vocab_composition, BracketClasses, CompositionReport};
pub use frequency::{
    cross_language_report, frequency_profile, CrossLangReport, FrequencyEntry, FrequencyProfile,
};
pub use intersection::{io_intersection, textual_tokens, IntersectionReport};
pub use length::{length_report, LengthEntry, LengthReport};
pub use table::TextTable;

use std::collections::BTreeSet;
use std::hash::Hash;

use serde::Serialize;

use crate::atom::{AtomClass, NormalizedSeq};

/// `|a ∩ b| / |a ∪ b|`, with two empty sets scoring 1.
pub fn jaccard<T: Ord + Hash>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    inter as f64 / (a.len() + b.len() - inter) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PunctuationMass {
    pub punct_chars: u64,
    pub text_chars: u64,
    pub fraction: f64,
}

/// Share of atom-text characters that are punctuation. Structural atoms
/// and separating spaces count on neither side.
pub fn punctuation_mass(corpus: &[NormalizedSeq]) -> PunctuationMass {
    let (mut punct, mut text) = (0u64, 0u64);
    for seq in corpus {
        for atom in &seq.atoms {
            match atom.class() {
                AtomClass::Punct => {
                    punct += 1;
                    text += 1;
                }
                AtomClass::Word => text += atom.text().chars().count() as u64,
                AtomClass::Special => {}
            }
        }
    }
    PunctuationMass {
        punct_chars: punct,
        text_chars: text,
        fraction: if text == 0 { 0.0 } else { punct as f64 / text as f64 },
    }
}

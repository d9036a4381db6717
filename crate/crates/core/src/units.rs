//! Segmentation units: the char-form spans that subword algorithms see.
//!
//! At boundary levels a unit is one pre-token; at levels 3-4 it is a whole
//! sequence. Uncovered chars split units and become standalone UNK tokens.

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::atom::NormalizedSeq;
use crate::granularity::{pretoken_spans, Level};
use crate::symbols::{self, push_atom};

/// One piece of an encoding job.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Seg<'a> {
    Text(&'a [char]),
    Unk(char),
}

/// Char form of `seq` plus the char offsets where units end.
pub(crate) fn unit_char_form(seq: &NormalizedSeq, level: Level) -> (Vec<char>, Vec<usize>) {
    let mut chars = Vec::new();
    let mut ends = Vec::new();
    let mut buf = String::new();
    if level.has_boundaries() {
        let spans = pretoken_spans(&seq.atoms, level).expect("boundary level");
        for span in spans {
            for atom in &seq.atoms[span] {
                buf.clear();
                push_atom(&mut buf, atom);
                chars.extend(buf.chars());
            }
            ends.push(chars.len());
        }
    } else {
        for atom in &seq.atoms {
            buf.clear();
            push_atom(&mut buf, atom);
            chars.extend(buf.chars());
        }
        if !chars.is_empty() {
            ends.push(chars.len());
        }
    }
    (chars, ends)
}

/// Walks the units of a char stream, splitting at uncovered chars.
pub(crate) fn for_each_seg<'a>(
    chars: &'a [char],
    ends: &[usize],
    covered: impl Fn(char) -> bool,
    mut f: impl FnMut(Seg<'a>),
) {
    let mut start = 0;
    for &end in ends {
        let mut run = start;
        for i in start..end {
            if !covered(chars[i]) {
                if run < i {
                    f(Seg::Text(&chars[run..i]));
                }
                f(Seg::Unk(chars[i]));
                run = i + 1;
            }
        }
        if run < end {
            f(Seg::Text(&chars[run..end]));
        }
        start = end;
    }
}

/// Deduplicated covered training units with weights, sorted by text.
pub(crate) struct Units {
    pub texts: Vec<Vec<char>>,
    pub weights: Vec<u64>,
}

impl Units {
    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn total_chars(&self) -> usize {
        self.texts.iter().map(Vec::len).sum()
    }
}

pub(crate) fn collect_units(
    corpus: &[NormalizedSeq],
    level: Level,
    charset: &FxHashSet<char>,
) -> Units {
    let covered = |c: char| charset.contains(&c);
    let counts = corpus
        .par_iter()
        .fold(FxHashMap::<Vec<char>, u64>::default, |mut acc, seq| {
            let (chars, ends) = unit_char_form(seq, level);
            for_each_seg(&chars, &ends, covered, |seg| {
                if let Seg::Text(t) = seg {
                    match acc.get_mut(t) {
                        Some(w) => *w += 1,
                        None => {
                            acc.insert(t.to_vec(), 1);
                        }
                    }
                }
            });
            acc
        })
        .reduce(FxHashMap::default, |a, b| {
            if a.len() < b.len() {
                return merge_counts(b, a);
            }
            merge_counts(a, b)
        });
    let mut pairs: Vec<(Vec<char>, u64)> = counts.into_iter().collect();
    pairs.par_sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let (texts, weights) = pairs.into_iter().unzip();
    Units { texts, weights }
}

fn merge_counts(
    mut into: FxHashMap<Vec<char>, u64>,
    from: FxHashMap<Vec<char>, u64>,
) -> FxHashMap<Vec<char>, u64> {
    for (k, v) in from {
        *into.entry(k).or_insert(0) += v;
    }
    into
}

/// Every alphabet contains the structural chars.
pub(crate) fn with_structural(charset: &FxHashSet<char>) -> Vec<char> {
    let mut all: Vec<char> = charset.iter().copied().collect();
    for c in symbols::structural_chars() {
        if !charset.contains(&c) {
            all.push(c);
        }
    }
    all.sort_unstable();
    all
}

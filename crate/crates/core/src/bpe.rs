//! Byte-pair encoding under a granularity constraint.
//!
//! Training keeps every unit as a linked list of symbols in flat arrays and
//! maintains pair counts incrementally; the best pair comes from a lazy
//! max-heap. Only pairs whose concatenation is a valid token at the model's
//! level are ever counted.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::atom::NormalizedSeq;
use crate::error::{Error, Result};
use crate::granularity::{token_valid, Level};
use crate::model::{coverage_charset, Payload, SubwordModel, NUM_RESERVED};
use crate::units::{collect_units, with_structural};

#[derive(Debug, Clone, Copy)]
pub struct BpeConfig {
    pub level: Level,
    /// Target number of ids, reserved tokens included.
    pub vocab_size: usize,
    pub coverage: f64,
}

impl Default for BpeConfig {
    fn default() -> Self {
        BpeConfig {
            level: Level::L0,
            vocab_size: 8000,
            coverage: 0.9999,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct BpeTables {
    pub merges: Vec<(u32, u32)>,
    /// (left, right) -> (rank, merged id)
    ranks: FxHashMap<u64, (u32, u32)>,
}

#[inline]
fn key(a: u32, b: u32) -> u64 {
    ((a as u64) << 32) | b as u64
}

const NONE: u32 = u32::MAX;

impl BpeTables {
    pub fn new(merges: Vec<(u32, u32)>, results: &[u32]) -> BpeTables {
        let ranks = merges
            .iter()
            .zip(results)
            .enumerate()
            .map(|(r, (&(a, b), &c))| (key(a, b), (r as u32, c)))
            .collect();
        BpeTables { merges, ranks }
    }

    /// Applies merges in ascending rank, leftmost first. `text` must be
    /// fully covered.
    pub fn encode(&self, model: &SubwordModel, text: &[char], out: &mut Vec<u32>) {
        let mut sym: Vec<u32> = text.iter().map(|c| model.alphabet[c]).collect();
        let n = sym.len();
        if n < 2 {
            out.extend_from_slice(&sym);
            return;
        }
        let mut next: Vec<u32> = (1..=n as u32).collect();
        next[n - 1] = NONE;
        let mut prev: Vec<u32> = (0..n as u32).map(|i| i.wrapping_sub(1)).collect();
        prev[0] = NONE;
        let mut heap = BinaryHeap::new();
        for i in 0..n - 1 {
            if let Some(&(r, _)) = self.ranks.get(&key(sym[i], sym[i + 1])) {
                heap.push(Reverse((r, i as u32)));
            }
        }
        while let Some(Reverse((rank, p))) = heap.pop() {
            let p = p as usize;
            if sym[p] == NONE {
                continue;
            }
            let q = next[p];
            if q == NONE {
                continue;
            }
            let q = q as usize;
            match self.ranks.get(&key(sym[p], sym[q])) {
                Some(&(r, c)) if r == rank => {
                    sym[p] = c;
                    sym[q] = NONE;
                    let nn = next[q];
                    next[p] = nn;
                    if nn != NONE {
                        prev[nn as usize] = p as u32;
                        if let Some(&(r, _)) = self.ranks.get(&key(c, sym[nn as usize])) {
                            heap.push(Reverse((r, p as u32)));
                        }
                    }
                    let pp = prev[p];
                    if pp != NONE {
                        if let Some(&(r, _)) = self.ranks.get(&key(sym[pp as usize], c)) {
                            heap.push(Reverse((r, pp)));
                        }
                    }
                }
                _ => {}
            }
        }
        let mut i = 0u32;
        while i != NONE {
            out.push(sym[i as usize]);
            i = next[i as usize];
        }
    }
}

pub fn train_bpe(corpus: &[NormalizedSeq], cfg: &BpeConfig) -> Result<SubwordModel> {
    if corpus.iter().all(NormalizedSeq::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    let charset = coverage_charset(corpus, cfg.coverage)?;
    let alphabet = with_structural(&charset);
    let minimum = alphabet.len() + NUM_RESERVED;
    if cfg.vocab_size < minimum {
        return Err(Error::VocabTooSmall {
            requested: cfg.vocab_size,
            minimum,
        });
    }
    let units = collect_units(corpus, cfg.level, &charset);
    let merges = learn_merges(
        &units.texts,
        &units.weights,
        &alphabet,
        cfg.level,
        cfg.vocab_size - minimum,
    );
    bpe_model(cfg.level, cfg.coverage, &alphabet, &merges)
}

/// Assembles a model from an alphabet and merges given as token strings.
pub fn bpe_model(
    level: Level,
    coverage: f64,
    alphabet: &[char],
    merges: &[(String, String)],
) -> Result<SubwordModel> {
    let mut tokens: Vec<String> = alphabet.iter().map(|c| c.to_string()).collect();
    tokens.extend(merges.iter().map(|(a, b)| format!("{a}{b}")));
    SubwordModel::assemble(level, coverage, tokens, |ids| {
        let mut pairs = Vec::with_capacity(merges.len());
        let mut results = Vec::with_capacity(merges.len());
        for (k, (a, b)) in merges.iter().enumerate() {
            let c = (NUM_RESERVED + alphabet.len() + k) as u32;
            let (Some(&ia), Some(&ib)) = (ids.get(a), ids.get(b)) else {
                return Err(Error::MalformedModel(format!("merge {k} uses an unknown token")));
            };
            if ia >= c || ib >= c {
                return Err(Error::MalformedModel(format!(
                    "merge {k} uses a token created later"
                )));
            }
            pairs.push((ia, ib));
            results.push(c);
        }
        Ok(Payload::Bpe(BpeTables::new(pairs, &results)))
    })
}

#[derive(PartialEq, Eq)]
struct Entry {
    count: i64,
    left: Arc<str>,
    right: Arc<str>,
    pair: u64,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.left.cmp(&self.left))
            .then_with(|| other.right.cmp(&self.right))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Trainer {
    level: Level,
    vocab: Vec<Arc<str>>,
    index: FxHashSet<Arc<str>>,
    sym: Vec<u32>,
    prev: Vec<u32>,
    next: Vec<u32>,
    weight: Vec<u32>,
    counts: FxHashMap<u64, i64>,
    places: FxHashMap<u64, Vec<u32>>,
    valid: FxHashMap<u64, bool>,
    heap: BinaryHeap<Entry>,
}

impl Trainer {
    fn is_valid(&mut self, a: u32, b: u32) -> bool {
        let k = key(a, b);
        if let Some(&v) = self.valid.get(&k) {
            return v;
        }
        let cat = format!("{}{}", self.vocab[a as usize], self.vocab[b as usize]);
        let v = token_valid(&cat, self.level) && !self.index.contains(cat.as_str());
        self.valid.insert(k, v);
        v
    }

    fn push(&mut self, k: u64) {
        let count = self.counts.get(&k).copied().unwrap_or(0);
        if count > 0 {
            let (a, b) = ((k >> 32) as usize, (k & 0xffff_ffff) as usize);
            self.heap.push(Entry {
                count,
                left: self.vocab[a].clone(),
                right: self.vocab[b].clone(),
                pair: k,
            });
        }
    }

    fn inc(&mut self, a: u32, b: u32, w: i64, pos: u32, touched: &mut Vec<u64>) {
        if self.is_valid(a, b) {
            let k = key(a, b);
            *self.counts.entry(k).or_insert(0) += w;
            self.places.entry(k).or_default().push(pos);
            touched.push(k);
        }
    }

    fn dec(&mut self, a: u32, b: u32, w: i64) {
        if let Some(c) = self.counts.get_mut(&key(a, b)) {
            *c -= w;
        }
    }

    fn merge(&mut self, k: u64, c: u32) {
        let (a, b) = ((k >> 32) as u32, (k & 0xffff_ffff) as u32);
        let mut positions = self.places.remove(&k).unwrap_or_default();
        self.counts.remove(&k);
        positions.sort_unstable();
        positions.dedup();
        let mut touched = Vec::new();
        for p in positions {
            let pu = p as usize;
            if self.sym[pu] != a {
                continue;
            }
            let q = self.next[pu];
            if q == NONE || self.sym[q as usize] != b {
                continue;
            }
            let w = self.weight[pu] as i64;
            let pp = self.prev[pu];
            let nn = self.next[q as usize];
            if pp != NONE {
                let s = self.sym[pp as usize];
                if key(s, a) != k {
                    self.dec(s, a, w);
                }
            }
            if nn != NONE {
                let s = self.sym[nn as usize];
                if key(b, s) != k {
                    self.dec(b, s, w);
                }
            }
            self.sym[pu] = c;
            self.sym[q as usize] = NONE;
            self.next[pu] = nn;
            if nn != NONE {
                self.prev[nn as usize] = p;
            }
            if pp != NONE {
                let s = self.sym[pp as usize];
                self.inc(s, c, w, pp, &mut touched);
            }
            if nn != NONE {
                let s = self.sym[nn as usize];
                self.inc(c, s, w, p, &mut touched);
            }
        }
        touched.sort_unstable();
        touched.dedup();
        for t in touched {
            self.push(t);
        }
    }
}

/// Learns up to `max_merges` merges over weighted units, returned as
/// (left, right) token strings in rank order.
///
/// Ties on count go to the lexicographically smallest (left, right).
/// Merging stops when no valid pair occurs at least twice. A pair whose
/// concatenation is already a token is never merged, so every merge adds
/// exactly one token.
pub(crate) fn learn_merges(
    texts: &[Vec<char>],
    weights: &[u64],
    alphabet: &[char],
    level: Level,
    max_merges: usize,
) -> Vec<(String, String)> {
    let vocab: Vec<Arc<str>> = alphabet.iter().map(|c| Arc::from(c.to_string())).collect();
    let char_id: FxHashMap<char, u32> =
        alphabet.iter().enumerate().map(|(i, &c)| (c, i as u32)).collect();
    let total: usize = texts.iter().map(Vec::len).sum();
    let mut t = Trainer {
        level,
        index: vocab.iter().cloned().collect(),
        vocab,
        sym: Vec::with_capacity(total),
        prev: Vec::with_capacity(total),
        next: Vec::with_capacity(total),
        weight: Vec::with_capacity(total),
        counts: FxHashMap::default(),
        places: FxHashMap::default(),
        valid: FxHashMap::default(),
        heap: BinaryHeap::new(),
    };
    for (text, &w) in texts.iter().zip(weights) {
        let start = t.sym.len() as u32;
        for (i, c) in text.iter().enumerate() {
            let pos = start + i as u32;
            t.sym.push(char_id[c]);
            t.prev.push(if i == 0 { NONE } else { pos - 1 });
            t.next.push(if i + 1 == text.len() { NONE } else { pos + 1 });
            t.weight.push(u32::try_from(w).unwrap_or(u32::MAX));
        }
    }
    let mut touched = Vec::new();
    for p in 0..t.sym.len() {
        let q = t.next[p];
        if q != NONE {
            let (a, b, w) = (t.sym[p], t.sym[q as usize], t.weight[p] as i64);
            t.inc(a, b, w, p as u32, &mut touched);
        }
    }
    let mut keys: Vec<u64> = t.counts.keys().copied().collect();
    keys.sort_unstable();
    for k in keys {
        t.push(k);
    }

    let mut merges = Vec::new();
    while merges.len() < max_merges {
        let Some(entry) = t.heap.pop() else { break };
        let current = t.counts.get(&entry.pair).copied().unwrap_or(0);
        if current != entry.count {
            if current > 0 && current < entry.count {
                t.push(entry.pair);
            }
            continue;
        }
        if current < 2 {
            break;
        }
        let cat: Arc<str> = Arc::from(format!("{}{}", entry.left, entry.right));
        if t.index.contains(&cat) {
            // Became a token through another merge; never merge this pair.
            t.valid.insert(entry.pair, false);
            t.counts.remove(&entry.pair);
            t.places.remove(&entry.pair);
            continue;
        }
        let c = t.vocab.len() as u32;
        t.vocab.push(cat.clone());
        t.index.insert(cat);
        t.merge(entry.pair, c);
        merges.push((entry.left.to_string(), entry.right.to_string()));
    }
    merges
}

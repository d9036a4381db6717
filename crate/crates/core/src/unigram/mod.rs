//! Unigram language-model segmentation.

mod seeds;
mod trainer;

pub use trainer::{train_unigram, train_unigram_traced, UnigramConfig, UnigramTrace};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use crate::atom::NormalizedSeq;
use crate::error::{Error, Result};
use crate::granularity::Level;
use crate::model::{Payload, SubwordModel, TokenizedSeq, NUM_RESERVED, UNK_ID};
use crate::units::{for_each_seg, unit_char_form, Seg};

const NO_TOKEN: u32 = u32::MAX;

/// Char trie mapping token strings to ids.
#[derive(Debug, Clone, Default)]
pub(crate) struct Trie {
    edges: FxHashMap<u64, u32>,
    terminal: Vec<u32>,
}

impl Trie {
    pub fn new() -> Trie {
        Trie {
            edges: FxHashMap::default(),
            terminal: vec![NO_TOKEN],
        }
    }

    pub fn insert(&mut self, token: &str, id: u32) {
        let mut node = 0u32;
        for c in token.chars() {
            let k = ((node as u64) << 32) | c as u64;
            node = match self.edges.get(&k) {
                Some(&n) => n,
                None => {
                    let n = self.terminal.len() as u32;
                    self.terminal.push(NO_TOKEN);
                    self.edges.insert(k, n);
                    n
                }
            };
        }
        self.terminal[node as usize] = id;
    }

    /// Calls `f(end, id)` for every token that starts at `start`.
    #[inline]
    pub fn prefixes(&self, text: &[char], start: usize, mut f: impl FnMut(usize, u32)) {
        let mut node = 0u32;
        for (j, &c) in text[start..].iter().enumerate() {
            let k = ((node as u64) << 32) | c as u64;
            match self.edges.get(&k) {
                Some(&n) => node = n,
                None => return,
            }
            let id = self.terminal[node as usize];
            if id != NO_TOKEN {
                f(start + j + 1, id);
            }
        }
    }
}

/// Lattice edges of one text grouped by start position.
pub(crate) struct Edges {
    /// `offsets[i]..offsets[i + 1]` index the edges starting at `i`.
    pub offsets: Vec<u32>,
    pub ends: Vec<u32>,
    pub ids: Vec<u32>,
}

impl Edges {
    pub fn build(trie: &Trie, logp: &[f64], text: &[char], skip: u32) -> Edges {
        let n = text.len();
        let mut e = Edges {
            offsets: Vec::with_capacity(n + 1),
            ends: Vec::with_capacity(n * 3),
            ids: Vec::with_capacity(n * 3),
        };
        for i in 0..n {
            e.offsets.push(e.ends.len() as u32);
            trie.prefixes(text, i, |end, id| {
                if id != skip && logp[id as usize] > f64::NEG_INFINITY {
                    e.ends.push(end as u32);
                    e.ids.push(id);
                }
            });
        }
        e.offsets.push(e.ends.len() as u32);
        e
    }

    pub fn from(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i] as usize..self.offsets[i + 1] as usize
    }
}

fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Maximum-likelihood segmentation as ids; `None` if the text cannot be
/// segmented. Near-ties (relative 1e-9) prefer fewer tokens, then the
/// lexicographically smaller token at the first difference.
pub(crate) fn viterbi_path(
    trie: &Trie,
    logp: &[f64],
    names: &[String],
    text: &[char],
    skip: u32,
) -> Option<Vec<u32>> {
    let n = text.len();
    let edges = Edges::build(trie, logp, text, skip);
    let mut score = vec![f64::NEG_INFINITY; n + 1];
    let mut count = vec![0u32; n + 1];
    let mut back: Vec<(u32, u32)> = vec![(0, NO_TOKEN); n + 1];
    score[0] = 0.0;
    for i in 0..n {
        if score[i] == f64::NEG_INFINITY {
            continue;
        }
        for e in edges.from(i) {
            let j = edges.ends[e] as usize;
            let id = edges.ids[e];
            let s = score[i] + logp[id as usize];
            let c = count[i] + 1;
            let better = if score[j] == f64::NEG_INFINITY {
                true
            } else if ties(s, score[j]) {
                match c.cmp(&count[j]) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => false,
                    std::cmp::Ordering::Equal => {
                        let mut cand = trace(&back, i, names);
                        cand.push(&names[id as usize]);
                        cand < trace(&back, j, names)
                    }
                }
            } else {
                s > score[j]
            };
            if better {
                score[j] = s;
                count[j] = c;
                back[j] = (i as u32, id);
            }
        }
    }
    if score[n] == f64::NEG_INFINITY {
        return None;
    }
    let mut path = Vec::with_capacity(count[n] as usize);
    let mut j = n;
    while j > 0 {
        let (i, id) = back[j];
        path.push(id);
        j = i as usize;
    }
    path.reverse();
    Some(path)
}

fn trace<'a>(back: &[(u32, u32)], mut j: usize, names: &'a [String]) -> Vec<&'a str> {
    let mut out = Vec::new();
    while j > 0 {
        let (i, id) = back[j];
        out.push(names[id as usize].as_str());
        j = i as usize;
    }
    out.reverse();
    out
}

#[inline]
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[derive(Debug, Clone)]
pub(crate) struct UnigramTables {
    /// Log-probability per id; reserved ids hold negative infinity.
    pub logp: Vec<f64>,
    trie: Trie,
}

impl UnigramTables {
    pub fn new(logp: Vec<f64>, vocab: &[String]) -> UnigramTables {
        let mut trie = Trie::new();
        for (id, tok) in vocab.iter().enumerate().skip(NUM_RESERVED) {
            trie.insert(tok, id as u32);
        }
        UnigramTables { logp, trie }
    }

    pub fn viterbi(&self, model: &SubwordModel, text: &[char], out: &mut Vec<u32>) {
        match viterbi_path(&self.trie, &self.logp, &model.vocab, text, NO_TOKEN) {
            Some(path) => out.extend(path),
            // Unreachable for well-formed models: every covered char is a
            // token with finite score.
            None => out.extend(text.iter().map(|_| UNK_ID)),
        }
    }

    /// Forward-filtering backward-sampling with scores scaled by `alpha`.
    fn sample(&self, text: &[char], alpha: f64, rng: &mut ChaCha8Rng, out: &mut Vec<u32>) {
        let n = text.len();
        let edges = Edges::build(&self.trie, &self.logp, text, NO_TOKEN);
        let mut incoming: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n + 1];
        for i in 0..n {
            for e in edges.from(i) {
                incoming[edges.ends[e] as usize].push((i as u32, edges.ids[e]));
            }
        }
        let mut fwd = vec![f64::NEG_INFINITY; n + 1];
        fwd[0] = 0.0;
        for j in 1..=n {
            let mut acc = f64::NEG_INFINITY;
            for &(i, id) in &incoming[j] {
                acc = log_add(acc, fwd[i as usize] + alpha * self.logp[id as usize]);
            }
            fwd[j] = acc;
        }
        let mut path = Vec::new();
        let mut j = n;
        while j > 0 {
            let u: f64 = rng.gen();
            let mut cum = 0.0;
            let mut pick = None;
            for &(i, id) in &incoming[j] {
                let w = (fwd[i as usize] + alpha * self.logp[id as usize] - fwd[j]).exp();
                if w.is_nan() {
                    continue;
                }
                cum += w;
                pick = Some((i, id));
                if u < cum {
                    break;
                }
            }
            let Some((i, id)) = pick else {
                out.extend(text.iter().map(|_| UNK_ID));
                return;
            };
            path.push(id);
            j = i as usize;
        }
        path.reverse();
        out.extend(path);
    }
}

impl SubwordModel {
    /// Builds a unigram model from (token, log-probability) pairs. Ids follow
    /// descending probability, ties by token string.
    pub fn from_unigram_pieces(
        level: Level,
        coverage: f64,
        mut pieces: Vec<(String, f64)>,
    ) -> Result<SubwordModel> {
        if let Some((t, s)) = pieces.iter().find(|(_, s)| !s.is_finite() || *s > 0.0) {
            return Err(Error::MalformedModel(format!("token {t:?} has score {s}")));
        }
        pieces.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let (tokens, scores): (Vec<String>, Vec<f64>) = pieces.into_iter().unzip();
        let vocab_for_trie: Vec<String> = tokens.clone();
        SubwordModel::assemble(level, coverage, tokens, move |_| {
            let mut logp = vec![f64::NEG_INFINITY; NUM_RESERVED];
            logp.extend(scores);
            let mut names = vec![String::new(); NUM_RESERVED];
            names.extend(vocab_for_trie);
            Ok(Payload::Unigram(UnigramTables::new(logp, &names)))
        })
    }

    /// Samples a segmentation with probability proportional to the product
    /// of token probabilities raised to `alpha`. Deterministic in `seed`.
    pub fn sample_encode(&self, seq: &NormalizedSeq, alpha: f64, seed: u64) -> Result<TokenizedSeq> {
        self.sample_encode_stream(seq, alpha, seed, 0)
    }

    /// As [`sample_encode`](Self::sample_encode) with an explicit RNG
    /// stream, so line `k` of a corpus can be sampled independently.
    pub fn sample_encode_stream(
        &self,
        seq: &NormalizedSeq,
        alpha: f64,
        seed: u64,
        stream: u64,
    ) -> Result<TokenizedSeq> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        let Payload::Unigram(tables) = &self.payload else {
            return Err(Error::InvalidParameter("sampling needs a unigram model".into()));
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let (chars, ends) = unit_char_form(seq, self.level);
        let mut ids = Vec::new();
        for_each_seg(&chars, &ends, |c| self.is_covered(c), |seg| match seg {
            Seg::Text(t) => tables.sample(t, alpha, &mut rng, &mut ids),
            Seg::Unk(_) => ids.push(UNK_ID),
        });
        Ok(self.tokenized(ids))
    }
}

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::seeds::seed_substrings;
use super::{log_add, viterbi_path, Edges, Trie, NO_TOKEN};
use crate::atom::NormalizedSeq;
use crate::error::{Error, Result};
use crate::granularity::Level;
use crate::model::{coverage_charset, SubwordModel, NUM_RESERVED};
use crate::units::{collect_units, with_structural, Units};

#[derive(Debug, Clone, Copy)]
pub struct UnigramConfig {
    pub level: Level,
    /// Target number of ids, reserved tokens included.
    pub vocab_size: usize,
    pub coverage: f64,
    pub seed_multiplier: usize,
    pub shrink_factor: f64,
    /// EM iterations per pruning round.
    pub em_iterations: usize,
    /// Longest seed piece, in chars.
    pub max_piece_len: usize,
}

impl Default for UnigramConfig {
    fn default() -> Self {
        UnigramConfig {
            level: Level::L0,
            vocab_size: 8000,
            coverage: 0.9999,
            seed_multiplier: 10,
            shrink_factor: 0.75,
            em_iterations: 2,
            max_piece_len: 16,
        }
    }
}

/// Diagnostics from a training run.
#[derive(Debug, Clone, Default)]
pub struct UnigramTrace {
    /// Corpus log-likelihood before each EM update, one list per round of
    /// fixed vocabulary.
    pub em_log_likelihoods: Vec<Vec<f64>>,
    /// Vocabulary size (reserved tokens excluded) at the start of each round.
    pub round_sizes: Vec<usize>,
    pub seed_count: usize,
}

pub fn train_unigram(corpus: &[NormalizedSeq], cfg: &UnigramConfig) -> Result<SubwordModel> {
    train_unigram_traced(corpus, cfg).map(|(m, _)| m)
}

/// Number of work chunks; fixed so reductions do not depend on threads.
const CHUNKS: usize = 64;

struct State<'a> {
    units: &'a Units,
    pieces: Vec<String>,
    logp: Vec<f64>,
    is_char: Vec<bool>,
    trie: Trie,
}

impl State<'_> {
    fn rebuild_trie(&mut self) {
        self.trie = Trie::new();
        for (i, p) in self.pieces.iter().enumerate() {
            self.trie.insert(p, i as u32);
        }
    }

    fn chunks(&self) -> Vec<std::ops::Range<usize>> {
        let n = self.units.len();
        let size = n.div_ceil(CHUNKS).max(1);
        (0..n).step_by(size).map(|s| s..(s + size).min(n)).collect()
    }

    /// Expected token counts and corpus log-likelihood.
    fn e_step(&self) -> (Vec<f64>, f64) {
        let parts: Vec<(Vec<f64>, f64)> = self
            .chunks()
            .into_par_iter()
            .map(|range| {
                let mut expected = vec![0.0; self.pieces.len()];
                let mut ll = 0.0;
                let mut alpha = Vec::new();
                let mut beta = Vec::new();
                let mut incoming: Vec<(u32, u32)> = Vec::new();
                let mut in_off: Vec<u32> = Vec::new();
                for u in range {
                    let text = &self.units.texts[u];
                    let w = self.units.weights[u] as f64;
                    let z = forward_backward(
                        &self.trie,
                        &self.logp,
                        text,
                        &mut alpha,
                        &mut beta,
                        &mut incoming,
                        &mut in_off,
                        w,
                        &mut expected,
                    );
                    ll += w * z;
                }
                (expected, ll)
            })
            .collect();
        let mut expected = vec![0.0; self.pieces.len()];
        let mut ll = 0.0;
        for (e, l) in parts {
            for (a, b) in expected.iter_mut().zip(e) {
                *a += b;
            }
            ll += l;
        }
        (expected, ll)
    }

    fn m_step(&mut self, expected: &[f64]) {
        let total: f64 = expected.iter().sum();
        for (lp, &e) in self.logp.iter_mut().zip(expected) {
            *lp = if e > 0.0 { (e / total).ln() } else { f64::NEG_INFINITY };
        }
    }

    /// Weighted token counts of the best segmentations.
    fn viterbi_counts(&self) -> Vec<f64> {
        let parts: Vec<Vec<f64>> = self
            .chunks()
            .into_par_iter()
            .map(|range| {
                let mut counts = vec![0.0; self.pieces.len()];
                for u in range {
                    let w = self.units.weights[u] as f64;
                    let path = viterbi_path(
                        &self.trie,
                        &self.logp,
                        &self.pieces,
                        &self.units.texts[u],
                        NO_TOKEN,
                    )
                    .expect("chars keep every unit segmentable");
                    for id in path {
                        counts[id as usize] += w;
                    }
                }
                counts
            })
            .collect();
        let mut counts = vec![0.0; self.pieces.len()];
        for part in parts {
            for (a, b) in counts.iter_mut().zip(part) {
                *a += b;
            }
        }
        counts
    }

    /// EM can starve a char whose occurrences all sit inside longer pieces.
    /// Such chars get a floor probability so every piece keeps a fallback
    /// segmentation.
    fn revive_chars(&mut self) {
        let min = self.logp.iter().copied().filter(|l| l.is_finite()).fold(f64::INFINITY, f64::min);
        if !min.is_finite() {
            return;
        }
        let mut revived = false;
        for (lp, &c) in self.logp.iter_mut().zip(&self.is_char) {
            if c && *lp == f64::NEG_INFINITY {
                *lp = min - 10.0;
                revived = true;
            }
        }
        if revived {
            let norm = self.logp.iter().fold(f64::NEG_INFINITY, |a, &b| log_add(a, b));
            for lp in &mut self.logp {
                *lp -= norm;
            }
        }
    }

    /// Drops the pieces whose removal costs the least likelihood, keeping
    /// `keep` pieces in total. Single chars always stay.
    fn prune(&mut self, keep: usize) {
        self.revive_chars();
        let freq = self.viterbi_counts();
        let sum: f64 = freq.iter().sum();
        let logsum = sum.ln();
        let losses: Vec<f64> = (0..self.pieces.len())
            .into_par_iter()
            .map(|id| {
                if self.is_char[id] {
                    return f64::INFINITY;
                }
                let f = freq[id];
                if f <= 0.0 || self.logp[id] == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                let chars: Vec<char> = self.pieces[id].chars().collect();
                let alts = viterbi_path(&self.trie, &self.logp, &self.pieces, &chars, id as u32)
                    .expect("chars keep every piece segmentable");
                // Likelihood change when the piece's occurrences are
                // re-segmented into its best alternative.
                let logp_piece = f.ln() - logsum;
                let logsum_alt = (sum + f * (alts.len() as f64 - 1.0)).ln();
                let logp_alt: f64 = alts
                    .iter()
                    .map(|&a| (freq[a as usize] + f).ln() - logsum_alt)
                    .sum();
                f * (logp_piece - logp_alt)
            })
            .collect();
        let mut order: Vec<usize> = (0..self.pieces.len()).collect();
        order.sort_by(|&a, &b| {
            losses[b]
                .total_cmp(&losses[a])
                .then_with(|| self.pieces[a].cmp(&self.pieces[b]))
        });
        order.truncate(keep.max(self.is_char.iter().filter(|&&c| c).count()));
        order.sort_unstable();
        self.pieces = order.iter().map(|&i| std::mem::take(&mut self.pieces[i])).collect();
        self.logp = order.iter().map(|&i| self.logp[i]).collect();
        self.is_char = order.iter().map(|&i| self.is_char[i]).collect();
        self.rebuild_trie();
    }
}

/// Adds one unit's expected counts (scaled by `w`) into `expected` and
/// returns its log partition value.
#[allow(clippy::too_many_arguments)]
fn forward_backward(
    trie: &Trie,
    logp: &[f64],
    text: &[char],
    alpha: &mut Vec<f64>,
    beta: &mut Vec<f64>,
    incoming: &mut Vec<(u32, u32)>,
    in_off: &mut Vec<u32>,
    w: f64,
    expected: &mut [f64],
) -> f64 {
    let n = text.len();
    let edges = Edges::build(trie, logp, text, NO_TOKEN);
    // Group edges by end for the forward pass.
    in_off.clear();
    in_off.resize(n + 2, 0);
    for &e in &edges.ends {
        in_off[e as usize + 1] += 1;
    }
    for j in 1..n + 2 {
        in_off[j] += in_off[j - 1];
    }
    incoming.clear();
    incoming.resize(edges.ends.len(), (0, 0));
    let mut fill = in_off.clone();
    for i in 0..n {
        for e in edges.from(i) {
            let j = edges.ends[e] as usize;
            incoming[fill[j] as usize] = (i as u32, edges.ids[e]);
            fill[j] += 1;
        }
    }

    alpha.clear();
    alpha.resize(n + 1, f64::NEG_INFINITY);
    alpha[0] = 0.0;
    for j in 1..=n {
        let inc = &incoming[in_off[j] as usize..in_off[j + 1] as usize];
        alpha[j] = log_sum(inc.iter().map(|&(i, id)| alpha[i as usize] + logp[id as usize]));
    }
    beta.clear();
    beta.resize(n + 1, f64::NEG_INFINITY);
    beta[n] = 0.0;
    for i in (0..n).rev() {
        beta[i] = log_sum(
            edges
                .from(i)
                .map(|e| logp[edges.ids[e] as usize] + beta[edges.ends[e] as usize]),
        );
    }
    let z = alpha[n];
    if z == f64::NEG_INFINITY {
        return z;
    }
    for i in 0..n {
        if alpha[i] == f64::NEG_INFINITY {
            continue;
        }
        for e in edges.from(i) {
            let id = edges.ids[e] as usize;
            let post = alpha[i] + logp[id] + beta[edges.ends[e] as usize] - z;
            expected[id] += w * post.exp();
        }
    }
    z
}

fn log_sum(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Trains a unigram model and returns it with training diagnostics.
pub fn train_unigram_traced(
    corpus: &[NormalizedSeq],
    cfg: &UnigramConfig,
) -> Result<(SubwordModel, UnigramTrace)> {
    if cfg.seed_multiplier < 2 {
        return Err(Error::InvalidParameter("seed_multiplier must be at least 2".into()));
    }
    if !(cfg.shrink_factor > 0.0 && cfg.shrink_factor < 1.0) {
        return Err(Error::InvalidParameter("shrink_factor must be in (0, 1)".into()));
    }
    if cfg.em_iterations == 0 || cfg.max_piece_len == 0 {
        return Err(Error::InvalidParameter(
            "em_iterations and max_piece_len must be positive".into(),
        ));
    }
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
    let target = cfg.vocab_size - NUM_RESERVED;
    let units = collect_units(corpus, cfg.level, &charset);

    let mut char_freq: FxHashMap<char, u64> = FxHashMap::default();
    for (t, &w) in units.texts.iter().zip(&units.weights) {
        for &c in t {
            *char_freq.entry(c).or_insert(0) += w;
        }
    }
    let limit = cfg.seed_multiplier.saturating_mul(cfg.vocab_size);
    let seeds = seed_substrings(&units, cfg.level, cfg.max_piece_len, limit);
    let mut trace = UnigramTrace {
        seed_count: seeds.len(),
        ..Default::default()
    };

    let mut pieces = Vec::with_capacity(alphabet.len() + seeds.len());
    let mut freqs = Vec::with_capacity(pieces.capacity());
    let mut is_char = Vec::with_capacity(pieces.capacity());
    for &c in &alphabet {
        pieces.push(c.to_string());
        freqs.push(char_freq.get(&c).copied().unwrap_or(0) as f64);
        is_char.push(true);
    }
    for (s, f) in seeds {
        pieces.push(s);
        freqs.push(f as f64);
        is_char.push(false);
    }
    let total: f64 = freqs.iter().sum();
    let logp = freqs
        .iter()
        .map(|&f| if f > 0.0 { (f / total).ln() } else { f64::NEG_INFINITY })
        .collect();
    let mut st = State {
        units: &units,
        pieces,
        logp,
        is_char,
        trie: Trie::new(),
    };
    st.rebuild_trie();

    loop {
        trace.round_sizes.push(st.pieces.len());
        let mut lls = Vec::with_capacity(cfg.em_iterations);
        for _ in 0..cfg.em_iterations {
            let (expected, ll) = st.e_step();
            lls.push(ll);
            st.m_step(&expected);
        }
        trace.em_log_likelihoods.push(lls);
        if st.pieces.len() <= target {
            break;
        }
        let shrunk = (st.pieces.len() as f64 * cfg.shrink_factor) as usize;
        st.prune(target.max(shrunk));
    }

    let pieces = finalize(st.pieces, st.logp);
    let model = SubwordModel::from_unigram_pieces(cfg.level, cfg.coverage, pieces)?;
    Ok((model, trace))
}

/// Gives zero-probability pieces a floor below the smallest probability and
/// renormalizes so probabilities sum to one.
fn finalize(pieces: Vec<String>, logp: Vec<f64>) -> Vec<(String, f64)> {
    let min = logp
        .iter()
        .copied()
        .filter(|l| l.is_finite())
        .fold(f64::INFINITY, f64::min);
    let floor = if min.is_finite() { min - 10.0 } else { 0.0 };
    let raw: Vec<f64> = logp
        .iter()
        .map(|&l| if l.is_finite() { l } else { floor })
        .collect();
    let norm = raw.iter().fold(f64::NEG_INFINITY, |a, &b| log_add(a, b));
    pieces
        .into_iter()
        .zip(raw)
        .map(|(p, l)| (p, (l - norm).min(0.0)))
        .collect()
}

//! The trained-model type shared by both algorithms.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::atom::{NormalizedSeq, SourceLang};
use crate::bpe::BpeTables;
use crate::error::{Error, Result};
use crate::granularity::{token_valid, Level};
use crate::symbols::{self, UNK_CHAR};
use crate::unigram::UnigramTables;
use crate::units::{for_each_seg, unit_char_form, Seg};

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;
pub const BOS_ID: u32 = 2;
pub const EOS_ID: u32 = 3;
pub const RESERVED_TOKENS: [&str; 4] = ["<pad>", "<unk>", "<s>", "</s>"];
pub const NUM_RESERVED: usize = RESERVED_TOKENS.len();

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bpe,
    Unigram,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Bpe => "bpe",
            Algorithm::Unigram => "unigram",
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Payload {
    Bpe(BpeTables),
    Unigram(UnigramTables),
}

/// A trained tokenizer. Immutable; share freely across threads.
#[derive(Debug, Clone)]
pub struct SubwordModel {
    pub(crate) level: Level,
    pub(crate) coverage: f64,
    pub(crate) vocab: Vec<String>,
    pub(crate) ids: FxHashMap<String, u32>,
    pub(crate) alphabet: FxHashMap<char, u32>,
    pub(crate) payload: Payload,
    pub(crate) fingerprint: String,
}

/// Token ids plus their strings.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenizedSeq {
    pub ids: Vec<u32>,
    pub tokens: Vec<String>,
    /// Fingerprint of the model that produced the encoding.
    pub model_id: String,
}

impl TokenizedSeq {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Serialized text the tokens spell, structural symbols as names.
    pub fn detokenize(&self) -> String {
        detokenize_tokens(&self.tokens)
    }
}

pub(crate) fn token_display(token: &str) -> &str {
    match token {
        "<unk>" => "\u{FFFD}",
        t if RESERVED_TOKENS.contains(&t) => "",
        t => t,
    }
}

pub(crate) fn detokenize_tokens(tokens: &[String]) -> String {
    symbols::detokenize(tokens.iter().map(|t| token_display(t)))
}

impl SubwordModel {
    /// Builds the id map: reserved tokens, then `tokens` in order.
    pub(crate) fn assemble(
        level: Level,
        coverage: f64,
        tokens: Vec<String>,
        payload: impl FnOnce(&FxHashMap<String, u32>) -> Result<Payload>,
    ) -> Result<SubwordModel> {
        let mut vocab: Vec<String> = RESERVED_TOKENS.iter().map(|s| s.to_string()).collect();
        vocab.extend(tokens);
        let mut ids = FxHashMap::default();
        let mut alphabet = FxHashMap::default();
        for (i, tok) in vocab.iter().enumerate() {
            if ids.insert(tok.clone(), i as u32).is_some() {
                return Err(Error::MalformedModel(format!("duplicate token {tok:?}")));
            }
            if i < NUM_RESERVED {
                continue;
            }
            if !token_valid(tok, level) {
                return Err(Error::MalformedModel(format!(
                    "token {:?} not allowed at level {}",
                    symbols::render(tok),
                    level.get()
                )));
            }
            let mut chars = tok.chars();
            if let (Some(c), None) = (chars.next(), chars.next()) {
                alphabet.insert(c, i as u32);
            }
        }
        for c in symbols::structural_chars() {
            if !alphabet.contains_key(&c) {
                return Err(Error::MalformedModel(format!(
                    "alphabet lacks structural symbol U+{:04X}",
                    c as u32
                )));
            }
        }
        let payload = payload(&ids)?;
        let mut model = SubwordModel {
            level,
            coverage,
            vocab,
            ids,
            alphabet,
            payload,
            fingerprint: String::new(),
        };
        model.fingerprint = crate::store::fingerprint(&model);
        Ok(model)
    }

    pub fn algorithm(&self) -> Algorithm {
        match self.payload {
            Payload::Bpe(_) => Algorithm::Bpe,
            Payload::Unigram(_) => Algorithm::Unigram,
        }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    /// Number of ids, reserved tokens included.
    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// Token strings indexed by id (char form).
    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    /// Non-reserved tokens.
    pub fn tokens(&self) -> &[String] {
        &self.vocab[NUM_RESERVED..]
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.vocab.get(id as usize).map(String::as_str)
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn is_covered(&self, c: char) -> bool {
        self.alphabet.contains_key(&c)
    }

    /// Covered characters, structural symbols included.
    pub fn alphabet(&self) -> Vec<char> {
        let mut chars: Vec<char> = self.alphabet.keys().copied().collect();
        chars.sort_unstable();
        chars
    }

    /// Content hash identifying the model.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// BPE merges in rank order.
    pub fn merges(&self) -> Option<Vec<(&str, &str)>> {
        match &self.payload {
            Payload::Bpe(t) => Some(
                t.merges
                    .iter()
                    .map(|&(a, b)| (self.vocab[a as usize].as_str(), self.vocab[b as usize].as_str()))
                    .collect(),
            ),
            Payload::Unigram(_) => None,
        }
    }

    /// Unigram log-probability of a token.
    pub fn log_prob(&self, id: u32) -> Option<f64> {
        match &self.payload {
            Payload::Unigram(t) => t.logp.get(id as usize).copied(),
            Payload::Bpe(_) => None,
        }
    }

    pub(crate) fn encode_text(&self, text: &[char], ids: &mut Vec<u32>) {
        match &self.payload {
            Payload::Bpe(t) => t.encode(self, text, ids),
            Payload::Unigram(t) => t.viterbi(self, text, ids),
        }
    }

    /// Tokenizes a normalized sequence. BOS/EOS are not added.
    pub fn encode(&self, seq: &NormalizedSeq) -> TokenizedSeq {
        let ids = self.encode_ids(seq);
        self.tokenized(ids)
    }

    pub fn encode_ids(&self, seq: &NormalizedSeq) -> Vec<u32> {
        let (chars, ends) = unit_char_form(seq, self.level);
        let mut ids = Vec::with_capacity(chars.len() / 2);
        for_each_seg(&chars, &ends, |c| self.is_covered(c), |seg| match seg {
            Seg::Text(t) => self.encode_text(t, &mut ids),
            Seg::Unk(_) => ids.push(UNK_ID),
        });
        ids
    }

    /// Encodes many sequences in parallel; output order follows input.
    pub fn encode_batch(&self, corpus: &[NormalizedSeq]) -> Vec<TokenizedSeq> {
        corpus.par_iter().map(|s| self.encode(s)).collect()
    }

    pub(crate) fn tokenized(&self, ids: Vec<u32>) -> TokenizedSeq {
        let tokens = ids.iter().map(|&i| self.vocab[i as usize].clone()).collect();
        TokenizedSeq {
            ids,
            tokens,
            model_id: self.fingerprint.clone(),
        }
    }

    /// Wraps known-valid ids.
    pub fn tokenized_from_ids(&self, ids: &[u32]) -> Result<TokenizedSeq> {
        if let Some(&bad) = ids.iter().find(|&&i| i as usize >= self.vocab.len()) {
            return Err(Error::UnknownId(bad));
        }
        Ok(self.tokenized(ids.to_vec()))
    }

    /// Inverse of [`encode`](Self::encode) on covered input. PAD/BOS/EOS
    /// are skipped and UNK decodes to U+FFFD.
    pub fn decode(&self, ids: &[u32], lang: SourceLang) -> Result<NormalizedSeq> {
        let mut stream = String::new();
        for &id in ids {
            let tok = self.vocab.get(id as usize).ok_or(Error::UnknownId(id))?;
            match id {
                PAD_ID | BOS_ID | EOS_ID => {}
                UNK_ID => stream.push(UNK_CHAR),
                _ => stream.push_str(tok),
            }
        }
        Ok(NormalizedSeq::new(symbols::atoms_from_char_form(&stream), lang))
    }
}

/// Characters kept in the alphabet at the given coverage.
///
/// Chars are dropped rarest first (ties: higher code point first) while
/// the dropped mass stays within `(1 - coverage)` of the total; the
/// retained set therefore covers at least `coverage` of the mass. The
/// marker and structural symbols are not counted and always kept.
pub fn coverage_charset(corpus: &[NormalizedSeq], coverage: f64) -> Result<FxHashSet<char>> {
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::InvalidParameter(format!("coverage {coverage} not in (0, 1]")));
    }
    let counts = char_counts(corpus);
    let total: u64 = counts.values().sum();
    if total == 0 && corpus.iter().all(NormalizedSeq::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    let mut by_freq: Vec<(char, u64)> = counts.into_iter().collect();
    by_freq.sort_unstable_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
    let budget = (1.0 - coverage) * total as f64 + 1e-9;
    let mut dropped = 0u64;
    let mut keep_from = 0;
    for (i, &(_, n)) in by_freq.iter().enumerate() {
        if (dropped + n) as f64 > budget {
            keep_from = i;
            break;
        }
        dropped += n;
        keep_from = i + 1;
    }
    let mut set: FxHashSet<char> = by_freq[keep_from..].iter().map(|&(c, _)| c).collect();
    set.extend(symbols::structural_chars());
    Ok(set)
}

/// Frequencies of atom-text characters (markers and structural atoms
/// excluded), in a deterministic order.
pub fn char_counts(corpus: &[NormalizedSeq]) -> BTreeMap<char, u64> {
    corpus
        .par_iter()
        .fold(FxHashMap::<char, u64>::default, |mut acc, seq| {
            for atom in &seq.atoms {
                if atom.as_special().is_none() {
                    for c in atom.text().chars() {
                        *acc.entry(c).or_insert(0) += 1;
                    }
                }
            }
            acc
        })
        .reduce(FxHashMap::default, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        })
        .into_iter()
        .collect()
}

//! Shared fixtures and brute-force reference implementations.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;
use std::path::PathBuf;

use codetok::symbols::{self, char_form};
use codetok::{pretokenize, token_valid, Atom, Level, NormalizedSeq, SourceLang, Special};
use rand::Rng;

pub fn desk_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/desk")
}

/// Reads one gzipped desk corpus.
pub fn load_desk(name: &str, lang: SourceLang) -> Vec<NormalizedSeq> {
    let path = desk_dir().join(name);
    let file = std::fs::File::open(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut text = String::new();
    flate2::read::MultiGzDecoder::new(file)
        .read_to_string(&mut text)
        .unwrap();
    codetok::parse_corpus(&text, lang).unwrap()
}

pub fn python() -> Vec<NormalizedSeq> {
    load_desk("python.txt.gz", SourceLang::Indented)
}

pub fn java() -> Vec<NormalizedSeq> {
    load_desk("java.txt.gz", SourceLang::Braced)
}

/// Training units as char-form strings: pre-tokens at levels 0-2, whole
/// sequences above.
pub fn units(corpus: &[NormalizedSeq], level: Level) -> Vec<String> {
    let mut out = Vec::new();
    for seq in corpus {
        if level.has_boundaries() {
            out.extend(pretokenize(seq, level).unwrap().into_iter().map(|p| p.char_form));
        } else if !seq.is_empty() {
            out.push(char_form(&seq.atoms));
        }
    }
    out
}

/// Alphabet of a fully covered corpus, structural chars included.
pub fn full_alphabet(corpus: &[NormalizedSeq]) -> Vec<char> {
    let mut set: BTreeSet<char> = symbols::structural_chars().into_iter().collect();
    for seq in corpus {
        set.extend(char_form(&seq.atoms).chars());
    }
    set.into_iter().collect()
}

/// Textbook BPE: recount every valid adjacent pair from scratch, merge
/// the most frequent (ties to the smallest pair), repeat. Returns the
/// merges and the final segmentation of every unit.
pub fn brute_bpe(
    units: &[String],
    alphabet: &[char],
    level: Level,
    max_merges: usize,
) -> (Vec<(String, String)>, Vec<Vec<String>>) {
    let mut segs: Vec<Vec<String>> = units
        .iter()
        .map(|u| u.chars().map(String::from).collect())
        .collect();
    let mut vocab: BTreeSet<String> = alphabet.iter().map(|c| c.to_string()).collect();
    let mut merges = Vec::new();
    while merges.len() < max_merges {
        let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
        for s in &segs {
            for w in s.windows(2) {
                let cat = format!("{}{}", w[0], w[1]);
                if token_valid(&cat, level) && !vocab.contains(&cat) {
                    *counts.entry((w[0].clone(), w[1].clone())).or_default() += 1;
                }
            }
        }
        // BTreeMap order makes the first maximum the smallest pair.
        let mut best: Option<(&(String, String), u64)> = None;
        for (pair, &c) in &counts {
            if best.map_or(true, |(_, b)| c > b) {
                best = Some((pair, c));
            }
        }
        let Some((pair, c)) = best else { break };
        if c < 2 {
            break;
        }
        let (l, r) = pair.clone();
        let cat = format!("{l}{r}");
        for s in &mut segs {
            let mut out = Vec::with_capacity(s.len());
            let mut i = 0;
            while i < s.len() {
                if i + 1 < s.len() && s[i] == l && s[i + 1] == r {
                    out.push(cat.clone());
                    i += 2;
                } else {
                    out.push(s[i].clone());
                    i += 1;
                }
            }
            *s = out;
        }
        vocab.insert(cat);
        merges.push((l, r));
    }
    (merges, segs)
}

/// Applies merges to one unit: the lowest-rank adjacent pair, leftmost
/// first, until none applies.
pub fn brute_bpe_encode(unit: &str, merges: &[(String, String)]) -> Vec<String> {
    let rank: HashMap<(&str, &str), usize> = merges
        .iter()
        .enumerate()
        .map(|(r, (a, b))| ((a.as_str(), b.as_str()), r))
        .collect();
    let mut s: Vec<String> = unit.chars().map(String::from).collect();
    loop {
        let best = (0..s.len().saturating_sub(1))
            .filter_map(|i| rank.get(&(s[i].as_str(), s[i + 1].as_str())).map(|&r| (r, i)))
            .min();
        let Some((_, i)) = best else { return s };
        let right = s.remove(i + 1);
        s[i].push_str(&right);
    }
}

fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Exhaustive best segmentation: highest score, then fewer tokens, then the
/// lexicographically smallest token list.
pub fn brute_viterbi(text: &str, pieces: &HashMap<String, f64>) -> Option<Vec<String>> {
    let chars: Vec<char> = text.chars().collect();
    let mut all: Vec<(f64, Vec<String>)> = Vec::new();
    fn walk(
        chars: &[char],
        at: usize,
        pieces: &HashMap<String, f64>,
        cur: &mut Vec<String>,
        score: f64,
        all: &mut Vec<(f64, Vec<String>)>,
    ) {
        if at == chars.len() {
            all.push((score, cur.clone()));
            return;
        }
        for end in at + 1..=chars.len() {
            let piece: String = chars[at..end].iter().collect();
            if let Some(&s) = pieces.get(&piece) {
                cur.push(piece);
                walk(chars, end, pieces, cur, score + s, all);
                cur.pop();
            }
        }
    }
    walk(&chars, 0, pieces, &mut Vec::new(), 0.0, &mut all);
    let best = all.iter().map(|a| a.0).fold(f64::NEG_INFINITY, f64::max);
    all.into_iter()
        .filter(|a| ties(a.0, best))
        .map(|a| a.1)
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
}

/// Random atom drawn from small word and punctuation pools plus the
/// structural atoms.
pub fn random_atom(rng: &mut impl Rng, letters: &[char], puncts: &[char]) -> Atom {
    match rng.gen_range(0..10) {
        0..=5 => {
            let len = rng.gen_range(1..=4);
            let w: String = (0..len).map(|_| letters[rng.gen_range(0..letters.len())]).collect();
            Atom::word(&w)
        }
        6..=8 => Atom::punct(puncts[rng.gen_range(0..puncts.len())]),
        _ => Atom::special([Special::NewLine, Special::Indent, Special::Dedent][rng.gen_range(0..3)]),
    }
}

pub fn random_seq(rng: &mut impl Rng, max_atoms: usize, letters: &[char], puncts: &[char]) -> NormalizedSeq {
    let n = rng.gen_range(0..=max_atoms);
    NormalizedSeq::new(
        (0..n).map(|_| random_atom(rng, letters, puncts)).collect(),
        SourceLang::Braced,
    )
}

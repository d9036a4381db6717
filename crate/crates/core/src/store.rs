//! Versioned JSON model files with a content checksum.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::atom::Special;
use crate::bpe::bpe_model;
use crate::error::{Error, Result};
use crate::granularity::Level;
use crate::model::{Algorithm, Payload, SubwordModel, NUM_RESERVED, RESERVED_TOKENS};
use crate::symbols::{self, MARKER};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ReservedEntry {
    token: String,
    id: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct StructuralEntry {
    name: String,
    codepoint: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct VocabEntry {
    id: u32,
    token: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rank: Option<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelBody {
    format_version: u64,
    algorithm: Algorithm,
    level: Level,
    coverage: f64,
    marker: u32,
    specials: Vec<ReservedEntry>,
    structural: Vec<StructuralEntry>,
    vocab: Vec<VocabEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    merges: Vec<(String, String)>,
}

#[derive(Serialize)]
struct ModelFile<'a> {
    #[serde(flatten)]
    body: &'a ModelBody,
    checksum: String,
}

fn body(model: &SubwordModel) -> ModelBody {
    let merges: Vec<(String, String)> = model
        .merges()
        .unwrap_or_default()
        .into_iter()
        .map(|(a, b)| (a.to_owned(), b.to_owned()))
        .collect();
    let first_merge = model.vocab.len() - merges.len();
    let vocab = model
        .vocab
        .iter()
        .enumerate()
        .skip(NUM_RESERVED)
        .map(|(id, token)| {
            let (score, rank) = match &model.payload {
                Payload::Unigram(t) => (Some(t.logp[id]), None),
                Payload::Bpe(_) => (None, id.checked_sub(first_merge).map(|r| r as u32)),
            };
            VocabEntry {
                id: id as u32,
                token: token.clone(),
                score,
                rank,
            }
        })
        .collect();
    ModelBody {
        format_version: FORMAT_VERSION,
        algorithm: model.algorithm(),
        level: model.level,
        coverage: model.coverage,
        marker: MARKER as u32,
        specials: RESERVED_TOKENS
            .iter()
            .enumerate()
            .map(|(i, t)| ReservedEntry {
                token: t.to_string(),
                id: i as u32,
            })
            .collect(),
        structural: Special::ALL
            .iter()
            .map(|&s| StructuralEntry {
                name: s.name().to_owned(),
                codepoint: symbols::special_symbol(s) as u32,
            })
            .collect(),
        vocab,
        merges,
    }
}

fn checksum(body: &ModelBody) -> String {
    let canonical = serde_json::to_string(body).expect("model body serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn fingerprint(model: &SubwordModel) -> String {
    checksum(&body(model))
}

/// Serialized model file contents.
pub fn to_json(model: &SubwordModel) -> String {
    let body = body(model);
    let file = ModelFile {
        checksum: checksum(&body),
        body: &body,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
    s.push('\n');
    s
}

pub fn save(model: &SubwordModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json(model))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<SubwordModel> {
    from_json(&fs::read_to_string(path)?)
}

pub fn from_json(text: &str) -> Result<SubwordModel> {
    let mut value: Value = serde_json::from_str(text)
        .map_err(|e| Error::ChecksumMismatch(format!("model file is truncated or unreadable: {e}")))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::MalformedModel("top level is not an object".into()))?;
    let found = obj
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::MalformedModel("missing format_version".into()))?;
    if found != FORMAT_VERSION {
        return Err(Error::FormatVersionMismatch {
            found,
            expected: FORMAT_VERSION,
        });
    }
    let stored = match obj.remove("checksum") {
        Some(Value::String(s)) => s,
        _ => return Err(Error::ChecksumMismatch("missing checksum".into())),
    };
    let body: ModelBody =
        serde_json::from_value(value).map_err(|e| Error::MalformedModel(e.to_string()))?;
    let actual = checksum(&body);
    if actual != stored {
        return Err(Error::ChecksumMismatch(format!("stored {stored}, computed {actual}")));
    }
    let model = rebuild(body)?;
    debug_assert_eq!(model.fingerprint, stored);
    Ok(model)
}

fn rebuild(body: ModelBody) -> Result<SubwordModel> {
    let bad = |m: String| Err(Error::MalformedModel(m));
    if body.marker != MARKER as u32 {
        return bad(format!("unsupported marker U+{:04X}", body.marker));
    }
    if body.specials.len() != NUM_RESERVED
        || body
            .specials
            .iter()
            .enumerate()
            .any(|(i, e)| e.id != i as u32 || e.token != RESERVED_TOKENS[i])
    {
        return bad("reserved tokens differ from <pad>, <unk>, <s>, </s> at ids 0-3".into());
    }
    for (e, &s) in body.structural.iter().zip(Special::ALL.iter()) {
        if e.name != s.name() || e.codepoint != symbols::special_symbol(s) as u32 {
            return bad(format!("unexpected structural symbol {}", e.name));
        }
    }
    if body.structural.len() != Special::ALL.len() {
        return bad("structural symbol table incomplete".into());
    }
    for (i, e) in body.vocab.iter().enumerate() {
        if e.id as usize != NUM_RESERVED + i {
            return bad(format!("vocab entry {i} has id {}", e.id));
        }
    }
    match body.algorithm {
        Algorithm::Bpe => {
            let n_alpha = body.vocab.len().saturating_sub(body.merges.len());
            let mut alphabet = Vec::with_capacity(n_alpha);
            for e in &body.vocab[..n_alpha] {
                let mut chars = e.token.chars();
                match (chars.next(), chars.next(), e.rank) {
                    (Some(c), None, None) => alphabet.push(c),
                    _ => return bad(format!("{:?} is not an alphabet symbol", e.token)),
                }
            }
            for (k, (e, (a, b))) in body.vocab[n_alpha..].iter().zip(&body.merges).enumerate() {
                if e.rank != Some(k as u32) || e.token != format!("{a}{b}") {
                    return bad(format!("merge {k} does not match vocab entry {:?}", e.token));
                }
            }
            bpe_model(body.level, body.coverage, &alphabet, &body.merges)
        }
        Algorithm::Unigram => {
            let mut pieces = Vec::with_capacity(body.vocab.len());
            for e in body.vocab {
                let Some(score) = e.score else {
                    return bad(format!("{:?} has no score", e.token));
                };
                pieces.push((e.token, score));
            }
            let n = pieces.len();
            let model = SubwordModel::from_unigram_pieces(body.level, body.coverage, pieces)?;
            if model.vocab.len() != n + NUM_RESERVED {
                return bad("vocabulary changed on rebuild".into());
            }
            Ok(model)
        }
    }
}

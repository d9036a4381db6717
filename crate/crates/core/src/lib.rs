//! Code-aware subword tokenization.
//!
//! Raw source is normalized into atoms ([`normalize`]), a [`Level`]
//! restricts which composite tokens are legal, and BPE or unigram models
//! are trained over the result. The [`analysis`] module measures sequence
//! lengths, vocabulary composition, identifier alignment and frequency
//! profiles.

pub mod analysis;
pub mod atom;
pub mod bpe;
pub mod codec;
pub mod error;
pub mod granularity;
pub mod model;
pub mod normalize;
pub mod store;
pub mod symbols;
pub mod unigram;
mod units;

pub use atom::{parse_corpus, Atom, AtomClass, NormalizedSeq, SourceLang, Special};
pub use bpe::{train_bpe, BpeConfig};
pub use codec::{clip, fair_crop};
pub use error::{Error, Result};
pub use granularity::{
    boundary_predicate_agreement, display_token_valid, pretokenize, token_valid, Level, PreToken,
};
pub use model::{
    coverage_charset, Algorithm, SubwordModel, TokenizedSeq, BOS_ID, EOS_ID, PAD_ID, UNK_ID,
};
pub use normalize::{normalize, normalize_braced, normalize_indented, normalize_text};
pub use unigram::{train_unigram, train_unigram_traced, UnigramConfig, UnigramTrace};

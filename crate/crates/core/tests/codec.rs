mod common;

use codetok::codec::prefix_char_lengths;
use codetok::symbols::rendered_len;
use codetok::{
    clip, fair_crop, store, train_bpe, train_unigram, BpeConfig, Level, NormalizedSeq, SubwordModel,
    UnigramConfig, BOS_ID, EOS_ID, PAD_ID, UNK_ID,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

const LETTERS: [char; 6] = ['a', 'b', 'c', 'd', 'e', 'f'];
const PUNCTS: [char; 6] = ['(', ')', '.', ':', '=', ','];

fn corpus() -> Vec<NormalizedSeq> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    (0..300)
        .map(|_| common::random_seq(&mut rng, 20, &LETTERS, &PUNCTS))
        .collect()
}

/// One BPE and one unigram model per level, trained once.
fn models() -> &'static Vec<SubwordModel> {
    static MODELS: OnceLock<Vec<SubwordModel>> = OnceLock::new();
    MODELS.get_or_init(|| {
        let data = corpus();
        let vocab = common::full_alphabet(&data).len() + 4 + 80;
        let mut out = Vec::new();
        for level in Level::ALL {
            out.push(
                train_bpe(
                    &data,
                    &BpeConfig {
                        level,
                        vocab_size: vocab,
                        coverage: 1.0,
                    },
                )
                .unwrap(),
            );
            out.push(
                train_unigram(
                    &data,
                    &UnigramConfig {
                        level,
                        vocab_size: vocab,
                        coverage: 1.0,
                        ..UnigramConfig::default()
                    },
                )
                .unwrap(),
            );
        }
        out
    })
}

fn fuzz_seq(seed: u64) -> NormalizedSeq {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    common::random_seq(&mut rng, 30, &LETTERS, &PUNCTS)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn encode_decode_is_identity(seed in any::<u64>()) {
        let seq = fuzz_seq(seed);
        for m in models() {
            let enc = m.encode(&seq);
            prop_assert_eq!(enc.ids.len(), enc.tokens.len());
            for (&id, t) in enc.ids.iter().zip(&enc.tokens) {
                prop_assert_eq!(m.token(id), Some(t.as_str()));
            }
            prop_assert_eq!(enc.detokenize(), seq.to_line());
            prop_assert_eq!(m.decode(&enc.ids, seq.lang).unwrap(), seq.clone());
        }
    }

    #[test]
    fn clip_is_idempotent_and_prefix_monotone(seed in any::<u64>(), a in 0usize..40, b in 0usize..40) {
        let seq = fuzz_seq(seed);
        let enc = models()[1].encode(&seq);
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert_eq!(clip(&clip(&enc, lo), lo), clip(&enc, lo));
        let short = clip(&enc, lo);
        let long = clip(&enc, hi);
        prop_assert!(long.ids.starts_with(&short.ids));
        prop_assert_eq!(short.len(), enc.len().min(lo));
    }

    #[test]
    fn fair_crop_spans_agree(seed in any::<u64>(), max_len in 1usize..50) {
        let seq = fuzz_seq(seed);
        let encs: Vec<_> = models().iter().map(|m| m.encode(&seq)).collect();
        let cropped = fair_crop(&encs, max_len).unwrap();
        let longest = encs
            .iter()
            .flat_map(|e| &e.tokens)
            .map(|t| rendered_len(t))
            .max()
            .unwrap_or(0);
        let lens: Vec<usize> = cropped.iter().map(|c| c.detokenize().chars().count()).collect();
        let spread = lens.iter().max().unwrap() - lens.iter().min().unwrap();
        prop_assert!(spread <= longest, "{:?} longest {}", lens, longest);
        for (c, e) in cropped.iter().zip(&encs) {
            prop_assert!(c.len() <= max_len);
            prop_assert!(e.ids.starts_with(&c.ids));
            let full = e.detokenize();
            prop_assert!(full.starts_with(&c.detokenize()));
            prop_assert_eq!(*prefix_char_lengths(&c.tokens).last().unwrap(), c.detokenize().chars().count());
        }
    }
}

#[test]
fn uncovered_chars_become_unk_and_reserved_ids_vanish() {
    let m = &models()[0];
    let seq = NormalizedSeq::from_line("a € b", codetok::SourceLang::Braced).unwrap();
    let enc = m.encode(&seq);
    assert!(enc.ids.contains(&UNK_ID));
    assert_eq!(enc.detokenize(), "a \u{FFFD} b");
    let mut ids = vec![BOS_ID];
    ids.extend(m.encode(&fuzz_seq(3)).ids);
    ids.extend([EOS_ID, PAD_ID, PAD_ID]);
    assert_eq!(m.decode(&ids, codetok::SourceLang::Braced).unwrap(), fuzz_seq(3));
    assert!(m.decode(&[m.vocab_size() as u32], codetok::SourceLang::Braced).is_err());
}

#[test]
fn mismatched_texts_cannot_be_cropped() {
    let m = &models()[0];
    let a = m.encode(&NormalizedSeq::from_line("a b", codetok::SourceLang::Braced).unwrap());
    let b = m.encode(&NormalizedSeq::from_line("a c", codetok::SourceLang::Braced).unwrap());
    assert!(fair_crop(&[a, b], 10).is_err());
}

#[test]
fn store_roundtrip_preserves_behaviour() {
    let dir = std::env::temp_dir().join(format!("codetok-store-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for (i, m) in models().iter().enumerate() {
        let path = dir.join(format!("{i}.json"));
        store::save(m, &path).unwrap();
        let back = store::load(&path).unwrap();
        assert_eq!(back.fingerprint(), m.fingerprint());
        assert_eq!(back.vocab(), m.vocab());
        assert_eq!(back.level(), m.level());
        assert_eq!(back.algorithm(), m.algorithm());
        assert_eq!(store::to_json(&back), store::to_json(m));
        for seed in 0..20 {
            let s = fuzz_seq(seed);
            assert_eq!(back.encode(&s), m.encode(&s));
        }
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn damaged_model_files_are_rejected() {
    let text = store::to_json(&models()[1]);
    assert!(store::from_json(&text[..text.len() / 2]).is_err());
    let tampered = text.replacen("\"level\": 0", "\"level\": 1", 1);
    assert_ne!(tampered, text);
    assert!(matches!(
        store::from_json(&tampered),
        Err(codetok::Error::ChecksumMismatch(_))
    ));
    let future = text.replacen("\"format_version\": 1", "\"format_version\": 99", 1);
    assert!(matches!(
        store::from_json(&future),
        Err(codetok::Error::FormatVersionMismatch { found: 99, .. })
    ));
}

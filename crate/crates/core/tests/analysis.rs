use std::collections::BTreeSet;

use codetok::analysis::{
    alignment_report, cross_language_report, frequency_profile, io_intersection, jaccard,
    length_report, native_split, punctuation_mass, textual_tokens, vocab_composition,
};
use codetok::symbols::structural_chars;
use codetok::{Level, NormalizedSeq, SourceLang, SubwordModel};
use proptest::prelude::*;

fn line(s: &str) -> NormalizedSeq {
    NormalizedSeq::from_line(s, SourceLang::Braced).unwrap()
}

/// Unigram model from tokens with equal scores; structural chars added.
fn hand_model(level: Level, tokens: &[&str]) -> SubwordModel {
    let mut pieces: Vec<(String, f64)> = tokens.iter().map(|t| (t.to_string(), -1.0)).collect();
    for c in structural_chars() {
        if !tokens.contains(&c.to_string().as_str()) {
            pieces.push((c.to_string(), -5.0));
        }
    }
    SubwordModel::from_unigram_pieces(level, 1.0, pieces).unwrap()
}

#[test]
fn length_deltas_against_baseline() {
    let chars = hand_model(Level::L0, &["a", "b"]);
    let words = hand_model(Level::L0, &["a", "b", "▁ab", "▁a"]);
    let corpus = vec![line("ab ab"), line("a")];
    let r = length_report(&[("chars", &chars), ("words", &words)], &corpus, 0).unwrap();
    assert_eq!(r.sequences, 2);
    assert_eq!(r.entries[0].avg_tokens, 4.0);
    assert_eq!(r.entries[0].delta_pct, 0.0);
    assert_eq!(r.entries[1].avg_tokens, 1.5);
    assert_eq!(r.entries[1].delta_pct, -62.5);
    let swapped = length_report(&[("chars", &chars), ("words", &words)], &corpus, 1).unwrap();
    assert!((swapped.entries[0].delta_pct - 250.0 / 1.5).abs() < 1e-9);
    assert!(length_report(&[("chars", &chars)], &corpus, 3).is_err());
    assert!(length_report(&[("chars", &chars)], &[], 0).is_err());
}

#[test]
fn composition_counts_and_bracket_classes() {
    let l1 = hand_model(Level::L1, &["a", "(", ")", ":", "▁a", "▁(▁)", "▁)▁:", "▁(▁("]);
    let c = vocab_composition(&l1);
    assert_eq!(c.tokens, 8 + 4);
    assert_eq!((c.composite, c.punct_only), (3, 3));
    assert!((c.composite_fraction - 3.0 / 12.0).abs() < 1e-12);
    let b = c.bracket_classes;
    assert!((b.both - 1.0 / 3.0).abs() < 1e-12);
    assert!((b.closing_only - 1.0 / 3.0).abs() < 1e-12);
    assert!((b.opening_only - 1.0 / 3.0).abs() < 1e-12);

    let l4 = hand_model(Level::L4, &["a", "(", "▁a▁(", "▁(▁a"]);
    let c = vocab_composition(&l4);
    assert_eq!((c.composite, c.punct_only), (2, 0));
    for f in [c.composite_fraction, c.punct_only_fraction, c.bracket_classes.both] {
        assert!((0.0..=1.0).contains(&f));
    }
}

#[test]
fn punctuation_mass_ignores_structural_atoms() {
    let pm = punctuation_mass(&[line("f ( x ) NEW_LINE INDENT"), line("yy")]);
    assert_eq!((pm.punct_chars, pm.text_chars), (2, 6));
    assert!((pm.fraction - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn alignment_prefers_native_pieces() {
    // One model cuts `getName` natively, the other does not.
    let native = hand_model(Level::L0, &["a", "e", "g", "m", "N", "t", "▁get", "Name"]);
    let odd = hand_model(Level::L0, &["a", "e", "g", "m", "N", "t", "▁ge", "tName"]);
    let corpus = vec![line("getName ( )"), line("x")];
    let r = alignment_report([("native", &native), ("odd", &odd)], &corpus, 10, 0);
    assert_eq!((r.candidates, r.disagreeing, r.sampled), (1, 1, 1));
    assert!(r.insufficient);
    assert_eq!(r.models[0].mean_jaccard, 1.0);
    assert_eq!(r.models[1].mean_jaccard, 0.0);
    // `tName` re-splits into `t`, `Name`, sharing one of four pieces.
    assert!((r.models[1].mean_jaccard_resplit - 1.0 / 4.0).abs() < 1e-12);
    assert_eq!(r.models[1].merged_native_rate, 1.0);
}

#[test]
fn io_overlap_uses_textual_tokens() {
    let m = hand_model(Level::L1, &["a", "b", "(", ")", "▁a", "▁b", "▁(▁)"]);
    let toks = textual_tokens(&m, &line("a ( ) b"));
    assert_eq!(toks, BTreeSet::from(["a".to_string(), "b".to_string()]));
    let pairs = vec![
        (line("a ( )"), line("a b")),
        (line("( )"), line(")")),
    ];
    let r = io_intersection(&m, &pairs);
    assert_eq!((r.pairs, r.empty_pairs), (2, 1));
    assert!((r.mean_jaccard - 0.75).abs() < 1e-12);
}

#[test]
fn frequency_profile_and_language_specific_tokens() {
    let m = hand_model(Level::L0, &["a", "b", "▁a", "▁b"]);
    let py = vec![line("a a a b")];
    let java = vec![line("b b b b")];
    let p = frequency_profile(&m, &py).unwrap();
    assert_eq!(p.total_tokens, 4);
    assert_eq!((p.entries[0].token.as_str(), p.entries[0].count), ("▁a", 3));
    assert!(p.entries.windows(2).all(|w| w[0].count >= w[1].count));
    let r = cross_language_report(&m, &py, &java, 100_000.0, 10.0).unwrap();
    assert_eq!((r.specific_a, r.specific_b), (1, 0));
    assert!((0.0..=1.0).contains(&r.fraction));
    assert!(cross_language_report(&m, &py, &java, 1.0, 10.0).is_err());
}

proptest! {
    #[test]
    fn native_split_concatenates_and_is_stable(id in "[A-Za-z_][A-Za-z0-9_]{0,20}") {
        let pieces = native_split(&id);
        prop_assert_eq!(pieces.concat(), id);
        for p in &pieces {
            prop_assert_eq!(native_split(p), vec![p.clone()]);
        }
    }

    #[test]
    fn jaccard_is_a_similarity(a in prop::collection::btree_set(0u8..10, 0..8),
                               b in prop::collection::btree_set(0u8..10, 0..8)) {
        let j = jaccard(&a, &b);
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(j, jaccard(&b, &a));
        prop_assert_eq!(jaccard(&a, &a), 1.0);
    }
}

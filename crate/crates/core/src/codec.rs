//! Clipping and fair cropping of tokenized sequences.

use crate::error::{Error, Result};
use crate::model::{token_display, TokenizedSeq};
use crate::symbols::{self, MARKER};

/// First `max_len` tokens.
pub fn clip(ts: &TokenizedSeq, max_len: usize) -> TokenizedSeq {
    let n = ts.len().min(max_len);
    TokenizedSeq {
        ids: ts.ids[..n].to_vec(),
        tokens: ts.tokens[..n].to_vec(),
        model_id: ts.model_id.clone(),
    }
}

/// Serialized length of every token prefix: `out[k]` is the char length of
/// the detokenized first `k` tokens.
pub fn prefix_char_lengths(tokens: &[String]) -> Vec<usize> {
    let mut out = Vec::with_capacity(tokens.len() + 1);
    out.push(0);
    let mut total = 0usize;
    let mut started = false;
    for tok in tokens {
        let shown = token_display(tok);
        total += symbols::rendered_len(shown);
        if !started && !shown.is_empty() {
            started = true;
            if shown.starts_with(MARKER) {
                total -= 1;
            }
        }
        out.push(total);
    }
    out
}

/// Crops parallel tokenizations of one text so all cover about the same
/// characters.
///
/// Each input is clipped to `max_len` tokens; the shortest detokenized
/// length among them becomes the budget, and each input keeps its longest
/// token prefix within the budget. Character counts use the serialized form
/// (single separating spaces, structural atoms by name).
pub fn fair_crop(seqs: &[TokenizedSeq], max_len: usize) -> Result<Vec<TokenizedSeq>> {
    let texts: Vec<String> = seqs.iter().map(TokenizedSeq::detokenize).collect();
    let longest = texts.iter().max_by_key(|t| t.len()).cloned().unwrap_or_default();
    if texts.iter().any(|t| !longest.starts_with(t.as_str())) {
        return Err(Error::InconsistentSources);
    }
    let clipped: Vec<TokenizedSeq> = seqs.iter().map(|s| clip(s, max_len)).collect();
    let lengths: Vec<Vec<usize>> = clipped.iter().map(|s| prefix_char_lengths(&s.tokens)).collect();
    let budget = lengths.iter().map(|l| *l.last().unwrap()).min().unwrap_or(0);
    Ok(clipped
        .iter()
        .zip(&lengths)
        .map(|(s, l)| {
            let k = l.partition_point(|&len| len <= budget) - 1;
            clip(s, k)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(tokens: &[&str]) -> TokenizedSeq {
        TokenizedSeq {
            ids: (0..tokens.len() as u32).collect(),
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            model_id: String::new(),
        }
    }

    #[test]
    fn clip_thresholds() {
        let long = ts(&vec!["▁a"; 600]);
        assert_eq!(clip(&long, 510).len(), 510);
        assert_eq!(clip(&long, 250).len(), 250);
        let short = ts(&vec!["▁a"; 100]);
        assert_eq!(clip(&short, 510), short);
        assert_eq!(clip(&clip(&long, 510), 510), clip(&long, 510));
    }

    #[test]
    fn prefix_lengths_drop_leading_space() {
        let l = prefix_char_lengths(&["▁x".into(), "▁=".into(), "▁\u{E000}".into()]);
        assert_eq!(l, vec![0, 1, 3, 12]);
        let l = prefix_char_lengths(&["▁".into(), "x".into()]);
        assert_eq!(l, vec![0, 0, 1]);
    }

    #[test]
    fn coarse_sequence_cropped_to_fine_budget() {
        let fine = ts(&["▁x", "▁=", "▁sum", "▁(", "▁numbers", "▁)"]);
        let coarse = ts(&["▁x▁=", "▁sum▁(", "▁numbers", "▁)"]);
        let out = fair_crop(&[fine, coarse], 4).unwrap();
        assert_eq!(out[0].detokenize(), "x = sum (");
        assert_eq!(out[1].detokenize(), "x = sum (");
        assert_eq!(out[1].len(), 2);
    }

    #[test]
    fn within_budget_unchanged() {
        let a = ts(&["▁x", "▁=", "▁1"]);
        let b = ts(&["▁x▁=", "▁1"]);
        let out = fair_crop(&[a.clone(), b.clone()], 10).unwrap();
        assert_eq!(out, vec![a, b]);
    }

    #[test]
    fn different_texts_rejected() {
        let a = ts(&["▁x", "▁=", "▁1"]);
        let b = ts(&["▁y"]);
        assert!(matches!(fair_crop(&[a, b], 10), Err(Error::InconsistentSources)));
    }
}

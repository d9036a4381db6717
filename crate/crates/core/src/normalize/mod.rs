//! Lexical normalization of raw source files into atom sequences.
//!
//! Comments (and, for the indentation-sensitive language, docstrings) are
//! dropped, string literals are atomized like any other text, and the
//! remaining text is split into word runs and single punctuation chars.

mod braced;
mod indented;

pub use braced::normalize_braced;
pub use indented::normalize_indented;

use crate::atom::{is_excluded_char, is_word_char, Atom, NormalizedSeq, SourceLang};
use crate::error::Result;

/// Splits `text` into word and punctuation atoms, appending to `out`.
pub(crate) fn atomize(text: &str, out: &mut Vec<Atom>) {
    let mut word_start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if is_word_char(c) {
            if word_start.is_none() {
                word_start = Some(i);
            }
            continue;
        }
        if let Some(s) = word_start.take() {
            out.push(Atom::word(&text[s..i]));
        }
        if !is_excluded_char(c) {
            out.push(Atom::punct(c));
        }
    }
    if let Some(s) = word_start {
        out.push(Atom::word(&text[s..]));
    }
}

/// Natural-language text: atomized with no comment or layout handling.
pub fn normalize_text(text: &str) -> NormalizedSeq {
    let mut atoms = Vec::new();
    atomize(text, &mut atoms);
    NormalizedSeq::new(atoms, SourceLang::NaturalText)
}

pub fn normalize(source: &str, lang: SourceLang) -> Result<NormalizedSeq> {
    match lang {
        SourceLang::Indented => normalize_indented(source),
        SourceLang::Braced => normalize_braced(source),
        SourceLang::NaturalText => Ok(normalize_text(source)),
    }
}

/// Tracks 1-based line and column while scanning a char buffer.
pub(crate) struct Cursor<'a> {
    chars: &'a [char],
    pub pos: usize,
    pub line: usize,
    line_start: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(chars: &'a [char]) -> Self {
        Cursor {
            chars,
            pos: 0,
            line: 1,
            line_start: 0,
        }
    }

    pub fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    pub fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    pub fn col(&self) -> usize {
        self.pos - self.line_start + 1
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.line_start = self.pos;
        }
        Some(c)
    }

    pub fn at_eof(&self) -> bool {
        self.pos >= self.chars.len()
    }

    pub fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek_at(i) == Some(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomize_splits_words_and_punct() {
        let mut atoms = Vec::new();
        atomize("a.b_c(1.5e-3)  \"x y\"", &mut atoms);
        let texts: Vec<_> = atoms.iter().map(|a| a.text()).collect();
        assert_eq!(
            texts,
            vec!["a", ".", "b_c", "(", "1", ".", "5e", "-", "3", ")", "\"", "x", "y", "\""]
        );
    }

    #[test]
    fn atomize_drops_reserved_and_control() {
        let mut atoms = Vec::new();
        atomize("a\u{2581}b\u{E000}\u{0}c", &mut atoms);
        let texts: Vec<_> = atoms.iter().map(|a| a.text()).collect();
        assert_eq!(texts, vec!["a", "b", "c"]);
    }

    #[test]
    fn unicode_letters_are_word_chars() {
        let mut atoms = Vec::new();
        atomize("größe→x", &mut atoms);
        let texts: Vec<_> = atoms.iter().map(|a| a.text()).collect();
        assert_eq!(texts, vec!["größe", "→", "x"]);
    }
}

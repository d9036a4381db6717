//! Granularity levels: which composite tokens a vocabulary may contain.
//!
//! | level | allowed tokens                                                    |
//! |-------|-------------------------------------------------------------------|
//! | 0     | fragments of a single atom                                        |
//! | 1     | level 0, or runs of punctuation/structural atoms                  |
//! | 2     | level 1, or a punctuation run ending in `.` glued to a word       |
//! | 3     | punctuation/structural runs, or anything free of structural atoms |
//! | 4     | anything                                                          |
//!
//! Levels 0-2 are also expressible as pre-token boundaries; levels 3-4 are
//! enforced only through [`token_valid`].

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::atom::{Atom, AtomClass, NormalizedSeq};
use crate::error::{Error, Result};
use crate::symbols::{self, symbol_class, SymbolClass, MARKER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Level(u8);

impl Level {
    pub const L0: Level = Level(0);
    pub const L1: Level = Level(1);
    pub const L2: Level = Level(2);
    pub const L3: Level = Level(3);
    pub const L4: Level = Level(4);
    pub const ALL: [Level; 5] = [Level(0), Level(1), Level(2), Level(3), Level(4)];

    pub fn new(level: u8) -> Result<Level> {
        if level <= 4 {
            Ok(Level(level))
        } else {
            Err(Error::InvalidLevel(level))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Whether the level can be expressed as pre-token boundaries.
    pub fn has_boundaries(self) -> bool {
        self.0 <= 2
    }
}

impl TryFrom<u8> for Level {
    type Error = Error;
    fn try_from(v: u8) -> Result<Level> {
        Level::new(v)
    }
}

impl From<Level> for u8 {
    fn from(l: Level) -> u8 {
        l.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece {
    Word,
    Punct(char),
    Special,
}

/// Splits a char-form candidate into classified pieces. `None` when the
/// candidate is not made of well-formed atom fragments.
fn pieces(candidate: &str) -> Option<Vec<Piece>> {
    if candidate == "\u{2581}" {
        return Some(Vec::new());
    }
    let mut out = Vec::new();
    for (i, piece) in candidate.split(MARKER).enumerate() {
        if piece.is_empty() {
            if i == 0 {
                continue;
            }
            // Doubled or trailing marker.
            return None;
        }
        let mut chars = piece.chars();
        let first = chars.next()?;
        let single = chars.next().is_none();
        let class = match symbol_class(first) {
            SymbolClass::Word if piece.chars().all(|c| symbol_class(c) == SymbolClass::Word) => {
                Piece::Word
            }
            SymbolClass::Punct if single => Piece::Punct(first),
            SymbolClass::Special if single => Piece::Special,
            _ => return None,
        };
        out.push(class);
    }
    if out.is_empty() {
        return None;
    }
    Some(out)
}

/// Whether a candidate token (char form, see [`crate::symbols`]) is allowed
/// at `level`. Candidates that are not made of well-formed atom fragments,
/// such as ones ending in a marker, are never valid.
pub fn token_valid(candidate: &str, level: Level) -> bool {
    let Some(ps) = pieces(candidate) else {
        return false;
    };
    let non_word = |p: &Piece| !matches!(p, Piece::Word);
    let l0 = ps.len() <= 1;
    match level.0 {
        0 => l0,
        1 => l0 || ps.iter().all(non_word),
        2 => {
            l0 || ps.iter().all(non_word)
                || (ps.len() >= 2
                    && ps[ps.len() - 1] == Piece::Word
                    && ps[ps.len() - 2] == Piece::Punct('.')
                    && ps[..ps.len() - 1].iter().all(non_word))
        }
        3 => ps.iter().all(non_word) || !ps.contains(&Piece::Special),
        _ => true,
    }
}

/// [`token_valid`] on a display-form candidate such as `] ) :`.
pub fn display_token_valid(display: &str, level: Level) -> bool {
    token_valid(&symbols::char_form_of_display(display), level)
}

/// A contiguous atom span inside which merges are confined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreToken<'a> {
    pub atoms: &'a [Atom],
    pub char_form: String,
}

impl PreToken<'_> {
    /// Display form, e.g. `] ) :`.
    pub fn display(&self) -> String {
        let texts: Vec<&str> = self.atoms.iter().map(|a| a.text()).collect();
        texts.join(" ")
    }
}

/// Atom index ranges of the pre-tokens of `atoms` at a boundary level.
pub fn pretoken_spans(atoms: &[Atom], level: Level) -> Result<Vec<Range<usize>>> {
    if !level.has_boundaries() {
        return Err(Error::UnsupportedLevel(level.0));
    }
    let mut spans = Vec::new();
    if level == Level::L0 {
        spans.extend((0..atoms.len()).map(|i| i..i + 1));
        return Ok(spans);
    }
    let mut i = 0;
    while i < atoms.len() {
        if atoms[i].class() == AtomClass::Word {
            spans.push(i..i + 1);
            i += 1;
            continue;
        }
        let start = i;
        while i < atoms.len() && atoms[i].class() != AtomClass::Word {
            i += 1;
        }
        // A run ending in `.` keeps the following word at level 2.
        if level == Level::L2
            && i < atoms.len()
            && atoms[i - 1].punct_char() == Some('.')
        {
            i += 1;
        }
        spans.push(start..i);
    }
    Ok(spans)
}

pub fn pretokenize(seq: &NormalizedSeq, level: Level) -> Result<Vec<PreToken<'_>>> {
    Ok(pretoken_spans(&seq.atoms, level)?
        .into_iter()
        .map(|r| {
            let atoms = &seq.atoms[r];
            PreToken {
                atoms,
                char_form: symbols::char_form(atoms),
            }
        })
        .collect())
}

/// Exhaustive self-check: every well-formed substring of the sequence's char
/// form lying inside one pre-token is valid, and every one crossing a
/// pre-token boundary is not. Cubic; meant for tests and small inputs.
pub fn boundary_predicate_agreement(seq: &NormalizedSeq, level: Level) -> Result<bool> {
    let spans = pretoken_spans(&seq.atoms, level)?;
    // Char-offset ranges of each pre-token.
    let mut chars: Vec<char> = Vec::new();
    let mut pre_of_char: Vec<usize> = Vec::new();
    for (k, span) in spans.iter().enumerate() {
        let form = symbols::char_form(&seq.atoms[span.clone()]);
        for c in form.chars() {
            chars.push(c);
            pre_of_char.push(k);
        }
    }
    let mut buf = String::new();
    for i in 0..chars.len() {
        buf.clear();
        for j in i..chars.len() {
            buf.push(chars[j]);
            // Fragments ending in a marker are not well formed.
            if chars[j] == MARKER && j > i {
                continue;
            }
            let inside = pre_of_char[i] == pre_of_char[j];
            if token_valid(&buf, level) != inside {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

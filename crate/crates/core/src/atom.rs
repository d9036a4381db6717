//! Atoms and normalized sequences: the interchange unit of every other module.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbols;

/// Structural tokens emitted for the indentation-sensitive language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Special {
    NewLine,
    Indent,
    Dedent,
}

impl Special {
    pub const ALL: [Special; 3] = [Special::NewLine, Special::Indent, Special::Dedent];

    pub fn name(self) -> &'static str {
        match self {
            Special::NewLine => "NEW_LINE",
            Special::Indent => "INDENT",
            Special::Dedent => "DEDENT",
        }
    }

    pub fn from_name(name: &str) -> Option<Special> {
        match name {
            "NEW_LINE" => Some(Special::NewLine),
            "INDENT" => Some(Special::Indent),
            "DEDENT" => Some(Special::Dedent),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AtomClass {
    Word,
    Punct,
    Special,
}

/// Word characters: underscore plus anything alphanumeric by Unicode class.
pub fn is_word_char(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

/// Characters that may never appear inside atom text.
pub fn is_excluded_char(c: char) -> bool {
    c.is_whitespace() || c.is_control() || symbols::is_reserved(c)
}

/// The smallest normalized unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    text: String,
    class: AtomClass,
}

impl Atom {
    /// Classifies `text`; the class of an atom is a function of its text.
    pub fn new(text: &str) -> Result<Atom> {
        if Special::from_name(text).is_some() {
            return Ok(Atom {
                text: text.to_owned(),
                class: AtomClass::Special,
            });
        }
        let mut chars = text.chars();
        let first = chars.next().ok_or_else(|| Error::InvalidAtom(String::new()))?;
        if text.chars().all(is_word_char) {
            return Ok(Atom {
                text: text.to_owned(),
                class: AtomClass::Word,
            });
        }
        if chars.next().is_none() && !is_word_char(first) && !is_excluded_char(first) {
            return Ok(Atom {
                text: text.to_owned(),
                class: AtomClass::Punct,
            });
        }
        Err(Error::InvalidAtom(text.to_owned()))
    }

    pub fn special(s: Special) -> Atom {
        Atom {
            text: s.name().to_owned(),
            class: AtomClass::Special,
        }
    }

    pub fn punct(c: char) -> Atom {
        debug_assert!(!is_word_char(c) && !is_excluded_char(c));
        Atom {
            text: c.to_string(),
            class: AtomClass::Punct,
        }
    }

    /// Builds a word atom from identifier text; identifiers spelled like a
    /// structural token get a trailing underscore so the class stays
    /// recoverable from text alone.
    pub fn word(text: &str) -> Atom {
        debug_assert!(!text.is_empty() && text.chars().all(is_word_char));
        let mut text = text.to_owned();
        if Special::from_name(&text).is_some() {
            text.push('_');
        }
        Atom {
            text,
            class: AtomClass::Word,
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn class(&self) -> AtomClass {
        self.class
    }

    pub fn as_special(&self) -> Option<Special> {
        match self.class {
            AtomClass::Special => Special::from_name(&self.text),
            _ => None,
        }
    }

    pub fn is_word(&self) -> bool {
        self.class == AtomClass::Word
    }

    /// Single punctuation char, if this is a punctuation atom.
    pub fn punct_char(&self) -> Option<char> {
        match self.class {
            AtomClass::Punct => self.text.chars().next(),
            _ => None,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceLang {
    /// Indentation-sensitive language (Python).
    Indented,
    /// Brace-delimited language (Java).
    Braced,
    NaturalText,
}

/// A source sequence after lexical normalization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NormalizedSeq {
    pub atoms: Vec<Atom>,
    pub lang: SourceLang,
}

impl NormalizedSeq {
    pub fn new(atoms: Vec<Atom>, lang: SourceLang) -> Self {
        NormalizedSeq { atoms, lang }
    }

    pub fn empty(lang: SourceLang) -> Self {
        NormalizedSeq {
            atoms: Vec::new(),
            lang,
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Single line, atoms separated by one ASCII space.
    pub fn to_line(&self) -> String {
        let mut out = String::with_capacity(self.atoms.len() * 4);
        for (i, atom) in self.atoms.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(atom.text());
        }
        out
    }

    /// Parses one corpus line. Atoms must be separated by exactly one space.
    pub fn from_line(line: &str, lang: SourceLang) -> Result<Self> {
        let line = line.strip_suffix('\n').unwrap_or(line);
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            return Ok(NormalizedSeq::empty(lang));
        }
        let atoms = line
            .split(' ')
            .map(Atom::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(NormalizedSeq { atoms, lang })
    }

    /// Character count of the serialized line.
    pub fn serialized_len(&self) -> usize {
        if self.atoms.is_empty() {
            return 0;
        }
        self.atoms.iter().map(|a| a.text().chars().count()).sum::<usize>() + self.atoms.len() - 1
    }

    /// True when every DEDENT closes an earlier INDENT.
    pub fn indentation_balanced(&self) -> bool {
        let mut open = 0usize;
        for atom in &self.atoms {
            match atom.as_special() {
                Some(Special::Indent) => open += 1,
                Some(Special::Dedent) => {
                    if open == 0 {
                        return false;
                    }
                    open -= 1;
                }
                _ => {}
            }
        }
        true
    }
}

impl fmt::Display for NormalizedSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// Parses a whole corpus (one sequence per line).
pub fn parse_corpus(text: &str, lang: SourceLang) -> Result<Vec<NormalizedSeq>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            NormalizedSeq::from_line(line, lang).map_err(|e| Error::AtLine {
                line: i + 1,
                source: Box::new(e),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifies_by_text() {
        assert_eq!(Atom::new("foo_1").unwrap().class(), AtomClass::Word);
        assert_eq!(Atom::new("(").unwrap().class(), AtomClass::Punct);
        assert_eq!(Atom::new("INDENT").unwrap().class(), AtomClass::Special);
        assert_eq!(Atom::new("_").unwrap().class(), AtomClass::Word);
        assert!(Atom::new("a(").is_err());
        assert!(Atom::new("((").is_err());
        assert!(Atom::new("").is_err());
        assert!(Atom::new(" ").is_err());
        assert!(Atom::new("\u{2581}").is_err());
    }

    #[test]
    fn word_colliding_with_special_is_renamed() {
        let a = Atom::word("NEW_LINE");
        assert_eq!(a.text(), "NEW_LINE_");
        assert!(a.is_word());
    }

    #[test]
    fn line_roundtrip() {
        let line = "for i in range ( x ) : NEW_LINE INDENT print ( i ) NEW_LINE";
        let seq = NormalizedSeq::from_line(line, SourceLang::Indented).unwrap();
        assert_eq!(seq.len(), 15);
        assert_eq!(seq.to_line(), line);
        assert_eq!(seq.serialized_len(), line.chars().count());
    }

    #[test]
    fn empty_line_is_empty_seq() {
        let seq = NormalizedSeq::from_line("", SourceLang::Braced).unwrap();
        assert!(seq.is_empty());
        assert_eq!(seq.to_line(), "");
    }

    #[test]
    fn double_space_rejected() {
        assert!(NormalizedSeq::from_line("a  b", SourceLang::Braced).is_err());
    }

    #[test]
    fn balance() {
        let ok = NormalizedSeq::from_line("INDENT x DEDENT INDENT", SourceLang::Indented).unwrap();
        assert!(ok.indentation_balanced());
        let bad = NormalizedSeq::from_line("x DEDENT", SourceLang::Indented).unwrap();
        assert!(!bad.indentation_balanced());
    }
}

//! Character-level view of normalized sequences.
//!
//! Subword models work on a character stream in which every atom is prefixed
//! by the whitespace marker `▁` (U+2581) and each structural atom
//! (`NEW_LINE`, `INDENT`, `DEDENT`) is a single private-use symbol. Token
//! strings stored in models use this form; [`render`] expands it for display.

use crate::atom::{is_word_char, Atom, AtomClass, Special};

pub const MARKER: char = '\u{2581}';

const NEW_LINE_SYM: char = '\u{E000}';
const INDENT_SYM: char = '\u{E001}';
const DEDENT_SYM: char = '\u{E002}';

/// Stands in for an uncovered character when decoding.
pub const UNK_CHAR: char = '\u{FFFD}';

pub fn special_symbol(s: Special) -> char {
    match s {
        Special::NewLine => NEW_LINE_SYM,
        Special::Indent => INDENT_SYM,
        Special::Dedent => DEDENT_SYM,
    }
}

pub fn symbol_special(c: char) -> Option<Special> {
    match c {
        NEW_LINE_SYM => Some(Special::NewLine),
        INDENT_SYM => Some(Special::Indent),
        DEDENT_SYM => Some(Special::Dedent),
        _ => None,
    }
}

/// Marker and structural symbols; never valid inside source text.
pub fn is_reserved(c: char) -> bool {
    c == MARKER || symbol_special(c).is_some()
}

/// Structural characters that every alphabet contains.
pub fn structural_chars() -> [char; 4] {
    [MARKER, NEW_LINE_SYM, INDENT_SYM, DEDENT_SYM]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolClass {
    Marker,
    Word,
    Punct,
    Special,
}

pub fn symbol_class(c: char) -> SymbolClass {
    if c == MARKER {
        SymbolClass::Marker
    } else if symbol_special(c).is_some() {
        SymbolClass::Special
    } else if is_word_char(c) {
        SymbolClass::Word
    } else {
        SymbolClass::Punct
    }
}

/// Appends the char form of one atom (marker included).
pub fn push_atom(out: &mut String, atom: &Atom) {
    out.push(MARKER);
    match atom.as_special() {
        Some(s) => out.push(special_symbol(s)),
        None => out.push_str(atom.text()),
    }
}

/// Char form of a run of atoms, e.g. `▁df▁.▁shape`.
pub fn char_form(atoms: &[Atom]) -> String {
    let mut out = String::new();
    for atom in atoms {
        push_atom(&mut out, atom);
    }
    out
}

/// Char form of a space-separated display string such as `] ) :`.
pub fn char_form_of_display(display: &str) -> String {
    let mut out = String::new();
    for piece in display.split(' ').filter(|p| !p.is_empty()) {
        out.push(MARKER);
        match Special::from_name(piece) {
            Some(s) => out.push(special_symbol(s)),
            None => out.push_str(piece),
        }
    }
    out
}

/// Human-readable token: structural symbols spelled out, marker kept.
pub fn render(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    for c in token.chars() {
        match symbol_special(c) {
            Some(s) => out.push_str(s.name()),
            None => out.push(c),
        }
    }
    out
}

/// Serialized text of a concatenation of token strings: markers become
/// spaces and the leading space is dropped.
pub fn detokenize<'a, I>(tokens: I) -> String
where
    I: IntoIterator<Item = &'a str>,
{
    let mut out = String::new();
    for tok in tokens {
        for c in tok.chars() {
            if c == MARKER {
                out.push(' ');
            } else if let Some(s) = symbol_special(c) {
                out.push_str(s.name());
            } else {
                out.push(c);
            }
        }
    }
    match out.strip_prefix(' ') {
        Some(rest) => rest.to_owned(),
        None => out,
    }
}

/// Serialized-form character length of a token (markers count as spaces,
/// structural symbols as their names).
pub fn rendered_len(token: &str) -> usize {
    token
        .chars()
        .map(|c| symbol_special(c).map_or(1, |s| s.name().len()))
        .sum()
}

/// Splits a char stream back into atoms. Total: pieces that cannot come
/// from a well-formed stream (for instance a word with a replacement char
/// glued inside) are split into word runs and single punctuation atoms.
pub fn atoms_from_char_form(stream: &str) -> Vec<Atom> {
    let mut atoms = Vec::new();
    for piece in stream.split(MARKER).filter(|p| !p.is_empty()) {
        let mut word = String::new();
        for c in piece.chars() {
            if is_word_char(c) {
                word.push(c);
                continue;
            }
            if !word.is_empty() {
                atoms.push(Atom::word(&std::mem::take(&mut word)));
            }
            match symbol_special(c) {
                Some(s) => atoms.push(Atom::special(s)),
                None if !crate::atom::is_excluded_char(c) => atoms.push(Atom::punct(c)),
                None => {}
            }
        }
        if !word.is_empty() {
            atoms.push(Atom::word(&word));
        }
    }
    atoms
}

/// Class of the fragment an atom contributes.
pub fn atom_symbol_class(atom: &Atom) -> SymbolClass {
    match atom.class() {
        AtomClass::Word => SymbolClass::Word,
        AtomClass::Punct => SymbolClass::Punct,
        AtomClass::Special => SymbolClass::Special,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{NormalizedSeq, SourceLang};

    #[test]
    fn char_form_and_back() {
        let seq =
            NormalizedSeq::from_line("x = f ( ) : NEW_LINE INDENT", SourceLang::Indented).unwrap();
        let form = char_form(&seq.atoms);
        assert_eq!(form, "▁x▁=▁f▁(▁)▁:▁\u{E000}▁\u{E001}");
        assert_eq!(detokenize([form.as_str()]), seq.to_line());
        assert_eq!(atoms_from_char_form(&form), seq.atoms);
    }

    #[test]
    fn display_form() {
        assert_eq!(char_form_of_display(") NEW_LINE"), "▁)▁\u{E000}");
        assert_eq!(render("▁)▁\u{E000}"), "▁)▁NEW_LINE");
        assert_eq!(rendered_len("▁)▁\u{E000}"), 11);
    }

    #[test]
    fn malformed_pieces_still_decode() {
        let atoms = atoms_from_char_form("▁a\u{FFFD}b▁(");
        let texts: Vec<_> = atoms.iter().map(|a| a.text()).collect();
        assert_eq!(texts, vec!["a", "\u{FFFD}", "b", "("]);
    }
}

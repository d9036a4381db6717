use crate::atom::{NormalizedSeq, SourceLang};
use crate::error::{Error, Result};

use super::{atomize, Cursor};

/// Normalizes brace-delimited (Java) source.
///
/// Comments are dropped and all layout collapses; no structural atoms are
/// emitted. String, char and text-block literals are atomized like code.
pub fn normalize_braced(source: &str) -> Result<NormalizedSeq> {
    let chars: Vec<char> = source.chars().collect();
    let mut cur = Cursor::new(&chars);
    let mut kept = String::with_capacity(source.len());
    while let Some(c) = cur.peek() {
        match c {
            '/' if cur.peek_at(1) == Some('/') => {
                while !matches!(cur.peek(), None | Some('\n')) {
                    cur.bump();
                }
                kept.push(' ');
            }
            '/' if cur.peek_at(1) == Some('*') => {
                let (line, col) = (cur.line, cur.col());
                cur.bump();
                cur.bump();
                loop {
                    if cur.at_eof() {
                        return Err(Error::UnterminatedComment { line, col });
                    }
                    if cur.starts_with("*/") {
                        cur.bump();
                        cur.bump();
                        break;
                    }
                    cur.bump();
                }
                kept.push(' ');
            }
            '"' if cur.starts_with("\"\"\"") => {
                let (line, col) = (cur.line, cur.col());
                for _ in 0..3 {
                    kept.push(cur.bump().unwrap());
                }
                loop {
                    match cur.bump() {
                        None => return Err(Error::UnterminatedString { line, col }),
                        Some('\\') => {
                            kept.push('\\');
                            let e = cur.bump().ok_or(Error::UnterminatedString { line, col })?;
                            kept.push(e);
                        }
                        Some('"') if cur.starts_with("\"\"") => {
                            kept.push_str("\"\"\"");
                            cur.bump();
                            cur.bump();
                            break;
                        }
                        Some(c) => kept.push(c),
                    }
                }
            }
            '"' | '\'' => {
                let (line, col) = (cur.line, cur.col());
                let quote = cur.bump().unwrap();
                kept.push(quote);
                loop {
                    match cur.bump() {
                        None | Some('\n') => return Err(Error::UnterminatedString { line, col }),
                        Some('\\') => {
                            kept.push('\\');
                            match cur.bump() {
                                None | Some('\n') => {
                                    return Err(Error::UnterminatedString { line, col })
                                }
                                Some(e) => kept.push(e),
                            }
                        }
                        Some(c) if c == quote => {
                            kept.push(c);
                            break;
                        }
                        Some(c) => kept.push(c),
                    }
                }
            }
            _ => {
                kept.push(c);
                cur.bump();
            }
        }
    }
    let mut atoms = Vec::new();
    atomize(&kept, &mut atoms);
    Ok(NormalizedSeq::new(atoms, SourceLang::Braced))
}

use crate::atom::{Atom, NormalizedSeq, SourceLang, Special};
use crate::error::{Error, Result};

use super::{atomize, Cursor};

const TAB_WIDTH: usize = 8;

#[derive(Debug)]
enum Piece {
    Code(String),
    Str(String),
}

#[derive(Debug)]
struct LogicalLine {
    line: usize,
    indent: usize,
    pieces: Vec<Piece>,
}

impl LogicalLine {
    fn is_string_only(&self) -> bool {
        let mut saw_str = false;
        for p in &self.pieces {
            match p {
                Piece::Str(_) => saw_str = true,
                Piece::Code(c) if c.trim().is_empty() => {}
                Piece::Code(_) => return false,
            }
        }
        saw_str
    }

    fn code_words(&self) -> Vec<&str> {
        self.pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Code(c) => Some(c.split_whitespace()),
                Piece::Str(_) => None,
            })
            .flatten()
            .collect()
    }

    /// `def`/`class` header whose body starts on the next line.
    fn is_block_header(&self) -> bool {
        let words = self.code_words();
        let first = words.first().copied().unwrap_or("");
        let keyword = first.starts_with("def")
            && first[3..].chars().next().map_or(true, |c| !super::is_word_char(c))
            || first.starts_with("class")
                && first[5..].chars().next().map_or(true, |c| !super::is_word_char(c))
            || first == "async" && words.get(1).is_some_and(|w| w.starts_with("def"));
        let ends_with_colon = match self.pieces.last() {
            Some(Piece::Code(c)) => c.trim_end().ends_with(':'),
            _ => false,
        };
        keyword && ends_with_colon
    }
}

fn is_string_prefix(word: &str) -> bool {
    matches!(
        word.to_ascii_lowercase().as_str(),
        "r" | "u" | "b" | "f" | "br" | "rb" | "fr" | "rf"
    )
}

struct Lexer<'a> {
    cur: Cursor<'a>,
    lines: Vec<LogicalLine>,
    pending: Option<LogicalLine>,
    code: String,
    depth: usize,
}

impl<'a> Lexer<'a> {
    fn new(chars: &'a [char]) -> Self {
        Lexer {
            cur: Cursor::new(chars),
            lines: Vec::new(),
            pending: None,
            code: String::new(),
            depth: 0,
        }
    }

    fn flush_code(&mut self) {
        if !self.code.is_empty() {
            let code = std::mem::take(&mut self.code);
            if let Some(line) = self.pending.as_mut() {
                line.pieces.push(Piece::Code(code));
            }
        }
    }

    fn end_logical_line(&mut self) {
        self.flush_code();
        if let Some(line) = self.pending.take() {
            self.lines.push(line);
        }
    }

    /// Measures indentation at a physical line start. Returns `None` for
    /// blank and comment-only lines (consumed up to the newline).
    fn line_start(&mut self) -> Option<usize> {
        let mut width = 0;
        loop {
            match self.cur.peek() {
                Some(' ') => width += 1,
                Some('\t') => width = (width / TAB_WIDTH + 1) * TAB_WIDTH,
                Some('\x0c') => width = 0,
                Some('\r') => {}
                _ => break,
            }
            self.cur.bump();
        }
        match self.cur.peek() {
            None | Some('\n') => None,
            Some('#') => {
                self.skip_comment();
                None
            }
            _ => Some(width),
        }
    }

    fn skip_comment(&mut self) {
        while let Some(c) = self.cur.peek() {
            if c == '\n' {
                break;
            }
            self.cur.bump();
        }
    }

    fn lex_string(&mut self, prefix: String) -> Result<()> {
        let (line, col) = (self.cur.line, self.cur.col() - prefix.chars().count());
        let quote = self.cur.bump().expect("quote");
        let triple = self.cur.peek() == Some(quote) && self.cur.peek_at(1) == Some(quote);
        let mut text = prefix;
        text.push(quote);
        if triple {
            text.push(self.cur.bump().unwrap());
            text.push(self.cur.bump().unwrap());
        }
        loop {
            let c = self
                .cur
                .bump()
                .ok_or(Error::UnterminatedString { line, col })?;
            match c {
                '\\' => {
                    text.push(c);
                    let escaped = self
                        .cur
                        .bump()
                        .ok_or(Error::UnterminatedString { line, col })?;
                    text.push(escaped);
                }
                '\n' if !triple => return Err(Error::UnterminatedString { line, col }),
                c if c == quote => {
                    text.push(c);
                    if !triple {
                        break;
                    }
                    if self.cur.peek() == Some(quote) && self.cur.peek_at(1) == Some(quote) {
                        text.push(self.cur.bump().unwrap());
                        text.push(self.cur.bump().unwrap());
                        break;
                    }
                }
                c => text.push(c),
            }
        }
        self.flush_code();
        if let Some(line) = self.pending.as_mut() {
            line.pieces.push(Piece::Str(text));
        }
        Ok(())
    }

    fn run(mut self) -> Result<Vec<LogicalLine>> {
        let mut at_physical_start = true;
        loop {
            if at_physical_start {
                at_physical_start = false;
                if self.pending.is_none() {
                    match self.line_start() {
                        Some(indent) => {
                            self.pending = Some(LogicalLine {
                                line: self.cur.line,
                                indent,
                                pieces: Vec::new(),
                            })
                        }
                        None => {
                            if self.cur.bump().is_none() {
                                break;
                            }
                            at_physical_start = true;
                            continue;
                        }
                    }
                }
            }
            let Some(c) = self.cur.peek() else { break };
            match c {
                '#' => self.skip_comment(),
                '\n' => {
                    self.cur.bump();
                    at_physical_start = true;
                    if self.depth == 0 {
                        self.end_logical_line();
                    } else {
                        self.code.push(' ');
                    }
                }
                '\\' if matches!(self.cur.peek_at(1), Some('\n'))
                    || (self.cur.peek_at(1) == Some('\r') && self.cur.peek_at(2) == Some('\n')) =>
                {
                    // Explicit line joining: the next physical line continues
                    // this logical line.
                    while self.cur.bump() != Some('\n') {}
                    self.code.push(' ');
                }
                '"' | '\'' => self.lex_string(String::new())?,
                c if super::is_word_char(c) => {
                    let mut word = String::new();
                    while let Some(c) = self.cur.peek() {
                        if !super::is_word_char(c) {
                            break;
                        }
                        word.push(c);
                        self.cur.bump();
                    }
                    if matches!(self.cur.peek(), Some('"' | '\'')) && is_string_prefix(&word) {
                        self.lex_string(word)?;
                    } else {
                        self.code.push_str(&word);
                    }
                }
                _ => {
                    match c {
                        '(' | '[' | '{' => self.depth += 1,
                        ')' | ']' | '}' => self.depth = self.depth.saturating_sub(1),
                        _ => {}
                    }
                    self.code.push(c);
                    self.cur.bump();
                }
            }
        }
        self.end_logical_line();
        Ok(self.lines)
    }
}

/// Normalizes indentation-sensitive (Python) source.
///
/// Logical lines end in `NEW_LINE`; indentation increases and decreases
/// become `INDENT` and `DEDENT`. Blocks still open at end of input are not
/// closed. A string-only statement at the start of the module or directly
/// after a `def`/`class` header is treated as a docstring and removed.
pub fn normalize_indented(source: &str) -> Result<NormalizedSeq> {
    let chars: Vec<char> = source.chars().collect();
    let lines = Lexer::new(&chars).run()?;

    let mut atoms = Vec::new();
    let mut stack = vec![0usize];
    let mut expect_docstring = true;
    let mut line_atoms = Vec::new();
    for line in &lines {
        line_atoms.clear();
        for piece in &line.pieces {
            match piece {
                Piece::Code(t) | Piece::Str(t) => atomize(t, &mut line_atoms),
            }
        }
        if line_atoms.is_empty() {
            continue;
        }
        let top = *stack.last().unwrap();
        if line.indent > top {
            stack.push(line.indent);
            atoms.push(Atom::special(Special::Indent));
        } else if line.indent < top {
            while *stack.last().unwrap() > line.indent {
                stack.pop();
                atoms.push(Atom::special(Special::Dedent));
            }
            if *stack.last().unwrap() != line.indent {
                return Err(Error::InconsistentIndentation { line: line.line });
            }
        }
        let docstring = expect_docstring && line.is_string_only();
        expect_docstring = line.is_block_header();
        if docstring {
            continue;
        }
        atoms.append(&mut line_atoms);
        atoms.push(Atom::special(Special::NewLine));
    }
    Ok(NormalizedSeq::new(atoms, SourceLang::Indented))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(src: &str) -> String {
        normalize_indented(src).unwrap().to_line()
    }

    #[test]
    fn table_example_level0() {
        assert_eq!(
            norm("for i in range(df.shape[1]):\n print(i)"),
            "for i in range ( df . shape [ 1 ] ) : NEW_LINE INDENT print ( i ) NEW_LINE"
        );
    }

    #[test]
    fn empty_file() {
        assert!(normalize_indented("").unwrap().is_empty());
        assert!(normalize_indented("\n\n   \n# only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn dedent_and_nesting() {
        let src = "def f(x):\n    if x:\n        return 1\n    return 2\n";
        assert_eq!(
            norm(src),
            "def f ( x ) : NEW_LINE INDENT if x : NEW_LINE INDENT return 1 NEW_LINE \
             DEDENT return 2 NEW_LINE"
        );
    }

    #[test]
    fn docstrings_removed_other_strings_kept() {
        let src = "def f():\n    \"\"\"Doc\n    more.\"\"\"\n    s = 'keep me'\n    return s\n";
        assert_eq!(
            norm(src),
            "def f ( ) : NEW_LINE INDENT s = ' keep me ' NEW_LINE return s NEW_LINE"
        );
        let module = "'''module doc'''\nx = 1\n";
        assert_eq!(norm(module), "x = 1 NEW_LINE");
        let second = "def f():\n    x = 1\n    'not a docstring'\n";
        assert_eq!(
            norm(second),
            "def f ( ) : NEW_LINE INDENT x = 1 NEW_LINE ' not a docstring ' NEW_LINE"
        );
    }

    #[test]
    fn class_and_method_docstrings() {
        let src = "class A:\n    \"doc\"\n    def m(self):\n        r'''doc'''\n        pass\n";
        assert_eq!(
            norm(src),
            "class A : NEW_LINE INDENT def m ( self ) : NEW_LINE INDENT pass NEW_LINE"
        );
    }

    #[test]
    fn brackets_join_lines() {
        let src = "x = f(1,\n      2)\ny = [\n  3]\n";
        assert_eq!(norm(src), "x = f ( 1 , 2 ) NEW_LINE y = [ 3 ] NEW_LINE");
    }

    #[test]
    fn backslash_continuation() {
        let src = "x = 1 + \\\n    2\ny = 3\n";
        assert_eq!(norm(src), "x = 1 + 2 NEW_LINE y = 3 NEW_LINE");
    }

    #[test]
    fn comment_inside_string_is_kept() {
        assert_eq!(norm("s = '# no'  # yes\n"), "s = ' # no ' NEW_LINE");
    }

    #[test]
    fn string_prefixes() {
        assert_eq!(norm("x = f\"{a}\" + rb'\\d'\n"), "x = f \" { a } \" + rb ' \\ d ' NEW_LINE");
    }

    #[test]
    fn tabs_are_width_eight() {
        // Eight spaces and one tab are the same level.
        let src = "if x:\n        a = 1\n\tb = 2\n";
        assert_eq!(norm(src), "if x : NEW_LINE INDENT a = 1 NEW_LINE b = 2 NEW_LINE");
    }

    #[test]
    fn inconsistent_indentation_reports_line() {
        let src = "if x:\n    a = 1\n  b = 2\n";
        match normalize_indented(src) {
            Err(Error::InconsistentIndentation { line }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unterminated_strings_report_location() {
        match normalize_indented("x = 1\ny = 'abc\n") {
            Err(Error::UnterminatedString { line, col }) => assert_eq!((line, col), (2, 5)),
            other => panic!("unexpected {other:?}"),
        }
        match normalize_indented("x = \"\"\"abc\n\n") {
            Err(Error::UnterminatedString { line, col }) => assert_eq!((line, col), (1, 5)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identifier_named_like_structural_token() {
        assert_eq!(norm("INDENT = 4\n"), "INDENT_ = 4 NEW_LINE");
    }

    /// Independent pass that lists `#` comment spans by scanning for quotes
    /// and hashes line by line; valid for sources without multi-line strings.
    fn comment_spans(src: &str) -> Vec<(usize, usize)> {
        let mut spans = Vec::new();
        let mut offset = 0;
        for line in src.split_inclusive('\n') {
            let mut quote: Option<char> = None;
            let mut escaped = false;
            for (i, c) in line.char_indices() {
                if escaped {
                    escaped = false;
                    continue;
                }
                match (quote, c) {
                    (Some(_), '\\') => escaped = true,
                    (Some(q), c) if c == q => quote = None,
                    (None, '\'' | '"') => quote = Some(c),
                    (None, '#') => {
                        let end = line.trim_end_matches('\n').len();
                        spans.push((offset + i, offset + end));
                        break;
                    }
                    _ => {}
                }
            }
            offset += line.len();
        }
        spans
    }

    #[test]
    fn comment_atoms_absent_per_reference_spans() {
        let src = "def area(w, h):\n    # width times height, see notes\n    return w * h  # done\n";
        let spans = comment_spans(src);
        assert_eq!(spans.len(), 2);
        let mut stripped = String::new();
        let mut last = 0;
        for (s, e) in &spans {
            stripped.push_str(&src[last..*s]);
            last = *e;
        }
        stripped.push_str(&src[last..]);
        assert_eq!(norm(src), norm(&stripped));
        let out = norm(src);
        for word in ["width", "times", "height", "notes", "done"] {
            assert!(!out.split(' ').any(|a| a == word), "{word} leaked");
        }
    }

    #[test]
    fn dedents_balanced() {
        let src = "class A:\n  def f(self):\n    if x:\n      pass\n  def g(self):\n    pass\nz = 1\n";
        let seq = normalize_indented(src).unwrap();
        assert!(seq.indentation_balanced());
        assert_eq!(
            seq.to_line(),
            "class A : NEW_LINE INDENT def f ( self ) : NEW_LINE INDENT if x : NEW_LINE INDENT \
             pass NEW_LINE DEDENT DEDENT def g ( self ) : NEW_LINE INDENT pass NEW_LINE DEDENT \
             DEDENT z = 1 NEW_LINE"
        );
    }
}

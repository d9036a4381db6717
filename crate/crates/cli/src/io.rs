//! File helpers. Paths ending in `.gz` are read and written gzipped.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use codetok::{Error, NormalizedSeq, SourceLang};
use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{CliError, CliResult};

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

pub fn read_text(path: &Path) -> CliResult<String> {
    let file = File::open(path).map_err(|e| CliError::data(path, e.into()))?;
    let mut text = String::new();
    let res = if is_gz(path) {
        MultiGzDecoder::new(file).read_to_string(&mut text)
    } else {
        BufReader::new(file).read_to_string(&mut text)
    };
    res.map_err(|e| CliError::data(path, e.into()))?;
    Ok(text)
}

pub fn create(path: &Path) -> CliResult<Box<dyn Write>> {
    let file = File::create(path).map_err(|e| CliError::data(path, e.into()))?;
    let w = BufWriter::new(file);
    Ok(if is_gz(path) {
        Box::new(GzEncoder::new(w, Compression::default()))
    } else {
        Box::new(w)
    })
}

/// Writes every line followed by `\n`.
pub fn write_lines<S: AsRef<str>>(path: &Path, lines: impl IntoIterator<Item = S>) -> CliResult<()> {
    let mut w = create(path)?;
    let io = |e: std::io::Error| CliError::data(path, e.into());
    for line in lines {
        w.write_all(line.as_ref().as_bytes()).map_err(io)?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

/// Corpus lines that failed to parse and were skipped.
#[derive(Debug, Default, serde::Serialize)]
pub struct Skipped {
    pub count: usize,
    pub first: Option<String>,
}

impl Skipped {
    pub fn note(&mut self, what: String) {
        self.count += 1;
        self.first.get_or_insert(what);
    }
}

/// Reads normalized corpora, one sequence per line.
pub fn read_corpus(
    paths: &[impl AsRef<Path>],
    lang: SourceLang,
    skip_errors: bool,
    skipped: &mut Skipped,
) -> CliResult<Vec<NormalizedSeq>> {
    let mut out = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let text = read_text(path)?;
        for (i, line) in text.lines().enumerate() {
            match NormalizedSeq::from_line(line, lang) {
                Ok(seq) => out.push(seq),
                Err(e) if skip_errors => skipped.note(format!("{}:{}: {e}", path.display(), i + 1)),
                Err(e) => return Err(CliError::data(path, e.at_line(i + 1))),
            }
        }
    }
    Ok(out)
}

/// Reads id lists, one whitespace-separated sequence per line.
pub fn read_ids(path: &Path) -> CliResult<Vec<Vec<u32>>> {
    let text = read_text(path)?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            line.split_ascii_whitespace()
                .map(|t| {
                    t.parse::<u32>().map_err(|_| {
                        let e = Error::InvalidParameter(format!("bad token id {t:?}"));
                        CliError::data(path, e.at_line(i + 1))
                    })
                })
                .collect()
        })
        .collect()
}

/// Lists input files: explicit paths plus those named in list files.
/// Relative entries of a list file resolve against the list's directory.
pub fn expand_inputs(inputs: &[std::path::PathBuf], lists: &[std::path::PathBuf]) -> CliResult<Vec<std::path::PathBuf>> {
    let mut out = inputs.to_vec();
    for list in lists {
        let file = File::open(list).map_err(|e| CliError::data(list, e.into()))?;
        let base = list.parent().unwrap_or(Path::new("."));
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| CliError::data(list, e.into()))?;
            let line = line.trim();
            if !line.is_empty() {
                out.push(base.join(line));
            }
        }
    }
    Ok(out)
}

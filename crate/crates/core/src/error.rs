use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid atom {0:?}")]
    InvalidAtom(String),
    #[error("unterminated string literal starting at {line}:{col}")]
    UnterminatedString { line: usize, col: usize },
    #[error("unterminated comment starting at {line}:{col}")]
    UnterminatedComment { line: usize, col: usize },
    #[error("inconsistent indentation at line {line}")]
    InconsistentIndentation { line: usize },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("granularity level {0} is out of range 0..=4")]
    InvalidLevel(u8),
    #[error("granularity level {0} has no pre-token boundary form")]
    UnsupportedLevel(u8),
    #[error("vocabulary size {requested} is too small: alphabet and reserved tokens need {minimum}")]
    VocabTooSmall { requested: usize, minimum: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported model format version {found} (expected {expected})")]
    FormatVersionMismatch { found: u64, expected: u64 },
    #[error("model checksum mismatch: {0}")]
    ChecksumMismatch(String),
    #[error("malformed model: {0}")]
    MalformedModel(String),
    #[error("token id {0} is out of range")]
    UnknownId(u32),
    #[error("sequences do not share an underlying text")]
    InconsistentSources,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attaches a 1-based line number.
    pub fn at_line(self, line: usize) -> Error {
        Error::AtLine {
            line,
            source: Box::new(self),
        }
    }
}

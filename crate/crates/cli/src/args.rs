use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use codetok::SourceLang;

#[derive(Debug, Parser)]
#[command(name = "codetok", version, about = "Code-aware subword tokenization toolkit")]
pub struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "CODETOK_THREADS")]
    pub threads: Option<usize>,
    /// Seed for every random choice (sampling, identifier draws).
    #[arg(long, global = true, env = "CODETOK_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output style for reports printed to stdout.
    #[arg(long, global = true, env = "CODETOK_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Skip unparseable corpus lines or source files instead of failing.
    #[arg(long, global = true, env = "CODETOK_SKIP_ERRORS")]
    pub skip_errors: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Lang {
    #[value(alias = "indented")]
    Python,
    #[value(alias = "braced")]
    Java,
    Text,
}

impl From<Lang> for SourceLang {
    fn from(l: Lang) -> SourceLang {
        match l {
            Lang::Python => SourceLang::Indented,
            Lang::Java => SourceLang::Braced,
            Lang::Text => SourceLang::NaturalText,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Bpe,
    Unigram,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize raw source files into a corpus, one file per line.
    Normalize(NormalizeArgs),
    /// Train a subword model on a normalized corpus.
    Train(TrainArgs),
    /// Encode a corpus into token ids.
    Encode(EncodeArgs),
    /// Decode token ids back into a normalized corpus.
    Decode(DecodeArgs),
    /// Average sequence lengths relative to a baseline model.
    Stats(StatsArgs),
    /// Composite-token statistics of model vocabularies.
    Compose(ComposeArgs),
    /// Agreement of two models with native identifier splits.
    Align(AlignArgs),
    /// Token frequency profile.
    Freq(FreqArgs),
    /// Language-specific tokens of a jointly trained model.
    Crosslang(CrossLangArgs),
    /// Overlap of input and output textual tokens.
    Intersect(IntersectArgs),
    /// Crop parallel encodings to a common character budget.
    Crop(CropArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Normalized corpus files (`.gz` accepted).
    #[arg(long = "in", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// Language tag attached to corpus sequences.
    #[arg(long, value_enum, default_value_t = Lang::Text)]
    pub lang: Lang,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    #[arg(long, value_enum, env = "CODETOK_LANG")]
    pub lang: Lang,
    /// Source files.
    pub files: Vec<PathBuf>,
    /// Files listing source paths, one per line.
    #[arg(long)]
    pub list: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum, env = "CODETOK_ALGO")]
    pub algo: Algo,
    #[arg(long, env = "CODETOK_LEVEL", value_parser = clap::value_parser!(u8).range(0..=4))]
    pub level: u8,
    /// Vocabulary size, reserved tokens included.
    #[arg(long, env = "CODETOK_VOCAB")]
    pub vocab: usize,
    #[arg(long, env = "CODETOK_COVERAGE", default_value_t = 0.9999)]
    pub coverage: f64,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Unigram: seed vocabulary size as a multiple of the target.
    #[arg(long, default_value_t = 10)]
    pub seed_multiplier: usize,
    /// Unigram: share of pieces kept per pruning round.
    #[arg(long, default_value_t = 0.75)]
    pub shrink: f64,
    /// Unigram: EM iterations per pruning round.
    #[arg(long, default_value_t = 2)]
    pub em_iterations: usize,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Id lists, one sequence per line.
    #[arg(long)]
    pub out: PathBuf,
    /// Keep at most this many tokens per sequence.
    #[arg(long)]
    pub clip: Option<usize>,
    /// Sample segmentations (unigram only) with this smoothing exponent.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Id lists produced by `encode`.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Lang::Text)]
    pub lang: Lang,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub baseline: PathBuf,
    #[arg(long, num_args = 1..)]
    pub models: Vec<PathBuf>,
    #[command(flatten)]
    pub corpus: CorpusArgs,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub models: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Exactly two models.
    #[arg(long, required = true, num_args = 2)]
    pub models: Vec<PathBuf>,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, default_value_t = 1000)]
    pub sample: usize,
}

#[derive(Debug, Args)]
pub struct FreqArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Full profile as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Entries shown on stdout.
    #[arg(long, default_value_t = 20)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct CrossLangArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "corpus-a", required = true, num_args = 1..)]
    pub corpus_a: Vec<PathBuf>,
    #[arg(long = "corpus-b", required = true, num_args = 1..)]
    pub corpus_b: Vec<PathBuf>,
    /// Per-million frequency that counts as frequent.
    #[arg(long, default_value_t = 100.0)]
    pub f_hi: f64,
    /// Per-million frequency that counts as rare.
    #[arg(long, default_value_t = 10.0)]
    pub f_lo: f64,
}

#[derive(Debug, Args)]
pub struct IntersectArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Input side, line-aligned with `--outputs`.
    #[arg(long)]
    pub inputs: PathBuf,
    #[arg(long)]
    pub outputs: PathBuf,
}

#[derive(Debug, Args)]
pub struct CropArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub models: Vec<PathBuf>,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, default_value_t = 510)]
    pub max_len: usize,
    /// Directory receiving one id file per model (`0.ids`, `1.ids`, ...).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

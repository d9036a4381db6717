use std::path::{Path, PathBuf};

use codetok::analysis::{
    alignment_report, cross_language_report, frequency_profile, io_intersection, length_report,
    punctuation_mass, vocab_composition, TextTable,
};
use codetok::{
    clip, fair_crop, normalize, store, train_bpe, train_unigram, BpeConfig, Level, NormalizedSeq,
    SourceLang, SubwordModel, TokenizedSeq, UnigramConfig,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::io::{self, Skipped};

/// What a command prints: the JSON summary plus an optional table view.
pub struct Output {
    pub json: Value,
    pub table: Option<TextTable>,
}

impl Output {
    fn json(json: Value) -> Self {
        Output { json, table: None }
    }

    pub fn render(&self, format: Format) -> String {
        match (format, &self.table) {
            (Format::Table, Some(t)) => t.to_string(),
            (Format::Table, None) => flat_table(&self.json).to_string(),
            (Format::Json, _) => serde_json::to_string_pretty(&self.json).unwrap() + "\n",
        }
    }
}

fn flat_table(v: &Value) -> TextTable {
    let mut t = TextTable::new(["field", "value"]);
    if let Value::Object(map) = v {
        for (k, v) in map {
            let shown = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            t.row([k.clone(), shown]);
        }
    }
    t
}

fn load_model(path: &Path) -> CliResult<SubwordModel> {
    store::load(path).map_err(|e| CliError::data(path, e))
}

fn label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn corpus(args: &CorpusArgs, ctx: &Ctx, skipped: &mut Skipped) -> CliResult<Vec<NormalizedSeq>> {
    io::read_corpus(&args.inputs, args.lang.into(), ctx.skip_errors, skipped)
}

fn check_fraction(flag: &'static str, v: f64) -> CliResult<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(CliError::usage(flag, format!("must be in (0, 1], got {v}")))
    }
}

pub struct Ctx {
    pub seed: u64,
    pub skip_errors: bool,
}

pub fn run(command: &Command, ctx: &Ctx) -> CliResult<Output> {
    match command {
        Command::Normalize(a) => cmd_normalize(a, ctx),
        Command::Train(a) => cmd_train(a, ctx),
        Command::Encode(a) => cmd_encode(a, ctx),
        Command::Decode(a) => cmd_decode(a),
        Command::Stats(a) => cmd_stats(a, ctx),
        Command::Compose(a) => cmd_compose(a),
        Command::Align(a) => cmd_align(a, ctx),
        Command::Freq(a) => cmd_freq(a, ctx),
        Command::Crosslang(a) => cmd_crosslang(a, ctx),
        Command::Intersect(a) => cmd_intersect(a, ctx),
        Command::Crop(a) => cmd_crop(a, ctx),
    }
}

fn cmd_normalize(a: &NormalizeArgs, ctx: &Ctx) -> CliResult<Output> {
    let files = io::expand_inputs(&a.files, &a.list)?;
    if files.is_empty() {
        return Err(CliError::usage("--list", "no source files given"));
    }
    let lang: SourceLang = a.lang.into();
    let results: Vec<CliResult<NormalizedSeq>> = files
        .par_iter()
        .map(|f| {
            let text = io::read_text(f)?;
            normalize(&text, lang).map_err(|e| CliError::data(f, e))
        })
        .collect();
    let mut seqs = Vec::with_capacity(results.len());
    let mut skipped = Skipped::default();
    let mut empty = 0;
    for r in results {
        match r {
            Ok(s) if s.is_empty() => empty += 1,
            Ok(s) => seqs.push(s),
            Err(e) if ctx.skip_errors => skipped.note(e.to_string()),
            Err(e) => return Err(e),
        }
    }
    io::write_lines(&a.out, seqs.iter().map(NormalizedSeq::to_line))?;
    let mass = punctuation_mass(&seqs);
    Ok(Output::json(json!({
        "command": "normalize",
        "files": files.len(),
        "written": seqs.len(),
        "empty": empty,
        "skipped": skipped,
        "atoms": seqs.iter().map(NormalizedSeq::len).sum::<usize>(),
        "punctuation_mass": mass.fraction,
        "out": a.out,
    })))
}

fn cmd_train(a: &TrainArgs, ctx: &Ctx) -> CliResult<Output> {
    check_fraction("--coverage", a.coverage)?;
    if a.vocab == 0 {
        return Err(CliError::usage("--vocab", "must be positive"));
    }
    if a.algo == Algo::Unigram {
        check_fraction("--shrink", a.shrink)?;
        if a.shrink >= 1.0 {
            return Err(CliError::usage("--shrink", "must be below 1"));
        }
        if a.seed_multiplier == 0 {
            return Err(CliError::usage("--seed-multiplier", "must be positive"));
        }
    }
    let level = Level::new(a.level).map_err(|e| CliError::usage("--level", e.to_string()))?;
    let mut skipped = Skipped::default();
    let seqs = corpus(&a.corpus, ctx, &mut skipped)?;
    let source = &a.corpus.inputs[0];
    let model = match a.algo {
        Algo::Bpe => train_bpe(
            &seqs,
            &BpeConfig {
                level,
                vocab_size: a.vocab,
                coverage: a.coverage,
            },
        ),
        Algo::Unigram => train_unigram(
            &seqs,
            &UnigramConfig {
                level,
                vocab_size: a.vocab,
                coverage: a.coverage,
                seed_multiplier: a.seed_multiplier,
                shrink_factor: a.shrink,
                em_iterations: a.em_iterations,
                ..UnigramConfig::default()
            },
        ),
    }
    .map_err(|e| CliError::data(source, e))?;
    store::save(&model, &a.out).map_err(|e| CliError::data(&a.out, e))?;
    Ok(Output::json(json!({
        "command": "train",
        "algorithm": model.algorithm().to_string(),
        "level": level.get(),
        "vocab_size": model.vocab_size(),
        "alphabet": model.alphabet().len(),
        "sequences": seqs.len(),
        "skipped": skipped,
        "fingerprint": model.fingerprint(),
        "out": a.out,
    })))
}

fn ids_line(ts: &TokenizedSeq) -> String {
    let parts: Vec<String> = ts.ids.iter().map(u32::to_string).collect();
    parts.join(" ")
}

fn cmd_encode(a: &EncodeArgs, ctx: &Ctx) -> CliResult<Output> {
    if let Some(alpha) = a.alpha {
        if !(alpha > 0.0) {
            return Err(CliError::usage("--alpha", format!("must be positive, got {alpha}")));
        }
    }
    let model = load_model(&a.model)?;
    let mut skipped = Skipped::default();
    let seqs = corpus(&a.corpus, ctx, &mut skipped)?;
    let encoded: Vec<TokenizedSeq> = match a.alpha {
        None => model.encode_batch(&seqs),
        Some(alpha) => seqs
            .par_iter()
            .enumerate()
            .map(|(i, s)| model.sample_encode_stream(s, alpha, ctx.seed, i as u64))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::data(&a.model, e))?,
    };
    let encoded: Vec<TokenizedSeq> = match a.clip {
        Some(n) => encoded.iter().map(|t| clip(t, n)).collect(),
        None => encoded,
    };
    io::write_lines(&a.out, encoded.iter().map(ids_line))?;
    let tokens: usize = encoded.iter().map(TokenizedSeq::len).sum();
    Ok(Output::json(json!({
        "command": "encode",
        "sequences": encoded.len(),
        "tokens": tokens,
        "avg_tokens": tokens as f64 / encoded.len().max(1) as f64,
        "skipped": skipped,
        "model": model.fingerprint(),
        "out": a.out,
    })))
}

fn cmd_decode(a: &DecodeArgs) -> CliResult<Output> {
    let model = load_model(&a.model)?;
    let ids = io::read_ids(&a.input)?;
    let lang: SourceLang = a.lang.into();
    let lines = ids
        .iter()
        .enumerate()
        .map(|(i, ids)| {
            model
                .decode(ids, lang)
                .map(|s| s.to_line())
                .map_err(|e| CliError::data(&a.input, e.at_line(i + 1)))
        })
        .collect::<CliResult<Vec<_>>>()?;
    io::write_lines(&a.out, &lines)?;
    Ok(Output::json(json!({
        "command": "decode",
        "sequences": lines.len(),
        "out": a.out,
    })))
}

fn cmd_stats(a: &StatsArgs, ctx: &Ctx) -> CliResult<Output> {
    let mut paths = vec![a.baseline.clone()];
    paths.extend(a.models.iter().cloned());
    let models = paths.iter().map(|p| load_model(p)).collect::<CliResult<Vec<_>>>()?;
    let names: Vec<String> = paths.iter().map(|p| label(p)).collect();
    let mut skipped = Skipped::default();
    let seqs = corpus(&a.corpus, ctx, &mut skipped)?;
    let pairs: Vec<(&str, &SubwordModel)> = names.iter().map(String::as_str).zip(&models).collect();
    let report = length_report(&pairs, &seqs, 0).map_err(|e| CliError::data(&a.corpus.inputs[0], e))?;
    Ok(Output {
        table: Some(report.to_table()),
        json: serde_json::to_value(&report)?,
    })
}

fn cmd_compose(a: &ComposeArgs) -> CliResult<Output> {
    let mut reports = Vec::new();
    let mut table = TextTable::new([
        "model",
        "tokens",
        "composite",
        "punct_only",
        "closing_only",
        "opening_only",
        "both",
    ]);
    for path in &a.models {
        let model = load_model(path)?;
        let r = vocab_composition(&model);
        table.row([
            label(path),
            r.tokens.to_string(),
            format!("{:.4}", r.composite_fraction),
            format!("{:.4}", r.punct_only_fraction),
            format!("{:.4}", r.bracket_classes.closing_only),
            format!("{:.4}", r.bracket_classes.opening_only),
            format!("{:.4}", r.bracket_classes.both),
        ]);
        let mut v = serde_json::to_value(&r)?;
        v["model"] = json!(label(path));
        reports.push(v);
    }
    Ok(Output {
        json: Value::Array(reports),
        table: Some(table),
    })
}

fn cmd_align(a: &AlignArgs, ctx: &Ctx) -> CliResult<Output> {
    let ma = load_model(&a.models[0])?;
    let mb = load_model(&a.models[1])?;
    let (na, nb) = (label(&a.models[0]), label(&a.models[1]));
    let mut skipped = Skipped::default();
    let seqs = corpus(&a.corpus, ctx, &mut skipped)?;
    let report = alignment_report([(&na, &ma), (&nb, &mb)], &seqs, a.sample, ctx.seed);
    if report.insufficient {
        eprintln!(
            "warning: only {} disagreeing identifiers, fewer than the {} requested",
            report.sampled, report.requested
        );
    }
    Ok(Output {
        table: Some(report.to_table()),
        json: serde_json::to_value(&report)?,
    })
}

fn cmd_freq(a: &FreqArgs, ctx: &Ctx) -> CliResult<Output> {
    let model = load_model(&a.model)?;
    let mut skipped = Skipped::default();
    let seqs = corpus(&a.corpus, ctx, &mut skipped)?;
    let profile = frequency_profile(&model, &seqs).map_err(|e| CliError::data(&a.corpus.inputs[0], e))?;
    if let Some(path) = &a.csv {
        let mut w = io::create(path)?;
        profile
            .write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::data(path, e.into()))?;
    }
    let top: Vec<_> = profile.entries.iter().take(a.top).collect();
    Ok(Output {
        table: Some(profile.to_table(a.top)),
        json: json!({
            "command": "freq",
            "total_tokens": profile.total_tokens,
            "distinct_tokens": profile.entries.len(),
            "top": top,
            "csv": a.csv,
        }),
    })
}

fn cmd_crosslang(a: &CrossLangArgs, ctx: &Ctx) -> CliResult<Output> {
    if !(a.f_hi > a.f_lo && a.f_lo >= 0.0) {
        return Err(CliError::usage("--f-hi", "thresholds need f_hi > f_lo >= 0"));
    }
    let model = load_model(&a.model)?;
    let mut skipped = Skipped::default();
    let ca = io::read_corpus(&a.corpus_a, SourceLang::NaturalText, ctx.skip_errors, &mut skipped)?;
    let cb = io::read_corpus(&a.corpus_b, SourceLang::NaturalText, ctx.skip_errors, &mut skipped)?;
    let report = cross_language_report(&model, &ca, &cb, a.f_hi, a.f_lo)
        .map_err(|e| CliError::data(&a.corpus_a[0], e))?;
    Ok(Output {
        table: Some(report.to_table()),
        json: serde_json::to_value(&report)?,
    })
}

fn cmd_intersect(a: &IntersectArgs, ctx: &Ctx) -> CliResult<Output> {
    let model = load_model(&a.model)?;
    // Lines are paired, so a bad line on either side drops the pair.
    let read = |p: &PathBuf| -> CliResult<Vec<Option<NormalizedSeq>>> {
        let text = io::read_text(p)?;
        text.lines()
            .enumerate()
            .map(|(i, l)| match NormalizedSeq::from_line(l, SourceLang::NaturalText) {
                Ok(s) => Ok(Some(s)),
                Err(_) if ctx.skip_errors => Ok(None),
                Err(e) => Err(CliError::data(p, e.at_line(i + 1))),
            })
            .collect()
    };
    let ins = read(&a.inputs)?;
    let outs = read(&a.outputs)?;
    if ins.len() != outs.len() {
        let e = codetok::Error::InvalidParameter(format!(
            "{} input lines but {} output lines",
            ins.len(),
            outs.len()
        ));
        return Err(CliError::data(&a.outputs, e));
    }
    let pairs: Vec<(NormalizedSeq, NormalizedSeq)> = ins
        .into_iter()
        .zip(outs)
        .filter_map(|(i, o)| Some((i?, o?)))
        .collect();
    let report = io_intersection(&model, &pairs);
    Ok(Output {
        table: Some(report.to_table()),
        json: serde_json::to_value(&report)?,
    })
}

fn cmd_crop(a: &CropArgs, ctx: &Ctx) -> CliResult<Output> {
    if a.max_len == 0 {
        return Err(CliError::usage("--max-len", "must be positive"));
    }
    let models = a.models.iter().map(|p| load_model(p)).collect::<CliResult<Vec<_>>>()?;
    let mut skipped = Skipped::default();
    let seqs = corpus(&a.corpus, ctx, &mut skipped)?;
    let cropped: Vec<Vec<TokenizedSeq>> = seqs
        .par_iter()
        .map(|s| {
            let enc: Vec<TokenizedSeq> = models.iter().map(|m| m.encode(s)).collect();
            fair_crop(&enc, a.max_len)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::data(&a.corpus.inputs[0], e))?;
    let n = cropped.len().max(1) as f64;
    let mut table = TextTable::new(["model", "avg_tokens"]);
    let mut per_model = Vec::new();
    for (k, path) in a.models.iter().enumerate() {
        let total: usize = cropped.iter().map(|c| c[k].len()).sum();
        table.row([label(path), format!("{:.2}", total as f64 / n)]);
        per_model.push(json!({"model": label(path), "avg_tokens": total as f64 / n}));
        if let Some(dir) = &a.out_dir {
            std::fs::create_dir_all(dir).map_err(|e| CliError::data(dir, e.into()))?;
            io::write_lines(&dir.join(format!("{k}.ids")), cropped.iter().map(|c| ids_line(&c[k])))?;
        }
    }
    Ok(Output {
        table: Some(table),
        json: json!({
            "command": "crop",
            "sequences": cropped.len(),
            "max_len": a.max_len,
            "models": per_model,
            "skipped": skipped,
        }),
    })
}

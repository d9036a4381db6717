use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn codetok(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codetok"))
        .args(args)
        .env_remove("CODETOK_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A small normalized corpus with both languages' shapes.
fn corpus(dir: &Path) -> PathBuf {
    let mut lines = Vec::new();
    for i in 0..60 {
        lines.push(format!(
            "def get_item{i} ( self , key ) : NEW_LINE INDENT return self . items [ key ] NEW_LINE DEDENT"
        ));
        lines.push(format!(
            "public int getCount{} ( ) {{ return this . count + {i} ; }}",
            i % 7
        ));
    }
    let path = dir.join("corpus.txt");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    path
}

fn train(dir: &Path, algo: &str, level: &str, vocab: &str, name: &str) -> (PathBuf, Value) {
    let data = corpus(dir);
    let out = dir.join(name);
    let v = json(&codetok(&[
        "train", "--algo", algo, "--level", level, "--vocab", vocab, "--in", p(&data), "--out", p(&out),
    ]));
    (out, v)
}

#[test]
fn train_reaches_requested_vocab() {
    let dir = TempDir::new().unwrap();
    for (algo, level) in [("bpe", "0"), ("bpe", "4"), ("unigram", "1"), ("unigram", "3")] {
        let (model, v) = train(dir.path(), algo, level, "80", &format!("{algo}{level}.json"));
        assert_eq!(v["vocab_size"], 80, "{algo} L{level}");
        assert_eq!(v["algorithm"], algo);
        let stored: Value = serde_json::from_str(&fs::read_to_string(model).unwrap()).unwrap();
        assert_eq!(stored["format_version"], 1);
    }
}

#[test]
fn encode_decode_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let data = corpus(dir.path());
    for algo in ["bpe", "unigram"] {
        let (model, _) = train(dir.path(), algo, "2", "90", &format!("{algo}.json"));
        let ids = dir.path().join(format!("{algo}.ids"));
        let back = dir.path().join(format!("{algo}.txt"));
        let enc = json(&codetok(&["encode", "--model", p(&model), "--in", p(&data), "--out", p(&ids)]));
        assert_eq!(enc["sequences"], 120);
        json(&codetok(&["decode", "--model", p(&model), "--in", p(&ids), "--out", p(&back)]));
        assert_eq!(fs::read(&back).unwrap(), fs::read(&data).unwrap(), "{algo}");
    }
}

#[test]
fn gzipped_corpora_roundtrip() {
    let dir = TempDir::new().unwrap();
    let data = corpus(dir.path());
    let (model, _) = train(dir.path(), "bpe", "1", "70", "m.json");
    let ids = dir.path().join("ids.gz");
    let back = dir.path().join("back.txt.gz");
    json(&codetok(&["encode", "--model", p(&model), "--in", p(&data), "--out", p(&ids)]));
    json(&codetok(&["decode", "--model", p(&model), "--in", p(&ids), "--out", p(&back)]));
    let again = dir.path().join("again.ids");
    json(&codetok(&["encode", "--model", p(&model), "--in", p(&back), "--out", p(&again)]));
    let plain = dir.path().join("plain.ids");
    json(&codetok(&["encode", "--model", p(&model), "--in", p(&data), "--out", p(&plain)]));
    assert_eq!(fs::read(&again).unwrap(), fs::read(&plain).unwrap());
}

#[test]
fn stats_reports_every_model() {
    let dir = TempDir::new().unwrap();
    let data = corpus(dir.path());
    let (m0, _) = train(dir.path(), "unigram", "0", "80", "m0.json");
    let (m1, _) = train(dir.path(), "unigram", "1", "80", "m1.json");
    let (m4, _) = train(dir.path(), "unigram", "4", "80", "m4.json");
    let v = json(&codetok(&[
        "stats", "--baseline", p(&m0), "--models", p(&m1), p(&m4), "--in", p(&data),
    ]));
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    assert_eq!(entries[0]["delta_pct"], 0.0);
    assert!(entries[2]["avg_tokens"].as_f64().unwrap() < entries[0]["avg_tokens"].as_f64().unwrap());

    let table = codetok(&[
        "--format", "table", "stats", "--baseline", p(&m0), "--models", p(&m1), "--in", p(&data),
    ]);
    assert!(table.status.success());
    assert!(String::from_utf8_lossy(&table.stdout).contains("delta"));
}

#[test]
fn training_ignores_thread_count() {
    let dir = TempDir::new().unwrap();
    let data = corpus(dir.path());
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}.json"));
        json(&codetok(&[
            "--threads", threads, "train", "--algo", "unigram", "--level", "1", "--vocab", "80",
            "--in", p(&data), "--out", p(&out),
        ]));
        files.push(fs::read(out).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn normalize_writes_one_line_per_file() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.py");
    let b = dir.path().join("b.py");
    fs::write(&a, "def f(x):\n    # note\n    return x\n").unwrap();
    fs::write(&b, "y = 'a'  # tail\n").unwrap();
    let out = dir.path().join("out.txt");
    let v = json(&codetok(&["normalize", "--lang", "python", p(&a), p(&b), "--out", p(&out)]));
    assert_eq!(v["written"], 2);
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("def f ( x ) : NEW_LINE INDENT return x"));
    assert!(!text.contains("note") && !text.contains("tail"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let data = corpus(dir.path());
    let out = dir.path().join("m.json");
    let base = ["train", "--algo", "bpe", "--vocab", "60", "--in", p(&data), "--out", p(&out)];
    let cases: Vec<Vec<&str>> = vec![
        [&["--threads", "0"][..], &base[..], &["--level", "1"]].concat(),
        [&base[..], &["--level", "7"]].concat(),
        [&base[..], &["--level", "1", "--coverage", "1.5"]].concat(),
        [&base[..], &["--level", "1", "--no-such-flag"]].concat(),
        vec!["train", "--algo", "bpe"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = codetok(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn data_errors_exit_two_with_location() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "a b\nx  y\n").unwrap();
    let out = dir.path().join("m.json");
    let args = ["train", "--algo", "bpe", "--level", "0", "--vocab", "60", "--in", p(&bad), "--out", p(&out)];
    let o = codetok(&args);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(&format!("{}:2", bad.display())), "{err}");

    // The same corpus trains once bad lines may be skipped.
    let v = json(&codetok(&[&["--skip-errors"][..], &args[..]].concat()));
    assert_eq!(v["skipped"]["count"], 1);

    let missing = dir.path().join("missing.json");
    let o = codetok(&["encode", "--model", p(&missing), "--in", p(&bad), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));

    let src = dir.path().join("broken.py");
    fs::write(&src, "x = 1\ns = 'open\n").unwrap();
    let o = codetok(&["normalize", "--lang", "python", p(&src), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.py"));
}

#[test]
fn small_vocab_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let (_, _) = train(dir.path(), "bpe", "0", "80", "ok.json");
    let data = corpus(dir.path());
    let out = dir.path().join("m.json");
    let o = codetok(&["train", "--algo", "bpe", "--level", "0", "--vocab", "5", "--in", p(&data), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("too small"));
}

use std::io::Read;
use std::path::PathBuf;

use codetok::{
    train_bpe, train_unigram, BpeConfig, Level, NormalizedSeq, SourceLang, UnigramConfig,
};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};

fn desk(name: &str, lang: SourceLang, take: usize) -> Vec<NormalizedSeq> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/desk").join(name);
    let mut text = String::new();
    flate2::read::MultiGzDecoder::new(std::fs::File::open(path).unwrap())
        .read_to_string(&mut text)
        .unwrap();
    let mut seqs = codetok::parse_corpus(&text, lang).unwrap();
    seqs.truncate(take);
    seqs
}

fn encode(c: &mut Criterion) {
    let mut train = desk("python.txt.gz", SourceLang::Indented, 3000);
    train.extend(desk("java.txt.gz", SourceLang::Braced, 3000));
    let sample: Vec<NormalizedSeq> = train.iter().step_by(6).cloned().collect();
    let atoms: usize = sample.iter().map(NormalizedSeq::len).sum();

    let mut group = c.benchmark_group("encode");
    group.throughput(Throughput::Elements(atoms as u64));
    for level in [Level::L0, Level::L1, Level::L4] {
        let bpe = train_bpe(
            &train,
            &BpeConfig {
                level,
                vocab_size: 4000,
                ..BpeConfig::default()
            },
        )
        .unwrap();
        group.bench_function(format!("bpe/{level}"), |b| {
            b.iter(|| sample.iter().map(|s| bpe.encode_ids(s).len()).sum::<usize>())
        });
        let uni = train_unigram(
            &train,
            &UnigramConfig {
                level,
                vocab_size: 4000,
                ..UnigramConfig::default()
            },
        )
        .unwrap();
        group.bench_function(format!("unigram/{level}"), |b| {
            b.iter(|| sample.iter().map(|s| uni.encode_ids(s).len()).sum::<usize>())
        });
    }
    group.finish();
}

fn train(c: &mut Criterion) {
    let corpus = desk("java.txt.gz", SourceLang::Braced, 1000);
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    group.bench_function("bpe/L1/2k", |b| {
        b.iter_batched(
            || corpus.clone(),
            |data| {
                train_bpe(
                    &data,
                    &BpeConfig {
                        level: Level::L1,
                        vocab_size: 2000,
                        ..BpeConfig::default()
                    },
                )
                .unwrap()
            },
            BatchSize::LargeInput,
        )
    });
    group.bench_function("unigram/L1/2k", |b| {
        b.iter(|| {
            train_unigram(
                &corpus,
                &UnigramConfig {
                    level: Level::L1,
                    vocab_size: 2000,
                    ..UnigramConfig::default()
                },
            )
            .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, encode, train);
criterion_main!(benches);

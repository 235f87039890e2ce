//! Sequential vs parallel batch work over the shipped corpus.
//!
//! `cargo bench -p oat-core` compares both modes; with
//! `--no-default-features` the parallel rows fall back to one thread.

use std::path::PathBuf;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use oat_core::curation::{curate_dir, CurateOptions};
use oat_core::media::{augment, build_media_index, LexicalProvider, MediaKind, DEFAULT_MIN_SIM};
use oat_core::parser::{evaluate_corpus, load_turn_corpus, RuleBackend};
use oat_core::search::{load_corpus, SearchIndex};
use oat_core::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn data() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn corpus_and_index(c: &mut Criterion) {
    let dir = data().join("corpus");
    let (corpus, _) = load_corpus(&dir, Execution::Sequential).unwrap();
    let mut group = c.benchmark_group("corpus");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("load", name), &exec, |b, &exec| {
            b.iter(|| load_corpus(&dir, exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("index", name), &exec, |b, &exec| {
            b.iter(|| SearchIndex::from_corpus(&corpus, exec).unwrap())
        });
    }
    group.finish();
}

fn media(c: &mut Criterion) {
    let images_text = std::fs::read_to_string(data().join("media/images.jsonl")).unwrap();
    let videos_text = std::fs::read_to_string(data().join("media/videos.jsonl")).unwrap();
    let images = build_media_index(&images_text, MediaKind::Image, &LexicalProvider, Execution::Sequential).0;
    let videos = build_media_index(&videos_text, MediaKind::Video, &LexicalProvider, Execution::Sequential).0;
    let (corpus, _) = load_corpus(&data().join("corpus"), Execution::Sequential).unwrap();
    let graphs = corpus.graphs();
    let mut group = c.benchmark_group("media");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("embed_catalog", name), &exec, |b, &exec| {
            b.iter(|| build_media_index(&images_text, MediaKind::Image, &LexicalProvider, exec))
        });
        // Graph-level fan-out, the way curation drives augment.
        group.bench_with_input(BenchmarkId::new("augment_corpus", name), &exec, |b, &exec| {
            b.iter(|| {
                exec.map(graphs, |g| augment(g, &images, &videos, &LexicalProvider, DEFAULT_MIN_SIM, Execution::Sequential))
            })
        });
    }
    group.finish();
}

fn curation(c: &mut Criterion) {
    let input = data().join("documents");
    let out = tempfile::tempdir().unwrap();
    let mut group = c.benchmark_group("curation");
    group.sample_size(20);
    for (name, exec) in MODES {
        let opts = CurateOptions { exec, ..CurateOptions::default() };
        group.bench_with_input(BenchmarkId::new("curate_dir", name), &opts, |b, opts| {
            b.iter(|| curate_dir(&input, out.path(), opts).unwrap())
        });
    }
    group.finish();
}

fn parser(c: &mut Criterion) {
    let text = std::fs::read_to_string(data().join("eval/parser_turns.jsonl")).unwrap();
    let turns = load_turn_corpus(&text).unwrap();
    let backend = Arc::new(RuleBackend::default());
    let mut group = c.benchmark_group("parser");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("evaluate_corpus", name), &exec, |b, &exec| {
            b.iter(|| evaluate_corpus(&turns, backend.as_ref(), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, corpus_and_index, media, curation, parser);
criterion_main!(benches);

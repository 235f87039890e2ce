#[path = "support/bm25.rs"]
mod bm25;

use std::path::PathBuf;

use proptest::prelude::*;
use serde::Deserialize;

use oat_core::search::{idf, load_corpus, term_score, SearchIndex, THEME_BOOST};
use oat_core::Execution;

use bm25::{five_docs, REFERENCE};

#[test]
fn bm25_matches_reference_values() {
    let index = SearchIndex::build(&five_docs(), Execution::default()).unwrap();
    for (query, want) in REFERENCE {
        let got = index.scores(query);
        assert_eq!(got.len(), want.len(), "{query}");
        for (id, score) in *want {
            assert!((got[*id] - score).abs() < 1e-9, "{query} {id}: {} vs {score}", got[*id]);
        }
    }
}

#[test]
fn theme_boost_and_tie_order() {
    let index = SearchIndex::build(&five_docs(), Execution::default()).unwrap();
    let plain = index.query("pumpkin crust", "", 5).unwrap();
    let boosted = index.query("pumpkin crust", "halloween", 5).unwrap();
    let lantern = |r: &[oat_core::search::RankedResult]| r.iter().find(|x| x.task_id == "d-lantern").unwrap().score;
    assert!((lantern(&boosted) - THEME_BOOST * lantern(&plain)).abs() < 1e-12);
    // Equal scores fall back to id order.
    let ids: Vec<_> = plain.iter().map(|r| r.task_id.as_str()).collect();
    assert_eq!(ids, ["c-pumpkin-pie", "d-lantern", "a-apple-pie", "e-tart"]);
    assert_eq!(index.query("pumpkin", "", 1).unwrap().len(), 1);
    assert!(index.query("the of", "", 3).is_err());
    assert!(index.query("pumpkin", "", 0).is_err());
}

#[test]
fn browse_filters_by_theme() {
    let index = SearchIndex::build(&five_docs(), Execution::default()).unwrap();
    let ids: Vec<_> = index.browse("baking", 10).into_iter().map(|r| r.task_id).collect();
    assert_eq!(ids, ["a-apple-pie", "c-pumpkin-pie", "e-tart"]);
    assert_eq!(index.browse("", 2).len(), 2);
}

#[test]
fn idf_is_non_negative() {
    for n in 1..40 {
        for df in 1..=n {
            assert!(idf(n, df) > 0.0);
        }
    }
}

fn shipped() -> (SearchIndex, Vec<(String, String)>) {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let (corpus, report) = load_corpus(&root.join("corpus"), Execution::default()).unwrap();
    assert!(report.skipped.is_empty(), "{:?}", report.skipped);
    assert_eq!(corpus.len(), 50);
    #[derive(Deserialize)]
    struct Q {
        query: String,
        relevant: String,
    }
    let queries = std::fs::read_to_string(root.join("eval/search_queries.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<Q>(l).unwrap())
        .map(|q| (q.query, q.relevant))
        .collect();
    (SearchIndex::from_corpus(&corpus, Execution::default()).unwrap(), queries)
}

#[test]
fn shipped_corpus_retrieval_quality() {
    let (index, queries) = shipped();
    assert_eq!(queries.len(), 20);
    let mut rr = 0.0;
    let mut hits = 0;
    for (q, relevant) in &queries {
        let results = index.query(q, "", 10).unwrap();
        if let Some(rank) = results.iter().position(|r| &r.task_id == relevant) {
            rr += 1.0 / (rank + 1) as f64;
            hits += (rank == 0) as usize;
        }
    }
    let mrr = rr / queries.len() as f64;
    let hit1 = hits as f64 / queries.len() as f64;
    assert!(mrr >= 0.8, "MRR {mrr}");
    assert!(hit1 >= 0.7, "hit@1 {hit1}");
}

#[test]
fn parallel_and_sequential_indexes_agree() {
    let (index, queries) = shipped();
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/corpus");
    let (corpus, _) = load_corpus(&root, Execution::Sequential).unwrap();
    let seq = SearchIndex::from_corpus(&corpus, Execution::Sequential).unwrap();
    assert_eq!(seq, index);
    for (q, _) in &queries {
        assert_eq!(seq.query(q, "", 5).unwrap(), index.query(q, "", 5).unwrap());
    }
}

proptest! {
    #[test]
    fn term_score_grows_with_tf(tf in 1u32..50, len in 1u32..500, avg in 1.0f64..300.0, w in 0.01f64..5.0) {
        let a = term_score(tf as f64, len as f64, avg, w);
        let b = term_score(tf as f64 + 1.0, len as f64, avg, w);
        prop_assert!(b > a);
        prop_assert!(a > 0.0);
    }

    #[test]
    fn term_score_shrinks_with_length(tf in 1u32..50, len in 1u32..500, avg in 1.0f64..300.0, w in 0.01f64..5.0) {
        let a = term_score(tf as f64, len as f64, avg, w);
        let b = term_score(tf as f64, len as f64 + 1.0, avg, w);
        prop_assert!(b < a);
    }

    #[test]
    fn idf_falls_with_df(n in 2usize..200, df in 1usize..199) {
        prop_assume!(df < n);
        prop_assert!(idf(n, df + 1) < idf(n, df));
    }
}

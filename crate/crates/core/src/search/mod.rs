//! Sparse task retrieval: a BM25 inverted index with theme boosting.

mod corpus;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use corpus::{load_corpus, BuildReport, Corpus, CorpusError, SkippedFile, GRAPH_SUFFIX};

use crate::taskgraph::TaskGraph;
use crate::{text, Execution};

pub const K1: f64 = 1.2;
pub const B: f64 = 0.75;
pub const THEME_BOOST: f64 = 1.5;
pub const TITLE_WEIGHT: usize = 3;
pub const DESCRIPTION_WEIGHT: usize = 1;
pub const REQUIREMENT_WEIGHT: usize = 2;
pub const TAG_WEIGHT: usize = 2;
const SNIPPET_CHARS: usize = 120;

/// Lowercase, split on non-alphanumerics, drop stopwords.
pub fn tokenize(text: &str) -> Vec<String> {
    text::content_words(text)
}

/// The bag of terms indexed for one graph; field weights applied by repetition.
pub fn index_tokens(graph: &TaskGraph) -> Vec<String> {
    let mut out = Vec::new();
    let mut add = |text: &str, weight: usize| {
        let toks = tokenize(text);
        for _ in 0..weight {
            out.extend(toks.iter().cloned());
        }
    };
    add(&graph.title, TITLE_WEIGHT);
    add(&graph.description, DESCRIPTION_WEIGHT);
    for (_, req) in graph.requirements() {
        add(&req.name, REQUIREMENT_WEIGHT);
    }
    for tag in &graph.tags {
        let value = tag.split_once(':').map_or(tag.as_str(), |(_, v)| v);
        add(value, TAG_WEIGHT);
    }
    out
}

/// Lucene-style non-negative idf.
pub fn idf(n: usize, df: usize) -> f64 {
    let (n, df) = (n as f64, df as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

/// BM25 contribution of a single term.
pub fn term_score(tf: f64, doc_len: f64, avgdl: f64, idf: f64) -> f64 {
    let norm = if avgdl > 0.0 { doc_len / avgdl } else { 1.0 };
    idf * tf * (K1 + 1.0) / (tf + K1 * (1.0 - B + B * norm))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("query has no searchable terms")]
    EmptyQuery,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("duplicate task id `{0}`")]
    DuplicateId(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedResult {
    pub task_id: String,
    pub score: f64,
    pub title: String,
    pub snippet: String,
}

/// Reorders the top-k list after sparse scoring.
pub trait Reranker: Send + Sync {
    fn rerank(&self, query: &str, results: Vec<RankedResult>) -> Vec<RankedResult>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityReranker;

impl Reranker for IdentityReranker {
    fn rerank(&self, _query: &str, results: Vec<RankedResult>) -> Vec<RankedResult> {
        results
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedDoc {
    pub task_id: String,
    pub title: String,
    pub description: String,
    pub requirements: Vec<String>,
    pub tags: Vec<String>,
    /// Number of indexed terms, counting weights.
    pub len: usize,
}

/// Immutable inverted index. Doc ids follow ascending task id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchIndex {
    docs: Vec<IndexedDoc>,
    /// term -> (doc id, term frequency), sorted by doc id.
    postings: BTreeMap<String, Vec<(u32, u32)>>,
    avgdl: f64,
}

impl SearchIndex {
    pub fn build(graphs: &[Arc<TaskGraph>], exec: Execution) -> Result<Self, SearchError> {
        let mut order: Vec<&Arc<TaskGraph>> = graphs.iter().collect();
        order.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = order.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(SearchError::DuplicateId(w[0].id.clone()));
        }
        let bags = exec.map(&order, |g| index_tokens(g));

        let mut postings: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
        let mut docs = Vec::with_capacity(order.len());
        for (doc, (g, bag)) in order.iter().zip(&bags).enumerate() {
            let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
            for t in bag {
                *tf.entry(t).or_default() += 1;
            }
            for (term, count) in tf {
                postings.entry(term.to_string()).or_default().push((doc as u32, count));
            }
            docs.push(IndexedDoc {
                task_id: g.id.clone(),
                title: g.title.clone(),
                description: g.description.clone(),
                requirements: g.requirements().map(|(_, r)| r.name.clone()).collect(),
                tags: g.tags.clone(),
                len: bag.len(),
            });
        }
        let total: usize = docs.iter().map(|d| d.len).sum();
        let avgdl = if docs.is_empty() { 0.0 } else { total as f64 / docs.len() as f64 };
        Ok(SearchIndex { docs, postings, avgdl })
    }

    pub fn from_corpus(corpus: &Corpus, exec: Execution) -> Result<Self, SearchError> {
        Self::build(corpus.graphs(), exec)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn docs(&self) -> &[IndexedDoc] {
        &self.docs
    }

    pub fn doc(&self, task_id: &str) -> Option<&IndexedDoc> {
        self.docs
            .binary_search_by(|d| d.task_id.as_str().cmp(task_id))
            .ok()
            .map(|i| &self.docs[i])
    }

    pub fn postings(&self, term: &str) -> &[(u32, u32)] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    /// BM25 score of every doc with at least one query term, before boosting.
    pub fn scores(&self, query: &str) -> BTreeMap<String, f64> {
        let terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        let mut acc = vec![0.0f64; self.docs.len()];
        let mut hit = vec![false; self.docs.len()];
        for term in &terms {
            let plist = self.postings(term);
            if plist.is_empty() {
                continue;
            }
            let w = idf(self.docs.len(), plist.len());
            for &(doc, tf) in plist {
                let d = doc as usize;
                acc[d] += term_score(tf as f64, self.docs[d].len as f64, self.avgdl, w);
                hit[d] = true;
            }
        }
        (0..self.docs.len())
            .filter(|&d| hit[d])
            .map(|d| (self.docs[d].task_id.clone(), acc[d]))
            .collect()
    }

    pub fn query(&self, text: &str, theme: &str, k: usize) -> Result<Vec<RankedResult>, SearchError> {
        self.query_with(text, theme, k, &IdentityReranker)
    }

    /// Top `k` by score, ties by task id, then reranked.
    pub fn query_with(
        &self,
        text: &str,
        theme: &str,
        k: usize,
        reranker: &dyn Reranker,
    ) -> Result<Vec<RankedResult>, SearchError> {
        if k == 0 {
            return Err(SearchError::ZeroK);
        }
        if tokenize(text).is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        let theme_tag = format!("{}{}", crate::taskgraph::THEME_PREFIX, theme);
        let mut ranked: Vec<RankedResult> = self
            .scores(text)
            .into_iter()
            .filter(|(_, s)| *s > 0.0)
            .map(|(id, mut score)| {
                let doc = self.doc(&id).expect("scored doc is indexed");
                if !theme.is_empty() && doc.tags.contains(&theme_tag) {
                    score *= THEME_BOOST;
                }
                RankedResult {
                    task_id: id,
                    score,
                    title: doc.title.clone(),
                    snippet: snippet(&doc.description),
                }
            })
            .collect();
        ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.task_id.cmp(&b.task_id)));
        ranked.truncate(k);
        Ok(reranker.rerank(text, ranked))
    }

    /// Up to `k` tasks in id order, restricted to `theme` unless it is
    /// empty. Scores are 0.
    pub fn browse(&self, theme: &str, k: usize) -> Vec<RankedResult> {
        let theme_tag = format!("{}{}", crate::taskgraph::THEME_PREFIX, theme);
        self.docs
            .iter()
            .filter(|d| theme.is_empty() || d.tags.contains(&theme_tag))
            .take(k)
            .map(|d| RankedResult {
                task_id: d.task_id.clone(),
                score: 0.0,
                title: d.title.clone(),
                snippet: snippet(&d.description),
            })
            .collect()
    }
}

fn snippet(description: &str) -> String {
    if description.chars().count() <= SNIPPET_CHARS {
        return description.to_string();
    }
    let cut: String = description.chars().take(SNIPPET_CHARS).collect();
    let trimmed = cut.rsplit_once(' ').map_or(cut.as_str(), |(head, _)| head);
    format!("{}...", trimmed.trim_end_matches([',', ';', ':', ' ']))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskgraph::{Node, Payload, StepPayload};

    fn doc(id: &str, title: &str, description: &str, tags: &[&str]) -> Arc<TaskGraph> {
        let mut g = TaskGraph::new(id, title);
        g.description = description.to_string();
        g.tags = tags.iter().map(|t| t.to_string()).collect();
        g.nodes.push(Node::new("s1", Payload::Step(StepPayload::new("Do it."))));
        Arc::new(g)
    }

    fn toy() -> SearchIndex {
        let graphs = vec![
            doc("a", "Pizza night", "Homemade pizza dough.", &[]),
            doc("b", "Flatbread", "Like a pizza but flatter.", &[]),
            doc("c", "Garden salad", "Crisp lettuce.", &[]),
        ];
        SearchIndex::build(&graphs, Execution::Sequential).unwrap()
    }

    #[test]
    fn two_doc_stats_match_hand_count() {
        // "Tomato soup" x3 + "warm tomato soup" = 6 + 3 = 9 terms.
        // "Bread" x3 + "crusty bread" + tag "baking" x2 = 3 + 2 + 2 = 7 terms.
        let graphs = vec![
            doc("soup", "Tomato soup", "Warm tomato soup.", &[]),
            doc("bread", "Bread", "Crusty bread.", &["theme:baking"]),
        ];
        let idx = SearchIndex::build(&graphs, Execution::Sequential).unwrap();
        assert_eq!(idx.len(), 2);
        assert_eq!(idx.doc("soup").unwrap().len, 9);
        assert_eq!(idx.doc("bread").unwrap().len, 7);
        assert!((idx.avgdl() - 8.0).abs() < 1e-12);
        assert_eq!(idx.postings("tomato"), &[(1, 4)]);
        assert_eq!(idx.postings("bread"), &[(0, 4)]);
    }

    #[test]
    fn pizza_ranking() {
        let idx = toy();
        let hits = idx.query("pizza", "", 10).unwrap();
        let ids: Vec<&str> = hits.iter().map(|r| r.task_id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert!(hits[0].score > hits[1].score);
    }

    #[test]
    fn no_match_and_errors() {
        let idx = toy();
        assert!(idx.query("sushi", "", 3).unwrap().is_empty());
        assert_eq!(idx.query("the and of", "", 3), Err(SearchError::EmptyQuery));
        assert_eq!(idx.query("pizza", "", 0), Err(SearchError::ZeroK));
        let empty = SearchIndex::build(&[], Execution::Sequential).unwrap();
        assert!(empty.query("pizza", "", 3).unwrap().is_empty());
    }

    #[test]
    fn theme_boost_breaks_a_tie() {
        // Same text, so equal base scores; the tag does not add query terms.
        let graphs = vec![
            doc("plain", "Roast turkey", "Roast turkey.", &["theme:autumn"]),
            doc("tagged", "Roast turkey", "Roast turkey.", &["theme:thanksgiving"]),
        ];
        let idx = SearchIndex::build(&graphs, Execution::Sequential).unwrap();
        let base = idx.query("roast turkey", "", 2).unwrap();
        assert_eq!(base[0].task_id, "plain");
        assert_eq!(base[0].score, base[1].score);
        let boosted = idx.query("roast turkey", "thanksgiving", 2).unwrap();
        assert_eq!(boosted[0].task_id, "tagged");
        assert!((boosted[0].score - 1.5 * boosted[1].score).abs() < 1e-12);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let graphs = vec![doc("x", "One", "", &[]), doc("x", "Two", "", &[])];
        assert_eq!(
            SearchIndex::build(&graphs, Execution::Sequential),
            Err(SearchError::DuplicateId("x".into()))
        );
    }

    #[test]
    fn modes_agree() {
        let graphs: Vec<_> = (0..40)
            .map(|i| doc(&format!("t{i:02}"), &format!("Task {i} pizza"), &"dough ".repeat(i % 7), &[]))
            .collect();
        let a = SearchIndex::build(&graphs, Execution::Sequential).unwrap();
        let b = SearchIndex::build(&graphs, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn snippets_cut_at_words() {
        let long = "word ".repeat(40);
        let s = snippet(long.trim());
        assert!(s.ends_with("word..."));
        assert!(s.chars().count() <= SNIPPET_CHARS + 3);
        assert_eq!(snippet("short"), "short");
    }
}

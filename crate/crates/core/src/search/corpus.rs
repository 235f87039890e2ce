use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taskgraph::{self, TaskGraph};
use crate::Execution;

pub const GRAPH_SUFFIX: &str = ".taskgraph.json";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus directory {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("task id `{id}` appears in both {first} and {second}")]
    DuplicateId {
        id: String,
        first: String,
        second: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub file: String,
    pub reason: String,
}

/// Which files made it into a corpus and why the others did not.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub indexed: Vec<String>,
    pub skipped: Vec<SkippedFile>,
}

/// Validated task graphs, in file-name order.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    graphs: Vec<Arc<TaskGraph>>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    /// Fails on duplicate task ids. Graphs are assumed valid.
    pub fn from_graphs(graphs: Vec<TaskGraph>) -> Result<Self, CorpusError> {
        let files: Vec<String> = graphs.iter().map(|g| g.id.clone()).collect();
        Self::assemble(graphs.into_iter().map(Arc::new).zip(files).collect())
    }

    fn assemble(entries: Vec<(Arc<TaskGraph>, String)>) -> Result<Self, CorpusError> {
        let mut corpus = Corpus::default();
        let mut origin: Vec<String> = Vec::new();
        for (graph, file) in entries {
            if let Some(&i) = corpus.by_id.get(&graph.id) {
                return Err(CorpusError::DuplicateId {
                    id: graph.id.clone(),
                    first: origin[i].clone(),
                    second: file,
                });
            }
            corpus.by_id.insert(graph.id.clone(), corpus.graphs.len());
            corpus.graphs.push(graph);
            origin.push(file);
        }
        Ok(corpus)
    }

    pub fn graphs(&self) -> &[Arc<TaskGraph>] {
        &self.graphs
    }

    pub fn get(&self, id: &str) -> Option<&Arc<TaskGraph>> {
        self.by_id.get(id).map(|&i| &self.graphs[i])
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Theme tags, most common first, ties alphabetical.
    pub fn themes(&self) -> Vec<String> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for g in &self.graphs {
            for t in g.themes() {
                *counts.entry(t).or_default() += 1;
            }
        }
        let mut themes: Vec<(&str, usize)> = counts.into_iter().collect();
        themes.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        themes.into_iter().map(|(t, _)| t.to_string()).collect()
    }
}

/// Load every `*.taskgraph.json` file in `dir`. Unreadable, malformed or
/// invalid graphs are skipped and listed in the report.
pub fn load_corpus(dir: &Path, exec: Execution) -> Result<(Corpus, BuildReport), CorpusError> {
    let io_err = |source| CorpusError::Io { path: dir.to_path_buf(), source };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(GRAPH_SUFFIX)))
        .collect();
    files.sort();

    let loaded = exec.map(&files, |path| -> Result<TaskGraph, String> {
        let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
        let graph = taskgraph::load(&bytes).map_err(|e| e.to_string())?;
        let report = taskgraph::validate(&graph);
        if !report.is_valid() {
            return Err(format!("invalid graph: {report}"));
        }
        Ok(graph)
    });

    let mut report = BuildReport::default();
    let mut entries = Vec::new();
    for (path, result) in files.iter().zip(loaded) {
        let file = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        match result {
            Ok(graph) => {
                report.indexed.push(file.clone());
                entries.push((Arc::new(graph), file));
            }
            Err(reason) => {
                tracing::warn!(%file, %reason, "skipping corpus file");
                report.skipped.push(SkippedFile { file, reason });
            }
        }
    }
    Ok((Corpus::assemble(entries)?, report))
}

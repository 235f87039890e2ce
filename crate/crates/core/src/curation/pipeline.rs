use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{apply_overlay, load_document, load_overlay, synthesize, SynthesisOptions, DOCUMENT_SUFFIX, OVERLAY_SUFFIX};
use crate::media::{augment, EmbeddingProvider, MediaIndex};
use crate::search::{SkippedFile, GRAPH_SUFFIX};
use crate::taskgraph::{save, TaskGraph};
use crate::Execution;

/// Catalog indexes used to fill in missing step media.
#[derive(Clone)]
pub struct MediaSources {
    pub images: MediaIndex,
    pub videos: MediaIndex,
    pub provider: Arc<dyn EmbeddingProvider>,
    pub min_sim: f64,
}

#[derive(Clone, Default)]
pub struct CurateOptions {
    pub synthesis: SynthesisOptions,
    pub media: Option<MediaSources>,
    /// Directory holding `<task id>.overlay.json` files.
    pub overlays: Option<PathBuf>,
    pub exec: Execution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuratedFile {
    pub source: String,
    pub task_id: String,
    pub output: String,
    pub overlay: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurateReport {
    pub written: Vec<CuratedFile>,
    pub failed: Vec<SkippedFile>,
}

#[derive(Debug, Error)]
pub enum CurateError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

/// Load, synthesize, augment and overlay one document file.
fn compile(path: &Path, opts: &CurateOptions) -> Result<(TaskGraph, bool), String> {
    let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
    let doc = load_document(&bytes).map_err(|e| e.to_string())?;
    let mut graph = synthesize(&doc, opts.synthesis).map_err(|e| e.to_string())?;
    if let Some(m) = &opts.media {
        graph = augment(&graph, &m.images, &m.videos, m.provider.as_ref(), m.min_sim, Execution::Sequential);
    }
    let mut overlaid = false;
    if let Some(dir) = &opts.overlays {
        let file = dir.join(format!("{}{OVERLAY_SUFFIX}", graph.id));
        if file.exists() {
            let bytes = std::fs::read(&file).map_err(|e| e.to_string())?;
            let overlay = load_overlay(&bytes).map_err(|e| format!("{}: {e}", file.display()))?;
            graph = apply_overlay(&graph, &overlay).map_err(|e| format!("{}: {e}", file.display()))?;
            overlaid = true;
        }
    }
    Ok((graph, overlaid))
}

/// Compile every `*.task.json` in `input` into `<task id>.taskgraph.json`
/// files in `output`. Per-document failures are reported, not fatal.
pub fn curate_dir(input: &Path, output: &Path, opts: &CurateOptions) -> Result<CurateReport, CurateError> {
    let read_err = |source| CurateError::Read { path: input.to_path_buf(), source };
    let mut files: Vec<PathBuf> = std::fs::read_dir(input)
        .map_err(read_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(DOCUMENT_SUFFIX)))
        .collect();
    files.sort();
    std::fs::create_dir_all(output).map_err(|source| CurateError::Write { path: output.to_path_buf(), source })?;

    let compiled = opts.exec.map(&files, |p| compile(p, opts));
    let mut report = CurateReport::default();
    let mut seen = HashSet::new();
    for (path, result) in files.iter().zip(compiled) {
        let source = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let (graph, overlay) = match result {
            Ok(ok) => ok,
            Err(reason) => {
                report.failed.push(SkippedFile { file: source, reason });
                continue;
            }
        };
        if !seen.insert(graph.id.clone()) {
            let reason = format!("task id `{}` already produced by an earlier document", graph.id);
            report.failed.push(SkippedFile { file: source, reason });
            continue;
        }
        let name = format!("{}{GRAPH_SUFFIX}", graph.id);
        let out = output.join(&name);
        std::fs::write(&out, save(&graph)).map_err(|source| CurateError::Write { path: out.clone(), source })?;
        report.written.push(CuratedFile { source, task_id: graph.id.clone(), output: name, overlay });
    }
    Ok(report)
}

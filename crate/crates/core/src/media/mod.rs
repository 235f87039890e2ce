//! Step media augmentation by embedding similarity between a step's action
//! phrase and catalog captions or video titles.

mod action;
mod embed;

use serde::{Deserialize, Serialize};

pub use action::{extract_action, ActionExtractor, DEFAULT_VERBS, MAX_ACTION_TOKENS};
pub use embed::{cosine, fnv1a64, l2_normalize, EmbedError, EmbeddingProvider, LexicalProvider, RemoteProvider, LEXICAL_DIM};

use crate::taskgraph::{MediaRef, TaskGraph};
use crate::Execution;

/// Minimum cosine similarity for a match unless overridden.
pub const DEFAULT_MIN_SIM: f64 = 0.35;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaKind {
    Image,
    Video,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaEntry {
    pub media: MediaRef,
    /// Caption for images, title for videos.
    pub text: String,
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogIssue {
    /// 1-based.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CatalogReport {
    pub indexed: usize,
    pub skipped: Vec<CatalogIssue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaIndex {
    pub kind: MediaKind,
    pub dim: usize,
    pub entries: Vec<MediaEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ImageLine {
    url: String,
    caption: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VideoLine {
    url: String,
    title: String,
}

impl MediaIndex {
    pub fn empty(kind: MediaKind, dim: usize) -> Self {
        MediaIndex { kind, dim, entries: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Best entry by cosine similarity, earliest on ties, if it reaches `min_sim`.
    pub fn best_match(&self, query: &[f64], min_sim: f64) -> Option<(&MediaEntry, f64)> {
        let mut best: Option<(&MediaEntry, f64)> = None;
        for e in &self.entries {
            let s = cosine(query, &e.embedding);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((e, s));
            }
        }
        best.filter(|(_, s)| *s >= min_sim)
    }
}

/// Parse a line-delimited catalog and embed each entry. Bad lines are
/// skipped and reported.
pub fn build_media_index(
    catalog: &str,
    kind: MediaKind,
    provider: &dyn EmbeddingProvider,
    exec: Execution,
) -> (MediaIndex, CatalogReport) {
    let mut report = CatalogReport::default();
    let mut parsed: Vec<(usize, MediaRef, String)> = Vec::new();
    for (i, line) in catalog.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry = match kind {
            MediaKind::Image => serde_json::from_str::<ImageLine>(line).map(|l| (l.url, l.caption)),
            MediaKind::Video => serde_json::from_str::<VideoLine>(line).map(|l| (l.url, l.title)),
        };
        match entry {
            Ok((url, text)) => parsed.push((i + 1, MediaRef::new(url, Some(text.clone())), text)),
            Err(e) => report.skipped.push(CatalogIssue { line: i + 1, reason: e.to_string() }),
        }
    }
    let embeddings = exec.map(&parsed, |(_, _, text)| provider.embed(text));
    let mut index = MediaIndex::empty(kind, provider.dim());
    for ((line, media, text), emb) in parsed.into_iter().zip(embeddings) {
        match emb {
            Ok(embedding) => index.entries.push(MediaEntry { media, text, embedding }),
            Err(e) => report.skipped.push(CatalogIssue { line, reason: e.to_string() }),
        }
    }
    report.skipped.sort_by_key(|s| s.line);
    report.indexed = index.len();
    for issue in &report.skipped {
        tracing::warn!(line = issue.line, reason = %issue.reason, "skipping catalog line");
    }
    (index, report)
}

/// Best media for an action phrase, if similar enough.
pub fn match_media(
    index: &MediaIndex,
    action: &str,
    provider: &dyn EmbeddingProvider,
    min_sim: f64,
) -> Option<(MediaRef, f64)> {
    let query = provider.embed(action).ok()?;
    index.best_match(&query, min_sim).map(|(e, s)| (e.media.clone(), s))
}

/// Fill in missing step images and videos. Steps that already carry media
/// keep it, so a second run changes nothing.
pub fn augment(
    graph: &TaskGraph,
    images: &MediaIndex,
    videos: &MediaIndex,
    provider: &dyn EmbeddingProvider,
    min_sim: f64,
    exec: Execution,
) -> TaskGraph {
    let mut out = graph.clone();
    let extractor = ActionExtractor::default();
    let targets: Vec<(usize, String, bool, bool)> = out
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(i, n)| {
            let s = n.as_step()?;
            let (need_image, need_video) = (s.image.is_none(), s.video.is_none());
            (need_image || need_video).then(|| (i, s.full_text(), need_image, need_video))
        })
        .collect();
    let found = exec.map(&targets, |(_, text, need_image, need_video)| {
        let action = extractor.extract(text);
        let image = need_image.then(|| match_media(images, &action, provider, min_sim)).flatten();
        let video = need_video.then(|| match_media(videos, &action, provider, min_sim)).flatten();
        (image, video)
    });
    for ((i, ..), (image, video)) in targets.iter().zip(found) {
        let step = out.nodes[*i].as_step_mut().expect("target is a step");
        if let Some((m, _)) = image {
            step.image = Some(m);
        }
        if let Some((m, _)) = video {
            step.video = Some(m);
        }
    }
    out
}

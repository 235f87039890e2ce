use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LEXICAL_DIM: usize = 256;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedError {
    #[error("nothing to embed in {0:?}")]
    EmptyText(String),
    #[error("embedding service failed: {0}")]
    Remote(String),
    #[error("embedding has dimension {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
}

/// Maps text to unit-length vectors of a fixed dimension.
pub trait EmbeddingProvider: Send + Sync {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError>;

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
        texts.iter().map(|t| self.embed(t)).collect()
    }

    fn name(&self) -> &str;
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// Scale to unit length; `None` for the zero vector.
pub fn l2_normalize(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Hashed character-trigram counts. Text is reduced to lowercase ASCII
/// alphanumeric runs joined by single spaces and padded with one space on
/// each side; each trigram's bytes are hashed with FNV-1a into 256 buckets.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalProvider;

impl LexicalProvider {
    pub fn padded(text: &str) -> String {
        let lower = text.to_lowercase();
        let runs: Vec<&str> = lower
            .split(|c: char| !c.is_ascii_alphanumeric())
            .filter(|w| !w.is_empty())
            .collect();
        format!(" {} ", runs.join(" "))
    }

    pub fn counts(text: &str) -> Vec<f64> {
        let padded = Self::padded(text);
        let mut v = vec![0.0; LEXICAL_DIM];
        for tri in padded.as_bytes().windows(3) {
            v[(fnv1a64(tri) % LEXICAL_DIM as u64) as usize] += 1.0;
        }
        v
    }
}

impl EmbeddingProvider for LexicalProvider {
    fn dim(&self) -> usize {
        LEXICAL_DIM
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        l2_normalize(Self::counts(text)).ok_or_else(|| EmbedError::EmptyText(text.to_string()))
    }

    fn name(&self) -> &str {
        "lexical"
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedReply {
    vectors: Vec<Vec<f64>>,
}

/// Embeddings from an HTTP service; replies are renormalized.
pub struct RemoteProvider {
    url: String,
    dim: usize,
    agent: ureq::Agent,
}

impl RemoteProvider {
    pub fn new(url: impl Into<String>, dim: usize, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into();
        RemoteProvider { url: url.into(), dim, agent }
    }
}

impl EmbeddingProvider for RemoteProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        let mut out = self.embed_batch(&[text.to_string()])?;
        out.pop().ok_or_else(|| EmbedError::Remote("empty reply".into()))
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
        let remote = |e: ureq::Error| EmbedError::Remote(e.to_string());
        let reply: EmbedReply = self
            .agent
            .post(&self.url)
            .send_json(EmbedRequest { texts })
            .map_err(remote)?
            .body_mut()
            .read_json()
            .map_err(remote)?;
        if reply.vectors.len() != texts.len() {
            return Err(EmbedError::Remote(format!(
                "{} vectors for {} texts",
                reply.vectors.len(),
                texts.len()
            )));
        }
        reply
            .vectors
            .into_iter()
            .zip(texts)
            .map(|(v, t)| {
                if v.len() != self.dim {
                    return Err(EmbedError::Dimension { got: v.len(), expected: self.dim });
                }
                l2_normalize(v).ok_or_else(|| EmbedError::EmptyText(t.clone()))
            })
            .collect()
    }

    fn name(&self) -> &str {
        "remote"
    }
}

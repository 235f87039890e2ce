use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::taskgraph::io::from_json_slice;
use crate::taskgraph::{LoadError, MediaRef, RequirementCategory};

pub const DOCUMENT_SUFFIX: &str = ".task.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocRequirement {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,
    #[serde(default)]
    pub category: RequirementCategory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocStep {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<MediaRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Faq {
    pub q: String,
    pub a: String,
}

/// A semi-structured task as scraped from a how-to page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDocument {
    /// Derived from the title when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub requirements: Vec<DocRequirement>,
    pub steps: Vec<DocStep>,
    #[serde(default)]
    pub videos: Vec<MediaRef>,
    #[serde(default)]
    pub faqs: Vec<Faq>,
    #[serde(default)]
    pub infobox: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<f64>,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl TaskDocument {
    pub fn task_id(&self) -> String {
        match &self.id {
            Some(id) => id.clone(),
            None => slug(&self.title),
        }
    }

    fn normalize(&mut self) {
        let trim = |s: &mut String| *s = s.trim().to_string();
        trim(&mut self.title);
        trim(&mut self.description);
        for r in &mut self.requirements {
            r.name = r.name.trim().to_lowercase();
            r.quantity = r.quantity.take().map(|q| q.trim().to_string()).filter(|q| !q.is_empty());
        }
        for s in &mut self.steps {
            trim(&mut s.text);
        }
        for f in &mut self.faqs {
            trim(&mut f.q);
            trim(&mut f.a);
        }
        self.requirements.retain(|r| !r.name.is_empty());
        self.steps.retain(|s| !s.text.is_empty());
    }
}

/// Lowercase alphanumeric runs joined by `-`.
pub fn slug(text: &str) -> String {
    crate::text::words(text).join("-")
}

fn schema(path: &str, message: &str) -> LoadError {
    LoadError::Schema { path: path.into(), line: 0, column: 0, message: message.into() }
}

/// Parse and normalize a `.task.json` document.
pub fn load_document(bytes: &[u8]) -> Result<TaskDocument, LoadError> {
    let mut doc: TaskDocument = from_json_slice(bytes)?;
    doc.normalize();
    if doc.title.is_empty() {
        return Err(schema("title", "title must not be empty"));
    }
    if doc.steps.is_empty() {
        return Err(schema("steps", "document needs at least one step"));
    }
    Ok(doc)
}

//! Corpus file format: one UTF-8 JSON document per task.
//!
//! Nodes are flat objects discriminated by `kind`. `save` writes keys in
//! sorted order and keeps node and edge order as declared.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::*;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum LoadError {
    /// The bytes are not well-formed JSON.
    #[error("malformed document at line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    /// Well-formed JSON that does not fit the schema.
    #[error("schema error at `{path}` (line {line}, column {column}): {message}")]
    Schema {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Version(u32),
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum NodeRepr {
    Step {
        id: NodeId,
        summary: String,
        #[serde(default)]
        details: Option<String>,
        #[serde(default)]
        image: Option<MediaRef>,
        #[serde(default)]
        video: Option<MediaRef>,
    },
    Requirement {
        id: NodeId,
        name: String,
        #[serde(default)]
        quantity: Option<String>,
        category: RequirementCategory,
    },
    Condition {
        id: NodeId,
        question: String,
    },
    Logic {
        id: NodeId,
        op: LogicOp,
    },
    Action {
        id: NodeId,
        action: ActionKind,
        #[serde(default)]
        args: BTreeMap<String, String>,
    },
    Extra {
        id: NodeId,
        extra_kind: ExtraKind,
        text: String,
    },
}

impl From<NodeRepr> for Node {
    fn from(r: NodeRepr) -> Self {
        match r {
            NodeRepr::Step {
                id,
                summary,
                details,
                image,
                video,
            } => Node::new(
                id,
                Payload::Step(StepPayload {
                    summary,
                    details,
                    image,
                    video,
                }),
            ),
            NodeRepr::Requirement {
                id,
                name,
                quantity,
                category,
            } => Node::new(
                id,
                Payload::Requirement(RequirementPayload {
                    name: name.trim().to_lowercase(),
                    quantity,
                    category,
                }),
            ),
            NodeRepr::Condition { id, question } => {
                Node::new(id, Payload::Condition(ConditionPayload { question }))
            }
            NodeRepr::Logic { id, op } => Node::new(id, Payload::Logic(LogicPayload { op })),
            NodeRepr::Action { id, action, args } => {
                Node::new(id, Payload::Action(ActionPayload { action, args }))
            }
            NodeRepr::Extra {
                id,
                extra_kind,
                text,
            } => Node::new(
                id,
                Payload::ExtraInfo(ExtraInfoPayload {
                    kind: extra_kind,
                    text,
                }),
            ),
        }
    }
}

impl From<&Node> for NodeRepr {
    fn from(n: &Node) -> Self {
        let id = n.id.clone();
        match &n.payload {
            Payload::Step(s) => NodeRepr::Step {
                id,
                summary: s.summary.clone(),
                details: s.details.clone(),
                image: s.image.clone(),
                video: s.video.clone(),
            },
            Payload::Requirement(r) => NodeRepr::Requirement {
                id,
                name: r.name.clone(),
                quantity: r.quantity.clone(),
                category: r.category,
            },
            Payload::Condition(c) => NodeRepr::Condition {
                id,
                question: c.question.clone(),
            },
            Payload::Logic(l) => NodeRepr::Logic { id, op: l.op },
            Payload::Action(a) => NodeRepr::Action {
                id,
                action: a.action,
                args: a.args.clone(),
            },
            Payload::ExtraInfo(x) => NodeRepr::Extra {
                id,
                extra_kind: x.kind,
                text: x.text.clone(),
            },
        }
    }
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        NodeRepr::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        NodeRepr::deserialize(deserializer).map(Node::from)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    schema_version: u32,
    id: String,
    title: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    source_url: Option<String>,
    #[serde(default)]
    tags: Vec<String>,
    nodes: Vec<Node>,
    #[serde(default)]
    edges: Vec<Edge>,
}

#[derive(Serialize)]
struct GraphFileRef<'a> {
    schema_version: u32,
    id: &'a str,
    title: &'a str,
    description: &'a str,
    source_url: &'a Option<String>,
    tags: &'a [String],
    nodes: &'a [Node],
    edges: &'a [Edge],
}

impl Serialize for TaskGraph {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GraphFileRef {
            schema_version: SCHEMA_VERSION,
            id: &self.id,
            title: &self.title,
            description: &self.description,
            source_url: &self.source_url,
            tags: &self.tags,
            nodes: &self.nodes,
            edges: &self.edges,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TaskGraph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let f = GraphFile::deserialize(deserializer)?;
        if f.schema_version != SCHEMA_VERSION {
            return Err(serde::de::Error::custom(format!(
                "unsupported schema_version {}",
                f.schema_version
            )));
        }
        Ok(TaskGraph {
            id: f.id,
            title: f.title,
            description: f.description,
            source_url: f.source_url,
            tags: f.tags,
            nodes: f.nodes,
            edges: f.edges,
        })
    }
}

/// Parse a corpus file. Structural errors carry the JSON path and position.
pub fn load(bytes: &[u8]) -> Result<TaskGraph, LoadError> {
    // Peek at the version first so a future schema fails with a clear message.
    if let Ok(serde_json::Value::Object(map)) = serde_json::from_slice::<serde_json::Value>(bytes) {
        if let Some(v) = map.get("schema_version").and_then(|v| v.as_u64()) {
            if v != SCHEMA_VERSION as u64 {
                return Err(LoadError::Version(v as u32));
            }
        }
    }
    from_json_slice(bytes)
}

/// Deserialize any value, mapping serde errors onto [`LoadError`].
pub(crate) fn from_json_slice<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, LoadError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let result: Result<T, _> = serde_path_to_error::deserialize(de);
    result.map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        let (line, column) = (inner.line(), inner.column());
        match inner.classify() {
            serde_json::error::Category::Data => LoadError::Schema {
                path,
                line,
                column,
                message: strip_position(&inner.to_string()),
            },
            _ => LoadError::Malformed {
                line,
                column,
                message: strip_position(&inner.to_string()),
            },
        }
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Canonical bytes: sorted keys, two-space indent, trailing newline.
pub fn save(graph: &TaskGraph) -> Vec<u8> {
    to_canonical_json(graph)
}

pub(crate) fn to_canonical_json<T: Serialize>(value: &T) -> Vec<u8> {
    // serde_json::Value keeps object keys in a BTreeMap, which sorts them.
    let value = serde_json::to_value(value).expect("in-memory values always serialize");
    let mut out = serde_json::to_vec_pretty(&value).expect("json values always serialize");
    out.push(b'\n');
    out
}

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taskgraph::io::from_json_slice;
use crate::taskgraph::{validate, Edge, LoadError, Node, NodeId, TaskGraph, ValidationReport};

pub const OVERLAY_SUFFIX: &str = ".overlay.json";

/// Manual edits layered on a synthesized graph.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overlay {
    #[serde(default)]
    pub add_nodes: Vec<Node>,
    #[serde(default)]
    pub add_edges: Vec<Edge>,
    #[serde(default)]
    pub remove_edges: Vec<Edge>,
}

impl Overlay {
    pub fn is_empty(&self) -> bool {
        self.add_nodes.is_empty() && self.add_edges.is_empty() && self.remove_edges.is_empty()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum OverlayError {
    #[error("overlay node id `{0}` already exists")]
    IdCollision(NodeId),
    #[error("overlay removes edge {from} -{label}-> {to}, which does not exist")]
    MissingEdge { from: NodeId, to: NodeId, label: String },
    #[error("overlay adds duplicate edge {from} -{label}-> {to}")]
    DuplicateEdge { from: NodeId, to: NodeId, label: String },
    #[error("graph is invalid after overlay:\n{0}")]
    Invalid(ValidationReport),
}

pub fn load_overlay(bytes: &[u8]) -> Result<Overlay, LoadError> {
    from_json_slice(bytes)
}

fn same(a: &Edge, b: &Edge) -> bool {
    a.from == b.from && a.to == b.to && a.label == b.label
}

/// Remove listed edges, add nodes and edges, then validate. The input graph
/// is never modified.
pub fn apply_overlay(graph: &TaskGraph, overlay: &Overlay) -> Result<TaskGraph, OverlayError> {
    let mut out = graph.clone();
    for rm in &overlay.remove_edges {
        let pos = out.edges.iter().position(|e| same(e, rm)).ok_or_else(|| OverlayError::MissingEdge {
            from: rm.from.clone(),
            to: rm.to.clone(),
            label: rm.label.as_str().to_string(),
        })?;
        out.edges.remove(pos);
    }
    let mut ids: HashSet<NodeId> = out.nodes.iter().map(|n| n.id.clone()).collect();
    for node in &overlay.add_nodes {
        if !ids.insert(node.id.clone()) {
            return Err(OverlayError::IdCollision(node.id.clone()));
        }
        out.nodes.push(node.clone());
    }
    for edge in &overlay.add_edges {
        if out.edges.iter().any(|e| same(e, edge)) {
            return Err(OverlayError::DuplicateEdge {
                from: edge.from.clone(),
                to: edge.to.clone(),
                label: edge.label.as_str().to_string(),
            });
        }
        out.edges.push(edge.clone());
    }
    let report = validate(&out);
    if !report.is_valid() {
        return Err(OverlayError::Invalid(report));
    }
    Ok(out)
}

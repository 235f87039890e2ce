//! TaskGraph data model.
//!
//! A TaskGraph is a DAG of typed nodes. Steps, Conditions, Logic and Action
//! nodes are executable and are ordered by the `seq`/`yes`/`no`/`in` edges.
//! Requirement and ExtraInfo nodes hang off steps through `requires` and
//! `enriches` edges and never gate execution.

pub(crate) mod io;
mod schedule;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use io::{load, save, LoadError};
pub use schedule::{step_index, topological_schedule, ScheduleError, StepIndex};
pub use validate::{validate, ValidationReport, Violation};

/// Maximum length of a step summary, in characters.
pub const MAX_SUMMARY_CHARS: usize = 200;

/// Opaque node identifier, unique within one graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(value: impl Into<String>) -> Self {
        NodeId(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Step,
    Requirement,
    Condition,
    Logic,
    Action,
    #[serde(rename = "extra")]
    ExtraInfo,
}

impl NodeKind {
    /// Whether nodes of this kind take part in the execution schedule.
    pub fn is_executable(self) -> bool {
        !matches!(self, NodeKind::Requirement | NodeKind::ExtraInfo)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Step => "step",
            NodeKind::Requirement => "requirement",
            NodeKind::Condition => "condition",
            NodeKind::Logic => "logic",
            NodeKind::Action => "action",
            NodeKind::ExtraInfo => "extra",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaRef {
    pub url: String,
    #[serde(default)]
    pub caption: Option<String>,
}

impl MediaRef {
    pub fn new(url: impl Into<String>, caption: Option<String>) -> Self {
        MediaRef {
            url: url.into(),
            caption,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepPayload {
    pub summary: String,
    #[serde(default)]
    pub details: Option<String>,
    #[serde(default)]
    pub image: Option<MediaRef>,
    #[serde(default)]
    pub video: Option<MediaRef>,
}

impl StepPayload {
    pub fn new(summary: impl Into<String>) -> Self {
        StepPayload {
            summary: summary.into(),
            details: None,
            image: None,
            video: None,
        }
    }

    /// Summary and details joined with a single space.
    pub fn full_text(&self) -> String {
        match &self.details {
            Some(d) if !d.is_empty() => format!("{} {}", self.summary, d),
            _ => self.summary.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequirementCategory {
    #[default]
    Ingredient,
    Tool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementPayload {
    pub name: String,
    #[serde(default)]
    pub quantity: Option<String>,
    pub category: RequirementCategory,
}

impl RequirementPayload {
    /// "2 zucchini", or just the name when no quantity is known.
    pub fn display(&self) -> String {
        match &self.quantity {
            Some(q) if !q.is_empty() => format!("{} {}", q, self.name),
            _ => self.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionPayload {
    pub question: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogicOp {
    #[serde(alias = "AND")]
    And,
    #[serde(alias = "OR")]
    Or,
    #[serde(alias = "NOT")]
    Not,
}

impl LogicOp {
    pub fn eval(self, inputs: &[bool]) -> bool {
        match self {
            LogicOp::And => inputs.iter().all(|b| *b),
            LogicOp::Or => inputs.iter().any(|b| *b),
            LogicOp::Not => !inputs.first().copied().unwrap_or(false),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicPayload {
    pub op: LogicOp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Timer,
    AddToList,
}

impl ActionKind {
    /// The argument key each action cannot run without.
    pub fn required_arg(self) -> &'static str {
        match self {
            ActionKind::Timer => "span",
            ActionKind::AddToList => "item",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Timer => "timer",
            ActionKind::AddToList => "add_to_list",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionPayload {
    pub action: ActionKind,
    #[serde(default)]
    pub args: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtraKind {
    Tip,
    Fact,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtraInfoPayload {
    #[serde(rename = "extra_kind")]
    pub kind: ExtraKind,
    pub text: String,
}

/// Kind-specific node content. The variant is the node's kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Step(StepPayload),
    Requirement(RequirementPayload),
    Condition(ConditionPayload),
    Logic(LogicPayload),
    Action(ActionPayload),
    ExtraInfo(ExtraInfoPayload),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub payload: Payload,
}

impl Node {
    pub fn new(id: impl Into<NodeId>, payload: Payload) -> Self {
        Node {
            id: id.into(),
            payload,
        }
    }

    pub fn kind(&self) -> NodeKind {
        match self.payload {
            Payload::Step(_) => NodeKind::Step,
            Payload::Requirement(_) => NodeKind::Requirement,
            Payload::Condition(_) => NodeKind::Condition,
            Payload::Logic(_) => NodeKind::Logic,
            Payload::Action(_) => NodeKind::Action,
            Payload::ExtraInfo(_) => NodeKind::ExtraInfo,
        }
    }

    pub fn as_step(&self) -> Option<&StepPayload> {
        match &self.payload {
            Payload::Step(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_step_mut(&mut self) -> Option<&mut StepPayload> {
        match &mut self.payload {
            Payload::Step(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_requirement(&self) -> Option<&RequirementPayload> {
        match &self.payload {
            Payload::Requirement(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_condition(&self) -> Option<&ConditionPayload> {
        match &self.payload {
            Payload::Condition(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_extra(&self) -> Option<&ExtraInfoPayload> {
        match &self.payload {
            Payload::ExtraInfo(x) => Some(x),
            _ => None,
        }
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeLabel {
    Seq,
    Yes,
    No,
    In,
    Requires,
    Enriches,
}

impl EdgeLabel {
    /// Labels that order execution. `requires`/`enriches` only decorate steps.
    pub fn is_gating(self) -> bool {
        matches!(
            self,
            EdgeLabel::Seq | EdgeLabel::Yes | EdgeLabel::No | EdgeLabel::In
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeLabel::Seq => "seq",
            EdgeLabel::Yes => "yes",
            EdgeLabel::No => "no",
            EdgeLabel::In => "in",
            EdgeLabel::Requires => "requires",
            EdgeLabel::Enriches => "enriches",
        }
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub label: EdgeLabel,
}

impl Edge {
    pub fn new(from: impl Into<NodeId>, to: impl Into<NodeId>, label: EdgeLabel) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskGraph {
    pub id: String,
    pub title: String,
    pub description: String,
    pub source_url: Option<String>,
    /// Free-form tags; theme tags carry the `theme:` prefix.
    pub tags: Vec<String>,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

pub const THEME_PREFIX: &str = "theme:";

impl TaskGraph {
    pub fn new(id: impl Into<String>, title: impl Into<String>) -> Self {
        TaskGraph {
            id: id.into(),
            title: title.into(),
            description: String::new(),
            source_url: None,
            tags: Vec::new(),
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| &n.id == id)
    }

    pub fn node_index(&self, id: &NodeId) -> Option<usize> {
        self.nodes.iter().position(|n| &n.id == id)
    }

    pub fn themes(&self) -> impl Iterator<Item = &str> {
        self.tags.iter().filter_map(|t| t.strip_prefix(THEME_PREFIX))
    }

    pub fn has_theme(&self, theme: &str) -> bool {
        self.themes().any(|t| t.eq_ignore_ascii_case(theme))
    }

    /// Requirement nodes of the whole task, in declaration order.
    pub fn requirements(&self) -> impl Iterator<Item = (&NodeId, &RequirementPayload)> {
        self.nodes
            .iter()
            .filter_map(|n| n.as_requirement().map(|r| (&n.id, r)))
    }

    /// Sources of `label` edges terminating at `target`, in node declaration order.
    pub fn sources_into(&self, target: &NodeId, label: EdgeLabel) -> Vec<&Node> {
        self.nodes
            .iter()
            .filter(|n| {
                self.edges
                    .iter()
                    .any(|e| e.label == label && &e.to == target && e.from == n.id)
            })
            .collect()
    }

    pub fn step_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.kind() == NodeKind::Step)
            .count()
    }
}

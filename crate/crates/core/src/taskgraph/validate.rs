use std::collections::{HashMap, HashSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use super::*;
use crate::span::parse_span;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    NoStep,
    EmptyNodeId {
        index: usize,
    },
    DuplicateNodeId {
        node: NodeId,
    },
    EmptyField {
        node: NodeId,
        field: &'static str,
    },
    SummaryTooLong {
        node: NodeId,
        chars: usize,
    },
    MissingActionArg {
        node: NodeId,
        action: ActionKind,
        key: &'static str,
    },
    InvalidTimerSpan {
        node: NodeId,
        span: String,
    },
    DanglingEdge {
        edge: usize,
        endpoint: NodeId,
    },
    LabelPlacement {
        edge: usize,
        from: NodeId,
        to: NodeId,
        label: EdgeLabel,
        rule: &'static str,
    },
    LogicArity {
        node: NodeId,
        op: LogicOp,
        inputs: usize,
    },
    ConditionWithoutBranch {
        node: NodeId,
    },
    Cycle {
        nodes: Vec<NodeId>,
    },
}

impl Violation {
    fn sort_key(&self) -> (String, Option<usize>, u8) {
        use Violation::*;
        match self {
            NoStep => (String::new(), None, 0),
            EmptyNodeId { index } => (String::new(), Some(*index), 1),
            DuplicateNodeId { node } => (node.to_string(), None, 2),
            EmptyField { node, .. } => (node.to_string(), None, 3),
            SummaryTooLong { node, .. } => (node.to_string(), None, 4),
            MissingActionArg { node, .. } => (node.to_string(), None, 5),
            InvalidTimerSpan { node, .. } => (node.to_string(), None, 6),
            LogicArity { node, .. } => (node.to_string(), None, 7),
            ConditionWithoutBranch { node } => (node.to_string(), None, 8),
            Cycle { nodes } => (nodes[0].to_string(), None, 9),
            DanglingEdge { edge, endpoint } => (endpoint.to_string(), Some(*edge), 10),
            LabelPlacement { edge, from, .. } => (from.to_string(), Some(*edge), 11),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoStep => write!(f, "graph must contain at least one Step node"),
            EmptyNodeId { index } => write!(f, "node #{index} has an empty id"),
            DuplicateNodeId { node } => write!(f, "node id `{node}` is declared more than once"),
            EmptyField { node, field } => write!(f, "node `{node}`: `{field}` must not be empty"),
            SummaryTooLong { node, chars } => write!(
                f,
                "node `{node}`: summary has {chars} characters (max {MAX_SUMMARY_CHARS})"
            ),
            MissingActionArg { node, action, key } => write!(
                f,
                "node `{node}`: action `{}` requires argument `{key}`",
                action.as_str()
            ),
            InvalidTimerSpan { node, span } => {
                write!(f, "node `{node}`: timer span `{span}` is not a duration")
            }
            DanglingEdge { edge, endpoint } => {
                write!(f, "edge #{edge} references unknown node `{endpoint}`")
            }
            LabelPlacement {
                edge,
                from,
                to,
                label,
                rule,
            } => write!(f, "edge #{edge} `{from}` -{label}-> `{to}`: {rule}"),
            LogicArity { node, op, inputs } => write!(
                f,
                "logic node `{node}` ({op:?}) has {inputs} incoming `in` edges ({})",
                if *op == LogicOp::Not {
                    "expected exactly 1"
                } else {
                    "expected at least 2"
                }
            ),
            ConditionWithoutBranch { node } => write!(
                f,
                "condition `{node}` has no outgoing `yes` or `no` edge"
            ),
            Cycle { nodes } => {
                let ids: Vec<&str> = nodes.iter().map(|n| n.as_str()).collect();
                write!(f, "cycle through {}", ids.join(" -> "))
            }
        }
    }
}

/// Every invariant a graph violates. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn placement_rule(label: EdgeLabel, from: NodeKind, to: NodeKind) -> Option<&'static str> {
    use NodeKind::*;
    let executable_target = to.is_executable() && to != Logic;
    match label {
        EdgeLabel::Yes | EdgeLabel::No if from != Condition => {
            Some("`yes`/`no` edges must originate at a Condition")
        }
        EdgeLabel::Yes | EdgeLabel::No if !executable_target => {
            Some("`yes`/`no` edges must end at a Step, Condition or Action")
        }
        EdgeLabel::In if to != Logic => Some("`in` edges must end at a Logic node"),
        EdgeLabel::In if !matches!(from, Condition | Logic) => {
            Some("`in` edges must originate at a Condition or Logic node")
        }
        EdgeLabel::Requires if from != Requirement || to != Step => {
            Some("`requires` edges must go from a Requirement to a Step")
        }
        EdgeLabel::Enriches if from != ExtraInfo || to != Step => {
            Some("`enriches` edges must go from an ExtraInfo to a Step")
        }
        EdgeLabel::Seq if !from.is_executable() => {
            Some("`seq` edges must originate at a Step, Condition, Logic or Action")
        }
        EdgeLabel::Seq if !executable_target => {
            Some("`seq` edges must end at a Step, Condition or Action")
        }
        _ => None,
    }
}

/// Check every structural invariant of `graph`.
///
/// Violations are ordered by node id, then edge index.
pub fn validate(graph: &TaskGraph) -> ValidationReport {
    let mut out = Vec::new();

    let mut kinds: HashMap<&NodeId, NodeKind> = HashMap::new();
    let mut seen = HashSet::new();
    for (index, node) in graph.nodes.iter().enumerate() {
        if node.id.as_str().is_empty() {
            out.push(Violation::EmptyNodeId { index });
        }
        if !seen.insert(&node.id) {
            out.push(Violation::DuplicateNodeId {
                node: node.id.clone(),
            });
        }
        kinds.entry(&node.id).or_insert(node.kind());
        check_payload(node, &mut out);
    }
    if !graph.nodes.iter().any(|n| n.kind() == NodeKind::Step) {
        out.push(Violation::NoStep);
    }

    let mut in_degree: HashMap<&NodeId, usize> = HashMap::new();
    let mut has_branch: HashSet<&NodeId> = HashSet::new();
    for (index, edge) in graph.edges.iter().enumerate() {
        let from = kinds.get(&edge.from).copied();
        let to = kinds.get(&edge.to).copied();
        if from.is_none() {
            out.push(Violation::DanglingEdge {
                edge: index,
                endpoint: edge.from.clone(),
            });
        }
        if to.is_none() && edge.to != edge.from {
            out.push(Violation::DanglingEdge {
                edge: index,
                endpoint: edge.to.clone(),
            });
        }
        let (Some(from), Some(to)) = (from, to) else {
            continue;
        };
        if let Some(rule) = placement_rule(edge.label, from, to) {
            out.push(Violation::LabelPlacement {
                edge: index,
                from: edge.from.clone(),
                to: edge.to.clone(),
                label: edge.label,
                rule,
            });
        }
        if edge.label == EdgeLabel::In {
            *in_degree.entry(&edge.to).or_default() += 1;
        }
        if matches!(edge.label, EdgeLabel::Yes | EdgeLabel::No) {
            has_branch.insert(&edge.from);
        }
    }

    for node in &graph.nodes {
        match &node.payload {
            Payload::Logic(l) => {
                let inputs = in_degree.get(&node.id).copied().unwrap_or(0);
                let ok = match l.op {
                    LogicOp::Not => inputs == 1,
                    LogicOp::And | LogicOp::Or => inputs >= 2,
                };
                if !ok {
                    out.push(Violation::LogicArity {
                        node: node.id.clone(),
                        op: l.op,
                        inputs,
                    });
                }
            }
            Payload::Condition(_) if !has_branch.contains(&node.id) => {
                out.push(Violation::ConditionWithoutBranch {
                    node: node.id.clone(),
                });
            }
            _ => {}
        }
    }

    out.extend(find_cycles(graph));

    out.sort_by_key(Violation::sort_key);
    ValidationReport { violations: out }
}

fn check_payload(node: &Node, out: &mut Vec<Violation>) {
    let id = || node.id.clone();
    match &node.payload {
        Payload::Step(s) => {
            if s.summary.trim().is_empty() {
                out.push(Violation::EmptyField {
                    node: id(),
                    field: "summary",
                });
            }
            let chars = s.summary.chars().count();
            if chars > MAX_SUMMARY_CHARS {
                out.push(Violation::SummaryTooLong { node: id(), chars });
            }
        }
        Payload::Requirement(r) if r.name.trim().is_empty() => out.push(Violation::EmptyField {
            node: id(),
            field: "name",
        }),
        Payload::Condition(c) if c.question.trim().is_empty() => {
            out.push(Violation::EmptyField {
                node: id(),
                field: "question",
            })
        }
        Payload::ExtraInfo(x) if x.text.trim().is_empty() => out.push(Violation::EmptyField {
            node: id(),
            field: "text",
        }),
        Payload::Action(a) => {
            let key = a.action.required_arg();
            match a.args.get(key) {
                None => out.push(Violation::MissingActionArg {
                    node: id(),
                    action: a.action,
                    key,
                }),
                Some(span) if a.action == ActionKind::Timer && parse_span(span).is_err() => {
                    out.push(Violation::InvalidTimerSpan {
                        node: id(),
                        span: span.clone(),
                    })
                }
                _ => {}
            }
        }
        _ => {}
    }
}

/// Strongly connected components of the gating subgraph that contain a cycle.
fn find_cycles(graph: &TaskGraph) -> Vec<Violation> {
    let mut g = DiGraph::<usize, ()>::new();
    let mut index_of: HashMap<&NodeId, petgraph::graph::NodeIndex> = HashMap::new();
    for (i, node) in graph.nodes.iter().enumerate() {
        index_of.entry(&node.id).or_insert_with(|| g.add_node(i));
    }
    let mut self_loops = HashSet::new();
    for edge in graph.edges.iter().filter(|e| e.label.is_gating()) {
        if let (Some(&a), Some(&b)) = (index_of.get(&edge.from), index_of.get(&edge.to)) {
            g.add_edge(a, b, ());
            if a == b {
                self_loops.insert(a);
            }
        }
    }
    let mut cycles = Vec::new();
    for scc in tarjan_scc(&g) {
        if scc.len() > 1 || self_loops.contains(&scc[0]) {
            let mut nodes: Vec<NodeId> = scc.iter().map(|ix| graph.nodes[g[*ix]].id.clone()).collect();
            nodes.sort();
            cycles.push(Violation::Cycle { nodes });
        }
    }
    cycles
}

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use thiserror::Error;

use super::*;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("graph has a cycle through {0} node(s); it cannot be scheduled")]
    Cycle(usize),
}

/// Kahn order over the gating edges. Among ready nodes the one declared
/// first wins, so the result is the lexicographically smallest topological
/// order by declaration index. Requirement and ExtraInfo nodes are excluded.
pub fn topological_schedule(graph: &TaskGraph) -> Result<Vec<NodeId>, ScheduleError> {
    let index_of: HashMap<&NodeId, usize> = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (&n.id, i))
        .collect();
    let executable: Vec<bool> = graph.nodes.iter().map(|n| n.kind().is_executable()).collect();

    let mut indegree = vec![0usize; graph.nodes.len()];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); graph.nodes.len()];
    for edge in graph.edges.iter().filter(|e| e.label.is_gating()) {
        let (Some(&a), Some(&b)) = (index_of.get(&edge.from), index_of.get(&edge.to)) else {
            continue;
        };
        if executable[a] && executable[b] {
            succ[a].push(b);
            indegree[b] += 1;
        }
    }

    let mut ready: BinaryHeap<Reverse<usize>> = (0..graph.nodes.len())
        .filter(|&i| executable[i] && indegree[i] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::new();
    while let Some(Reverse(i)) = ready.pop() {
        order.push(graph.nodes[i].id.clone());
        for &j in &succ[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(Reverse(j));
            }
        }
    }
    let total = executable.iter().filter(|e| **e).count();
    if order.len() != total {
        return Err(ScheduleError::Cycle(total - order.len()));
    }
    Ok(order)
}

/// Step nodes in schedule order. Position 1 is the first step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepIndex {
    steps: Vec<NodeId>,
}

impl StepIndex {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The step at 1-based `position`.
    pub fn get(&self, position: usize) -> Option<&NodeId> {
        position.checked_sub(1).and_then(|i| self.steps.get(i))
    }

    /// 1-based position of `id`, if it is a step.
    pub fn position(&self, id: &NodeId) -> Option<usize> {
        self.steps.iter().position(|s| s == id).map(|i| i + 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = &NodeId> {
        self.steps.iter()
    }
}

pub fn step_index(graph: &TaskGraph) -> Result<StepIndex, ScheduleError> {
    let schedule = topological_schedule(graph)?;
    let steps = schedule
        .into_iter()
        .filter(|id| graph.node(id).map(|n| n.kind()) == Some(NodeKind::Step))
        .collect();
    Ok(StepIndex { steps })
}

//! Brute-force reference semantics for task graph execution, written
//! independently of the engine: reachability under fixed answers, and
//! enumeration of every topological order.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use oat_core::dsl::DslCall;
use oat_core::engine::{Clock, Engine, EngineEvent, ExecState, NodeStatus};
use oat_core::taskgraph::{EdgeLabel, NodeKind, Payload, TaskGraph};

/// Executable nodes and their gating edges (seq, yes, no, in).
pub struct Flow {
    pub ids: Vec<String>,
    pub kinds: Vec<NodeKind>,
    /// (from, to, label) over positions in `ids`.
    pub edges: Vec<(usize, usize, EdgeLabel)>,
}

impl Flow {
    pub fn of(g: &TaskGraph) -> Flow {
        let exec: Vec<usize> = (0..g.nodes.len()).filter(|&i| g.nodes[i].kind().is_executable()).collect();
        let pos = |id: &str| exec.iter().position(|&i| g.nodes[i].id.as_str() == id);
        let edges = g
            .edges
            .iter()
            .filter(|e| matches!(e.label, EdgeLabel::Seq | EdgeLabel::Yes | EdgeLabel::No | EdgeLabel::In))
            .map(|e| (pos(e.from.as_str()).unwrap(), pos(e.to.as_str()).unwrap(), e.label))
            .collect();
        Flow {
            ids: exec.iter().map(|&i| g.nodes[i].id.to_string()).collect(),
            kinds: exec.iter().map(|&i| g.nodes[i].kind()).collect(),
            edges,
        }
    }

    fn preds(&self, n: usize) -> impl Iterator<Item = &(usize, usize, EdgeLabel)> {
        self.edges.iter().filter(move |e| e.1 == n)
    }

    /// Every topological order, by backtracking.
    pub fn all_orders(&self) -> Vec<Vec<usize>> {
        fn go(f: &Flow, placed: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
            if placed.len() == f.ids.len() {
                out.push(placed.clone());
                return;
            }
            for n in 0..f.ids.len() {
                if used[n] || f.preds(n).any(|e| !used[e.0]) {
                    continue;
                }
                used[n] = true;
                placed.push(n);
                go(f, placed, used, out);
                placed.pop();
                used[n] = false;
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut vec![false; self.ids.len()], &mut out);
        out
    }

    /// The lexicographically least order by declaration position, found by
    /// comparing all of them.
    pub fn least_order(&self) -> Vec<usize> {
        self.all_orders().into_iter().min().expect("acyclic graphs have an order")
    }

    /// Which nodes run under `answers`, with their values: `None` means
    /// skipped; conditions carry their answer and logic gates their result.
    pub fn reach(&self, g: &TaskGraph, answers: &BTreeMap<String, bool>) -> Vec<Option<bool>> {
        let order = self.all_orders_first();
        let mut val: Vec<Option<bool>> = vec![None; self.ids.len()];
        for n in order {
            let incoming: Vec<_> = self.preds(n).collect();
            let live = |&&(from, _, label): &&(usize, usize, EdgeLabel)| match (val[from], label) {
                (None, _) => false,
                (Some(v), EdgeLabel::Yes) => v,
                (Some(v), EdgeLabel::No) => !v,
                (Some(v), EdgeLabel::Seq) if self.kinds[from] == NodeKind::Logic => v,
                _ => true,
            };
            if !incoming.is_empty() && !incoming.iter().any(live) {
                continue;
            }
            val[n] = Some(match self.kinds[n] {
                NodeKind::Condition => answers.get(&self.ids[n]).copied().unwrap_or(false),
                NodeKind::Logic => {
                    let node = g.nodes.iter().find(|x| x.id.as_str() == self.ids[n]).unwrap();
                    let Payload::Logic(l) = &node.payload else { unreachable!() };
                    let inputs: Vec<bool> = incoming
                        .iter()
                        .filter(|e| e.2 == EdgeLabel::In)
                        .map(|e| val[e.0] == Some(true))
                        .collect();
                    truth(l.op, &inputs)
                }
                _ => true,
            });
        }
        val
    }

    /// Any topological order; plain repeated scanning.
    fn all_orders_first(&self) -> Vec<usize> {
        let mut used = vec![false; self.ids.len()];
        let mut out = Vec::new();
        while out.len() < self.ids.len() {
            let n = (0..self.ids.len())
                .find(|&n| !used[n] && self.preds(n).all(|e| used[e.0]))
                .expect("acyclic");
            used[n] = true;
            out.push(n);
        }
        out
    }

    pub fn conditions(&self) -> Vec<String> {
        (0..self.ids.len()).filter(|&n| self.kinds[n] == NodeKind::Condition).map(|n| self.ids[n].clone()).collect()
    }
}

fn truth(op: oat_core::taskgraph::LogicOp, inputs: &[bool]) -> bool {
    use oat_core::taskgraph::LogicOp::*;
    match op {
        And => inputs.iter().all(|&b| b),
        Or => inputs.iter().any(|&b| b),
        Not => !inputs[0],
    }
}

/// Expected behaviour of one run with fixed answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expected {
    pub steps: Vec<String>,
    pub actions: Vec<String>,
    pub skipped: BTreeSet<String>,
}

/// Presented steps follow the least topological order restricted to the
/// nodes that run.
pub fn expected_run(g: &TaskGraph, answers: &BTreeMap<String, bool>) -> Expected {
    let flow = Flow::of(g);
    let val = flow.reach(g, answers);
    let order = flow.least_order();
    let pick = |kind: NodeKind| {
        order
            .iter()
            .filter(|&&n| flow.kinds[n] == kind && val[n].is_some())
            .map(|&n| flow.ids[n].clone())
            .collect::<Vec<_>>()
    };
    Expected {
        steps: pick(NodeKind::Step),
        actions: pick(NodeKind::Action),
        skipped: (0..flow.ids.len()).filter(|&n| val[n].is_none()).map(|n| flow.ids[n].clone()).collect(),
    }
}

/// What the engine did when driven by `next()` and the given answers.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub steps: Vec<String>,
    pub actions: Vec<String>,
    pub questions: Vec<String>,
    pub applications: usize,
    pub complete: bool,
    pub state: Option<ExecState>,
}

fn record(trace: &mut Trace, events: &[EngineEvent]) {
    for ev in events {
        match ev {
            EngineEvent::PresentStep(ctx) => {
                if trace.steps.last() != Some(&ctx.node.to_string()) {
                    trace.steps.push(ctx.node.to_string());
                }
            }
            EngineEvent::ActionFired { node: Some(n), .. } => trace.actions.push(n.to_string()),
            EngineEvent::AskCondition { node, .. } => trace.questions.push(node.to_string()),
            EngineEvent::TaskComplete => trace.complete = true,
            _ => {}
        }
    }
}

/// Drive the engine to completion, answering questions from `answers`
/// (missing answers are `false`). Gives up after `limit` applications.
pub fn drive(engine: &Engine, answers: &BTreeMap<String, bool>, clock: &dyn Clock, limit: usize) -> Trace {
    let (mut st, events) = engine.start(clock);
    let mut trace = Trace::default();
    record(&mut trace, &events);
    while !st.complete && trace.applications < limit {
        let call = match &st.pending_condition {
            Some(c) => DslCall::condition(answers.get(c.as_str()).copied().unwrap_or(false)),
            None => DslCall::next(),
        };
        let events = engine.apply(&mut st, &call, clock).expect("forward driving never errors");
        trace.applications += 1;
        record(&mut trace, &events);
    }
    trace.complete = st.complete;
    trace.state = Some(st);
    trace
}

/// Every assignment of answers to the graph's conditions.
pub fn assignments(g: &TaskGraph) -> Vec<BTreeMap<String, bool>> {
    let conds = Flow::of(g).conditions();
    (0..1u32 << conds.len())
        .map(|mask| conds.iter().enumerate().map(|(i, c)| (c.clone(), mask >> i & 1 == 1)).collect())
        .collect()
}

/// Nodes left Skipped at the end of a run.
pub fn skipped_in(state: &ExecState) -> BTreeSet<String> {
    state.status.iter().filter(|(_, s)| **s == NodeStatus::Skipped).map(|(id, _)| id.to_string()).collect()
}

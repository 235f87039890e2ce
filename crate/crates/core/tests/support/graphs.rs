//! Random branching task graphs and fixture paths.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use oat_core::taskgraph::{
    validate, ActionKind, ActionPayload, ConditionPayload, Edge, EdgeLabel, LogicOp, LogicPayload, Node, Payload,
    StepPayload, TaskGraph,
};

pub fn fixtures() -> PathBuf {
    // Works from any crate in the workspace.
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub fn fixture_graph(name: &str) -> TaskGraph {
    let path = fixtures().join("graphs").join(format!("{name}.taskgraph.json"));
    let bytes = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    oat_core::taskgraph::load(&bytes).unwrap()
}

#[derive(Clone, Copy, PartialEq)]
enum K {
    Step,
    Cond,
    Logic(LogicOp),
    Action,
}

/// A random graph of up to `max_nodes` executable nodes with conditions
/// that fork into branches and rejoin. Edges only point forward in
/// declaration order, so the graph is acyclic. Not guaranteed valid.
pub fn random_branching(seed: u64, max_nodes: usize) -> TaskGraph {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.random_range(3..=max_nodes);
    let mut kinds = vec![K::Step];
    for _ in 1..n {
        let r: f64 = rng.random();
        kinds.push(if r < 0.5 {
            K::Step
        } else if r < 0.75 {
            K::Cond
        } else if r < 0.87 {
            K::Action
        } else {
            let op = [LogicOp::And, LogicOp::Or, LogicOp::Not][rng.random_range(0..3)];
            K::Logic(op)
        });
    }
    let mut g = TaskGraph::new(format!("g{seed}"), format!("Graph {seed}"));
    for (i, k) in kinds.iter().enumerate() {
        let id = format!("n{i}");
        let payload = match k {
            K::Step => Payload::Step(StepPayload::new(format!("Do thing {i}."))),
            K::Cond => Payload::Condition(ConditionPayload { question: format!("Question {i}?") }),
            K::Logic(op) => Payload::Logic(LogicPayload { op: *op }),
            K::Action => Payload::Action(ActionPayload {
                action: ActionKind::Timer,
                args: [("span".to_string(), format!("{} minutes", i + 1))].into_iter().collect(),
            }),
        };
        g.nodes.push(Node::new(id, payload));
    }
    let id = |i: usize| format!("n{i}");
    let add = |g: &mut TaskGraph, a: usize, b: usize, l: EdgeLabel| {
        if !g.edges.iter().any(|e| e.from.as_str() == id(a) && e.to.as_str() == id(b)) {
            g.edges.push(Edge::new(id(a), id(b), l));
        }
    };
    for j in 1..n {
        match kinds[j] {
            K::Logic(op) => {
                let sources: Vec<usize> =
                    (0..j).filter(|&i| matches!(kinds[i], K::Cond | K::Logic(_))).collect();
                let want = if op == LogicOp::Not { 1 } else { 2 };
                if sources.len() < want {
                    add(&mut g, j - 1, j, EdgeLabel::In);
                    continue;
                }
                let mut picked = sources.clone();
                while picked.len() > want {
                    picked.remove(rng.random_range(0..picked.len()));
                }
                for s in picked {
                    add(&mut g, s, j, EdgeLabel::In);
                }
            }
            _ => {
                let preds = rng.random_range(1..=2.min(j));
                for _ in 0..preds {
                    let i = rng.random_range(0..j);
                    let label = match kinds[i] {
                        K::Cond if rng.random_bool(0.7) => {
                            if rng.random_bool(0.5) {
                                EdgeLabel::Yes
                            } else {
                                EdgeLabel::No
                            }
                        }
                        _ => EdgeLabel::Seq,
                    };
                    add(&mut g, i, j, label);
                }
            }
        }
    }
    // Give every condition both branches where possible.
    for i in 0..n {
        if kinds[i] != K::Cond {
            continue;
        }
        let targets: Vec<usize> = (i + 1..n).filter(|&j| !matches!(kinds[j], K::Logic(_))).collect();
        for (k, label) in [EdgeLabel::Yes, EdgeLabel::No].into_iter().enumerate() {
            let has = g.edges.iter().any(|e| e.from.as_str() == id(i) && e.label == label);
            if !has && !targets.is_empty() {
                let t = targets[(k + rng.random_range(0..targets.len())) % targets.len()];
                add(&mut g, i, t, label);
            }
        }
    }
    g
}

/// The first `count` valid graphs from consecutive seeds.
pub fn valid_branching(count: usize, max_nodes: usize) -> Vec<TaskGraph> {
    let mut out = Vec::new();
    let mut seed = 0;
    while out.len() < count {
        let g = random_branching(seed, max_nodes);
        if validate(&g).is_valid() {
            out.push(g);
        }
        seed += 1;
        assert!(seed < 50 * count as u64, "generator produces too few valid graphs");
    }
    out
}

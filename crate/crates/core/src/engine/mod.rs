//! Executes a TaskGraph for one session.
//!
//! Nodes run in schedule order. Conditions stop and ask; logic gates and
//! actions run on their own; steps stop and wait for navigation. A node is
//! skipped once all of its gating predecessors have settled and none of its
//! incoming edges is live.
//!
//! Edge liveness, given a settled source:
//! - anything from a skipped node is dead;
//! - `yes` is live iff the condition resolved true, `no` iff false;
//! - `seq` out of a logic gate is live iff the gate resolved true;
//! - every other `seq` and every `in` edge is live.

mod clock;
mod state;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::dsl::DslCall;
use crate::span::{parse_span, SpanError};
use crate::taskgraph::{
    step_index, topological_schedule, validate, ActionKind, EdgeLabel, NodeId, NodeKind, Payload,
    StepIndex, TaskGraph, ValidationReport,
};

pub use clock::{Clock, ManualClock, SystemClock};
pub use crate::span::parse_span as parse_timer_span;
pub use state::{
    EngineEvent, ExecState, ExtraView, NodeStatus, RequirementView, StepContext, TimerRecord,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("task graph is invalid:\n{0}")]
    InvalidGraph(ValidationReport),
    #[error("{0}")]
    Protocol(String),
    #[error("step {requested} is out of range (this task has {total} steps)")]
    StepOutOfRange { requested: u64, total: usize },
    #[error(transparent)]
    Span(#[from] SpanError),
    #[error("the task was stopped")]
    Stopped,
}

/// A validated graph with precomputed schedule and adjacency.
#[derive(Debug, Clone)]
pub struct Engine {
    graph: Arc<TaskGraph>,
    schedule: Vec<usize>,
    steps: StepIndex,
    index: HashMap<NodeId, usize>,
    /// Gating in-edges per node: (source index, label).
    incoming: Vec<Vec<(usize, EdgeLabel)>>,
}

impl Engine {
    pub fn new(graph: Arc<TaskGraph>) -> Result<Self, EngineError> {
        let report = validate(&graph);
        if !report.is_valid() {
            return Err(EngineError::InvalidGraph(report));
        }
        let index: HashMap<NodeId, usize> = graph
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();
        let schedule = topological_schedule(&graph)
            .expect("validated graphs are acyclic")
            .iter()
            .map(|id| index[id])
            .collect();
        let steps = step_index(&graph).expect("validated graphs are acyclic");
        let mut incoming = vec![Vec::new(); graph.nodes.len()];
        for e in graph.edges.iter().filter(|e| e.label.is_gating()) {
            incoming[index[&e.to]].push((index[&e.from], e.label));
        }
        Ok(Engine {
            graph,
            schedule,
            steps,
            index,
            incoming,
        })
    }

    pub fn graph(&self) -> &Arc<TaskGraph> {
        &self.graph
    }

    pub fn steps(&self) -> &StepIndex {
        &self.steps
    }

    /// Fresh state, advanced to the first step or question.
    pub fn start(&self, clock: &dyn Clock) -> (ExecState, Vec<EngineEvent>) {
        let mut st = ExecState {
            graph_id: self.graph.id.clone(),
            status: self
                .graph
                .nodes
                .iter()
                .filter(|n| n.kind().is_executable())
                .map(|n| (n.id.clone(), NodeStatus::Unseen))
                .collect(),
            cursor: None,
            history: Vec::new(),
            pending_condition: None,
            timers: Vec::new(),
            list_items: Vec::new(),
            revisiting: false,
            complete: false,
            stopped: false,
        };
        let mut events = Vec::new();
        self.advance(&mut st, &mut events, clock);
        (st, events)
    }

    /// Apply one decision. On error the state is left untouched.
    pub fn apply(
        &self,
        state: &mut ExecState,
        call: &DslCall,
        clock: &dyn Clock,
    ) -> Result<Vec<EngineEvent>, EngineError> {
        if state.stopped {
            return Err(EngineError::Stopped);
        }
        let mut st = state.clone();
        let mut events = Vec::new();
        match call.function() {
            "next" => self.next(&mut st, &mut events, clock),
            "previous" => self.previous(&mut st, &mut events),
            "step_select" => {
                let k = call.int_arg("step").unwrap_or(0);
                self.step_select(&mut st, k, &mut events)?
            }
            "condition" => {
                let value = call.bool_arg("value").unwrap_or(false);
                self.answer(&mut st, value, &mut events, clock)?
            }
            "timer" => {
                let span = call.str_arg("span").unwrap_or("");
                let seconds = parse_span(span)?;
                let mut args = BTreeMap::new();
                args.insert("span".to_string(), span.to_string());
                args.insert("seconds".to_string(), seconds.to_string());
                add_timer(&mut st, span, seconds, clock);
                events.push(EngineEvent::ActionFired {
                    node: None,
                    action: ActionKind::Timer,
                    args,
                });
            }
            "stop" => {
                st.stopped = true;
                events.push(EngineEvent::Stopped);
            }
            other => {
                return Err(EngineError::Protocol(format!(
                    "`{other}` is not handled by the task engine"
                )))
            }
        }
        debug_assert!(!events.is_empty());
        *state = st;
        Ok(events)
    }

    /// Fire every timer that has come due. Later polls do not repeat them.
    pub fn poll_timers(state: &mut ExecState, clock: &dyn Clock) -> Vec<EngineEvent> {
        let now = clock.now();
        let mut events = Vec::new();
        for t in state.timers.iter_mut().filter(|t| !t.fired) {
            if t.due_at() <= now {
                t.fired = true;
                events.push(EngineEvent::TimerFired {
                    id: t.id,
                    label: t.label.clone(),
                });
            }
        }
        events
    }

    /// The cursor step with its linked requirements and extra information.
    pub fn grounded_context(&self, state: &ExecState) -> Result<StepContext, EngineError> {
        let cursor = state
            .cursor
            .as_ref()
            .ok_or_else(|| EngineError::Protocol("no step is currently presented".into()))?;
        Ok(self.step_context(self.index[cursor]))
    }

    /// Context for the step at `node`, regardless of session state.
    pub fn step_context(&self, node: usize) -> StepContext {
        let g = &self.graph;
        let n = &g.nodes[node];
        let step = n.as_step().expect("step_context called on a step");
        let requirements = g
            .sources_into(&n.id, EdgeLabel::Requires)
            .into_iter()
            .filter_map(|r| {
                r.as_requirement().map(|p| RequirementView {
                    node: r.id.clone(),
                    name: p.name.clone(),
                    quantity: p.quantity.clone(),
                    category: p.category,
                })
            })
            .collect();
        let extras = g
            .sources_into(&n.id, EdgeLabel::Enriches)
            .into_iter()
            .filter_map(|x| {
                x.as_extra().map(|p| ExtraView {
                    node: x.id.clone(),
                    kind: p.kind,
                    text: p.text.clone(),
                })
            })
            .collect();
        StepContext {
            node: n.id.clone(),
            position: self.steps.position(&n.id).unwrap_or(0),
            total: self.steps.len(),
            summary: step.summary.clone(),
            details: step.details.clone(),
            image: step.image.clone(),
            video: step.video.clone(),
            requirements,
            extras,
        }
    }

    fn status(&self, st: &ExecState, i: usize) -> NodeStatus {
        st.status_of(&self.graph.nodes[i].id)
    }

    fn set(&self, st: &mut ExecState, i: usize, s: NodeStatus) {
        st.status.insert(self.graph.nodes[i].id.clone(), s);
    }

    fn edge_live(&self, st: &ExecState, source: usize, label: EdgeLabel) -> bool {
        let kind = self.graph.nodes[source].kind();
        match (self.status(st, source), label) {
            (NodeStatus::Skipped, _) => false,
            (NodeStatus::Resolved(v), EdgeLabel::Yes) => v,
            (NodeStatus::Resolved(v), EdgeLabel::No) => !v,
            (NodeStatus::Resolved(v), EdgeLabel::Seq) if kind == NodeKind::Logic => v,
            _ => true,
        }
    }

    /// Promote unseen nodes whose predecessors have all settled to
    /// Available or Skipped. One pass in schedule order reaches a fixpoint.
    fn refresh(&self, st: &mut ExecState) {
        for &i in &self.schedule {
            if self.status(st, i) != NodeStatus::Unseen {
                continue;
            }
            let inc = &self.incoming[i];
            if !inc.iter().all(|(s, _)| self.status(st, *s).is_settled()) {
                continue;
            }
            let live = inc.is_empty() || inc.iter().any(|(s, l)| self.edge_live(st, *s, *l));
            let next = if live {
                NodeStatus::Available
            } else {
                NodeStatus::Skipped
            };
            self.set(st, i, next);
        }
    }

    fn advance(&self, st: &mut ExecState, events: &mut Vec<EngineEvent>, clock: &dyn Clock) {
        loop {
            self.refresh(st);
            let Some(i) = self
                .schedule
                .iter()
                .copied()
                .find(|&i| self.status(st, i) == NodeStatus::Available)
            else {
                st.complete = true;
                events.push(EngineEvent::TaskComplete);
                return;
            };
            let node = &self.graph.nodes[i];
            match &node.payload {
                Payload::Step(_) => {
                    self.present(st, i, events);
                    return;
                }
                Payload::Condition(c) => {
                    self.set(st, i, NodeStatus::PendingAnswer);
                    st.pending_condition = Some(node.id.clone());
                    events.push(EngineEvent::AskCondition {
                        node: node.id.clone(),
                        question: c.question.clone(),
                    });
                    return;
                }
                Payload::Logic(l) => {
                    let inputs: Vec<bool> = self.incoming[i]
                        .iter()
                        .filter(|(_, label)| *label == EdgeLabel::In)
                        .map(|(s, _)| matches!(self.status(st, *s), NodeStatus::Resolved(true)))
                        .collect();
                    self.set(st, i, NodeStatus::Resolved(l.op.eval(&inputs)));
                }
                Payload::Action(a) => {
                    match a.action {
                        ActionKind::Timer => {
                            let span = a.args.get("span").map(String::as_str).unwrap_or("");
                            match parse_span(span) {
                                Ok(secs) => {
                                    let label =
                                        a.args.get("label").cloned().unwrap_or_else(|| span.to_string());
                                    add_timer(st, &label, secs, clock);
                                }
                                Err(e) => events.push(EngineEvent::Warning {
                                    text: e.to_string(),
                                }),
                            }
                        }
                        ActionKind::AddToList => {
                            if let Some(item) = a.args.get("item") {
                                st.list_items.push(item.clone());
                            }
                        }
                    }
                    events.push(EngineEvent::ActionFired {
                        node: Some(node.id.clone()),
                        action: a.action,
                        args: a.args.clone(),
                    });
                    self.set(st, i, NodeStatus::Completed);
                }
                Payload::Requirement(_) | Payload::ExtraInfo(_) => {
                    unreachable!("non-executable nodes are not scheduled")
                }
            }
        }
    }

    fn present(&self, st: &mut ExecState, i: usize, events: &mut Vec<EngineEvent>) {
        let id = self.graph.nodes[i].id.clone();
        st.revisiting = self.status(st, i) == NodeStatus::Completed;
        self.set(st, i, NodeStatus::Presented);
        if st.history.last() != Some(&id) {
            st.history.push(id.clone());
        }
        st.cursor = Some(id);
        st.complete = false;
        events.push(EngineEvent::PresentStep(self.step_context(i)));
    }

    /// Move the cursor off its step without completing it.
    fn release_cursor(&self, st: &mut ExecState) {
        if let Some(c) = st.cursor.take() {
            let i = self.index[&c];
            if self.status(st, i) == NodeStatus::Presented {
                let back = if st.revisiting {
                    NodeStatus::Completed
                } else {
                    NodeStatus::Unseen
                };
                self.set(st, i, back);
            }
            st.revisiting = false;
            self.refresh(st);
        }
    }

    fn next(&self, st: &mut ExecState, events: &mut Vec<EngineEvent>, clock: &dyn Clock) {
        let mut revisited = None;
        if let Some(c) = st.cursor.take() {
            self.set(st, self.index[&c], NodeStatus::Completed);
            if st.revisiting {
                revisited = Some(c);
            }
        }
        st.revisiting = false;
        if let Some(p) = &st.pending_condition {
            let question = self.graph.nodes[self.index[p]]
                .as_condition()
                .map(|c| c.question.clone())
                .unwrap_or_default();
            events.push(EngineEvent::AskCondition {
                node: p.clone(),
                question,
            });
            return;
        }
        if let Some(from) = revisited {
            if let Some(j) = self.next_reviewed_step(st, self.index[&from]) {
                self.present(st, j, events);
                return;
            }
        }
        self.advance(st, events, clock);
    }

    /// While reviewing finished steps, the next already-completed step after
    /// `from` in schedule order, stopping at the execution frontier.
    fn next_reviewed_step(&self, st: &ExecState, from: usize) -> Option<usize> {
        let pos = self.schedule.iter().position(|&i| i == from)?;
        for &j in &self.schedule[pos + 1..] {
            match self.status(st, j) {
                NodeStatus::Completed if self.graph.nodes[j].kind() == NodeKind::Step => {
                    return Some(j)
                }
                NodeStatus::Completed | NodeStatus::Resolved(_) | NodeStatus::Skipped => continue,
                _ => return None,
            }
        }
        None
    }

    fn previous(&self, st: &mut ExecState, events: &mut Vec<EngineEvent>) {
        let target = match &st.cursor {
            Some(c) if st.history.last() == Some(c) => {
                if st.history.len() < 2 {
                    None
                } else {
                    Some(st.history[st.history.len() - 2].clone())
                }
            }
            Some(_) => st.history.last().cloned(),
            None => st.history.last().cloned(),
        };
        let Some(target) = target else {
            events.push(EngineEvent::Warning {
                text: "already at first step".into(),
            });
            return;
        };
        if st.cursor.is_some() && st.cursor.as_ref() == st.history.last() {
            st.history.pop();
        }
        self.release_cursor(st);
        self.present(st, self.index[&target], events);
    }

    fn step_select(
        &self,
        st: &mut ExecState,
        k: u64,
        events: &mut Vec<EngineEvent>,
    ) -> Result<(), EngineError> {
        let target = usize::try_from(k)
            .ok()
            .and_then(|k| self.steps.get(k))
            .ok_or(EngineError::StepOutOfRange {
                requested: k,
                total: self.steps.len(),
            })?
            .clone();
        let i = self.index[&target];
        if self.status(st, i) == NodeStatus::Skipped {
            events.push(EngineEvent::Warning {
                text: format!("step {k} does not apply given your earlier answers"),
            });
            return Ok(());
        }
        if st.cursor.as_ref() != Some(&target) {
            self.release_cursor(st);
        }
        self.present(st, i, events);
        let open = self.unresolved_conditions(st, i);
        if !open.is_empty() {
            events.push(EngineEvent::Warning {
                text: format!(
                    "this step depends on questions not answered yet: {}",
                    open.join(" ")
                ),
            });
        }
        Ok(())
    }

    /// Questions of ancestor conditions that have not been answered.
    fn unresolved_conditions(&self, st: &ExecState, node: usize) -> Vec<String> {
        let mut seen = vec![false; self.graph.nodes.len()];
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            for &(s, _) in &self.incoming[n] {
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        self.schedule
            .iter()
            .filter(|&&i| seen[i])
            .filter_map(|&i| {
                let c = self.graph.nodes[i].as_condition()?;
                (!matches!(self.status(st, i), NodeStatus::Resolved(_) | NodeStatus::Skipped))
                    .then(|| c.question.clone())
            })
            .collect()
    }

    fn answer(
        &self,
        st: &mut ExecState,
        value: bool,
        events: &mut Vec<EngineEvent>,
        clock: &dyn Clock,
    ) -> Result<(), EngineError> {
        let pending = st.pending_condition.take().ok_or_else(|| {
            EngineError::Protocol("there is no yes/no question waiting for an answer".into())
        })?;
        self.set(st, self.index[&pending], NodeStatus::Resolved(value));
        match st.cursor.clone() {
            None => self.advance(st, events, clock),
            Some(c) => {
                self.refresh(st);
                events.push(EngineEvent::PresentStep(self.step_context(self.index[&c])));
            }
        }
        Ok(())
    }
}

fn add_timer(st: &mut ExecState, label: &str, seconds: u64, clock: &dyn Clock) {
    let id = st.timers.len() as u32 + 1;
    st.timers.push(TimerRecord {
        id,
        label: label.to_string(),
        duration: seconds,
        started_at: clock.now(),
        fired: false,
    });
}

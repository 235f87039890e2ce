use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::taskgraph::{
    ActionKind, ExtraKind, MediaRef, NodeId, RequirementCategory,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum NodeStatus {
    /// Not yet reachable: some gating predecessor is unsettled.
    Unseen,
    /// Every gating predecessor settled and at least one live edge in.
    Available,
    /// A step on screen.
    Presented,
    Completed,
    /// Cut off by a resolved condition or logic gate.
    Skipped,
    /// A condition whose question was asked.
    PendingAnswer,
    Resolved(bool),
}

impl NodeStatus {
    /// Settled nodes never change again during normal forward execution.
    pub fn is_settled(self) -> bool {
        matches!(
            self,
            NodeStatus::Completed | NodeStatus::Skipped | NodeStatus::Resolved(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimerRecord {
    /// 1-based, per session.
    pub id: u32,
    pub label: String,
    /// Seconds, always positive.
    pub duration: u64,
    pub started_at: u64,
    pub fired: bool,
}

impl TimerRecord {
    pub fn due_at(&self) -> u64 {
        self.started_at + self.duration
    }

    pub fn remaining(&self, now: u64) -> u64 {
        self.due_at().saturating_sub(now)
    }
}

/// Execution state of one task in one session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecState {
    pub graph_id: String,
    pub status: BTreeMap<NodeId, NodeStatus>,
    /// The step on screen, if any.
    pub cursor: Option<NodeId>,
    /// Presented steps, most recent last. The cursor, when set, is on top.
    pub history: Vec<NodeId>,
    pub pending_condition: Option<NodeId>,
    pub timers: Vec<TimerRecord>,
    pub list_items: Vec<String>,
    /// The cursor step had already been completed before it was shown again.
    #[serde(default)]
    pub revisiting: bool,
    pub complete: bool,
    pub stopped: bool,
}

impl ExecState {
    pub fn status_of(&self, id: &NodeId) -> NodeStatus {
        self.status.get(id).copied().unwrap_or(NodeStatus::Unseen)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementView {
    pub node: NodeId,
    pub name: String,
    pub quantity: Option<String>,
    pub category: RequirementCategory,
}

impl RequirementView {
    pub fn display(&self) -> String {
        match &self.quantity {
            Some(q) if !q.is_empty() => format!("{} {}", q, self.name),
            _ => self.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtraView {
    pub node: NodeId,
    pub kind: ExtraKind,
    pub text: String,
}

/// A step with everything linked to it: what to show and what QA may use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepContext {
    pub node: NodeId,
    /// 1-based position in the step index.
    pub position: usize,
    pub total: usize,
    pub summary: String,
    pub details: Option<String>,
    pub image: Option<MediaRef>,
    pub video: Option<MediaRef>,
    pub requirements: Vec<RequirementView>,
    pub extras: Vec<ExtraView>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EngineEvent {
    PresentStep(StepContext),
    AskCondition {
        node: NodeId,
        question: String,
    },
    ActionFired {
        /// The graph node that fired, or none for a user-requested timer.
        node: Option<NodeId>,
        action: ActionKind,
        args: BTreeMap<String, String>,
    },
    TimerFired {
        id: u32,
        label: String,
    },
    TaskComplete,
    Warning {
        text: String,
    },
    Stopped,
}

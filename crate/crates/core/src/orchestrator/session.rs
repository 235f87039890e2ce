use serde::{Deserialize, Serialize};

use crate::engine::{ExecState, TimerRecord};
use crate::parser::Phase;
use crate::qa::QaState;
use crate::search::RankedResult;
use crate::taskgraph::MediaRef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    User,
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub speaker: Speaker,
    pub text: String,
}

/// One conversation. `exec` is set exactly when the phase is Execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub phase: Phase,
    #[serde(default)]
    pub task_id: Option<String>,
    #[serde(default)]
    pub exec: Option<ExecState>,
    #[serde(default)]
    pub candidates: Vec<RankedResult>,
    #[serde(default)]
    pub transcript: Vec<TranscriptEntry>,
    #[serde(default)]
    pub qa: QaState,
    pub created_at: u64,
    pub last_active: u64,
}

impl Session {
    pub fn new(id: String, now: u64) -> Self {
        Session {
            id,
            phase: Phase::Planning,
            task_id: None,
            exec: None,
            candidates: Vec::new(),
            transcript: Vec::new(),
            qa: QaState::default(),
            created_at: now,
            last_active: now,
        }
    }

    pub(crate) fn enter_planning(&mut self) {
        self.phase = Phase::Planning;
        self.task_id = None;
        self.exec = None;
        self.candidates.clear();
    }

    pub fn last_system_text(&self) -> Option<&str> {
        self.transcript
            .iter()
            .rev()
            .find(|e| e.speaker == Speaker::System)
            .map(|e| e.text.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimerView {
    pub id: u32,
    pub label: String,
    pub duration: u64,
    /// Seconds left at the time of the response.
    pub remaining: u64,
    pub fired: bool,
}

impl TimerView {
    pub fn new(t: &TimerRecord, now: u64) -> Self {
        TimerView { id: t.id, label: t.label.clone(), duration: t.duration, remaining: t.remaining(now), fired: t.fired }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionCard {
    /// 1-based, as spoken.
    pub option: usize,
    pub task_id: String,
    pub title: String,
    pub snippet: String,
}

/// What a screen device should show after a turn.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Screen {
    pub headline: String,
    pub step_text: Option<String>,
    /// 1-based position of the step shown, with the step count.
    pub step_position: Option<(usize, usize)>,
    pub requirements: Vec<String>,
    pub image: Option<MediaRef>,
    pub video: Option<MediaRef>,
    /// `["Yes", "No"]` exactly when a condition is pending.
    pub buttons: Vec<String>,
    pub options: Vec<OptionCard>,
    pub timers: Vec<TimerView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnResponse {
    pub speech: String,
    pub screen: Screen,
    pub phase: Phase,
    /// The parsed decision, in DSL text form.
    pub call: Option<String>,
    /// One line per engine event, e.g. `present_step s2`.
    pub events: Vec<String>,
}

/// `GET state` view of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    #[serde(flatten)]
    pub session: Session,
    pub task_title: Option<String>,
    pub timers: Vec<TimerView>,
}

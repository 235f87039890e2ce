//! Contextual decision parsing: utterance plus conversation state to a [`DslCall`].

mod eval;
mod lexicon;
mod remote;
mod rules;

use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::DslCall;

pub use eval::{evaluate_corpus, load_turn_corpus, AnnotatedTurn, CorpusError, EvalReport, Mismatch};
pub use lexicon::{LexiconError, Lexicons, DEFAULT_LEXICONS};
pub use remote::RemoteBackend;
pub use rules::{normalize, RuleBackend};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    #[default]
    Planning,
    Execution,
}

/// What the parser knows about the conversation at the time of a turn.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParseContext {
    pub phase: Phase,
    #[serde(default)]
    pub pending_condition: bool,
    /// 1-based.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_steps: Option<usize>,
    /// Search results on screen.
    #[serde(default)]
    pub candidate_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_system_prompt: Option<String>,
}

impl ParseContext {
    pub fn planning() -> Self {
        ParseContext::default()
    }

    pub fn execution(current_step: usize, total_steps: usize) -> Self {
        ParseContext {
            phase: Phase::Execution,
            current_step: Some(current_step),
            total_steps: Some(total_steps),
            ..ParseContext::default()
        }
    }

    /// `current_step` never exceeds `total_steps`.
    pub fn is_consistent(&self) -> bool {
        match (self.current_step, self.total_steps) {
            (Some(c), Some(t)) => c <= t,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty utterance")]
    Empty,
}

/// A decision parser. Output must always pass the DSL registry check.
pub trait ParserBackend: Send + Sync {
    fn parse(&self, utterance: &str, ctx: &ParseContext) -> Result<DslCall, ParseError>;
    fn name(&self) -> &str;
}

static DEFAULT_RULES: LazyLock<RuleBackend> = LazyLock::new(RuleBackend::default);

/// Parse with the default rule backend and shipped lexicons.
pub fn parse_utterance(utterance: &str, ctx: &ParseContext) -> Result<DslCall, ParseError> {
    DEFAULT_RULES.parse_utterance(utterance, ctx)
}

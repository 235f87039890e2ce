//! Question answering grounded in the current step of a task graph.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::engine::{RequirementView, StepContext};
use crate::taskgraph::{NodeId, TaskGraph};
use crate::text::{content_words, singular, words};

pub const DEFERRAL: &str = "I don't have that information for this task.";
pub const NO_REQUIREMENTS: &str = "This step doesn't need any listed ingredients or tools.";
pub const NO_EXTRAS: &str = "I don't have any tips for this step.";
pub const NO_DETAILS: &str = "There are no further details for this step.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QaCategory {
    Requirements,
    Substitution,
    StepDetail,
    ExtraFact,
    GeneralFallback,
}

const REQUIREMENT_WORDS: &[&str] = &[
    "need", "needs", "needed", "ingredient", "ingredients", "tool", "tools", "equipment",
    "require", "requires", "required", "supplies",
];
const SUBSTITUTION_WORDS: &[&str] = &["instead", "substitute", "substitution", "replace", "swap", "alternative"];
const FACT_WORDS: &[&str] = &["tip", "tips", "fact", "facts", "trick", "tricks", "interesting", "hint"];

/// Keyword routing; the first matching category wins.
pub fn route(question: &str, step: Option<&StepContext>) -> QaCategory {
    let ws = words(question);
    let has = |list: &[&str]| ws.iter().any(|w| list.contains(&w.as_str()));
    if has(REQUIREMENT_WORDS) {
        return QaCategory::Requirements;
    }
    if has(SUBSTITUTION_WORDS) {
        return QaCategory::Substitution;
    }
    if has(FACT_WORDS) {
        return QaCategory::ExtraFact;
    }
    if has(&["how", "why"]) {
        if let Some(ctx) = step {
            let step_text = format!("{} {}", ctx.summary, ctx.details.as_deref().unwrap_or(""));
            let step_words: HashSet<String> = content_words(&step_text).iter().map(|w| singular(w)).collect();
            if content_words(question).iter().any(|w| step_words.contains(&singular(w))) {
                return QaCategory::StepDetail;
            }
        }
    }
    QaCategory::GeneralFallback
}

/// Per-session round-robin position over each step's extras.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaState {
    served: BTreeMap<NodeId, usize>,
}

impl QaState {
    /// The next extra for `step`, cycling through all of them.
    pub fn next_extra<'a>(&mut self, step: &'a StepContext) -> Option<&'a str> {
        if step.extras.is_empty() {
            return None;
        }
        let n = self.served.entry(step.node.clone()).or_default();
        let text = &step.extras[*n % step.extras.len()].text;
        *n += 1;
        Some(text)
    }
}

/// Every requirement of the task, in declaration order.
pub fn task_requirements(graph: &TaskGraph) -> Vec<RequirementView> {
    graph
        .requirements()
        .map(|(id, r)| RequirementView {
            node: id.clone(),
            name: r.name.clone(),
            quantity: r.quantity.clone(),
            category: r.category,
        })
        .collect()
}

fn list(items: &[RequirementView]) -> String {
    items.iter().map(RequirementView::display).collect::<Vec<_>>().join(", ")
}

/// Answer from graph text only; anything else gets a fixed deferral.
/// Without a current step, requirement questions cover the whole task.
pub fn answer(
    category: QaCategory,
    step: Option<&StepContext>,
    task: &[RequirementView],
    state: &mut QaState,
) -> String {
    match (category, step) {
        (QaCategory::Requirements, Some(ctx)) if ctx.requirements.is_empty() => NO_REQUIREMENTS.to_string(),
        (QaCategory::Requirements, Some(ctx)) => format!("For this step you need: {}.", list(&ctx.requirements)),
        (QaCategory::Requirements, None) if !task.is_empty() => format!("For this task you need: {}.", list(task)),
        (QaCategory::StepDetail, Some(ctx)) => match &ctx.details {
            Some(d) => d.clone(),
            None => NO_DETAILS.to_string(),
        },
        (QaCategory::ExtraFact, Some(ctx)) => state.next_extra(ctx).unwrap_or(NO_EXTRAS).to_string(),
        _ => DEFERRAL.to_string(),
    }
}

/// Chit-chat content for the current step: its extras in turn, else its
/// details.
pub fn chit_chat(step: Option<&StepContext>, state: &mut QaState) -> String {
    let Some(ctx) = step else {
        return NO_EXTRAS.to_string();
    };
    if let Some(text) = state.next_extra(ctx) {
        return text.to_string();
    }
    ctx.details.clone().unwrap_or_else(|| NO_EXTRAS.to_string())
}

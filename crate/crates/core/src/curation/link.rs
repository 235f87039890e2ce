use std::collections::HashSet;

use crate::taskgraph::{Edge, EdgeLabel, NodeId, TaskGraph};
use crate::text::{singular, words};

/// Words dropped from a requirement name before taking its head noun:
/// units, preparation adjectives and sizes.
pub const MODIFIERS: &[&str] = &[
    "a", "an", "the", "of", "and", "or", "for", "to", "taste", "optional", "about",
    "fresh", "freshly", "large", "small", "medium", "big", "extra", "virgin", "whole",
    "chopped", "diced", "minced", "sliced", "grated", "shredded", "ground", "crushed",
    "peeled", "softened", "melted", "beaten", "cooked", "uncooked", "boneless", "skinless",
    "unsalted", "salted", "ripe", "dried", "frozen", "cold", "warm", "hot", "room",
    "temperature", "finely", "thinly", "roughly", "packed", "heaping", "level",
    "cup", "cups", "tbsp", "tsp", "tablespoon", "tablespoons", "teaspoon", "teaspoons",
    "g", "kg", "mg", "ml", "l", "oz", "ounce", "ounces", "lb", "lbs", "pound", "pounds",
    "clove", "cloves", "pinch", "dash", "can", "cans", "package", "packages", "bunch",
    "handful", "slice", "slices", "piece", "pieces", "sheet", "sheets", "stick", "sticks",
];

/// Last meaningful word of a requirement name, plural-folded.
pub fn head_noun(name: &str) -> Option<String> {
    let core = name.split([',', '(']).next().unwrap_or(name);
    words(core)
        .into_iter()
        .rfind(|w| !w.chars().any(|c| c.is_ascii_digit()) && !MODIFIERS.contains(&w.as_str()))
        .map(|w| singular(&w))
}

fn folded_words(text: &str) -> Vec<String> {
    words(text).iter().map(|w| singular(w)).collect()
}

/// Whether a step text mentions a requirement by head noun or full name.
pub fn mentions(step_text: &str, requirement: &str) -> bool {
    let step = folded_words(step_text);
    if let Some(head) = head_noun(requirement) {
        if step.contains(&head) {
            return true;
        }
    }
    let name = folded_words(requirement);
    !name.is_empty() && step.windows(name.len()).any(|w| w == name.as_slice())
}

/// Add a `requires` edge from each requirement to every step that mentions
/// it. Existing edges are kept and never duplicated. Returns the count added.
pub fn link_requirements(graph: &mut TaskGraph) -> usize {
    let mut existing: HashSet<(NodeId, NodeId)> = graph
        .edges
        .iter()
        .filter(|e| e.label == EdgeLabel::Requires)
        .map(|e| (e.from.clone(), e.to.clone()))
        .collect();
    let steps: Vec<(NodeId, String)> = graph
        .nodes
        .iter()
        .filter_map(|n| n.as_step().map(|s| (n.id.clone(), s.full_text())))
        .collect();
    let mut added = Vec::new();
    for (rid, req) in graph.requirements() {
        for (sid, text) in &steps {
            if mentions(text, &req.name) && existing.insert((rid.clone(), sid.clone())) {
                added.push(Edge::new(rid.clone(), sid.clone(), EdgeLabel::Requires));
            }
        }
    }
    let n = added.len();
    graph.edges.extend(added);
    n
}

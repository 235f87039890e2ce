//! Offline compilation of semi-structured task documents into TaskGraphs.

mod document;
mod link;
mod overlay;
mod pipeline;

use thiserror::Error;

pub use document::{load_document, slug, DocRequirement, DocStep, Faq, TaskDocument, DOCUMENT_SUFFIX};
pub use link::{head_noun, link_requirements, mentions, MODIFIERS};
pub use overlay::{apply_overlay, load_overlay, Overlay, OverlayError, OVERLAY_SUFFIX};
pub use pipeline::{curate_dir, CurateError, CurateOptions, CurateReport, CuratedFile, MediaSources};

use crate::taskgraph::{
    validate, ConditionPayload, Edge, EdgeLabel, ExtraInfoPayload, ExtraKind, MediaRef, Node, NodeId,
    Payload, RequirementPayload, StepPayload, TaskGraph, ValidationReport, MAX_SUMMARY_CHARS,
};
use crate::text::capitalize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthesisOptions {
    /// Rewrite leading "If ..., ..." sentences into Condition nodes.
    pub conditions: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions { conditions: true }
    }
}

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("synthesized graph `{task_id}` is invalid:\n{report}")]
    Invalid { task_id: String, report: ValidationReport },
}

/// Byte offset just past the first sentence terminator that is followed by
/// whitespace or the end of the text.
fn sentence_end(text: &str) -> Option<usize> {
    let mut it = text.char_indices().peekable();
    while let Some((i, c)) = it.next() {
        if matches!(c, '.' | '!' | '?') && it.peek().is_none_or(|(_, n)| n.is_whitespace()) {
            return Some(i + c.len_utf8());
        }
    }
    None
}

/// Split step text into a summary (first sentence, at most 200 characters)
/// and optional details holding the rest.
pub fn split_summary(text: &str) -> (String, Option<String>) {
    let text = text.trim();
    let end = sentence_end(text).unwrap_or(text.len());
    let (mut summary, mut rest) = (text[..end].to_string(), text[end..].trim_start().to_string());
    if summary.chars().count() > MAX_SUMMARY_CHARS {
        let limit = summary.char_indices().nth(MAX_SUMMARY_CHARS).map_or(summary.len(), |(i, _)| i);
        let upto = summary[limit..].chars().next().map_or(limit, |c| limit + c.len_utf8());
        let cut = summary[..upto]
            .rfind(char::is_whitespace)
            .filter(|&i| i > 0)
            .unwrap_or(limit);
        let tail = summary[cut..].trim_start().to_string();
        summary.truncate(cut);
        summary = summary.trim_end().to_string();
        rest = if rest.is_empty() { tail } else { format!("{tail} {rest}") };
    }
    (summary, (!rest.is_empty()).then_some(rest))
}

/// Pieces of a step whose sentence reads "If <clause>, <consequent>".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalStep {
    pub before: Option<String>,
    pub question: String,
    pub consequent: String,
    pub after: Option<String>,
}

/// Find the first sentence starting with "If" that has a comma, if any.
pub fn extract_condition(text: &str) -> Option<ConditionalStep> {
    let mut start = 0;
    while start < text.len() {
        let rest = &text[start..];
        let len = sentence_end(rest).unwrap_or(rest.len());
        let sentence = rest[..len].trim();
        let lead = sentence.get(..3).map(str::to_ascii_lowercase);
        if lead.as_deref() == Some("if ") {
            if let Some((clause, consequent)) = sentence[3..].split_once(',') {
                let (clause, consequent) = (clause.trim(), consequent.trim());
                if !clause.is_empty() && !consequent.is_empty() && consequent != "." {
                    let piece = |s: &str| Some(s.trim().to_string()).filter(|s| !s.is_empty());
                    return Some(ConditionalStep {
                        before: piece(&text[..start]),
                        question: format!("{}?", capitalize(clause)),
                        consequent: consequent.to_string(),
                        after: piece(&text[start + len..]),
                    });
                }
            }
        }
        start += len;
    }
    None
}

struct Builder {
    graph: TaskGraph,
    steps: usize,
    conditions: usize,
    tails: Vec<NodeId>,
}

impl Builder {
    fn push_step(&mut self, text: &str, image: Option<MediaRef>) -> NodeId {
        self.steps += 1;
        let id = NodeId::new(format!("s{}", self.steps));
        let (summary, details) = split_summary(text);
        let payload = StepPayload { summary, details, image, video: None };
        self.graph.nodes.push(Node::new(id.clone(), Payload::Step(payload)));
        self.chain(&id);
        self.tails = vec![id.clone()];
        id
    }

    fn push_condition(&mut self, question: String) -> NodeId {
        self.conditions += 1;
        let id = NodeId::new(format!("c{}", self.conditions));
        self.graph.nodes.push(Node::new(id.clone(), Payload::Condition(ConditionPayload { question })));
        self.chain(&id);
        id
    }

    /// `seq` from every open tail into `id`.
    fn chain(&mut self, id: &NodeId) {
        for t in self.tails.drain(..) {
            self.graph.edges.push(Edge::new(t, id.clone(), EdgeLabel::Seq));
        }
    }
}

/// Compile a document into a validated graph.
pub fn synthesize(doc: &TaskDocument, opts: SynthesisOptions) -> Result<TaskGraph, SynthesisError> {
    let mut graph = TaskGraph::new(doc.task_id(), doc.title.clone());
    graph.description = doc.description.clone();
    graph.source_url = doc.source_url.clone();
    graph.tags = doc.tags.clone();
    if let Some(r) = doc.rating {
        graph.tags.push(format!("rating:{r}"));
    }
    let mut b = Builder { graph, steps: 0, conditions: 0, tails: Vec::new() };

    for step in &doc.steps {
        let split = if opts.conditions { extract_condition(&step.text) } else { None };
        let Some(cond) = split else {
            b.push_step(&step.text, step.image.clone());
            continue;
        };
        let mut image = step.image.clone();
        if let Some(before) = &cond.before {
            b.push_step(before, image.take());
        }
        let cid = b.push_condition(cond.question);
        // The consequent hangs off the `yes` branch, not the sequence.
        b.tails.clear();
        let yid = b.push_step(&cond.consequent, image);
        b.graph.edges.push(Edge::new(cid.clone(), yid.clone(), EdgeLabel::Yes));
        b.tails = vec![cid, yid];
        if let Some(after) = &cond.after {
            b.push_step(after, None);
        }
    }

    let mut graph = b.graph;
    let first_step = graph.nodes.iter().find(|n| n.as_step().is_some()).map(|n| n.id.clone());
    if let (Some(video), Some(first)) = (doc.videos.first(), &first_step) {
        let idx = graph.node_index(first).expect("first step exists");
        graph.nodes[idx].as_step_mut().expect("is a step").video = Some(video.clone());
    }

    for (i, r) in doc.requirements.iter().enumerate() {
        let payload = RequirementPayload { name: r.name.clone(), quantity: r.quantity.clone(), category: r.category };
        graph.nodes.push(Node::new(format!("r{}", i + 1), Payload::Requirement(payload)));
    }
    link_requirements(&mut graph);

    let facts = doc
        .faqs
        .iter()
        .map(|f| format!("{} {}", f.q, f.a))
        .chain(doc.infobox.iter().map(|(k, v)| format!("{k}: {v}")));
    for (i, text) in facts.enumerate() {
        let id = NodeId::new(format!("x{}", i + 1));
        graph.nodes.push(Node::new(id.clone(), Payload::ExtraInfo(ExtraInfoPayload { kind: ExtraKind::Fact, text })));
        if let Some(first) = &first_step {
            graph.edges.push(Edge::new(id, first.clone(), EdgeLabel::Enriches));
        }
    }

    let report = validate(&graph);
    if !report.is_valid() {
        return Err(SynthesisError::Invalid { task_id: graph.id.clone(), report });
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskgraph::{NodeKind, RequirementCategory};

    fn doc(steps: &[&str]) -> TaskDocument {
        TaskDocument {
            id: None,
            title: "Test task".into(),
            author: None,
            description: String::new(),
            requirements: vec![],
            steps: steps.iter().map(|t| DocStep { text: t.to_string(), image: None }).collect(),
            videos: vec![],
            faqs: vec![],
            infobox: Default::default(),
            source_url: None,
            rating: None,
            tags: vec![],
        }
    }

    fn edges(g: &TaskGraph) -> Vec<(String, String, &'static str)> {
        g.edges.iter().map(|e| (e.from.to_string(), e.to.to_string(), e.label.as_str())).collect()
    }

    #[test]
    fn summary_split() {
        assert_eq!(
            split_summary("Boil water. Salt it well!"),
            ("Boil water.".into(), Some("Salt it well!".into()))
        );
        assert_eq!(split_summary("Add 2.5 cups flour"), ("Add 2.5 cups flour".into(), None));
        assert_eq!(split_summary("Done?  Yes."), ("Done?".into(), Some("Yes.".into())));
        let long = format!("{} end.", "word ".repeat(60));
        let (s, d) = split_summary(&long);
        assert!(s.chars().count() <= MAX_SUMMARY_CHARS);
        assert_eq!(format!("{s} {}", d.unwrap()), long.trim());
    }

    #[test]
    fn linear_steps() {
        let g = synthesize(&doc(&["One.", "Two.", "Three."]), SynthesisOptions::default()).unwrap();
        assert_eq!(g.step_count(), 3);
        assert_eq!(edges(&g), [("s1".into(), "s2".into(), "seq"), ("s2".into(), "s3".into(), "seq")]);
        assert_eq!(g.id, "test-task");
    }

    #[test]
    fn condition_extraction() {
        let c = extract_condition("If your pasta is fresh, boil for 3 minutes.").unwrap();
        assert_eq!(c.question, "Your pasta is fresh?");
        assert_eq!(c.consequent, "boil for 3 minutes.");
        assert_eq!((c.before, c.after), (None, None));
        let c = extract_condition("Drain. If it is sticky, rinse it. Serve.").unwrap();
        assert_eq!(c.before.as_deref(), Some("Drain."));
        assert_eq!(c.after.as_deref(), Some("Serve."));
        assert_eq!(c.question, "It is sticky?");
        assert!(extract_condition("Iffy weather, stay inside.").is_none());
        assert!(extract_condition("If only.").is_none());
    }

    #[test]
    fn conditional_step_structure() {
        let d = doc(&["Boil water.", "If your pasta is fresh, boil for 3 minutes.", "Drain."]);
        let g = synthesize(&d, SynthesisOptions::default()).unwrap();
        let kinds: Vec<_> = g.nodes.iter().map(|n| (n.id.to_string(), n.kind())).collect();
        assert_eq!(
            kinds,
            [
                ("s1".into(), NodeKind::Step),
                ("c1".into(), NodeKind::Condition),
                ("s2".into(), NodeKind::Step),
                ("s3".into(), NodeKind::Step),
            ]
        );
        assert_eq!(g.nodes[1].as_condition().unwrap().question, "Your pasta is fresh?");
        assert_eq!(g.nodes[2].as_step().unwrap().summary, "boil for 3 minutes.");
        assert_eq!(
            edges(&g),
            [
                ("s1".into(), "c1".into(), "seq"),
                ("c1".into(), "s2".into(), "yes"),
                ("c1".into(), "s3".into(), "seq"),
                ("s2".into(), "s3".into(), "seq"),
            ]
        );
        let plain = synthesize(&d, SynthesisOptions { conditions: false }).unwrap();
        assert_eq!(plain.step_count(), 3);
        assert!(plain.nodes.iter().all(|n| n.kind() == NodeKind::Step));
    }

    #[test]
    fn extras_requirements_and_tags() {
        let mut d = doc(&["Slice the zucchini.", "Heat oil in a pan."]);
        d.requirements = vec![
            DocRequirement { name: "zucchini".into(), quantity: Some("2".into()), category: RequirementCategory::Ingredient },
            DocRequirement { name: "olive oil".into(), quantity: None, category: RequirementCategory::Ingredient },
            DocRequirement { name: "saffron".into(), quantity: None, category: RequirementCategory::Ingredient },
        ];
        d.faqs = vec![Faq { q: "Can I freeze it?".into(), a: "Yes.".into() }];
        d.infobox.insert("Cuisine".into(), "Italian".into());
        d.rating = Some(4.5);
        d.videos = vec![MediaRef::new("v.mp4", Some("How to slice".into()))];
        let g = synthesize(&d, SynthesisOptions::default()).unwrap();
        assert!(g.tags.contains(&"rating:4.5".to_string()));
        let req: Vec<_> = g.edges.iter().filter(|e| e.label == EdgeLabel::Requires).map(|e| (e.from.as_str(), e.to.as_str())).collect();
        assert_eq!(req, [("r1", "s1"), ("r2", "s2")]);
        let extras: Vec<_> = g.nodes.iter().filter_map(|n| n.as_extra()).map(|x| x.text.as_str()).collect();
        assert_eq!(extras, ["Can I freeze it? Yes.", "Cuisine: Italian"]);
        assert!(g.nodes[0].as_step().unwrap().video.is_some());
        assert_eq!(link_requirements(&mut g.clone()), 0);
    }
}

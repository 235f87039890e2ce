//! A five-document corpus with BM25 scores computed outside the crate.

#![allow(dead_code)]

use std::sync::Arc;

use oat_core::taskgraph::{Node, Payload, RequirementCategory, RequirementPayload, StepPayload, TaskGraph};

pub fn doc(id: &str, title: &str, description: &str, req: &str, theme: &str) -> Arc<TaskGraph> {
    let mut g = TaskGraph::new(id, title);
    g.description = description.into();
    g.tags = vec![format!("theme:{theme}")];
    g.nodes.push(Node::new("s1", Payload::Step(StepPayload::new("Do it."))));
    g.nodes.push(Node::new(
        "r1",
        Payload::Requirement(RequirementPayload {
            name: req.into(),
            quantity: None,
            category: RequirementCategory::Ingredient,
        }),
    ));
    Arc::new(g)
}

pub fn five_docs() -> Vec<Arc<TaskGraph>> {
    vec![
        doc("a-apple-pie", "Apple Pie", "A flaky crust with apple filling", "apple", "baking"),
        doc("b-cider", "Hot Cider", "Warm apple cider with spice", "cinnamon", "drinks"),
        doc("c-pumpkin-pie", "Pumpkin Pie", "Spiced pumpkin custard in a crust", "pumpkin", "baking"),
        doc("d-lantern", "Carve a Pumpkin", "A spooky lantern", "knife", "halloween"),
        doc("e-tart", "Lemon Tart", "Sharp lemon curd in a crust", "lemon", "baking"),
    ]
}

// Computed by a standalone script from the raw BM25 formula.
pub const REFERENCE: &[(&str, &[(&str, f64)])] = &[
    ("apple pie", &[("a-apple-pie", 2.9662670852632402), ("b-cider", 0.8650602583100623), ("c-pumpkin-pie", 1.3671202829660065)]),
    (
        "pumpkin crust",
        &[
            ("a-apple-pie", 0.5325883521110304),
            ("c-pumpkin-pie", 2.131735154408264),
            ("d-lantern", 1.411315981768787),
            ("e-tart", 0.5325883521110304),
        ],
    ),
    ("lemon baking", &[("a-apple-pie", 0.7350398952562444), ("c-pumpkin-pie", 0.7350398952562444), ("e-tart", 3.267269888217607)]),
    ("spice lantern knife", &[("b-cider", 1.3698126580154268), ("d-lantern", 3.427772272882273)]),
];

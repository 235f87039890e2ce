//! Core of a self-hostable task assistant.
//!
//! Tasks are [`taskgraph::TaskGraph`]s: DAGs of steps, requirements,
//! yes/no conditions, logic gates, autonomous actions and extra
//! information. User utterances are parsed in context into calls of a
//! small decision DSL ([`dsl`]), which the [`orchestrator`] dispatches to
//! task search, the execution [`engine`] or question answering.
//! [`curation`] and [`media`] compile semi-structured task documents into
//! enriched graphs offline.

pub mod curation;
pub mod dsl;
pub mod engine;
pub mod media;
pub mod orchestrator;
pub mod par;
pub mod parser;
pub mod qa;
pub mod search;
pub mod span;
pub mod taskgraph;
pub mod text;

pub use par::Execution;

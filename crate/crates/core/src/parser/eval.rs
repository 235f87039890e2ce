use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ParseContext, ParserBackend};
use crate::dsl::{self, DslCall};
use crate::Execution;

/// One annotated turn of the evaluation corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedTurn {
    pub utterance: String,
    pub context: ParseContext,
    pub gold: DslCall,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("corpus contains no turns")]
    Empty,
}

/// Parse line-delimited JSON turns. Blank lines are ignored.
pub fn load_turn_corpus(text: &str) -> Result<Vec<AnnotatedTurn>, CorpusError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        utterance: String,
        context: ParseContext,
        gold: String,
    }
    let mut turns = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| CorpusError::Line { line: i + 1, message };
        let raw: Raw = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let gold = dsl::parse(&raw.gold).map_err(|e| err(format!("gold: {e}")))?;
        turns.push(AnnotatedTurn { utterance: raw.utterance, context: raw.context, gold });
    }
    if turns.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(turns)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    /// 1-based index into the corpus.
    pub turn: usize,
    pub utterance: String,
    pub gold: String,
    pub predicted: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub backend: String,
    pub total: usize,
    pub function_matches: usize,
    pub full_matches: usize,
    pub function_accuracy: f64,
    pub full_accuracy: f64,
    /// gold function -> predicted function -> count.
    pub confusion: BTreeMap<String, BTreeMap<String, usize>>,
    pub mismatches: Vec<Mismatch>,
}

/// Exact-match accuracy of `backend` over `turns`.
pub fn evaluate_corpus(
    turns: &[AnnotatedTurn],
    backend: &dyn ParserBackend,
    exec: Execution,
) -> Result<EvalReport, CorpusError> {
    if turns.is_empty() {
        return Err(CorpusError::Empty);
    }
    let predictions = exec.map(turns, |t| {
        backend
            .parse(&t.utterance, &t.context)
            .map(|c| c.to_string())
            .unwrap_or_else(|e| format!("<error: {e}>"))
    });
    let mut report = EvalReport {
        backend: backend.name().to_string(),
        total: turns.len(),
        function_matches: 0,
        full_matches: 0,
        function_accuracy: 0.0,
        full_accuracy: 0.0,
        confusion: BTreeMap::new(),
        mismatches: Vec::new(),
    };
    for (i, (turn, predicted)) in turns.iter().zip(predictions).enumerate() {
        let gold = turn.gold.to_string();
        let gold_fn = turn.gold.function().to_string();
        let pred_fn = predicted.split('(').next().unwrap_or_default().to_string();
        if gold_fn == pred_fn {
            report.function_matches += 1;
        }
        if gold == predicted {
            report.full_matches += 1;
        } else {
            report.mismatches.push(Mismatch {
                turn: i + 1,
                utterance: turn.utterance.clone(),
                gold,
                predicted,
            });
        }
        *report.confusion.entry(gold_fn).or_default().entry(pred_fn).or_default() += 1;
    }
    report.function_accuracy = report.function_matches as f64 / report.total as f64;
    report.full_accuracy = report.full_matches as f64 / report.total as f64;
    Ok(report)
}

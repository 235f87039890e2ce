use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{Context, Result};

use oat_core::engine::{Clock, ManualClock, SystemClock};
use oat_core::orchestrator::{Orchestrator, OrchestratorConfig, TurnResponse};
use oat_core::parser::Phase;
use oat_core::search::load_corpus;
use oat_core::Execution;
use oat_server::ParserSpec;

pub const GREETING: &str = "Hi! What would you like to make or do today?";

#[derive(Debug, Clone)]
pub struct ChatOptions {
    pub corpus: PathBuf,
    pub scripted_clock: Option<u64>,
    pub parser: ParserSpec,
    pub exec: Execution,
}

fn clock_text(secs: u64) -> String {
    format!("{}:{:02}", secs / 60, secs % 60)
}

/// Plain-text rendering of one reply and its screen.
pub fn render_turn(resp: &TurnResponse) -> String {
    let mut s = String::new();
    let phase = match resp.phase {
        Phase::Planning => "planning",
        Phase::Execution => "execution",
    };
    let _ = writeln!(s, "oat: {}", resp.speech);
    let screen = &resp.screen;
    let _ = writeln!(s, "  [{phase}] {}", screen.headline);
    if let Some(text) = &screen.step_text {
        match screen.step_position {
            Some((k, n)) => {
                let _ = writeln!(s, "  step {k}/{n}: {text}");
            }
            None => {
                let _ = writeln!(s, "  {text}");
            }
        }
    }
    if !screen.requirements.is_empty() {
        let _ = writeln!(s, "  needs: {}", screen.requirements.join(", "));
    }
    if let Some(m) = &screen.image {
        let _ = writeln!(s, "  image: {}", m.url);
    }
    if let Some(m) = &screen.video {
        let _ = writeln!(s, "  video: {}", m.url);
    }
    if !screen.buttons.is_empty() {
        let _ = writeln!(s, "  buttons: {}", screen.buttons.join(" | "));
    }
    for o in &screen.options {
        let _ = writeln!(s, "  option {}: {} ({})", o.option, o.title, o.task_id);
    }
    for t in &screen.timers {
        let status = if t.fired { "done".to_string() } else { format!("{} left", clock_text(t.remaining)) };
        let _ = writeln!(s, "  timer {} ({}): {status}", t.id, t.label);
    }
    s
}

/// Read utterances from `input` until EOF or `/quit`.
pub fn run_chat(opts: &ChatOptions, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<()> {
    let (corpus, _) = load_corpus(&opts.corpus, opts.exec)?;
    let manual = opts.scripted_clock.map(|start| Arc::new(ManualClock::new(start)));
    let clock: Arc<dyn Clock> = match &manual {
        Some(m) => m.clone(),
        None => Arc::new(SystemClock::new()),
    };
    let config = OrchestratorConfig { exec: opts.exec, ..OrchestratorConfig::default() };
    let orch = Orchestrator::new(corpus, opts.parser.build(), clock, config)?;
    let session = orch.create_session();
    writeln!(out, "oat: {GREETING}")?;

    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line).context("cannot read input")? == 0 {
            break;
        }
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        writeln!(out, "you: {text}")?;
        if let Some(cmd) = text.strip_prefix('/') {
            let mut parts = cmd.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some("quit"), _) => break,
                (Some("state"), _) => {
                    let view = orch.session_state(&session.id)?;
                    writeln!(out, "{}", serde_json::to_string_pretty(&view)?)?;
                }
                (Some("wait"), Some(n)) => match (&manual, n.parse::<u64>()) {
                    (Some(m), Ok(secs)) => {
                        m.advance(secs);
                        writeln!(out, "  (clock +{secs}s)")?;
                    }
                    (None, _) => writeln!(out, "  /wait needs --scripted-clock")?,
                    (_, Err(_)) => writeln!(out, "  /wait takes a number of seconds")?,
                },
                _ => writeln!(out, "  commands: /wait N, /state, /quit")?,
            }
            continue;
        }
        let resp = orch.handle_turn(&session.id, text)?;
        write!(out, "{}", render_turn(&resp))?;
    }
    Ok(())
}

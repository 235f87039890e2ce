//! Sessions and the phase policy: planning (search, select) then execution
//! (steps, conditions, timers, questions).

mod session;

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::{FairMutex, RwLock};
use thiserror::Error;

pub use session::{OptionCard, Screen, Session, SessionView, Speaker, TimerView, TranscriptEntry, TurnResponse};

use crate::dsl::DslCall;
use crate::engine::{Clock, Engine, EngineError, EngineEvent};
use crate::parser::{ParseContext, ParserBackend, Phase};
use crate::qa;
use crate::search::{Corpus, RankedResult, SearchError, SearchIndex};
use crate::taskgraph::{ActionKind, TaskGraph, ValidationReport};
use crate::text::capitalize;
use crate::Execution;

pub const DEFAULT_SESSION_TTL_SECS: u64 = 60 * 60;
pub const CANDIDATES_SHOWN: usize = 3;
pub const THEMES_SUGGESTED: usize = 3;

const NOT_STARTED: &str = "We haven't started a task yet. Tell me what you'd like to do and I'll find one.";
const NOT_HEARD: &str = "Sorry, I didn't catch that.";

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("no session with id `{0}`")]
    UnknownSession(String),
    #[error("no task with id `{0}`")]
    UnknownTask(String),
    #[error("task `{task_id}` is invalid:\n{report}")]
    InvalidGraph { task_id: String, report: ValidationReport },
    #[error(transparent)]
    Search(#[from] SearchError),
}

#[derive(Debug, Clone, Copy)]
pub struct OrchestratorConfig {
    pub session_ttl_secs: u64,
    pub exec: Execution,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        OrchestratorConfig { session_ttl_secs: DEFAULT_SESSION_TTL_SECS, exec: Execution::default() }
    }
}

/// Corpus, search index and one engine per task, replaced as a unit.
pub struct CorpusSnapshot {
    pub corpus: Corpus,
    pub index: SearchIndex,
    engines: HashMap<String, Arc<Engine>>,
    themes: Vec<String>,
}

impl CorpusSnapshot {
    pub fn build(corpus: Corpus, exec: Execution) -> Result<Self, OrchestratorError> {
        let index = SearchIndex::from_corpus(&corpus, exec)?;
        let built = exec.map(corpus.graphs(), |g| (g.id.clone(), Engine::new(g.clone())));
        let mut engines = HashMap::new();
        for (id, engine) in built {
            match engine {
                Ok(e) => {
                    engines.insert(id, Arc::new(e));
                }
                Err(EngineError::InvalidGraph(report)) => {
                    return Err(OrchestratorError::InvalidGraph { task_id: id, report })
                }
                Err(other) => unreachable!("Engine::new only fails on invalid graphs: {other}"),
            }
        }
        let themes = corpus.themes();
        Ok(CorpusSnapshot { corpus, index, engines, themes })
    }

    pub fn engine(&self, task_id: &str) -> Option<&Arc<Engine>> {
        self.engines.get(task_id)
    }
}

/// Collects speech and event summaries during one turn.
#[derive(Default)]
struct Turn {
    speech: Vec<String>,
    events: Vec<String>,
    complete: bool,
}

impl Turn {
    fn say(&mut self, text: impl Into<String>) {
        self.speech.push(text.into());
    }

    fn event(&mut self, ev: &EngineEvent) {
        let (line, speech) = describe(ev);
        self.events.push(line);
        if let Some(s) = speech {
            self.say(s);
        }
        if matches!(ev, EngineEvent::TaskComplete) {
            self.complete = true;
        }
    }
}

fn sentence(text: &str) -> String {
    let t = capitalize(text.trim());
    if t.ends_with(['.', '!', '?']) {
        t
    } else {
        format!("{t}.")
    }
}

fn describe(ev: &EngineEvent) -> (String, Option<String>) {
    match ev {
        EngineEvent::PresentStep(ctx) => (
            format!("present_step {}", ctx.node),
            Some(format!("Step {} of {}: {}", ctx.position, ctx.total, sentence(&ctx.summary))),
        ),
        EngineEvent::AskCondition { node, question } => (format!("ask_condition {node}"), Some(question.clone())),
        EngineEvent::ActionFired { node, action, args } => {
            let line = match node {
                Some(n) => format!("action_fired {} {n}", action.as_str()),
                None => format!("action_fired {}", action.as_str()),
            };
            let speech = match action {
                ActionKind::Timer => {
                    let what = args.get("label").or_else(|| args.get("span")).map_or("", String::as_str);
                    match node {
                        Some(_) => format!("I've started a timer for {what}."),
                        None => format!("Timer set for {what}."),
                    }
                }
                ActionKind::AddToList => {
                    format!("I've added {} to your list.", args.get("item").map_or("", String::as_str))
                }
            };
            (line, Some(speech))
        }
        EngineEvent::TimerFired { id, label } => {
            (format!("timer_fired {id}"), Some(format!("Time's up! Your timer for {label} is done.")))
        }
        EngineEvent::TaskComplete => ("task_complete".into(), None),
        EngineEvent::Warning { text } => ("warning".into(), Some(sentence(text))),
        EngineEvent::Stopped => ("stopped".into(), None),
    }
}

fn apology(err: &EngineError, call: &DslCall) -> String {
    match err {
        EngineError::StepOutOfRange { total, .. } => format!("Sorry, this task only has {total} steps."),
        EngineError::Span(_) => "Sorry, I couldn't tell how long to set the timer for.".into(),
        EngineError::Protocol(_) if call.function() == "condition" => {
            "Sorry, there's no question to answer right now.".into()
        }
        _ => "Sorry, I can't do that right now.".into(),
    }
}

/// "a", "a or b", "a, b or c".
fn or_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} or {last}", init.join(", ")),
    }
}

/// The conversation service. Each session is behind its own fair mutex,
/// so concurrent turns for one session run one at a time in arrival order.
pub struct Orchestrator {
    snapshot: RwLock<Arc<CorpusSnapshot>>,
    sessions: RwLock<HashMap<String, Arc<FairMutex<Session>>>>,
    parser: Arc<dyn ParserBackend>,
    clock: Arc<dyn Clock>,
    config: OrchestratorConfig,
}

impl Orchestrator {
    pub fn new(
        corpus: Corpus,
        parser: Arc<dyn ParserBackend>,
        clock: Arc<dyn Clock>,
        config: OrchestratorConfig,
    ) -> Result<Self, OrchestratorError> {
        let snapshot = CorpusSnapshot::build(corpus, config.exec)?;
        Ok(Orchestrator {
            snapshot: RwLock::new(Arc::new(snapshot)),
            sessions: RwLock::new(HashMap::new()),
            parser,
            clock,
            config,
        })
    }

    pub fn snapshot(&self) -> Arc<CorpusSnapshot> {
        self.snapshot.read().clone()
    }

    /// Swap in a new corpus. Running sessions keep going if their task survives.
    pub fn reload(&self, corpus: Corpus) -> Result<(), OrchestratorError> {
        let fresh = Arc::new(CorpusSnapshot::build(corpus, self.config.exec)?);
        *self.snapshot.write() = fresh;
        Ok(())
    }

    pub fn corpus_size(&self) -> usize {
        self.snapshot().corpus.len()
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    pub fn parser(&self) -> &Arc<dyn ParserBackend> {
        &self.parser
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().len()
    }

    pub fn create_session(&self) -> Session {
        let now = self.clock.now();
        let mut sessions = self.sessions.write();
        let id = loop {
            let id = format!("{:032x}", rand::random::<u128>());
            if !sessions.contains_key(&id) {
                break id;
            }
        };
        let session = Session::new(id.clone(), now);
        sessions.insert(id, Arc::new(FairMutex::new(session.clone())));
        session
    }

    fn handle(&self, id: &str) -> Result<Arc<FairMutex<Session>>, OrchestratorError> {
        self.sessions
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| OrchestratorError::UnknownSession(id.to_string()))
    }

    pub fn session_state(&self, id: &str) -> Result<SessionView, OrchestratorError> {
        let handle = self.handle(id)?;
        let s = handle.lock();
        let snap = self.snapshot();
        let now = self.clock.now();
        let task_title = s.task_id.as_ref().and_then(|t| snap.corpus.get(t)).map(|g| g.title.clone());
        let timers = s.exec.iter().flat_map(|e| &e.timers).map(|t| TimerView::new(t, now)).collect();
        Ok(SessionView { session: s.clone(), task_title, timers })
    }

    pub fn search(&self, query: &str, theme: &str, k: usize) -> Result<Vec<RankedResult>, SearchError> {
        self.snapshot().index.query(query, theme, k)
    }

    pub fn task(&self, id: &str) -> Option<Arc<TaskGraph>> {
        self.snapshot().corpus.get(id).cloned()
    }

    /// Remove sessions idle longer than the TTL (every session when it is 0).
    /// Sessions in the middle of a turn are kept.
    pub fn session_gc(&self, now: u64) -> usize {
        let ttl = self.config.session_ttl_secs;
        let mut sessions = self.sessions.write();
        let before = sessions.len();
        sessions.retain(|_, s| match s.try_lock() {
            Some(s) => {
                let idle = now.saturating_sub(s.last_active);
                !(ttl == 0 || idle > ttl)
            }
            None => true,
        });
        before - sessions.len()
    }

    /// All sessions, ordered by id, for persisting across restarts.
    pub fn export_sessions(&self) -> Vec<Session> {
        let mut out: Vec<Session> = self.sessions.read().values().map(|s| s.lock().clone()).collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    pub fn import_sessions(&self, sessions: Vec<Session>) -> usize {
        let mut map = self.sessions.write();
        let n = sessions.len();
        for s in sessions {
            map.insert(s.id.clone(), Arc::new(FairMutex::new(s)));
        }
        n
    }

    pub fn handle_turn(&self, id: &str, utterance: &str) -> Result<TurnResponse, OrchestratorError> {
        let handle = self.handle(id)?;
        let mut s = handle.lock();
        let snap = self.snapshot();
        let now = self.clock.now();
        s.last_active = now;

        let mut turn = Turn::default();
        if let Some(exec) = s.exec.as_mut() {
            for ev in Engine::poll_timers(exec, self.clock.as_ref()) {
                turn.event(&ev);
            }
        }

        let text = utterance.trim();
        let ctx = self.parse_context(&s, &snap);
        let call = match self.parser.parse(text, &ctx) {
            Ok(call) => {
                self.dispatch(&mut s, &snap, &call, text, &mut turn);
                Some(call.to_string())
            }
            Err(_) => {
                turn.say(NOT_HEARD);
                None
            }
        };
        if turn.complete {
            let title = s.task_id.as_ref().and_then(|t| snap.corpus.get(t)).map(|g| g.title.clone());
            turn.say(format!("Congratulations, you've finished {}!", title.as_deref().unwrap_or("the task")));
            s.enter_planning();
        }

        let speech = turn.speech.join(" ");
        let screen = self.screen(&s, &snap, now);
        s.transcript.push(TranscriptEntry { speaker: Speaker::User, text: utterance.to_string() });
        s.transcript.push(TranscriptEntry { speaker: Speaker::System, text: speech.clone() });
        Ok(TurnResponse { speech, screen, phase: s.phase, call, events: turn.events })
    }

    fn parse_context(&self, s: &Session, snap: &CorpusSnapshot) -> ParseContext {
        let engine = s.task_id.as_ref().and_then(|t| snap.engine(t));
        let exec = s.exec.as_ref();
        ParseContext {
            phase: s.phase,
            pending_condition: exec.is_some_and(|e| e.pending_condition.is_some()),
            current_step: exec
                .and_then(|e| e.cursor.as_ref())
                .zip(engine)
                .and_then(|(c, eng)| eng.steps().position(c)),
            total_steps: engine.map(|e| e.steps().len()),
            candidate_count: s.candidates.len(),
            last_system_prompt: s.last_system_text().map(str::to_string),
        }
    }

    fn dispatch(&self, s: &mut Session, snap: &CorpusSnapshot, call: &DslCall, text: &str, turn: &mut Turn) {
        match call.function() {
            "search" => self.search_turn(s, snap, call, text, turn),
            "select" => self.select_turn(s, snap, call, turn),
            "stop" => match s.phase {
                Phase::Execution => {
                    let title = s.task_id.as_ref().and_then(|t| snap.corpus.get(t)).map(|g| g.title.clone());
                    turn.say(format!(
                        "Okay, I've stopped {}. What would you like to do next?",
                        title.as_deref().unwrap_or("the task")
                    ));
                    s.enter_planning();
                }
                Phase::Planning => {
                    s.enter_planning();
                    turn.say("Okay. What would you like to do?");
                }
            },
            "answer_question" | "chit_chat" => self.qa_turn(s, snap, call, text, turn),
            _ => self.engine_turn(s, snap, call, turn),
        }
    }

    fn search_turn(&self, s: &mut Session, snap: &CorpusSnapshot, call: &DslCall, text: &str, turn: &mut Turn) {
        if s.phase == Phase::Execution {
            turn.say("We're in the middle of a task. Say stop if you'd like to choose a different one.");
            return;
        }
        let vague = call.bool_arg("vague").unwrap_or(false);
        let theme = call.str_arg("theme").unwrap_or("");
        let query = if vague { theme } else { text };
        let results = match snap.index.query(query, theme, CANDIDATES_SHOWN) {
            Ok(r) => r,
            Err(_) => {
                let themes: Vec<String> = snap.themes.iter().take(THEMES_SUGGESTED).cloned().collect();
                if themes.is_empty() {
                    turn.say("What would you like to do? Tell me a dish or a project.");
                } else {
                    turn.say(format!(
                        "I can help with lots of things. How about something {}? Or tell me exactly what you'd like to do.",
                        or_list(&themes)
                    ));
                }
                return;
            }
        };
        s.candidates = results;
        if s.candidates.is_empty() {
            turn.say("I couldn't find a task for that. Try describing it another way.");
            return;
        }
        let listed: Vec<String> =
            s.candidates.iter().enumerate().map(|(i, r)| format!("{}. {}", i + 1, r.title)).collect();
        let noun = if listed.len() == 1 { "task" } else { "tasks" };
        turn.say(format!("I found {} {noun}: {}. Which one would you like?", listed.len(), listed.join(", ")));
    }

    fn select_turn(&self, s: &mut Session, snap: &CorpusSnapshot, call: &DslCall, turn: &mut Turn) {
        let k = call.int_arg("option").unwrap_or(0) as usize;
        if s.phase != Phase::Planning || k == 0 || k > s.candidates.len() {
            turn.say("Sorry, there's no such option right now.");
            return;
        }
        let task_id = s.candidates[k - 1].task_id.clone();
        let Some(engine) = snap.engine(&task_id) else {
            turn.say("Sorry, that task is no longer available.");
            return;
        };
        let (state, events) = engine.start(self.clock.as_ref());
        turn.say(format!("Great, let's do {}.", engine.graph().title));
        s.phase = Phase::Execution;
        s.task_id = Some(task_id);
        s.exec = Some(state);
        s.candidates.clear();
        for ev in &events {
            turn.event(ev);
        }
    }

    fn engine_turn(&self, s: &mut Session, snap: &CorpusSnapshot, call: &DslCall, turn: &mut Turn) {
        if s.phase != Phase::Execution {
            turn.say(NOT_STARTED);
            return;
        }
        let engine = s.task_id.as_ref().and_then(|t| snap.engine(t)).cloned();
        let (Some(engine), Some(exec)) = (engine, s.exec.as_mut()) else {
            turn.say("Sorry, that task is no longer available.");
            s.enter_planning();
            return;
        };
        match engine.apply(exec, call, self.clock.as_ref()) {
            Ok(events) => events.iter().for_each(|ev| turn.event(ev)),
            Err(err) => turn.say(apology(&err, call)),
        }
    }

    fn qa_turn(&self, s: &mut Session, snap: &CorpusSnapshot, call: &DslCall, text: &str, turn: &mut Turn) {
        let engine = s.task_id.as_ref().and_then(|t| snap.engine(t)).cloned();
        let (Phase::Execution, Some(engine), Some(exec)) = (s.phase, engine, s.exec.as_ref()) else {
            turn.say(if call.function() == "chit_chat" {
                "Tell me what you'd like to do and I'll find a task for you."
            } else {
                "I can answer questions about a task once we start one. What would you like to do?"
            });
            return;
        };
        let step = engine.grounded_context(exec).ok();
        let answer = if call.function() == "chit_chat" {
            qa::chit_chat(step.as_ref(), &mut s.qa)
        } else {
            let category = qa::route(text, step.as_ref());
            let task = qa::task_requirements(engine.graph());
            qa::answer(category, step.as_ref(), &task, &mut s.qa)
        };
        turn.say(answer);
    }

    fn screen(&self, s: &Session, snap: &CorpusSnapshot, now: u64) -> Screen {
        let mut screen = Screen::default();
        let engine = s.task_id.as_ref().and_then(|t| snap.engine(t));
        match (s.phase, engine, s.exec.as_ref()) {
            (Phase::Execution, Some(engine), Some(exec)) => {
                screen.headline = engine.graph().title.clone();
                if let Ok(step) = engine.grounded_context(exec) {
                    screen.step_text = Some(step.summary.clone());
                    screen.step_position = Some((step.position, step.total));
                    screen.requirements = step.requirements.iter().map(|r| r.display()).collect();
                    screen.image = step.image.clone();
                    screen.video = step.video.clone();
                }
                if let Some(c) = &exec.pending_condition {
                    let question = engine.graph().node(c).and_then(|n| n.as_condition()).map(|q| q.question.clone());
                    screen.step_text = question;
                    screen.buttons = vec!["Yes".into(), "No".into()];
                }
                screen.timers = exec.timers.iter().map(|t| TimerView::new(t, now)).collect();
            }
            _ => {
                screen.headline = if s.candidates.is_empty() {
                    "What would you like to do?".into()
                } else {
                    "Pick a task".into()
                };
                screen.options = s
                    .candidates
                    .iter()
                    .enumerate()
                    .map(|(i, r)| OptionCard {
                        option: i + 1,
                        task_id: r.task_id.clone(),
                        title: r.title.clone(),
                        snippet: r.snippet.clone(),
                    })
                    .collect();
            }
        }
        screen
    }
}

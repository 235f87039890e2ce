use std::collections::{HashMap, HashSet};
use std::sync::LazyLock;

use regex::Regex;

use super::{Lexicons, ParseContext, ParseError, ParserBackend, Phase};
use crate::dsl::DslCall;
use crate::text;

/// Lowercase, map curly apostrophes to `'`, replace punctuation with spaces
/// (keeping decimal points between digits) and collapse whitespace.
pub fn normalize(text: &str) -> String {
    let lower = text.to_lowercase().replace(['\u{2019}', '\u{2018}'], "'");
    let chars: Vec<char> = lower.chars().collect();
    let mut out = String::with_capacity(lower.len());
    for (i, &c) in chars.iter().enumerate() {
        let decimal = c == '.'
            && i > 0
            && chars[i - 1].is_ascii_digit()
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
        out.push(if c.is_alphanumeric() || c == '\'' || decimal { c } else { ' ' });
    }
    out.split_whitespace()
        .map(|t| t.trim_matches('\''))
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn tokens(text: &str) -> Vec<String> {
    text.split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect()
}

static TIMER_PATTERNS: LazyLock<Vec<Regex>> = LazyLock::new(|| {
    [
        r"\b(?:set|start)(?: up)?(?: (?:a|an|the|my))? timer for (.+)$",
        r"\b(?:set|start)(?: (?:a|an|the|my))? (.+?) timer\b",
        r"\bremind me in (.+)$",
        r"^timer for (.+)$",
    ]
    .iter()
    .map(|p| Regex::new(p).expect("timer pattern compiles"))
    .collect()
});

/// Words that may precede a question lead without changing it.
const DISCOURSE: &[&str] = &["ok", "okay", "so", "um", "uh", "well", "hey", "oh", "alright", "and"];

enum Piece {
    Word(String),
    Wild,
}

/// The deterministic priority-rule parser.
#[derive(Debug)]
pub struct RuleBackend {
    lex: Lexicons,
    fillers: HashSet<String>,
    interrogatives: HashSet<String>,
    answers: Vec<(Vec<String>, bool)>,
    forward: HashSet<Vec<String>>,
    backward: HashSet<Vec<String>>,
    stop: HashSet<Vec<String>>,
    details: Vec<Vec<String>>,
    step_verbs: HashSet<String>,
    select_markers: HashSet<String>,
    timer_fillers: Vec<String>,
    themes: Vec<(Vec<String>, String)>,
    vague: Vec<Vec<String>>,
    task_requests: Vec<Vec<String>>,
    ordinals: HashMap<String, u64>,
    cardinals: HashMap<String, u64>,
}

impl Default for RuleBackend {
    fn default() -> Self {
        Self::new(Lexicons::default())
    }
}

impl RuleBackend {
    pub fn new(lex: Lexicons) -> Self {
        let phrases = |list: &[String]| -> Vec<Vec<String>> {
            list.iter().map(|p| tokens(&normalize(p))).filter(|t| !t.is_empty()).collect()
        };
        let fillers: HashSet<String> = lex.fillers.iter().map(|f| normalize(f)).collect();
        let commands = |list: &[String]| -> HashSet<Vec<String>> {
            phrases(list)
                .into_iter()
                .map(|p| p.into_iter().filter(|t| !fillers.contains(t)).collect::<Vec<_>>())
                .filter(|p| !p.is_empty())
                .collect()
        };
        let mut answers: Vec<(Vec<String>, bool)> = phrases(&lex.yes)
            .into_iter()
            .map(|p| (p, true))
            .chain(phrases(&lex.no).into_iter().map(|p| (p, false)))
            .collect();
        // Longest phrase first so "it is not" beats "it is".
        answers.sort_by_key(|(p, _)| std::cmp::Reverse(p.len()));
        let vague = lex
            .vague
            .iter()
            .map(|p| p.split_whitespace().map(|w| if w == "*" { w.to_string() } else { normalize(w) }).collect())
            .collect();
        RuleBackend {
            forward: commands(&lex.forward),
            backward: commands(&lex.backward),
            stop: commands(&lex.stop),
            details: phrases(&lex.details),
            interrogatives: lex.interrogatives.iter().map(|w| normalize(w)).collect(),
            step_verbs: lex.step_verbs.iter().map(|w| normalize(w)).collect(),
            select_markers: lex.select_markers.iter().map(|w| normalize(w)).collect(),
            timer_fillers: lex.timer_fillers.iter().map(|w| normalize(w)).collect(),
            themes: lex.themes.iter().map(|t| (tokens(&normalize(t)), t.clone())).collect(),
            vague,
            task_requests: phrases(&lex.task_requests),
            ordinals: lex.ordinals.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            cardinals: lex.cardinals.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            answers,
            fillers,
            lex,
        }
    }

    pub fn lexicons(&self) -> &Lexicons {
        &self.lex
    }

    /// Apply the priority rules to one utterance.
    pub fn parse_utterance(&self, utterance: &str, ctx: &ParseContext) -> Result<DslCall, ParseError> {
        if utterance.trim().is_empty() {
            return Err(ParseError::Empty);
        }
        let norm = normalize(utterance);
        if norm.is_empty() {
            return Ok(DslCall::chit_chat());
        }
        let toks = tokens(&norm);
        let core = self.strip_fillers(&toks);
        let planning = ctx.phase == Phase::Planning;

        if ctx.pending_condition {
            if let Some(value) = self.answer(&toks) {
                return Ok(DslCall::condition(value));
            }
        }
        if let Some(n) = self.step_jump(&toks, &core) {
            return Ok(DslCall::step_select(n));
        }
        if self.forward.contains(&core) {
            return Ok(DslCall::next());
        }
        if self.backward.contains(&core) {
            return Ok(DslCall::previous());
        }
        if let Some(span) = self.timer_span(&norm) {
            return Ok(DslCall::timer(span));
        }
        if self.stop.contains(&core) {
            return Ok(DslCall::stop());
        }
        if planning {
            if let Some(n) = self.selection(&toks, &core) {
                if n >= 1 && n <= ctx.candidate_count as u64 {
                    return Ok(DslCall::select(n));
                }
            }
        }
        if self.details.iter().any(|p| contains(&toks, p)) {
            return Ok(DslCall::chit_chat());
        }
        if self.is_question(&toks) {
            let task_seeking = planning
                && (self.is_vague(&toks) || self.task_requests.iter().any(|p| contains(&toks, p)));
            if !task_seeking {
                return Ok(DslCall::answer_question());
            }
        }
        if planning {
            let vague = self.is_vague(&toks) || text::content_words(&norm).is_empty();
            return Ok(DslCall::search(vague, self.theme(&toks)));
        }
        Ok(DslCall::answer_question())
    }

    fn strip_fillers(&self, toks: &[String]) -> Vec<String> {
        toks.iter().filter(|t| !self.fillers.contains(*t)).cloned().collect()
    }

    fn answer(&self, toks: &[String]) -> Option<bool> {
        let start = toks.iter().position(|t| !DISCOURSE.contains(&t.as_str()))?;
        let rest = &toks[start..];
        self.answers.iter().find(|(p, _)| rest.starts_with(p)).map(|(_, v)| *v)
    }

    fn ordinal(&self, tok: &str) -> Option<u64> {
        self.ordinals.get(tok).copied()
    }

    fn number(&self, tok: &str) -> Option<u64> {
        if tok.bytes().all(|b| b.is_ascii_digit()) {
            return tok.parse().ok();
        }
        self.cardinals.get(tok).or_else(|| self.ordinals.get(tok)).copied()
    }

    fn step_jump(&self, toks: &[String], core: &[String]) -> Option<u64> {
        let mut has_step = false;
        for (i, t) in toks.iter().enumerate() {
            if t == "step" {
                has_step = true;
                if let Some(n) = toks.get(i + 1).and_then(|n| self.number(n)) {
                    return Some(n);
                }
            }
        }
        if !has_step {
            return None;
        }
        let n = toks.iter().find_map(|t| self.ordinal(t))?;
        let verb = toks.iter().any(|t| self.step_verbs.contains(t));
        let bare = core.len() == 2 && core[1] == "step";
        (verb || bare).then_some(n)
    }

    fn timer_span(&self, norm: &str) -> Option<String> {
        let caps = TIMER_PATTERNS.iter().find_map(|re| re.captures(norm))?;
        let mut span = caps.get(1)?.as_str().trim().to_string();
        loop {
            let before = span.len();
            for f in &self.timer_fillers {
                if let Some(s) = span.strip_suffix(f.as_str()) {
                    if s.is_empty() || s.ends_with(' ') {
                        span = s.trim_end().to_string();
                    }
                }
                if let Some(s) = span.strip_prefix(f.as_str()) {
                    if s.starts_with(' ') {
                        span = s.trim_start().to_string();
                    }
                }
            }
            if span.len() == before {
                break;
            }
        }
        (!span.is_empty()).then_some(span)
    }

    fn selection(&self, toks: &[String], core: &[String]) -> Option<u64> {
        if let Some(n) = toks.iter().find_map(|t| self.ordinal(t)) {
            return Some(n);
        }
        for pair in toks.windows(2) {
            if self.select_markers.contains(&pair[0]) {
                if let Some(n) = self.number(&pair[1]) {
                    return Some(n);
                }
            }
        }
        match core {
            [n] => self.number(n),
            [n, one] if one == "one" => self.number(n),
            _ => None,
        }
    }

    fn is_question(&self, toks: &[String]) -> bool {
        let lead = toks.iter().find(|t| !DISCOURSE.contains(&t.as_str()));
        lead.is_some_and(|t| {
            let head = t.split('\'').next().unwrap_or(t);
            self.interrogatives.contains(head)
        })
    }

    pub(crate) fn is_vague(&self, toks: &[String]) -> bool {
        self.vague.iter().any(|pattern| {
            let pieces: Vec<Piece> = pattern
                .iter()
                .map(|w| if w == "*" { Piece::Wild } else { Piece::Word(w.clone()) })
                .collect();
            (0..toks.len()).any(|start| match_at(&pieces, &toks[start..]))
        })
    }

    fn theme(&self, toks: &[String]) -> String {
        (0..toks.len())
            .find_map(|i| {
                self.themes
                    .iter()
                    .find(|(p, _)| !p.is_empty() && toks[i..].starts_with(p))
                    .map(|(_, name)| name.clone())
            })
            .unwrap_or_default()
    }
}

/// Pattern anchored at the start of `toks`; need not consume all of it.
fn match_at(pattern: &[Piece], toks: &[String]) -> bool {
    match pattern.split_first() {
        None => true,
        Some((Piece::Word(w), rest)) => toks.first() == Some(w) && match_at(rest, &toks[1..]),
        Some((Piece::Wild, rest)) => (1..=toks.len()).any(|n| match_at(rest, &toks[n..])),
    }
}

fn contains(toks: &[String], phrase: &[String]) -> bool {
    !phrase.is_empty() && toks.windows(phrase.len()).any(|w| w == phrase)
}

impl ParserBackend for RuleBackend {
    fn parse(&self, utterance: &str, ctx: &ParseContext) -> Result<DslCall, ParseError> {
        self.parse_utterance(utterance, ctx)
    }

    fn name(&self) -> &str {
        "rules"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planning(candidates: usize) -> ParseContext {
        ParseContext { candidate_count: candidates, ..ParseContext::planning() }
    }

    fn execution(step: usize, total: usize) -> ParseContext {
        ParseContext::execution(step, total)
    }

    fn parse(text: &str, ctx: &ParseContext) -> String {
        RuleBackend::default().parse_utterance(text, ctx).unwrap().to_string()
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize("  Can you GO back?! "), "can you go back");
        assert_eq!(normalize("I\u{2019}m done."), "i'm done");
        assert_eq!(normalize("New York-style"), "new york style");
        assert_eq!(normalize("1.5 hours."), "1.5 hours");
        assert_eq!(normalize("'quoted'"), "quoted");
    }

    #[test]
    fn worked_examples() {
        assert_eq!(parse("Can you go back to the first step?", &execution(4, 7)), "step_select(step=1)");
        let pending = ParseContext { pending_condition: true, ..execution(3, 6) };
        assert_eq!(parse("yes", &pending), "condition(value=true)");
        assert_eq!(
            parse("I want to make a New York-style pizza", &planning(0)),
            "search(vague=false, theme=\"\")"
        );
        assert_eq!(parse("I'm hungry", &planning(0)), "search(vague=true, theme=\"\")");
        assert_eq!(parse("the second one", &planning(3)), "select(option=2)");
        assert_eq!(parse("set a timer for 5 minutes", &execution(2, 5)), "timer(span=\"5 minutes\")");
    }

    #[test]
    fn condition_answers_prefer_longest_phrase() {
        let pending = ParseContext { pending_condition: true, ..execution(3, 6) };
        assert_eq!(parse("No, it's dried", &pending), "condition(value=false)");
        assert_eq!(parse("it is not", &pending), "condition(value=false)");
        assert_eq!(parse("it is", &pending), "condition(value=true)");
        assert_eq!(parse("okay yes please", &pending), "condition(value=true)");
        assert_eq!(parse("of course not", &pending), "condition(value=false)");
        // Without a pending question "yes" is not an answer.
        assert_eq!(parse("yes", &execution(3, 6)), "answer_question()");
    }

    #[test]
    fn priority_collisions() {
        let ctx = execution(4, 7);
        // Step jump outranks backward navigation.
        assert_eq!(parse("go back to step 2", &ctx), "step_select(step=2)");
        // Without a number it is plain backward navigation.
        assert_eq!(parse("go back", &ctx), "previous()");
        assert_eq!(parse("last step", &ctx), "previous()");
        // Pending answer outranks everything.
        let pending = ParseContext { pending_condition: true, ..ctx.clone() };
        assert_eq!(parse("no go back to step 2", &pending), "condition(value=false)");
        // Forward navigation outranks question leads.
        assert_eq!(parse("what's next?", &ctx), "next()");
        // Timer outranks stop and questions.
        assert_eq!(parse("can you set a timer for 10 minutes", &ctx), "timer(span=\"10 minutes\")");
        // Detail requests outrank question leads.
        assert_eq!(parse("can you explain that", &ctx), "chit_chat()");
    }

    #[test]
    fn context_sensitivity() {
        let a = parse("the second one", &planning(3));
        let b = parse("the second one", &execution(1, 5));
        assert_eq!(a, "select(option=2)");
        assert_eq!(b, "answer_question()");
        assert_ne!(a, b);
        // Out-of-range selection falls through to search.
        assert_eq!(parse("the fifth one", &planning(3)), "search(vague=false, theme=\"\")");
    }

    #[test]
    fn step_jumps() {
        let ctx = execution(2, 8);
        assert_eq!(parse("step 3", &ctx), "step_select(step=3)");
        assert_eq!(parse("take me to step three", &ctx), "step_select(step=3)");
        assert_eq!(parse("jump to the fifth step", &ctx), "step_select(step=5)");
        assert_eq!(parse("the second step please", &ctx), "step_select(step=2)");
        assert_eq!(parse("what is the second step", &ctx), "answer_question()");
        // Beyond tenth is unsupported as a word and falls through.
        assert_eq!(parse("go to the eleventh step", &ctx), "answer_question()");
    }

    #[test]
    fn timers() {
        let ctx = execution(1, 3);
        assert_eq!(parse("Set a 5 minute timer", &ctx), "timer(span=\"5 minute\")");
        assert_eq!(parse("remind me in 1.5 hours please", &ctx), "timer(span=\"1.5 hours\")");
        assert_eq!(parse("start the timer for ten minutes thanks", &ctx), "timer(span=\"ten minutes\")");
        assert_eq!(parse("timer for 30 seconds", &ctx), "timer(span=\"30 seconds\")");
    }

    #[test]
    fn selections() {
        let ctx = planning(3);
        assert_eq!(parse("2", &ctx), "select(option=2)");
        assert_eq!(parse("option three", &ctx), "select(option=3)");
        assert_eq!(parse("I'll take the 1st one", &ctx), "select(option=1)");
        assert_eq!(parse("three please", &ctx), "select(option=3)");
        assert_eq!(parse("number 3", &ctx), "select(option=3)");
        assert_eq!(parse("0", &ctx), "search(vague=false, theme=\"\")");
    }

    #[test]
    fn planning_searches() {
        let ctx = planning(0);
        assert_eq!(parse("something for thanksgiving", &ctx), "search(vague=true, theme=\"thanksgiving\")");
        assert_eq!(parse("vegetarian lasagna", &ctx), "search(vague=false, theme=\"vegetarian\")");
        assert_eq!(parse("How do I make banana bread?", &ctx), "search(vague=false, theme=\"\")");
        assert_eq!(parse("what should I cook tonight", &ctx), "search(vague=true, theme=\"\")");
        assert_eq!(parse("why is the sky blue", &ctx), "answer_question()");
        assert_eq!(parse("surprise me!", &ctx), "search(vague=true, theme=\"\")");
    }

    #[test]
    fn stop_and_details() {
        let ctx = execution(2, 4);
        assert_eq!(parse("stop the task", &ctx), "stop()");
        assert_eq!(parse("Cancel.", &ctx), "stop()");
        assert_eq!(parse("please tell me more", &ctx), "chit_chat()");
        assert_eq!(parse("how long do I boil it", &ctx), "answer_question()");
        assert_eq!(parse("I'm finished", &ctx), "next()");
    }

    #[test]
    fn empty_input_is_an_error() {
        let err = RuleBackend::default().parse_utterance(" \t ", &planning(0));
        assert!(matches!(err, Err(ParseError::Empty)));
        let punct = RuleBackend::default().parse_utterance(" ?! ", &planning(0)).unwrap();
        assert_eq!(punct, DslCall::chit_chat());
    }
}

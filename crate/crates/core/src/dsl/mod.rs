//! The decision DSL: one parameterized function call per decision.
//!
//! ```text
//! call  := IDENT "(" [arg ("," arg)*] ")"
//! arg   := IDENT "=" value | value
//! value := INT | "true" | "false" | STRING
//! ```
//!
//! Positional arguments are accepted before named ones and bind to the
//! registry's parameter order, so `step_select(1)` and `step_select(step=1)`
//! parse to the same call. Rendering always uses named arguments.

mod lexer;
mod registry;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use lexer::{tokenize, Tok, Token};
pub use registry::{ArgType, DuplicateFunction, Registry, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DslValue {
    Int(u64),
    Bool(bool),
    Str(String),
}

impl DslValue {
    pub fn arg_type(&self) -> ArgType {
        match self {
            DslValue::Int(_) => ArgType::Int,
            DslValue::Bool(_) => ArgType::Bool,
            DslValue::Str(_) => ArgType::Str,
        }
    }
}

impl fmt::Display for DslValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DslValue::Int(n) => write!(f, "{n}"),
            DslValue::Bool(b) => write!(f, "{b}"),
            DslValue::Str(s) => {
                f.write_str("\"")?;
                for ch in s.chars() {
                    match ch {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DslErrorKind {
    Lex,
    Syntax,
    Check,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{} error at byte {offset}: {message}", match .kind {
    DslErrorKind::Lex => "lex",
    DslErrorKind::Syntax => "syntax",
    DslErrorKind::Check => "check",
})]
pub struct DslError {
    pub kind: DslErrorKind,
    pub offset: usize,
    pub message: String,
}

impl DslError {
    pub(crate) fn new(kind: DslErrorKind, offset: usize, message: impl Into<String>) -> Self {
        DslError {
            kind,
            offset,
            message: message.into(),
        }
    }
}

/// A registry-checked call. Arguments are kept in signature order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DslCall {
    function: String,
    args: Vec<(String, DslValue)>,
}

impl DslCall {
    /// Build a call against the standard registry; argument order is free.
    pub fn new(function: &str, args: Vec<(&str, DslValue)>) -> Result<Self, DslError> {
        Self::checked(Registry::standard(), function, args)
    }

    pub fn checked(
        registry: &Registry,
        function: &str,
        args: Vec<(&str, DslValue)>,
    ) -> Result<Self, DslError> {
        let raw = RawCall {
            name: function.to_string(),
            name_offset: 0,
            args: args
                .into_iter()
                .map(|(n, v)| RawArg {
                    name: Some(n.to_string()),
                    value: RawValue::Checked(v),
                    offset: 0,
                })
                .collect(),
        };
        check(registry, raw)
    }

    pub fn function(&self) -> &str {
        &self.function
    }

    pub fn args(&self) -> &[(String, DslValue)] {
        &self.args
    }

    pub fn arg(&self, name: &str) -> Option<&DslValue> {
        self.args.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn int_arg(&self, name: &str) -> Option<u64> {
        match self.arg(name) {
            Some(DslValue::Int(n)) => Some(*n),
            _ => None,
        }
    }

    pub fn bool_arg(&self, name: &str) -> Option<bool> {
        match self.arg(name) {
            Some(DslValue::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn str_arg(&self, name: &str) -> Option<&str> {
        match self.arg(name) {
            Some(DslValue::Str(s)) => Some(s),
            _ => None,
        }
    }

    fn unchecked(function: &str, args: Vec<(&str, DslValue)>) -> Self {
        DslCall {
            function: function.to_string(),
            args: args.into_iter().map(|(n, v)| (n.to_string(), v)).collect(),
        }
    }

    pub fn select(option: u64) -> Self {
        Self::unchecked("select", vec![("option", DslValue::Int(option))])
    }

    pub fn answer_question() -> Self {
        Self::unchecked("answer_question", vec![])
    }

    pub fn search(vague: bool, theme: impl Into<String>) -> Self {
        Self::unchecked(
            "search",
            vec![
                ("vague", DslValue::Bool(vague)),
                ("theme", DslValue::Str(theme.into())),
            ],
        )
    }

    pub fn previous() -> Self {
        Self::unchecked("previous", vec![])
    }

    pub fn next() -> Self {
        Self::unchecked("next", vec![])
    }

    pub fn step_select(step: u64) -> Self {
        Self::unchecked("step_select", vec![("step", DslValue::Int(step))])
    }

    pub fn timer(span: impl Into<String>) -> Self {
        Self::unchecked("timer", vec![("span", DslValue::Str(span.into()))])
    }

    pub fn chit_chat() -> Self {
        Self::unchecked("chit_chat", vec![])
    }

    pub fn condition(value: bool) -> Self {
        Self::unchecked("condition", vec![("value", DslValue::Bool(value))])
    }

    pub fn stop() -> Self {
        Self::unchecked("stop", vec![])
    }
}

impl fmt::Display for DslCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.function)?;
        for (i, (name, value)) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}={value}")?;
        }
        f.write_str(")")
    }
}

impl Serialize for DslCall {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DslCall {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Canonical surface form of a call.
pub fn render(call: &DslCall) -> String {
    call.to_string()
}

/// Parse and check against the standard registry.
pub fn parse(text: &str) -> Result<DslCall, DslError> {
    parse_with(Registry::standard(), text)
}

pub fn parse_with(registry: &Registry, text: &str) -> Result<DslCall, DslError> {
    let tokens = tokenize(text)?;
    let raw = Parser { tokens, pos: 0 }.call()?;
    check(registry, raw)
}

enum RawValue {
    /// Integer literal text, checked for sign and width later.
    Int(String),
    Checked(DslValue),
}

struct RawArg {
    name: Option<String>,
    value: RawValue,
    offset: usize,
}

struct RawCall {
    name: String,
    name_offset: usize,
    args: Vec<RawArg>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, expected: &str) -> DslError {
        let t = self.peek();
        DslError::new(
            DslErrorKind::Syntax,
            t.offset,
            format!("expected {expected}, found {}", t.tok.describe()),
        )
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, DslError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.syntax(what))
        }
    }

    fn call(mut self) -> Result<RawCall, DslError> {
        let (name, name_offset) = match self.peek().tok.clone() {
            Tok::Ident(name) => (name, self.bump().offset),
            _ => return Err(self.syntax("function name")),
        };
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.peek().tok != Tok::RParen {
            loop {
                args.push(self.arg()?);
                if self.peek().tok == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        self.expect(Tok::Eof, "end of input")?;
        Ok(RawCall {
            name,
            name_offset,
            args,
        })
    }

    fn arg(&mut self) -> Result<RawArg, DslError> {
        let offset = self.peek().offset;
        if let (Tok::Ident(name), Tok::Eq) = (self.peek().tok.clone(), self.peek_at(1)) {
            self.bump();
            self.bump();
            let value = self.value()?;
            return Ok(RawArg {
                name: Some(name),
                value,
                offset,
            });
        }
        let value = self.value()?;
        Ok(RawArg {
            name: None,
            value,
            offset,
        })
    }

    fn value(&mut self) -> Result<RawValue, DslError> {
        let value = match &self.peek().tok {
            Tok::Int(text) => RawValue::Int(text.clone()),
            Tok::Str(s) => RawValue::Checked(DslValue::Str(s.clone())),
            Tok::Ident(id) if id == "true" => RawValue::Checked(DslValue::Bool(true)),
            Tok::Ident(id) if id == "false" => RawValue::Checked(DslValue::Bool(false)),
            _ => return Err(self.syntax("a value (integer, true, false or string)")),
        };
        self.bump();
        Ok(value)
    }
}

fn check(registry: &Registry, raw: RawCall) -> Result<DslCall, DslError> {
    let err = |offset: usize, msg: String| DslError::new(DslErrorKind::Check, offset, msg);
    let sig = registry
        .get(&raw.name)
        .ok_or_else(|| err(raw.name_offset, format!("unknown function `{}`", raw.name)))?;

    let mut slots: Vec<Option<DslValue>> = vec![None; sig.params.len()];
    let mut seen_named = false;
    for (position, arg) in raw.args.into_iter().enumerate() {
        let (slot, ty, pname) = match &arg.name {
            Some(name) => {
                seen_named = true;
                let (i, ty) = sig.param(name).ok_or_else(|| {
                    err(arg.offset, format!("`{}` has no parameter `{name}`", sig.name))
                })?;
                (i, ty, name.clone())
            }
            None => {
                if seen_named {
                    return Err(DslError::new(
                        DslErrorKind::Syntax,
                        arg.offset,
                        "positional argument after a named argument",
                    ));
                }
                let (pname, ty) = sig.params.get(position).ok_or_else(|| {
                    err(
                        arg.offset,
                        format!("too many arguments: `{}` takes {}", sig.name, sig.params.len()),
                    )
                })?;
                (position, *ty, pname.clone())
            }
        };
        if slots[slot].is_some() {
            return Err(err(arg.offset, format!("duplicate argument `{pname}`")));
        }
        let value = match arg.value {
            RawValue::Checked(v) => v,
            RawValue::Int(text) => {
                if text.starts_with('-') {
                    return Err(err(
                        arg.offset,
                        format!("`{pname}` must be a non-negative integer, got {text}"),
                    ));
                }
                DslValue::Int(text.parse::<u64>().map_err(|_| {
                    err(arg.offset, format!("integer {text} does not fit in 64 bits"))
                })?)
            }
        };
        if value.arg_type() != ty {
            return Err(err(
                arg.offset,
                format!(
                    "`{pname}` expects {ty}, got {}",
                    value.arg_type()
                ),
            ));
        }
        slots[slot] = Some(value);
    }

    let mut args = Vec::with_capacity(slots.len());
    for ((pname, _), slot) in sig.params.iter().zip(slots) {
        match slot {
            Some(v) => args.push((pname.clone(), v)),
            None => {
                return Err(err(
                    raw.name_offset,
                    format!("missing argument `{pname}` for `{}`", sig.name),
                ))
            }
        }
    }
    Ok(DslCall {
        function: sig.name.clone(),
        args,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_and_positional_step_select() {
        assert_eq!(parse("step_select(step=1)").unwrap(), DslCall::step_select(1));
        assert_eq!(parse("step_select(1)").unwrap(), DslCall::step_select(1));
    }

    #[test]
    fn nullary() {
        assert_eq!(parse("next()").unwrap(), DslCall::next());
        assert_eq!(parse("  previous ( )  ").unwrap(), DslCall::previous());
    }

    #[test]
    fn search_args_any_order() {
        let expected = DslCall::search(true, "thanksgiving");
        assert_eq!(parse(r#"search(vague=true, theme="thanksgiving")"#).unwrap(), expected);
        assert_eq!(parse(r#"search(theme="thanksgiving", vague=true)"#).unwrap(), expected);
        assert_eq!(parse(r#"search(true, "thanksgiving")"#).unwrap(), expected);
        assert_eq!(parse(r#"search(true, theme="thanksgiving")"#).unwrap(), expected);
    }

    #[test]
    fn check_errors() {
        let e = parse("select(option=-1)").unwrap_err();
        assert_eq!(e.kind, DslErrorKind::Check);
        assert_eq!(e.offset, 7);
        let e = parse("dance()").unwrap_err();
        assert_eq!((e.kind, e.offset), (DslErrorKind::Check, 0));
        assert!(e.message.contains("unknown function"));
        for bad in [
            "select()",
            "select(option=1, option=2)",
            "select(1, option=2)",
            "select(option=true)",
            "select(choice=1)",
            "next(1)",
            "select(option=99999999999999999999999)",
        ] {
            assert_eq!(parse(bad).unwrap_err().kind, DslErrorKind::Check, "{bad}");
        }
    }

    #[test]
    fn syntax_errors() {
        for (bad, offset) in [
            ("next", 4),
            ("next(", 5),
            ("next())", 6),
            ("select(option=)", 14),
            ("select(option=1,)", 16),
            ("search(theme=\"x\", true)", 18),
            ("(1)", 0),
        ] {
            let e = parse(bad).unwrap_err();
            assert_eq!((e.kind, e.offset), (DslErrorKind::Syntax, offset), "{bad}: {e}");
        }
    }

    #[test]
    fn render_forms() {
        assert_eq!(render(&DslCall::timer("5 minutes")), r#"timer(span="5 minutes")"#);
        assert_eq!(render(&DslCall::previous()), "previous()");
        let tricky = DslCall::search(false, r#"say "hi" \o/"#);
        let text = render(&tricky);
        assert_eq!(text, r#"search(vague=false, theme="say \"hi\" \\o/")"#);
        assert_eq!(parse(&text).unwrap(), tricky);
    }

    #[test]
    fn constructors_match_registry() {
        for call in [
            DslCall::select(1),
            DslCall::answer_question(),
            DslCall::search(false, ""),
            DslCall::previous(),
            DslCall::next(),
            DslCall::step_select(2),
            DslCall::timer("1 minute"),
            DslCall::chit_chat(),
            DslCall::condition(true),
            DslCall::stop(),
        ] {
            assert_eq!(parse(&render(&call)).unwrap(), call);
        }
    }

    #[test]
    fn new_normalizes_order() {
        let c = DslCall::new(
            "search",
            vec![("theme", DslValue::Str("x".into())), ("vague", DslValue::Bool(false))],
        )
        .unwrap();
        assert_eq!(c.args()[0].0, "vague");
    }

    #[test]
    fn serde_as_text() {
        let json = serde_json::to_string(&DslCall::step_select(3)).unwrap();
        assert_eq!(json, r#""step_select(step=3)""#);
        let back: DslCall = serde_json::from_str(&json).unwrap();
        assert_eq!(back, DslCall::step_select(3));
    }
}

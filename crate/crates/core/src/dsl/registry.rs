use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArgType {
    Int,
    Bool,
    Str,
}

impl fmt::Display for ArgType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArgType::Int => "Int",
            ArgType::Bool => "Bool",
            ArgType::Str => "String",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub name: String,
    pub params: Vec<(String, ArgType)>,
}

impl Signature {
    pub fn new(name: &str, params: &[(&str, ArgType)]) -> Self {
        Signature {
            name: name.to_string(),
            params: params.iter().map(|(n, t)| (n.to_string(), *t)).collect(),
        }
    }

    pub fn param(&self, name: &str) -> Option<(usize, ArgType)> {
        self.params
            .iter()
            .position(|(n, _)| n == name)
            .map(|i| (i, self.params[i].1))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, (n, t)) in self.params.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}={t}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("function `{0}` is already registered")]
pub struct DuplicateFunction(pub String);

/// Closed set of callable functions and their typed signatures.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    functions: Vec<Signature>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    pub fn register(&mut self, sig: Signature) -> Result<(), DuplicateFunction> {
        if self.get(&sig.name).is_some() {
            return Err(DuplicateFunction(sig.name));
        }
        self.functions.push(sig);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Signature> {
        self.functions.iter().find(|s| s.name == name)
    }

    pub fn signatures(&self) -> &[Signature] {
        &self.functions
    }

    /// The shared standard registry.
    pub fn standard() -> &'static Registry {
        &STANDARD
    }
}

static STANDARD: LazyLock<Registry> = LazyLock::new(|| {
    use ArgType::*;
    let mut r = Registry::empty();
    for sig in [
        Signature::new("select", &[("option", Int)]),
        Signature::new("answer_question", &[]),
        Signature::new("search", &[("vague", Bool), ("theme", Str)]),
        Signature::new("previous", &[]),
        Signature::new("next", &[]),
        Signature::new("step_select", &[("step", Int)]),
        Signature::new("timer", &[("span", Str)]),
        Signature::new("chit_chat", &[]),
        Signature::new("condition", &[("value", Bool)]),
        Signature::new("stop", &[]),
    ] {
        r.register(sig).expect("standard registry has unique names");
    }
    r
});

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_contents() {
        let r = Registry::standard();
        assert_eq!(r.signatures().len(), 10);
        assert_eq!(r.get("search").unwrap().to_string(), "search(vague=Bool, theme=String)");
        assert!(r.get("dance").is_none());
    }

    #[test]
    fn duplicates_rejected() {
        let mut r = Registry::empty();
        r.register(Signature::new("next", &[])).unwrap();
        assert_eq!(
            r.register(Signature::new("next", &[("x", ArgType::Int)])),
            Err(DuplicateFunction("next".into()))
        );
    }
}

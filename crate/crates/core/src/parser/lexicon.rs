use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

/// The lexicon file shipped with the crate.
pub const DEFAULT_LEXICONS: &str = include_str!("lexicons.toml");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon file: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid lexicon file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("lexicon `{0}` must not be empty")]
    Empty(&'static str),
}

/// Word lists that drive the rule backend. Phrases are lowercase and
/// punctuation-free apart from apostrophes.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lexicons {
    pub fillers: Vec<String>,
    pub interrogatives: Vec<String>,
    pub yes: Vec<String>,
    pub no: Vec<String>,
    pub forward: Vec<String>,
    pub backward: Vec<String>,
    pub stop: Vec<String>,
    pub details: Vec<String>,
    pub step_verbs: Vec<String>,
    pub select_markers: Vec<String>,
    pub timer_fillers: Vec<String>,
    pub themes: Vec<String>,
    /// `*` matches one or more words.
    pub vague: Vec<String>,
    pub task_requests: Vec<String>,
    pub ordinals: BTreeMap<String, u64>,
    pub cardinals: BTreeMap<String, u64>,
}

impl Lexicons {
    pub fn from_toml_str(text: &str) -> Result<Self, LexiconError> {
        let lex: Lexicons = toml::from_str(text)?;
        lex.check()?;
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    fn check(&self) -> Result<(), LexiconError> {
        let required: [(&'static str, bool); 9] = [
            ("interrogatives", self.interrogatives.is_empty()),
            ("yes", self.yes.is_empty()),
            ("no", self.no.is_empty()),
            ("forward", self.forward.is_empty()),
            ("backward", self.backward.is_empty()),
            ("stop", self.stop.is_empty()),
            ("themes", self.themes.is_empty()),
            ("vague", self.vague.is_empty()),
            ("ordinals", self.ordinals.is_empty()),
        ];
        match required.into_iter().find(|(_, empty)| *empty) {
            Some((name, _)) => Err(LexiconError::Empty(name)),
            None => Ok(()),
        }
    }
}

impl Default for Lexicons {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_LEXICONS).expect("shipped lexicons are valid")
    }
}

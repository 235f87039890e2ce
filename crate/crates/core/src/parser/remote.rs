use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ParseContext, ParseError, ParserBackend, RuleBackend};
use crate::dsl::{self, DslCall};

#[derive(Serialize)]
struct Request<'a> {
    utterance: &'a str,
    context: &'a ParseContext,
}

#[derive(Deserialize)]
struct Reply {
    dsl: String,
}

/// Delegates to an HTTP service that returns DSL text. Any transport error,
/// timeout or invalid DSL falls back to the rule backend.
pub struct RemoteBackend {
    url: String,
    agent: ureq::Agent,
    fallback: RuleBackend,
}

impl RemoteBackend {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        Self::with_fallback(url, timeout, RuleBackend::default())
    }

    pub fn with_fallback(url: impl Into<String>, timeout: Duration, fallback: RuleBackend) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        RemoteBackend { url: url.into(), agent, fallback }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn call(&self, utterance: &str, ctx: &ParseContext) -> Result<DslCall, String> {
        let reply: Reply = self
            .agent
            .post(&self.url)
            .send_json(Request { utterance, context: ctx })
            .map_err(|e| e.to_string())?
            .body_mut()
            .read_json()
            .map_err(|e| e.to_string())?;
        dsl::parse(&reply.dsl).map_err(|e| format!("invalid DSL {:?}: {e}", reply.dsl))
    }
}

impl ParserBackend for RemoteBackend {
    fn parse(&self, utterance: &str, ctx: &ParseContext) -> Result<DslCall, ParseError> {
        if utterance.trim().is_empty() {
            return Err(ParseError::Empty);
        }
        match self.call(utterance, ctx) {
            Ok(call) => Ok(call),
            Err(reason) => {
                tracing::warn!(url = %self.url, %reason, "remote parser failed, using rules");
                self.fallback.parse_utterance(utterance, ctx)
            }
        }
    }

    fn name(&self) -> &str {
        "remote"
    }
}

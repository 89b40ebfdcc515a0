use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Deserialize;
use serde_json::Value;

use super::HarnessError;
use crate::inference::{CompletionRequest, LlmProvider};
use crate::transport::TransportError;

/// Substring rule: a prompt containing `contains` gets `completion`.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ScriptRule {
    pub contains: String,
    pub completion: String,
}

/// Which part of the prompt rules are matched against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchScope {
    #[default]
    Prompt,
    /// Only the text from the last `Q:` on, so demo questions in a few-shot
    /// prompt never trigger a rule.
    LastQuestion,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    rules: Vec<ScriptRule>,
    #[serde(default)]
    default: String,
    #[serde(default)]
    scope: MatchScope,
}

/// Deterministic LLM: the first rule whose substring occurs in the prompt
/// wins; otherwise the default completion.
#[derive(Debug, Clone)]
pub struct ScriptedLlm {
    rules: Vec<ScriptRule>,
    default: String,
    scope: MatchScope,
}

impl ScriptedLlm {
    pub fn new(rules: Vec<ScriptRule>, default: impl Into<String>) -> Self {
        Self {
            rules,
            default: default.into(),
            scope: MatchScope::Prompt,
        }
    }

    pub fn with_scope(mut self, scope: MatchScope) -> Self {
        self.scope = scope;
        self
    }

    /// Fixture forms:
    ///
    /// - `{"substring": "completion", ...}`, rules in file order, empty default;
    /// - `[{"contains": ..., "completion": ...}, ...]`;
    /// - `{"rules": [...], "default": "...", "scope": "prompt" | "last_question"}`.
    pub fn from_json_str(text: &str) -> Result<Self, String> {
        let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        match value {
            Value::Object(ref obj) if obj.contains_key("rules") => {
                let f: RuleFile = serde_json::from_value(value).map_err(|e| e.to_string())?;
                Ok(Self::new(f.rules, f.default).with_scope(f.scope))
            }
            Value::Object(obj) => {
                let rules = obj
                    .into_iter()
                    .map(|(contains, v)| match v {
                        Value::String(completion) => Ok(ScriptRule { contains, completion }),
                        _ => Err(format!("completion for {contains:?} must be a string")),
                    })
                    .collect::<Result<_, _>>()?;
                Ok(Self::new(rules, ""))
            }
            Value::Array(_) => {
                let rules: Vec<ScriptRule> = serde_json::from_value(value).map_err(|e| e.to_string())?;
                Ok(Self::new(rules, ""))
            }
            _ => Err("expected a JSON object or array".to_owned()),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json_str(&text).map_err(|message| HarnessError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn respond(&self, prompt: &str) -> &str {
        let haystack = match self.scope {
            MatchScope::Prompt => prompt,
            MatchScope::LastQuestion => prompt.rfind("Q:").map_or(prompt, |i| &prompt[i..]),
        };
        self.rules
            .iter()
            .find(|r| haystack.contains(&r.contains))
            .map_or(self.default.as_str(), |r| r.completion.as_str())
    }
}

impl LlmProvider for ScriptedLlm {
    fn name(&self) -> &str {
        "scripted"
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, TransportError> {
        Ok(self.respond(&request.prompt).to_owned())
    }
}

/// Wraps a provider and records every prompt it sees.
#[derive(Debug)]
pub struct CountingLlm<L> {
    inner: L,
    prompts: Mutex<Vec<String>>,
}

impl<L: LlmProvider> CountingLlm<L> {
    pub fn new(inner: L) -> Self {
        Self {
            inner,
            prompts: Mutex::new(Vec::new()),
        }
    }

    pub fn calls(&self) -> usize {
        self.prompts.lock().unwrap_or_else(|p| p.into_inner()).len()
    }

    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }

    pub fn reset(&self) {
        self.prompts.lock().unwrap_or_else(|p| p.into_inner()).clear();
    }
}

impl<L: LlmProvider> LlmProvider for CountingLlm<L> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, TransportError> {
        self.prompts
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .push(request.prompt.clone());
        self.inner.complete(request)
    }
}

/// Fails the first `failures` calls with a transport error, then delegates.
#[derive(Debug)]
pub struct FlakyLlm<L> {
    inner: L,
    failures: usize,
    seen: AtomicUsize,
}

impl<L: LlmProvider> FlakyLlm<L> {
    pub fn new(inner: L, failures: usize) -> Self {
        Self {
            inner,
            failures,
            seen: AtomicUsize::new(0),
        }
    }

    pub fn attempts(&self) -> usize {
        self.seen.load(Ordering::SeqCst)
    }
}

impl<L: LlmProvider> LlmProvider for FlakyLlm<L> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, TransportError> {
        let n = self.seen.fetch_add(1, Ordering::SeqCst);
        if n < self.failures {
            return Err(TransportError::Transport(format!("injected failure {}", n + 1)));
        }
        self.inner.complete(request)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_matching_rule_wins() {
        let llm = ScriptedLlm::from_json_str(r#"{"3+3": "The answer is 6.", "3": "three"}"#).unwrap();
        assert_eq!(llm.respond("Q: 3+3?\nA:"), "The answer is 6.");
        assert_eq!(llm.respond("Q: 3?\nA:"), "three");
    }

    #[test]
    fn default_applies_when_nothing_matches() {
        let llm = ScriptedLlm::from_json_str(
            r#"{"rules": [{"contains": "3+3", "completion": "6"}], "default": "I don't know."}"#,
        )
        .unwrap();
        assert_eq!(llm.respond("Q: 2+2?"), "I don't know.");
    }

    #[test]
    fn last_question_scope_ignores_demos() {
        let llm = ScriptedLlm::new(
            vec![ScriptRule {
                contains: "apples".into(),
                completion: "apple rule".into(),
            }],
            "other",
        )
        .with_scope(MatchScope::LastQuestion);
        assert_eq!(llm.respond("Q: apples?\nA: r 1\n\nQ: pears?\nA:"), "other");
        assert_eq!(llm.respond("Q: pears?\nA: r 1\n\nQ: apples?\nA:"), "apple rule");
    }

    #[test]
    fn malformed_fixture_is_rejected() {
        assert!(ScriptedLlm::from_json_str("{\"a\": 1}").is_err());
        assert!(ScriptedLlm::from_json_str("42").is_err());
        assert!(ScriptedLlm::from_json_str("not json").is_err());
    }
}

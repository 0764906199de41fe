//! Pluggable edit backends: deterministic rewrite rules, recorded-edit
//! replay, and a remote chat-completion-style model endpoint.

use crate::syntax::BlockId;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Duration;

/// Literal reply that maps to [`EditResponse::NoChanges`].
pub const NO_CHANGES_SENTINEL: &str = "No changes.";

/// One edit request handed to a backend.
#[derive(Debug, Clone)]
pub struct EditRequest {
    pub prompt: String,
    pub subject: BlockId,
    pub sketch: String,
    /// The subject block's own text within the sketch.
    pub subject_text: String,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EditResponse {
    NewText(String),
    NoChanges,
}

#[derive(Debug, thiserror::Error)]
pub enum EditorError {
    #[error("editor configuration error: {0}")]
    Config(String),
    #[error("editor transport failure: {0}")]
    Transport(String),
    #[error("editor reply had no code block and was not the no-changes sentinel")]
    MalformedReply,
}

/// An edit backend takes a prompt (or structured request) and returns edited
/// fragment text. Backends are invoked strictly sequentially.
pub trait EditBackend {
    fn name(&self) -> &str;
    fn edit(&mut self, request: &EditRequest) -> Result<EditResponse, EditorError>;
}

// ---------------------------------------------------------------------------
// Rule editor
// ---------------------------------------------------------------------------

/// One rewrite rule. `pattern` is a literal substring unless `regex` is set.
/// `requires_prompt` gates the rule on a substring of the full prompt, which
/// lets rules depend on temporal/spatial context being present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteRule {
    pub pattern: String,
    pub replacement: String,
    #[serde(default)]
    pub regex: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requires_prompt: Option<String>,
}

/// Deterministic stand-in for a model: applies all matching rules, in file
/// order, to the fragment in p5.
pub struct RuleEditor {
    rules: Vec<(RewriteRule, Option<regex::Regex>)>,
}

impl RuleEditor {
    pub fn new(rules: Vec<RewriteRule>) -> Result<Self, EditorError> {
        let mut compiled = Vec::new();
        for rule in rules {
            let re = if rule.regex {
                Some(
                    regex::Regex::new(&rule.pattern)
                        .map_err(|e| EditorError::Config(format!("bad rule pattern: {e}")))?,
                )
            } else {
                None
            };
            compiled.push((rule, re));
        }
        Ok(RuleEditor { rules: compiled })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, EditorError> {
        let rules: Vec<RewriteRule> = serde_json::from_value(value.clone())
            .map_err(|e| EditorError::Config(format!("malformed rules file: {e}")))?;
        RuleEditor::new(rules)
    }
}

impl EditBackend for RuleEditor {
    fn name(&self) -> &str {
        "rule"
    }

    fn edit(&mut self, request: &EditRequest) -> Result<EditResponse, EditorError> {
        let mut text = request.sketch.clone();
        for (rule, re) in &self.rules {
            if let Some(needle) = &rule.requires_prompt {
                if !request.prompt.contains(needle) {
                    continue;
                }
            }
            match re {
                Some(re) => {
                    text = re.replace_all(&text, rule.replacement.as_str()).into_owned();
                }
                None => {
                    text = text.replace(&rule.pattern, &rule.replacement);
                }
            }
        }
        if text == request.sketch {
            Ok(EditResponse::NoChanges)
        } else {
            Ok(EditResponse::NewText(text))
        }
    }
}

// ---------------------------------------------------------------------------
// Replay editor
// ---------------------------------------------------------------------------

/// Recorded edits keyed by block selector (`file::qname`), standing in for
/// backends that reproduce known ground-truth edits. A key may carry a list
/// of texts consumed by successive visits of the same block; once exhausted
/// the editor answers no-changes.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReplayFixture {
    pub edits: BTreeMap<String, ReplayEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReplayEntry {
    One(String),
    Many(Vec<String>),
}

impl ReplayEntry {
    fn get(&self, occurrence: usize) -> Option<&str> {
        match self {
            ReplayEntry::One(s) if occurrence == 0 => Some(s),
            ReplayEntry::One(_) => None,
            ReplayEntry::Many(v) => v.get(occurrence).map(|s| s.as_str()),
        }
    }
}

pub struct ReplayEditor {
    fixture: ReplayFixture,
    visits: BTreeMap<String, usize>,
}

impl ReplayEditor {
    pub fn new(fixture: ReplayFixture) -> Self {
        ReplayEditor { fixture, visits: BTreeMap::new() }
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, EditorError> {
        let fixture: ReplayFixture = serde_json::from_value(value.clone())
            .map_err(|e| EditorError::Config(format!("malformed replay file: {e}")))?;
        Ok(ReplayEditor::new(fixture))
    }

    fn key_for(&self, subject: &BlockId) -> Option<String> {
        let with_kind = format!("{}::{}::{}", subject.file, subject.qname, subject.kind);
        let plain = format!("{}::{}", subject.file, subject.qname);
        if self.fixture.edits.contains_key(&with_kind) {
            Some(with_kind)
        } else if self.fixture.edits.contains_key(&plain) {
            Some(plain)
        } else {
            None
        }
    }
}

impl EditBackend for ReplayEditor {
    fn name(&self) -> &str {
        "replay"
    }

    fn edit(&mut self, request: &EditRequest) -> Result<EditResponse, EditorError> {
        let Some(key) = self.key_for(&request.subject) else {
            return Ok(EditResponse::NoChanges);
        };
        let occurrence = *self.visits.get(&key).unwrap_or(&0);
        self.visits.insert(key.clone(), occurrence + 1);
        match self.fixture.edits[&key].get(occurrence) {
            Some(text) => {
                // The recorded text replaces the subject block within the
                // sketch; siblings and folds stay untouched.
                if request.sketch == request.subject_text {
                    Ok(EditResponse::NewText(text.to_string()))
                } else if request.sketch.contains(&request.subject_text) {
                    Ok(EditResponse::NewText(
                        request.sketch.replacen(&request.subject_text, text, 1),
                    ))
                } else {
                    Ok(EditResponse::NoChanges)
                }
            }
            None => Ok(EditResponse::NoChanges),
        }
    }
}

// ---------------------------------------------------------------------------
// Remote editor
// ---------------------------------------------------------------------------

/// Configuration for the remote chat-completion-style backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key; never the key
    /// itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
}

fn default_timeout() -> u64 {
    30
}

fn default_retries() -> u32 {
    2
}

pub struct RemoteEditor {
    config: RemoteConfig,
    agent: ureq::Agent,
}

impl RemoteEditor {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build();
        RemoteEditor { config, agent }
    }

    fn send(&self, prompt: &str) -> Result<String, EditorError> {
        let body = serde_json::json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut request = self.agent.post(&self.config.endpoint);
        if let Some(env_name) = &self.config.api_key_env {
            let key = std::env::var(env_name).map_err(|_| {
                EditorError::Config(format!("api key environment variable {env_name} not set"))
            })?;
            request = request.set("Authorization", &format!("Bearer {key}"));
        }
        let mut delay = Duration::from_millis(100);
        let mut last_err = String::new();
        for _attempt in 0..=self.config.retries {
            match request.clone().send_json(body.clone()) {
                Ok(resp) => {
                    let value: serde_json::Value = resp
                        .into_json()
                        .map_err(|e| EditorError::Transport(format!("bad response body: {e}")))?;
                    let content = value
                        .pointer("/choices/0/message/content")
                        .and_then(|c| c.as_str())
                        .ok_or_else(|| {
                            EditorError::Transport("reply missing message content".to_string())
                        })?;
                    return Ok(content.to_string());
                }
                Err(ureq::Error::Status(code, _)) if (500..600).contains(&code) => {
                    last_err = format!("server status {code}");
                }
                Err(ureq::Error::Status(code, _)) => {
                    return Err(EditorError::Transport(format!("server status {code}")));
                }
                Err(e) => {
                    last_err = e.to_string();
                }
            }
            std::thread::sleep(delay);
            delay *= 2;
        }
        Err(EditorError::Transport(format!(
            "request failed after {} retries: {last_err}",
            self.config.retries
        )))
    }
}

/// First fenced code block of a model reply.
pub fn extract_code_block(reply: &str) -> Option<String> {
    let start = reply.find("```")?;
    let after = &reply[start + 3..];
    // skip a language tag on the fence line
    let body_start = after.find('\n')? + 1;
    let body = &after[body_start..];
    let end = body.find("```")?;
    Some(body[..end].trim_end_matches('\n').to_string())
}

impl EditBackend for RemoteEditor {
    fn name(&self) -> &str {
        "remote"
    }

    fn edit(&mut self, request: &EditRequest) -> Result<EditResponse, EditorError> {
        let reply = self.send(&request.prompt)?;
        let trimmed = reply.trim();
        if trimmed == NO_CHANGES_SENTINEL {
            return Ok(EditResponse::NoChanges);
        }
        match extract_code_block(trimmed) {
            Some(code) => Ok(EditResponse::NewText(code)),
            None => Err(EditorError::MalformedReply),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::BlockKind;

    fn request(sketch: &str, prompt: &str) -> EditRequest {
        EditRequest {
            prompt: prompt.to_string(),
            subject: BlockId::new("m.py", "f", BlockKind::Method),
            sketch: sketch.to_string(),
            subject_text: sketch.to_string(),
            step: 0,
        }
    }

    #[test]
    fn rule_editor_applies_rules_in_order() {
        let mut ed = RuleEditor::new(vec![
            RewriteRule {
                pattern: "alpha".into(),
                replacement: "beta".into(),
                regex: false,
                requires_prompt: None,
            },
            RewriteRule {
                pattern: "beta".into(),
                replacement: "gamma".into(),
                regex: false,
                requires_prompt: None,
            },
        ])
        .unwrap();
        let resp = ed.edit(&request("x = alpha", "p")).unwrap();
        assert_eq!(resp, EditResponse::NewText("x = gamma".into()));
    }

    #[test]
    fn rule_editor_no_match_is_no_changes() {
        let mut ed = RuleEditor::new(vec![RewriteRule {
            pattern: "missing".into(),
            replacement: "x".into(),
            regex: false,
            requires_prompt: None,
        }])
        .unwrap();
        assert_eq!(ed.edit(&request("y = 1", "p")).unwrap(), EditResponse::NoChanges);
    }

    #[test]
    fn rule_editor_regex_with_captures() {
        let mut ed = RuleEditor::new(vec![RewriteRule {
            pattern: r"create_pair\(([a-z]+), ([a-z]+)\)".into(),
            replacement: "create_complex($1, $2)".into(),
            regex: true,
            requires_prompt: None,
        }])
        .unwrap();
        let resp = ed.edit(&request("c = create_pair(a, b)", "p")).unwrap();
        assert_eq!(resp, EditResponse::NewText("c = create_complex(a, b)".into()));
    }

    #[test]
    fn rule_editor_prompt_gate() {
        let mut ed = RuleEditor::new(vec![RewriteRule {
            pattern: "old".into(),
            replacement: "new".into(),
            regex: false,
            requires_prompt: Some("is related to".into()),
        }])
        .unwrap();
        assert_eq!(ed.edit(&request("old", "no context")).unwrap(), EditResponse::NoChanges);
        assert_eq!(
            ed.edit(&request("old", "f is related to g by CalledBy")).unwrap(),
            EditResponse::NewText("new".into())
        );
    }

    #[test]
    fn replay_editor_consumes_occurrences_then_stops() {
        let fixture: ReplayFixture = serde_json::from_value(serde_json::json!({
            "edits": { "m.py::f": ["first", "second"] }
        }))
        .unwrap();
        let mut ed = ReplayEditor::new(fixture);
        assert_eq!(ed.edit(&request("s", "p")).unwrap(), EditResponse::NewText("first".into()));
        assert_eq!(ed.edit(&request("s", "p")).unwrap(), EditResponse::NewText("second".into()));
        assert_eq!(ed.edit(&request("s", "p")).unwrap(), EditResponse::NoChanges);
    }

    #[test]
    fn replay_editor_unrecorded_block_is_no_changes() {
        let mut ed = ReplayEditor::new(ReplayFixture::default());
        assert_eq!(ed.edit(&request("s", "p")).unwrap(), EditResponse::NoChanges);
    }

    #[test]
    fn code_block_extraction() {
        let reply = "Here you go:\n```python\ndef f():\n    return 1\n```\nthanks";
        assert_eq!(extract_code_block(reply).unwrap(), "def f():\n    return 1");
        assert_eq!(extract_code_block("no fences"), None);
    }
}

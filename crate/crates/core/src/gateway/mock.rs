//! Scripted offline backend.
//!
//! A script is JSONL, one [`MockEntry`] per line. For each request the first
//! entry whose matcher accepts the prompt and whose `times` budget is not used
//! up answers it. Entries without a matcher accept every prompt.

use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{status_error, ApiKey, AttemptError, ChatBackend, ChatRequest, FinishReason, GatewayError, RawCompletion};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_contains: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_regex: Option<String>,
    #[serde(default)]
    pub response: String,
    #[serde(default)]
    pub delay_ms: u64,
    /// How many requests this entry may answer; unlimited when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<u32>,
    /// Reported completion tokens; the gateway estimates when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finish_reason: Option<FinishReason>,
    /// `"transport"` simulates a dropped connection, `"http:<status>"` an error status.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl MockEntry {
    pub fn reply(response: impl Into<String>) -> Self {
        Self {
            response: response.into(),
            ..Self::default()
        }
    }

    pub fn when_contains(needle: impl Into<String>, response: impl Into<String>) -> Self {
        Self {
            prompt_contains: Some(needle.into()),
            response: response.into(),
            ..Self::default()
        }
    }
}

struct Compiled {
    entry: MockEntry,
    regex: Option<Regex>,
}

pub struct MockBackend {
    entries: Vec<Compiled>,
    used: Mutex<Vec<u32>>,
}

impl MockBackend {
    pub fn new(entries: Vec<MockEntry>) -> Result<Self, GatewayError> {
        let entries = entries
            .into_iter()
            .enumerate()
            .map(|(i, entry)| {
                let regex = entry
                    .prompt_regex
                    .as_deref()
                    .map(Regex::new)
                    .transpose()
                    .map_err(|e| GatewayError::Mock(format!("entry {}: bad prompt_regex: {e}", i + 1)))?;
                if let Some(err) = &entry.error {
                    parse_error_spec(err).map_err(|m| GatewayError::Mock(format!("entry {}: {m}", i + 1)))?;
                }
                Ok(Compiled { entry, regex })
            })
            .collect::<Result<Vec<_>, GatewayError>>()?;
        let used = Mutex::new(vec![0; entries.len()]);
        Ok(Self { entries, used })
    }

    pub fn from_file(path: &Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GatewayError::Mock(format!("{}: {e}", path.display())))?;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: MockEntry = serde_json::from_str(line)
                .map_err(|e| GatewayError::Mock(format!("{}:{}: {e}", path.display(), i + 1)))?;
            entries.push(entry);
        }
        Self::new(entries)
    }

    pub fn write_script(path: &Path, entries: &[MockEntry]) -> std::io::Result<()> {
        let mut text = String::new();
        for entry in entries {
            text.push_str(&serde_json::to_string(entry).expect("mock entry serializes"));
            text.push('\n');
        }
        std::fs::write(path, text)
    }

    fn pick(&self, prompt: &str) -> Option<MockEntry> {
        let mut used = self.used.lock().expect("mock state poisoned");
        for (i, compiled) in self.entries.iter().enumerate() {
            let entry = &compiled.entry;
            if entry.times.is_some_and(|t| used[i] >= t) {
                continue;
            }
            let contains = entry.prompt_contains.as_deref().is_none_or(|n| prompt.contains(n));
            let regex = compiled.regex.as_ref().is_none_or(|r| r.is_match(prompt));
            if contains && regex {
                used[i] += 1;
                return Some(entry.clone());
            }
        }
        None
    }
}

enum ErrorSpec {
    Transport,
    Status(u16),
}

fn parse_error_spec(spec: &str) -> Result<ErrorSpec, String> {
    if spec == "transport" {
        return Ok(ErrorSpec::Transport);
    }
    spec.strip_prefix("http:")
        .and_then(|s| s.parse::<u16>().ok())
        .filter(|s| (100..600).contains(s))
        .map(ErrorSpec::Status)
        .ok_or_else(|| format!("unknown error spec {spec:?}"))
}

impl ChatBackend for MockBackend {
    fn complete(&self, request: &ChatRequest, _api_key: &ApiKey, timeout: Duration) -> Result<RawCompletion, AttemptError> {
        let entry = self.pick(&request.prompt).ok_or_else(|| {
            let head: String = request.prompt.chars().take(80).collect();
            AttemptError::Fatal(GatewayError::Mock(format!("no script entry matches prompt starting {head:?}")))
        })?;
        let delay = Duration::from_millis(entry.delay_ms);
        if delay > timeout {
            std::thread::sleep(timeout);
            return Err(AttemptError::Transient(format!("timed out after {:.3}s", timeout.as_secs_f64())));
        }
        std::thread::sleep(delay);
        match entry.error.as_deref().map(parse_error_spec) {
            Some(Ok(ErrorSpec::Transport)) => Err(AttemptError::Transient("connection closed by mock".into())),
            Some(Ok(ErrorSpec::Status(status))) => Err(status_error(status, &entry.response)),
            Some(Err(message)) => Err(AttemptError::Fatal(GatewayError::Mock(message))),
            None => Ok(RawCompletion {
                text: entry.response,
                usage_tokens: entry.tokens,
                finish_reason: entry.finish_reason.unwrap_or(FinishReason::Stop),
            }),
        }
    }
}

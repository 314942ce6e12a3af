use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{status_error, ApiKey, AttemptError, ChatBackend, ChatRequest, FinishReason, GatewayError, RawCompletion};

/// Blocking client for OpenAI-style chat-completion endpoints.
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    endpoint: String,
}

impl HttpBackend {
    pub fn new(base_url: &str) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| GatewayError::Config(format!("http client: {e}")))?;
        let base = base_url.trim_end_matches('/');
        let endpoint = if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        };
        Ok(Self { client, endpoint })
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
    /// Separate reasoning channel some reasoning-model servers return.
    #[serde(default)]
    reasoning_content: Option<String>,
}

#[derive(Deserialize)]
struct Usage {
    #[serde(default)]
    completion_tokens: Option<u64>,
}

/// Decodes a chat-completion response body.
pub(crate) fn decode_response(body: &str) -> Result<RawCompletion, GatewayError> {
    let response: ChatResponse = serde_json::from_str(body)
        .map_err(|e| GatewayError::Protocol(format!("{e}; body starts {:?}", excerpt(body))))?;
    let choice = response
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| GatewayError::Protocol("response has no choices".into()))?;
    let content = choice.message.content.unwrap_or_default();
    let text = match choice.message.reasoning_content.filter(|r| !r.trim().is_empty()) {
        Some(reasoning) => format!("<think>\n{}\n</think>\n{content}", reasoning.trim()),
        None => content,
    };
    let finish_reason = match choice.finish_reason.as_deref() {
        Some("length") => FinishReason::Length,
        Some("stop") | Some("eos") | None => FinishReason::Stop,
        Some(_) => FinishReason::Error,
    };
    Ok(RawCompletion {
        text,
        usage_tokens: response.usage.and_then(|u| u.completion_tokens),
        finish_reason,
    })
}

fn excerpt(body: &str) -> String {
    body.chars().take(200).collect()
}

impl ChatBackend for HttpBackend {
    fn complete(&self, request: &ChatRequest, api_key: &ApiKey, timeout: Duration) -> Result<RawCompletion, AttemptError> {
        let body = json!({
            "model": request.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "max_tokens": request.max_new_tokens,
            "temperature": request.temperature,
            "stream": false,
        });
        let mut builder = self.client.post(&self.endpoint).timeout(timeout).json(&body);
        if !api_key.is_empty() {
            builder = builder.bearer_auth(api_key.expose());
        }
        let response = builder.send().map_err(|e| AttemptError::Transient(error_chain(&e)))?;
        let status = response.status();
        let text = response.text().map_err(|e| AttemptError::Transient(error_chain(&e)))?;
        if !status.is_success() {
            return Err(status_error(status.as_u16(), &text));
        }
        decode_response(&text).map_err(AttemptError::Fatal)
    }
}

fn error_chain(err: &dyn std::error::Error) -> String {
    let mut message = err.to_string();
    let mut source = err.source();
    while let Some(inner) = source {
        message.push_str(": ");
        message.push_str(&inner.to_string());
        source = inner.source();
    }
    message
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_usage_and_reasoning_channel() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"```python\nx=1\n```","reasoning_content":"think"},"finish_reason":"length"}],"usage":{"prompt_tokens":3,"completion_tokens":42}}"#;
        let raw = decode_response(body).unwrap();
        assert_eq!(raw.usage_tokens, Some(42));
        assert_eq!(raw.finish_reason, FinishReason::Length);
        assert!(raw.text.starts_with("<think>\nthink\n</think>\n```python"));
    }

    #[test]
    fn rejects_bodies_without_choices() {
        assert!(matches!(decode_response(r#"{"choices":[]}"#), Err(GatewayError::Protocol(_))));
        assert!(matches!(decode_response("<html>"), Err(GatewayError::Protocol(_))));
    }

    #[test]
    fn endpoint_path() {
        assert_eq!(HttpBackend::new("http://h/v1/").unwrap().endpoint(), "http://h/v1/chat/completions");
        assert_eq!(
            HttpBackend::new("http://h/v1/chat/completions").unwrap().endpoint(),
            "http://h/v1/chat/completions"
        );
    }
}

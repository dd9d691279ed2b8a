//! Generation backends: the provider-agnostic HTTP endpoint client and the
//! deterministic scripted backend used in tests and CI.

use serde::{Deserialize, Serialize};
use std::time::Duration;
use thiserror::Error;

/// Decoding settings sent with every generation request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecodingParams {
    pub temperature: f64,
    pub max_new_tokens: u32,
    pub stop_sequences: Vec<String>,
}

impl Default for DecodingParams {
    fn default() -> Self {
        DecodingParams {
            temperature: 1.0,
            max_new_tokens: 1024,
            stop_sequences: Vec::new(),
        }
    }
}

/// One generation result; `usage_tokens` is the endpoint-reported total when
/// available, used for context accounting instead of the character proxy.
#[derive(Debug, Clone)]
pub struct Completion {
    pub text: String,
    pub usage_tokens: Option<u64>,
}

#[derive(Debug, Error)]
pub enum EndpointError {
    #[error("endpoint unreachable after {attempts} attempts: {message}")]
    Unreachable { attempts: u32, message: String },
    #[error("endpoint returned an unusable response: {0}")]
    BadResponse(String),
}

/// Anything that can complete a prompt. Implementations must be safe to call
/// from concurrent rollout workers.
pub trait CompletionBackend: Send + Sync {
    fn complete(&self, prompt: &str, params: &DecodingParams) -> Result<Completion, EndpointError>;
}

/// Generation endpoint configuration: base address, decoding defaults,
/// optional auth token, request timeout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HttpEndpoint {
    pub base_url: String,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub auth_token: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
}

fn default_timeout_secs() -> u64 {
    120
}

fn default_retries() -> u32 {
    3
}

impl HttpEndpoint {
    pub fn new(base_url: impl Into<String>) -> Self {
        HttpEndpoint {
            base_url: base_url.into(),
            model: None,
            auth_token: None,
            timeout_secs: default_timeout_secs(),
            max_retries: default_retries(),
        }
    }

    /// Reads `<PREFIX>_ENDPOINT`, `<PREFIX>_AUTH_TOKEN`, and
    /// `<PREFIX>_TIMEOUT_SECS` from the environment.
    pub fn from_env(prefix: &str) -> Option<Self> {
        let base_url = std::env::var(format!("{prefix}_ENDPOINT")).ok()?;
        let mut endpoint = HttpEndpoint::new(base_url);
        endpoint.auth_token = std::env::var(format!("{prefix}_AUTH_TOKEN")).ok();
        if let Ok(t) = std::env::var(format!("{prefix}_TIMEOUT_SECS")) {
            if let Ok(secs) = t.parse() {
                endpoint.timeout_secs = secs;
            }
        }
        Some(endpoint)
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    model: &'a Option<String>,
    prompt: &'a str,
    temperature: f64,
    max_new_tokens: u32,
    stop: &'a [String],
}

#[derive(Deserialize)]
struct WireUsage {
    #[serde(default)]
    total_tokens: Option<u64>,
}

#[derive(Deserialize)]
struct WireResponse {
    text: String,
    #[serde(default)]
    usage: Option<WireUsage>,
}

impl CompletionBackend for HttpEndpoint {
    fn complete(&self, prompt: &str, params: &DecodingParams) -> Result<Completion, EndpointError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(self.timeout_secs))
            .build()
            .map_err(|e| EndpointError::BadResponse(e.to_string()))?;
        let mut last_error = String::new();
        for attempt in 0..self.max_retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(200 * u64::from(attempt)));
            }
            let mut request = client.post(&self.base_url).json(&WireRequest {
                model: &self.model,
                prompt,
                temperature: params.temperature,
                max_new_tokens: params.max_new_tokens,
                stop: &params.stop_sequences,
            });
            if let Some(token) = &self.auth_token {
                request = request.bearer_auth(token);
            }
            match request.send() {
                Ok(response) if response.status().is_success() => {
                    let body: WireResponse = response
                        .json()
                        .map_err(|e| EndpointError::BadResponse(e.to_string()))?;
                    return Ok(Completion {
                        text: body.text,
                        usage_tokens: body.usage.and_then(|u| u.total_tokens),
                    });
                }
                Ok(response) => {
                    last_error = format!("status {}", response.status());
                }
                Err(e) => {
                    last_error = e.to_string();
                }
            }
        }
        Err(EndpointError::Unreachable {
            attempts: self.max_retries,
            message: last_error,
        })
    }
}

/// Trigger over the full prompt-plus-generation-so-far text.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    Prefix(String),
    Contains(String),
    Regex(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptRule {
    pub trigger: Trigger,
    pub response: String,
}

/// Deterministic test double: first matching rule wins, otherwise the
/// default response.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptedBackend {
    pub rules: Vec<ScriptRule>,
    #[serde(default)]
    pub default_response: String,
    /// Rules matching this substring fail the request instead of answering;
    /// used to script endpoint failures inside a group.
    #[serde(default)]
    pub fail_on: Option<String>,
}

impl ScriptedBackend {
    pub fn new(rules: Vec<ScriptRule>, default_response: impl Into<String>) -> Self {
        ScriptedBackend {
            rules,
            default_response: default_response.into(),
            fail_on: None,
        }
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    fn response_for(&self, text: &str) -> Option<&str> {
        for rule in &self.rules {
            let matched = match &rule.trigger {
                Trigger::Prefix(p) => text.starts_with(p.as_str()),
                Trigger::Contains(s) => text.contains(s.as_str()),
                Trigger::Regex(pattern) => regex::Regex::new(pattern)
                    .map(|re| re.is_match(text))
                    .unwrap_or(false),
            };
            if matched {
                return Some(&rule.response);
            }
        }
        None
    }
}

/// Returns the first matching rule's response truncated at the earliest stop
/// sequence. The stop sequence itself is kept: pause detection needs the
/// closing tag.
pub fn scripted_completion(backend: &ScriptedBackend, text: &str, stops: &[String]) -> String {
    let response = backend.response_for(text).unwrap_or(&backend.default_response);
    truncate_at_stop(response, stops)
}

fn truncate_at_stop(response: &str, stops: &[String]) -> String {
    let earliest = stops
        .iter()
        .filter_map(|s| response.find(s.as_str()).map(|pos| pos + s.len()))
        .min();
    match earliest {
        Some(end) => response[..end].to_string(),
        None => response.to_string(),
    }
}

impl CompletionBackend for ScriptedBackend {
    fn complete(&self, prompt: &str, params: &DecodingParams) -> Result<Completion, EndpointError> {
        if let Some(marker) = &self.fail_on {
            if prompt.contains(marker.as_str()) {
                return Err(EndpointError::Unreachable {
                    attempts: 1,
                    message: "scripted failure".to_string(),
                });
            }
        }
        Ok(Completion {
            text: scripted_completion(self, prompt, &params.stop_sequences),
            usage_tokens: None,
        })
    }
}

/// Re-appends a stripped stop tag. Some servers include the stop sequence in
/// the returned text, others strip it; pause detection requires the closing
/// tag, so a dangling `<kind>` whose close is a stop sequence gets its close
/// appended.
pub fn ensure_stop_suffix(text: &str, stops: &[String]) -> String {
    for stop in stops {
        if text.ends_with(stop.as_str()) {
            return text.to_string();
        }
    }
    // Find the stop whose opening counterpart dangles closest to the end.
    let mut best: Option<(usize, &String)> = None;
    for stop in stops {
        let Some(name) = stop.strip_prefix("</").and_then(|s| s.strip_suffix('>')) else {
            continue;
        };
        let open = format!("<{name}>");
        let last_open = text.rfind(&open);
        let last_close = text.rfind(stop.as_str());
        if let Some(open_pos) = last_open {
            let dangling = match last_close {
                Some(close_pos) => close_pos < open_pos,
                None => true,
            };
            if dangling && best.map_or(true, |(pos, _)| open_pos > pos) {
                best = Some((open_pos, stop));
            }
        }
    }
    match best {
        Some((_, stop)) => format!("{text}{stop}"),
        None => text.to_string(),
    }
}

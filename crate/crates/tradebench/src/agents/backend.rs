//! Chat-completion backend contract and the HTTP client implementation.
//!
//! The wire shape is the common chat-completions JSON: POST to the configured
//! endpoint with `{model, temperature, messages: [{role, content}, ..]}` and
//! read `choices[0].message.content`. Credentials come from the environment
//! variable named in the config. Transient failures (transport errors, 429,
//! 5xx) are retried with bounded exponential backoff; the client enforces a
//! global concurrent-request cap and a per-endpoint minimum request interval,
//! so it is safe to share across parallel runs.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Condvar, Mutex, OnceLock};
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend config {path}: {reason}")]
    Config { path: String, reason: String },
    #[error("missing API key: environment variable `{0}` is not set")]
    MissingApiKey(String),
    #[error("request failed after {attempts} attempt(s): {reason}")]
    Exhausted { attempts: u32, reason: String },
    #[error("unexpected response shape: {0}")]
    BadResponse(String),
    #[error("no fixture response for prompt hash {0}")]
    MissingFixture(String),
    #[error("scripted responses exhausted at trading request {0}")]
    ScriptExhausted(usize),
    #[error("mock fixture {path}:{line}: {reason}")]
    BadFixture {
        path: String,
        line: usize,
        reason: String,
    },
}

/// What a request is for; recorded in the audit log and used by scripted
/// mocks to tell trading prompts apart from analyst prompts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    MarketReport,
    NewsReport,
    Trading,
    Reflection,
}

#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub kind: RequestKind,
    pub system: String,
    pub user: String,
}

#[derive(Debug, Clone)]
pub struct ChatResponse {
    pub text: String,
    pub model_id: String,
    /// Wall-clock latency; mocks report zero so audit logs stay byte-stable.
    pub latency: Duration,
}

/// A chat-completion backend. Implementations must be safe for concurrent
/// use across independent runs.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError>;

    /// Identifier recorded in artifacts.
    fn model_id(&self) -> String;
}

/// Hash identifying a prompt for fixture lookup: SHA-256 over
/// `system + "\0" + user`, hex-encoded.
pub fn prompt_sha256(system: &str, user: &str) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(system.as_bytes());
    hasher.update(b"\0");
    hasher.update(user.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// One logged request/response exchange.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelExchange {
    pub date: NaiveDate,
    pub kind: RequestKind,
    pub system_prompt: String,
    pub user_prompt: String,
    pub response: String,
    pub model_id: String,
    pub latency_ms: u64,
    pub retries: u32,
}

fn default_temperature() -> f64 {
    0.0
}

fn default_timeout_secs() -> u64 {
    60
}

fn default_max_retries() -> u32 {
    3
}

fn default_backoff_initial_ms() -> u64 {
    500
}

fn default_backoff_multiplier() -> f64 {
    2.0
}

fn default_backoff_max_ms() -> u64 {
    8_000
}

fn default_min_request_interval_ms() -> u64 {
    0
}

fn default_max_concurrent_requests() -> usize {
    4
}

fn default_api_key_env() -> String {
    "TRADEBENCH_API_KEY".to_string()
}

/// Backend configuration, loadable from TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendConfig {
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_initial_ms")]
    pub backoff_initial_ms: u64,
    #[serde(default = "default_backoff_multiplier")]
    pub backoff_multiplier: f64,
    #[serde(default = "default_backoff_max_ms")]
    pub backoff_max_ms: u64,
    /// Minimum spacing between request starts against this endpoint.
    #[serde(default = "default_min_request_interval_ms")]
    pub min_request_interval_ms: u64,
    /// Global cap on in-flight requests across all runs in this process.
    #[serde(default = "default_max_concurrent_requests")]
    pub max_concurrent_requests: usize,
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
}

impl BackendConfig {
    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path).map_err(|e| BackendError::Config {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| BackendError::Config {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }
}

/// Exponential backoff schedule capped at `max_ms`. Attempt 0 has no delay.
pub fn backoff_delay(config: &BackendConfig, attempt: u32) -> Duration {
    if attempt == 0 {
        return Duration::ZERO;
    }
    let raw = config.backoff_initial_ms as f64 * config.backoff_multiplier.powi(attempt as i32 - 1);
    Duration::from_millis(raw.min(config.backoff_max_ms as f64) as u64)
}

/// Counting semaphore for the global in-flight request cap.
struct Semaphore {
    state: Mutex<usize>,
    available: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Semaphore {
            state: Mutex::new(permits),
            available: Condvar::new(),
        }
    }

    fn acquire(&self) {
        let mut permits = self.state.lock().unwrap();
        while *permits == 0 {
            permits = self.available.wait(permits).unwrap();
        }
        *permits -= 1;
    }

    fn release(&self) {
        *self.state.lock().unwrap() += 1;
        self.available.notify_one();
    }
}

/// Per-endpoint rate limiter state: earliest instant the next request may start.
static ENDPOINT_GATES: OnceLock<Mutex<HashMap<String, Instant>>> = OnceLock::new();

fn rate_limit_wait(endpoint: &str, min_interval: Duration) {
    if min_interval.is_zero() {
        return;
    }
    let gates = ENDPOINT_GATES.get_or_init(|| Mutex::new(HashMap::new()));
    let wait_until;
    {
        let mut gates = gates.lock().unwrap();
        let now = Instant::now();
        let gate = gates.entry(endpoint.to_string()).or_insert(now);
        wait_until = (*gate).max(now);
        *gate = wait_until + min_interval;
    }
    let now = Instant::now();
    if wait_until > now {
        std::thread::sleep(wait_until - now);
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    temperature: f64,
    messages: Vec<WireMessage<'a>>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireResponseMessage,
}

#[derive(Deserialize)]
struct WireResponseMessage {
    content: String,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    model: Option<String>,
}

/// Blocking HTTP chat-completion client.
pub struct HttpBackend {
    config: BackendConfig,
    api_key: String,
    client: reqwest::blocking::Client,
    semaphore: Semaphore,
}

impl HttpBackend {
    pub fn new(config: BackendConfig) -> Result<Self, BackendError> {
        let api_key = std::env::var(&config.api_key_env)
            .map_err(|_| BackendError::MissingApiKey(config.api_key_env.clone()))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::Config {
                path: "<client>".into(),
                reason: e.to_string(),
            })?;
        let permits = config.max_concurrent_requests.max(1);
        Ok(HttpBackend {
            config,
            api_key,
            client,
            semaphore: Semaphore::new(permits),
        })
    }

    fn attempt(&self, request: &ChatRequest) -> Result<ChatResponse, String> {
        rate_limit_wait(
            &self.config.endpoint,
            Duration::from_millis(self.config.min_request_interval_ms),
        );
        let body = WireRequest {
            model: &self.config.model,
            temperature: self.config.temperature,
            messages: vec![
                WireMessage {
                    role: "system",
                    content: &request.system,
                },
                WireMessage {
                    role: "user",
                    content: &request.user,
                },
            ],
        };
        let response = self
            .client
            .post(&self.config.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| e.to_string())?;
        let status = response.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(format!("retriable status {status}"));
        }
        if !status.is_success() {
            // Client errors are not retried; surface immediately via Err and
            // let the retry loop classify by prefix.
            return Err(format!("fatal status {status}"));
        }
        let wire: WireResponse = response.json().map_err(|e| e.to_string())?;
        let choice = wire
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| "fatal empty choices".to_string())?;
        Ok(ChatResponse {
            text: choice.message.content,
            model_id: wire.model.unwrap_or_else(|| self.config.model.clone()),
            latency: Duration::ZERO,
        })
    }
}

impl ChatBackend for HttpBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        self.semaphore.acquire();
        let started = Instant::now();
        let result = (|| {
            let mut last_err = String::new();
            for attempt in 0..=self.config.max_retries {
                std::thread::sleep(backoff_delay(&self.config, attempt));
                match self.attempt(request) {
                    Ok(mut r) => {
                        r.latency = started.elapsed();
                        return Ok(r);
                    }
                    Err(reason) => {
                        let fatal = reason.starts_with("fatal");
                        last_err = reason;
                        if fatal {
                            break;
                        }
                    }
                }
            }
            Err(BackendError::Exhausted {
                attempts: self.config.max_retries + 1,
                reason: last_err,
            })
        })();
        self.semaphore.release();
        result
    }

    fn model_id(&self) -> String {
        self.config.model.clone()
    }
}

//! HTTP embedding providers: one wire format, per-provider response
//! adapters, bounded retries and a token-bucket rate limit.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::vector::Vector;

use super::EmbeddingSource;

/// How a provider shapes its response body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseShape {
    /// `{"embeddings": [[...], ...]}`
    #[default]
    Embeddings,
    /// `{"data": [{"embedding": [...]}, ...]}`
    Data,
}

/// Remote provider description. `auth_env` names an environment variable
/// holding the bearer token; the secret itself never appears in configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub name: String,
    pub endpoint: String,
    pub model_id: String,
    #[serde(default)]
    pub auth_env: Option<String>,
    pub expected_dim: usize,
    #[serde(default = "default_batch_limit")]
    pub batch_limit: usize,
    #[serde(default = "default_rpm")]
    pub requests_per_minute: u32,
    #[serde(default)]
    pub response_shape: ResponseShape,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_backoff_ms")]
    pub retry_backoff_ms: u64,
}

fn default_batch_limit() -> usize {
    64
}
fn default_rpm() -> u32 {
    60
}
fn default_timeout_secs() -> u64 {
    30
}
fn default_backoff_ms() -> u64 {
    250
}

const RETRY_ATTEMPTS: u32 = 3;

/// Token bucket: capacity and refill rate derived from requests-per-minute.
#[derive(Debug)]
struct TokenBucket {
    capacity: f64,
    tokens: f64,
    per_second: f64,
    last_refill: Instant,
}

impl TokenBucket {
    fn new(requests_per_minute: u32) -> Self {
        let capacity = requests_per_minute.max(1) as f64;
        Self {
            capacity,
            tokens: capacity,
            per_second: capacity / 60.0,
            last_refill: Instant::now(),
        }
    }

    /// Blocks until a token is available, then takes it.
    fn take(&mut self) {
        loop {
            let now = Instant::now();
            let elapsed = now.duration_since(self.last_refill).as_secs_f64();
            self.tokens = (self.tokens + elapsed * self.per_second).min(self.capacity);
            self.last_refill = now;
            if self.tokens >= 1.0 {
                self.tokens -= 1.0;
                return;
            }
            let deficit = (1.0 - self.tokens) / self.per_second;
            std::thread::sleep(Duration::from_secs_f64(deficit.min(1.0)));
        }
    }
}

pub struct HttpProviderSource {
    config: ProviderConfig,
    client: reqwest::blocking::Client,
    bucket: Mutex<TokenBucket>,
}

impl std::fmt::Debug for HttpProviderSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpProviderSource")
            .field("name", &self.config.name)
            .field("endpoint", &self.config.endpoint)
            .finish()
    }
}

impl HttpProviderSource {
    pub fn new(config: ProviderConfig) -> Result<Self> {
        if config.expected_dim == 0 {
            return Err(Error::Parameter("expected_dim must be positive".into()));
        }
        if config.batch_limit == 0 {
            return Err(Error::Parameter("batch_limit must be positive".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| Error::Source(format!("http client construction failed: {e}")))?;
        let bucket = Mutex::new(TokenBucket::new(config.requests_per_minute));
        Ok(Self {
            config,
            client,
            bucket,
        })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    fn auth_token(&self) -> Result<Option<String>> {
        match &self.config.auth_env {
            None => Ok(None),
            Some(var) => match std::env::var(var) {
                Ok(token) if !token.is_empty() => Ok(Some(token)),
                _ => Err(Error::Source(format!(
                    "provider '{}' needs credentials in ${var}",
                    self.config.name
                ))),
            },
        }
    }

    fn request_once(&self, texts: &[String], token: &Option<String>) -> Result<Vec<Vec<f64>>> {
        self.bucket.lock().expect("bucket lock").take();
        let body = json!({ "model": self.config.model_id, "input": texts });
        let mut request = self.client.post(&self.config.endpoint).json(&body);
        if let Some(token) = token {
            request = request.bearer_auth(token);
        }
        let response = request
            .send()
            .map_err(|e| Error::Source(format!("request failed: {e}")))?;
        let status = response.status();
        if !status.is_success() {
            return Err(Error::Source(format!("http status {status}")));
        }
        let value: serde_json::Value = response
            .json()
            .map_err(|e| Error::Source(format!("invalid json response: {e}")))?;
        self.parse_response(&value)
    }

    fn parse_response(&self, value: &serde_json::Value) -> Result<Vec<Vec<f64>>> {
        let arrays: Vec<&serde_json::Value> = match self.config.response_shape {
            ResponseShape::Embeddings => value
                .get("embeddings")
                .and_then(|v| v.as_array())
                .ok_or_else(|| Error::Source("response lacks 'embeddings' array".into()))?
                .iter()
                .collect(),
            ResponseShape::Data => value
                .get("data")
                .and_then(|v| v.as_array())
                .ok_or_else(|| Error::Source("response lacks 'data' array".into()))?
                .iter()
                .map(|item| item.get("embedding").unwrap_or(&serde_json::Value::Null))
                .collect(),
        };
        arrays
            .into_iter()
            .map(|arr| {
                arr.as_array()
                    .ok_or_else(|| Error::Source("embedding entry is not an array".into()))?
                    .iter()
                    .map(|x| {
                        x.as_f64()
                            .ok_or_else(|| Error::Source("non-numeric embedding value".into()))
                    })
                    .collect()
            })
            .collect()
    }
}

impl EmbeddingSource for HttpProviderSource {
    fn name(&self) -> &str {
        &self.config.name
    }
    fn model_id(&self) -> &str {
        &self.config.model_id
    }
    fn expected_dim(&self) -> usize {
        self.config.expected_dim
    }
    fn batch_limit(&self) -> usize {
        self.config.batch_limit
    }
    fn requires_network(&self) -> bool {
        true
    }

    /// One batch with bounded retries and exponential backoff.
    fn fetch(&self, texts: &[String]) -> Result<Vec<Vector>> {
        let token = self.auth_token()?;
        let mut last_error = String::new();
        for attempt in 0..RETRY_ATTEMPTS {
            if attempt > 0 {
                let backoff = self.config.retry_backoff_ms * (1 << (attempt - 1)) as u64;
                std::thread::sleep(Duration::from_millis(backoff));
            }
            match self.request_once(texts, &token) {
                Ok(rows) => {
                    return rows
                        .into_iter()
                        .map(|row| {
                            Vector::new(row).map_err(|e| {
                                Error::Integrity(format!(
                                    "provider '{}' returned a bad vector: {e}",
                                    self.config.name
                                ))
                            })
                        })
                        .collect();
                }
                Err(e) => last_error = e.to_string(),
            }
        }
        Err(Error::Source(format!(
            "provider '{}' failed after {RETRY_ATTEMPTS} attempts on a batch of {} \
             (first text: '{}'): {last_error}",
            self.config.name,
            texts.len(),
            texts.first().map(String::as_str).unwrap_or("")
        )))
    }
}

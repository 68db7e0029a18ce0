use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reqwest::blocking::Client;
use reqwest::header::{AUTHORIZATION, CONTENT_TYPE};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{TranslateError, Translator};
use crate::prompts::{Direction, PromptSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HttpMode {
    /// Chat-completion JSON: `{model, messages: [{role, content}], temperature, seed}`
    /// in, `choices[0].message.content` out.
    #[default]
    Chat,
    /// Prompt as a `text/plain` body, translation as the response body.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpSettings {
    pub endpoint: String,
    #[serde(default)]
    pub model_name: String,
    #[serde(default)]
    pub mode: HttpMode,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Base delay before the first retry; doubles on each further attempt.
    #[serde(default = "default_backoff")]
    pub backoff_base_ms: u64,
    /// Name of the environment variable holding the bearer token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
}

fn default_timeout() -> f64 {
    60.0
}

fn default_retries() -> u32 {
    3
}

fn default_backoff() -> u64 {
    500
}

impl HttpSettings {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model_name: String::new(),
            mode: HttpMode::Chat,
            temperature: 0.0,
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            backoff_base_ms: default_backoff(),
            api_key_env: None,
        }
    }
}

/// Token bucket refilled at `rate` tokens per second up to `burst`.
#[derive(Debug)]
pub struct RateLimiter {
    rate: Option<f64>,
    burst: f64,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    /// `None` or a non-positive rate disables limiting.
    pub fn new(rate: Option<f64>, burst: u32) -> Self {
        let burst = f64::from(burst.max(1));
        Self {
            rate: rate.filter(|r| *r > 0.0 && r.is_finite()),
            burst,
            state: Mutex::new((burst, Instant::now())),
        }
    }

    pub fn unlimited() -> Self {
        Self::new(None, 1)
    }

    /// Blocks until a token is available and takes it.
    pub fn acquire(&self) {
        let Some(rate) = self.rate else { return };
        loop {
            let wait = {
                let mut state = self.state.lock().unwrap_or_else(|e| e.into_inner());
                let now = Instant::now();
                let refill = now.duration_since(state.1).as_secs_f64() * rate;
                state.0 = (state.0 + refill).min(self.burst);
                state.1 = now;
                if state.0 >= 1.0 {
                    state.0 -= 1.0;
                    return;
                }
                (1.0 - state.0) / rate
            };
            thread::sleep(Duration::from_secs_f64(wait));
        }
    }
}

/// Retry delays for one request: `base * 2^i` scaled by a jitter factor in
/// `[0.5, 1)` drawn from a generator seeded with `seed`, so a replayed run
/// sees the same schedule.
pub fn backoff_delays(seed: u64, base: Duration, retries: u32) -> Vec<Duration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..retries)
        .map(|i| {
            let factor: f64 = rng.random_range(0.5..1.0);
            base.mul_f64(factor * 2f64.powi(i.min(16) as i32))
        })
        .collect()
}

enum Attempt {
    Done(String),
    Retry(TranslateError),
    Fail(TranslateError),
}

pub struct HttpBackend {
    settings: HttpSettings,
    prompts: PromptSet,
    client: Client,
    api_key: Option<String>,
    limiter: RateLimiter,
}

impl HttpBackend {
    pub fn new(
        settings: HttpSettings,
        prompts: PromptSet,
        api_key: Option<String>,
        limiter: RateLimiter,
    ) -> Result<Self, TranslateError> {
        let client = Client::builder()
            .timeout(Duration::from_secs_f64(settings.timeout_secs.max(0.001)))
            .build()
            .map_err(|e| TranslateError::Backend(format!("cannot build HTTP client: {e}")))?;
        Ok(Self {
            settings,
            prompts,
            client,
            api_key,
            limiter,
        })
    }

    fn request_body(&self, prompt: &str, seed: u64) -> Vec<u8> {
        match self.settings.mode {
            HttpMode::Chat => serde_json::to_vec(&json!({
                "model": self.settings.model_name,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": self.settings.temperature,
                "seed": seed,
            }))
            .expect("request serializes"),
            HttpMode::Raw => prompt.as_bytes().to_vec(),
        }
    }

    fn attempt(&self, body: &[u8], attempts: u32) -> Attempt {
        let content_type = match self.settings.mode {
            HttpMode::Chat => "application/json",
            HttpMode::Raw => "text/plain; charset=utf-8",
        };
        let mut request = self
            .client
            .post(&self.settings.endpoint)
            .header(CONTENT_TYPE, content_type)
            .body(body.to_vec());
        if let Some(key) = &self.api_key {
            request = request.header(AUTHORIZATION, format!("Bearer {key}"));
        }
        let response = match request.send() {
            Ok(r) => r,
            Err(e) if e.is_timeout() => return Attempt::Retry(TranslateError::Timeout { attempts }),
            Err(e) => {
                return Attempt::Retry(TranslateError::Transport {
                    attempts,
                    message: e.to_string(),
                })
            }
        };
        let status = response.status();
        let text = match response.text() {
            Ok(t) => t,
            Err(e) if e.is_timeout() => return Attempt::Retry(TranslateError::Timeout { attempts }),
            Err(e) => {
                return Attempt::Retry(TranslateError::Transport {
                    attempts,
                    message: e.to_string(),
                })
            }
        };
        if !status.is_success() {
            let err = TranslateError::Status {
                status: status.as_u16(),
                attempts,
                body: text.chars().take(200).collect(),
            };
            return if status.is_server_error() || status.as_u16() == 429 {
                Attempt::Retry(err)
            } else {
                Attempt::Fail(err)
            };
        }
        let out = match self.settings.mode {
            HttpMode::Chat => match extract_chat_text(&text) {
                Ok(s) => s,
                Err(e) => return Attempt::Fail(e),
            },
            HttpMode::Raw => text,
        };
        let out = out.trim();
        if out.is_empty() {
            Attempt::Fail(TranslateError::Empty)
        } else {
            Attempt::Done(out.to_string())
        }
    }
}

/// First message text of a chat-completion response. Falls back to the
/// legacy `choices[0].text` field.
pub(crate) fn extract_chat_text(body: &str) -> Result<String, TranslateError> {
    let v: Value = serde_json::from_str(body).map_err(|e| TranslateError::Decode(e.to_string()))?;
    let choice = &v["choices"][0];
    choice["message"]["content"]
        .as_str()
        .or_else(|| choice["text"].as_str())
        .map(str::to_string)
        .ok_or_else(|| TranslateError::Decode("no choices[0].message.content".into()))
}

impl Translator for HttpBackend {
    fn translate(
        &self,
        text: &str,
        direction: Direction,
        seed: u64,
        variant: usize,
    ) -> Result<String, TranslateError> {
        let prompt = self.prompts.render(direction, variant, text);
        let body = self.request_body(&prompt, seed);
        let delays = backoff_delays(
            seed,
            Duration::from_millis(self.settings.backoff_base_ms),
            self.settings.max_retries,
        );
        let mut attempts = 0;
        loop {
            attempts += 1;
            self.limiter.acquire();
            match self.attempt(&body, attempts) {
                Attempt::Done(s) => return Ok(s),
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(e) => {
                    let Some(delay) = delays.get(attempts as usize - 1) else {
                        return Err(e);
                    };
                    log::debug!("{} attempt {attempts} failed ({e}); retrying in {delay:?}", self.settings.endpoint);
                    thread::sleep(*delay);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_is_reproducible_and_grows() {
        let base = Duration::from_millis(100);
        let a = backoff_delays(7, base, 4);
        assert_eq!(a, backoff_delays(7, base, 4));
        assert_ne!(a, backoff_delays(8, base, 4));
        for (i, d) in a.iter().enumerate() {
            let nominal = base * 2u32.pow(i as u32);
            assert!(*d >= nominal / 2 && *d < nominal, "{i}: {d:?}");
        }
    }

    #[test]
    fn limiter_spaces_requests() {
        let limiter = RateLimiter::new(Some(50.0), 1);
        let start = Instant::now();
        for _ in 0..6 {
            limiter.acquire();
        }
        // first token is free, five more at 20 ms each
        assert!(start.elapsed() >= Duration::from_millis(95), "{:?}", start.elapsed());
    }

    #[test]
    fn unlimited_limiter_never_waits() {
        let limiter = RateLimiter::unlimited();
        let start = Instant::now();
        for _ in 0..1000 {
            limiter.acquire();
        }
        assert!(start.elapsed() < Duration::from_millis(50));
    }

    #[test]
    fn extracts_chat_content() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"hello"}}]}"#;
        assert_eq!(extract_chat_text(body).unwrap(), "hello");
        assert_eq!(extract_chat_text(r#"{"choices":[{"text":"x"}]}"#).unwrap(), "x");
        assert!(extract_chat_text(r#"{"error":"no"}"#).is_err());
        assert!(extract_chat_text("not json").is_err());
    }
}

//! Translation backends.

mod http;
mod mock;

pub use http::{backoff_delays, HttpBackend, HttpMode, HttpSettings, RateLimiter};
pub use mock::{FailingMock, IdentityMock, LexiconMock, MockError, NoiseMock};

use thiserror::Error;

use crate::prompts::Direction;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TranslateError {
    #[error("timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("HTTP {status} after {attempts} attempt(s): {body}")]
    Status { status: u16, attempts: u32, body: String },
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("unexpected response body: {0}")]
    Decode(String),
    #[error("empty completion")]
    Empty,
    #[error("{0}")]
    Backend(String),
}

/// One translation system. Implementations must be deterministic in
/// `(text, direction, seed, variant)` whenever the underlying service is.
pub trait Translator: Send + Sync {
    fn translate(
        &self,
        text: &str,
        direction: Direction,
        seed: u64,
        variant: usize,
    ) -> Result<String, TranslateError>;
}

impl<T: Translator + ?Sized> Translator for Box<T> {
    fn translate(
        &self,
        text: &str,
        direction: Direction,
        seed: u64,
        variant: usize,
    ) -> Result<String, TranslateError> {
        (**self).translate(text, direction, seed, variant)
    }
}

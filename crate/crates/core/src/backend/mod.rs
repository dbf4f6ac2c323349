//! Chat-completion and text-embedding providers behind uniform traits, with a
//! production HTTP client and deterministic offline mocks.

mod bow;
mod fixture;
mod remote;
mod retry;

pub use bow::BagOfWordsEmbedder;
pub use fixture::{FixtureBackend, FixtureBuilder};
pub use remote::{RemoteBackend, RemoteConfig};
pub use retry::{with_retry, RetryPolicy};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub text: String,
}

impl Message {
    pub fn system(text: impl Into<String>) -> Message {
        Message {
            role: Role::System,
            text: text.into(),
        }
    }
    pub fn user(text: impl Into<String>) -> Message {
        Message {
            role: Role::User,
            text: text.into(),
        }
    }
    pub fn assistant(text: impl Into<String>) -> Message {
        Message {
            role: Role::Assistant,
            text: text.into(),
        }
    }
}

/// One chat-completion call. `temperature = 0` asks the provider for
/// reproducible output; `n_choices` is the number of alternative responses
/// requested in this single call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub n_choices: usize,
    pub model_id: String,
}

impl CompletionRequest {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.n_choices < 1 {
            return Err(BackendError::InvalidRequest(
                "n_choices must be >= 1".into(),
            ));
        }
        if self.temperature < 0.0 {
            return Err(BackendError::InvalidRequest(
                "temperature must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// A text embedding; `dimension` always equals `vector.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub vector: Vec<f64>,
    pub model_id: String,
    pub dimension: usize,
}

impl Embedding {
    pub fn new(vector: Vec<f64>, model_id: impl Into<String>) -> Embedding {
        let dimension = vector.len();
        Embedding {
            vector,
            model_id: model_id.into(),
            dimension,
        }
    }
}

/// Stable digest of a message list; fixture files key scripted responses by
/// it. Template changes alter the digest and therefore invalidate fixtures
/// loudly instead of replaying stale responses.
pub fn prompt_digest(messages: &[Message]) -> String {
    let canonical = serde_json::to_string(messages).expect("messages serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub trait ChatBackend: Send + Sync {
    /// Returns exactly `n_choices` response texts in provider order.
    fn complete(&self, request: &CompletionRequest) -> Result<Vec<String>, BackendError>;
}

pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str, model_id: &str) -> Result<Embedding, BackendError>;
}

#[derive(Debug, Error)]
pub enum BackendError {
    /// Transient transport failure; retried with bounded exponential backoff.
    #[error("transport failure: {0}")]
    Transport(String),
    /// Provider rejected the request (auth, quota, bad input); never retried.
    #[error("provider rejected request ({status}): {message}")]
    Provider { status: u16, message: String },
    #[error("no fixture for prompt digest {0}")]
    MissingFixture(String),
    #[error("backend returned {got} responses, {want} requested")]
    TooFewResponses { want: usize, got: usize },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("empty text cannot be embedded")]
    EmptyText,
    #[error("fixture format error: {0}")]
    FixtureFormat(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl BackendError {
    /// Only transport-class failures are worth retrying; provider content
    /// errors are not idempotent at temperature > 0.
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transport(_))
    }

    /// Terminal errors abort the record they occurred in.
    pub fn is_terminal(&self) -> bool {
        !self.is_retryable()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = vec![Message::user("hello")];
        let b = vec![Message::user("hello")];
        let c = vec![Message::user("hello!")];
        assert_eq!(prompt_digest(&a), prompt_digest(&b));
        assert_ne!(prompt_digest(&a), prompt_digest(&c));
        // role changes the digest too
        assert_ne!(
            prompt_digest(&[Message::user("x")]),
            prompt_digest(&[Message::system("x")])
        );
    }

    #[test]
    fn request_validation() {
        let mut req = CompletionRequest {
            messages: vec![Message::user("q")],
            temperature: 0.0,
            n_choices: 1,
            model_id: "m".into(),
        };
        assert!(req.validate().is_ok());
        req.n_choices = 0;
        assert!(req.validate().is_err());
        req.n_choices = 1;
        req.temperature = -0.1;
        assert!(req.validate().is_err());
    }
}

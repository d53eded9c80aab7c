//! Chat-completion backends: a JSON HTTP adapter for real providers and a
//! deterministic scripted mock for tests and offline runs.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
}

#[derive(Debug)]
pub enum BackendError {
    /// Worth retrying: transport failures, 5xx.
    Transient(String),
    /// Never retried: 4xx-class upstream rejections.
    Definitive { status: u16, message: String },
    /// Strict mock got a prompt it has no script for.
    Unscripted(String),
}

pub trait ChatBackend: Send + Sync {
    fn id(&self) -> String;
    fn chat(&self, req: &ChatRequest) -> Result<String, BackendError>;
    /// Whether dispatching requires a resolved auth token.
    fn requires_auth(&self) -> bool {
        false
    }
}

/// Stable fingerprint of a request's messages, used for strict-mock lookup
/// and record/replay.
pub fn fingerprint(messages: &[ChatMessage]) -> String {
    let mut hasher = Sha256::new();
    for m in messages {
        hasher.update(m.role.as_bytes());
        hasher.update([0u8]);
        hasher.update(m.content.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

// ---- HTTP ----------------------------------------------------------------

pub struct HttpBackend {
    pub endpoint: String,
    pub token: String,
    pub timeout_secs: u64,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: String,
}

impl HttpBackend {
    pub fn new(endpoint: &str, token: &str, timeout_secs: u64) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(timeout_secs.max(1)))
            .build()
            .expect("client construction is infallible with static options");
        HttpBackend {
            endpoint: endpoint.to_string(),
            token: token.to_string(),
            timeout_secs,
            client,
        }
    }
}

impl ChatBackend for HttpBackend {
    fn id(&self) -> String {
        self.endpoint.clone()
    }

    fn requires_auth(&self) -> bool {
        true
    }

    fn chat(&self, req: &ChatRequest) -> Result<String, BackendError> {
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.token)
            .json(req)
            .send()
            .map_err(|e| BackendError::Transient(e.to_string()))?;
        let status = response.status();
        if status.is_client_error() {
            return Err(BackendError::Definitive {
                status: status.as_u16(),
                message: response.text().unwrap_or_default(),
            });
        }
        if !status.is_success() {
            return Err(BackendError::Transient(format!(
                "upstream status {status}"
            )));
        }
        let body: CompletionResponse = response
            .json()
            .map_err(|e| BackendError::Transient(format!("bad completion body: {e}")))?;
        body.choices
            .first()
            .map(|c| c.message.content.clone())
            .ok_or_else(|| BackendError::Transient("empty choices".to_string()))
    }
}

// ---- mock ------------------------------------------------------------------

/// Deterministic reply rules for the mock backend.
#[derive(Debug, Clone)]
pub enum MockScript {
    /// Always the same reply.
    Always(String),
    /// "yes" when any message contains the needle, "no" otherwise.
    YesIfContains(String),
    /// Replies consumed in order; repeats the last one when exhausted.
    Sequence(Vec<String>),
    /// Fingerprint -> reply; anything else errors (strict mode).
    Strict(BTreeMap<String, String>),
    /// Fail with `failures` transient (or definitive, if `status` is 4xx)
    /// errors before succeeding; exercises retry policy.
    FailThen {
        failures: u32,
        status: Option<u16>,
        then: String,
    },
}

pub struct MockBackend {
    script: MockScript,
    calls: AtomicUsize,
    state: Mutex<u32>,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Self {
        MockBackend {
            script,
            calls: AtomicUsize::new(0),
            state: Mutex::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Parse a CLI mock spec: `always:<text>`, `yes-if-contains:<needle>`,
    /// `replay:<transcript.json>`.
    pub fn from_spec(spec: &str) -> Result<Self, String> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| format!("mock spec `{spec}` needs a kind, e.g. always:<text>"))?;
        match kind {
            "always" => Ok(MockBackend::new(MockScript::Always(rest.to_string()))),
            "yes-if-contains" => Ok(MockBackend::new(MockScript::YesIfContains(
                rest.to_string(),
            ))),
            "replay" => {
                let text = std::fs::read_to_string(rest)
                    .map_err(|e| format!("cannot read transcript `{rest}`: {e}"))?;
                let file: super::transcript::TranscriptFile = serde_json::from_str(&text)
                    .map_err(|e| format!("bad transcript `{rest}`: {e}"))?;
                let map = file
                    .rounds
                    .into_iter()
                    .map(|r| (r.fingerprint, r.reply))
                    .collect();
                Ok(MockBackend::new(MockScript::Strict(map)))
            }
            other => Err(format!("unknown mock kind `{other}`")),
        }
    }
}

impl ChatBackend for MockBackend {
    fn id(&self) -> String {
        "mock".to_string()
    }

    fn chat(&self, req: &ChatRequest) -> Result<String, BackendError> {
        let n = self.calls.fetch_add(1, Ordering::SeqCst);
        match &self.script {
            MockScript::Always(reply) => Ok(reply.clone()),
            MockScript::YesIfContains(needle) => {
                let hit = req.messages.iter().any(|m| m.content.contains(needle));
                Ok(if hit {
                    "yes".to_string()
                } else {
                    "no".to_string()
                })
            }
            MockScript::Sequence(replies) => {
                let idx = n.min(replies.len().saturating_sub(1));
                replies
                    .get(idx)
                    .cloned()
                    .ok_or_else(|| BackendError::Transient("empty sequence".to_string()))
            }
            MockScript::Strict(map) => {
                let fp = fingerprint(&req.messages);
                map.get(&fp)
                    .cloned()
                    .ok_or(BackendError::Unscripted(fp))
            }
            MockScript::FailThen {
                failures,
                status,
                then,
            } => {
                let mut left = self.state.lock().unwrap();
                if *left < *failures {
                    *left += 1;
                    return match status {
                        Some(code) if (400..500).contains(&(*code as i32)) => {
                            Err(BackendError::Definitive {
                                status: *code,
                                message: "scripted rejection".to_string(),
                            })
                        }
                        _ => Err(BackendError::Transient("scripted failure".to_string())),
                    };
                }
                Ok(then.clone())
            }
        }
    }
}

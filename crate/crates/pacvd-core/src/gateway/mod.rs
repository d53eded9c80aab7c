//! Dispatch prompt bundles to a chat-completion backend and parse binary
//! verdicts. Multi-turn strategies run sequentially, feeding each assistant
//! reply into the next turn; transient transport errors retry with
//! exponential backoff, definitive upstream rejections never do.

pub mod backend;
mod limiter;
mod parse;
pub mod transcript;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::{PromptBundle, Role};

pub use backend::{fingerprint, ChatBackend, ChatMessage, ChatRequest, HttpBackend, MockBackend, MockScript};
pub use limiter::RateLimiter;
pub use parse::parse_verdict;
pub use transcript::{TranscriptFile, TranscriptRound};

pub const DEFAULT_AUTH_ENV: &str = "PACVD_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub auth_env: String,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    /// Request timeout in seconds.
    pub timeout: u64,
    pub max_retries: u32,
    /// Requests per minute; unlimited when absent.
    pub rpm: Option<u32>,
    pub max_in_flight: usize,
    /// Cap on the text substituted for `[Code Analysis]`; longer replies
    /// are tail-truncated with an ellipsis marker.
    pub max_analysis_chars: Option<usize>,
    /// Base backoff in milliseconds between retries.
    pub backoff_ms: u64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            endpoint: String::new(),
            model: String::new(),
            auth_env: DEFAULT_AUTH_ENV.to_string(),
            temperature: 0.1,
            top_p: 0.95,
            max_tokens: 512,
            timeout: 60,
            max_retries: 3,
            rpm: None,
            max_in_flight: 4,
            max_analysis_chars: None,
            backoff_ms: 250,
        }
    }
}

impl ProviderConfig {
    pub fn from_toml(text: &str) -> Result<Self, GatewayError> {
        let config: ProviderConfig =
            toml::from_str(text).map_err(|e| GatewayError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(GatewayError::Config(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(GatewayError::Config(format!(
                "top_p {} outside (0, 1]",
                self.top_p
            )));
        }
        if self.max_tokens < 1 {
            return Err(GatewayError::Config("max_tokens must be >= 1".to_string()));
        }
        Ok(())
    }

    pub fn provider_id(&self) -> String {
        if self.endpoint.is_empty() {
            "mock".to_string()
        } else {
            format!("{}@{}", self.model, self.endpoint)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictLabel {
    Yes,
    No,
    Unparseable,
}

impl VerdictLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictLabel::Yes => "yes",
            VerdictLabel::No => "no",
            VerdictLabel::Unparseable => "unparseable",
        }
    }
}

impl std::fmt::Display for VerdictLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub label: VerdictLabel,
    /// The final model reply, verbatim, unparseable ones included.
    pub raw: String,
    /// Complete dialogue: prompts and assistant replies in order.
    pub turns: Vec<ChatMessage>,
    /// Per-dispatch request/reply rounds for record/replay.
    pub rounds: Vec<TranscriptRound>,
    pub latency: Duration,
    pub provider_id: String,
}

impl Verdict {
    pub fn to_transcript(&self) -> TranscriptFile {
        TranscriptFile {
            provider_id: self.provider_id.clone(),
            dialogue: self.turns.clone(),
            verdict: self.label.to_string(),
            rounds: self.rounds.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("auth token environment variable `{0}` is not set")]
    AuthMissing(String),
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { message: String, attempts: u32 },
    #[error("provider rejected the request (status {status}): {message}")]
    Provider { status: u16, message: String },
    #[error("strict mock has no reply scripted for prompt {0}")]
    UnscriptedPrompt(String),
    #[error("bad provider configuration: {0}")]
    Config(String),
}

pub struct Gateway {
    config: ProviderConfig,
    backend: Box<dyn ChatBackend>,
    limiter: RateLimiter,
    dispatches: AtomicUsize,
}

impl Gateway {
    pub fn new(config: ProviderConfig, backend: Box<dyn ChatBackend>) -> Self {
        let limiter = RateLimiter::new(config.rpm, config.max_in_flight);
        Gateway {
            config,
            backend,
            limiter,
            dispatches: AtomicUsize::new(0),
        }
    }

    /// Remote gateway over the JSON chat-completions protocol. Fails fast
    /// when the auth variable is absent.
    pub fn http(config: ProviderConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        let token = std::env::var(&config.auth_env)
            .map_err(|_| GatewayError::AuthMissing(config.auth_env.clone()))?;
        let backend = HttpBackend::new(&config.endpoint, &token, config.timeout);
        Ok(Gateway::new(config, Box::new(backend)))
    }

    pub fn mock(script: MockScript) -> Self {
        Gateway::new(
            ProviderConfig::default(),
            Box::new(MockBackend::new(script)),
        )
    }

    pub fn mock_with_config(config: ProviderConfig, script: MockScript) -> Self {
        Gateway::new(config, Box::new(MockBackend::new(script)))
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    /// Number of provider dispatches performed so far (cache-hit audits).
    pub fn dispatch_count(&self) -> usize {
        self.dispatches.load(Ordering::SeqCst)
    }

    /// Run one dialogue: resolve assistant placeholders by dispatching the
    /// accumulated conversation, substitute `[Code Analysis]` with the
    /// previous reply, and parse the final reply into a verdict.
    pub fn complete(&self, bundle: &PromptBundle) -> Result<Verdict, GatewayError> {
        let started = Instant::now();
        let mut messages: Vec<ChatMessage> = Vec::new();
        let mut rounds: Vec<TranscriptRound> = Vec::new();
        let mut last_reply: Option<String> = None;

        for turn in &bundle.turns {
            match turn.role {
                Role::System => messages.push(ChatMessage {
                    role: "system".to_string(),
                    content: turn.text.clone(),
                }),
                Role::User => {
                    let mut content = turn.text.clone();
                    if let Some(reply) = &last_reply {
                        if content.contains("[Code Analysis]") {
                            content =
                                content.replace("[Code Analysis]", &self.clip_analysis(reply));
                        }
                    }
                    messages.push(ChatMessage {
                        role: "user".to_string(),
                        content,
                    });
                }
                Role::AssistantPlaceholder => {
                    let reply = self.send(&messages, &mut rounds)?;
                    messages.push(ChatMessage {
                        role: "assistant".to_string(),
                        content: reply.clone(),
                    });
                    last_reply = Some(reply);
                }
            }
        }
        let final_reply = self.send(&messages, &mut rounds)?;
        messages.push(ChatMessage {
            role: "assistant".to_string(),
            content: final_reply.clone(),
        });
        Ok(Verdict {
            label: parse_verdict(&final_reply),
            raw: final_reply,
            turns: messages,
            rounds,
            latency: started.elapsed(),
            provider_id: self.config.provider_id(),
        })
    }

    fn clip_analysis(&self, reply: &str) -> String {
        match self.config.max_analysis_chars {
            Some(cap) if reply.chars().count() > cap => {
                let clipped: String = reply.chars().take(cap).collect();
                format!("{clipped}…")
            }
            _ => reply.to_string(),
        }
    }

    fn send(
        &self,
        messages: &[ChatMessage],
        rounds: &mut Vec<TranscriptRound>,
    ) -> Result<String, GatewayError> {
        let _slot = self.limiter.acquire();
        let request = ChatRequest {
            model: self.config.model.clone(),
            messages: messages.to_vec(),
            temperature: self.config.temperature,
            top_p: self.config.top_p,
            max_tokens: self.config.max_tokens,
        };
        let mut attempt = 0u32;
        loop {
            self.dispatches.fetch_add(1, Ordering::SeqCst);
            match self.backend.chat(&request) {
                Ok(reply) => {
                    rounds.push(TranscriptRound {
                        fingerprint: fingerprint(messages),
                        messages: messages.to_vec(),
                        reply: reply.clone(),
                    });
                    return Ok(reply);
                }
                Err(backend::BackendError::Definitive { status, message }) => {
                    return Err(GatewayError::Provider { status, message });
                }
                Err(backend::BackendError::Unscripted(fp)) => {
                    return Err(GatewayError::UnscriptedPrompt(fp));
                }
                Err(backend::BackendError::Transient(message)) => {
                    attempt += 1;
                    if attempt > self.config.max_retries {
                        return Err(GatewayError::Transport {
                            message,
                            attempts: attempt,
                        });
                    }
                    let backoff = self.config.backoff_ms.saturating_mul(1 << (attempt - 1));
                    if backoff > 0 {
                        std::thread::sleep(Duration::from_millis(backoff));
                    }
                }
            }
        }
    }
}

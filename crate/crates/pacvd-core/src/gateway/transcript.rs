//! Transcript files: one JSON document per dialogue, with every
//! request/reply round fingerprinted so a replay backend can answer the
//! same prompts byte-exactly.

use serde::{Deserialize, Serialize};

use super::backend::ChatMessage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRound {
    /// Fingerprint of the request messages at dispatch time.
    pub fingerprint: String,
    pub messages: Vec<ChatMessage>,
    pub reply: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptFile {
    pub provider_id: String,
    /// Full final dialogue, assistant replies included.
    pub dialogue: Vec<ChatMessage>,
    pub verdict: String,
    pub rounds: Vec<TranscriptRound>,
}

impl TranscriptFile {
    pub fn save(&self, path: &std::path::Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("transcript serializes");
        std::fs::write(path, text)
    }

    pub fn load(path: &std::path::Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

//! Job reports: one JSON document per invocation carrying the command, a
//! digest of every input that influenced the computation, the structured
//! results, wall-clock timings, and the seed. Identical inputs and seed give
//! byte-identical reports apart from the timings block.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct JobReport {
    pub command: String,
    pub inputs_digest: String,
    pub results: Value,
    pub timings_ms: Value,
    pub seed: u64,
}

/// Accumulates labeled input chunks into a stable hex digest.
pub struct DigestBuilder {
    hasher: Sha256,
}

impl DigestBuilder {
    pub fn new(command: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        Self { hasher }
    }

    pub fn add(&mut self, label: &str, bytes: &[u8]) {
        self.hasher.update([0u8]);
        self.hasher.update(label.as_bytes());
        self.hasher.update([1u8]);
        self.hasher.update(bytes);
    }

    pub fn add_str(&mut self, label: &str, text: &str) {
        self.add(label, text.as_bytes());
    }

    pub fn finish(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

impl JobReport {
    pub fn new(command: &str, digest: String, seed: u64, results: Value, elapsed_ms: f64) -> Self {
        Self {
            command: command.to_string(),
            inputs_digest: digest,
            results,
            timings_ms: serde_json::json!({ "total": elapsed_ms }),
            seed,
        }
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

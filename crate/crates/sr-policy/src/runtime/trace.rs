//! Hash-chained audit trace log.
//!
//! Entries are serialized as newline-delimited JSON with stable key order,
//! so external tools can re-verify the chain without this library. Each
//! entry's `prev_hash` is the SHA-256 digest of its predecessor's canonical
//! serialization with the predecessor's own `prev_hash` field excluded; an
//! empty log starts with `prev_hash` absent.

use super::RuntimeError;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One signal value in a trace snapshot: a score or a crisp boolean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraceValue {
    Flag(bool),
    Score(f64),
}

impl TraceValue {
    pub fn as_score(self) -> f64 {
        match self {
            TraceValue::Score(s) => s,
            TraceValue::Flag(true) => 1.0,
            TraceValue::Flag(false) => 0.0,
        }
    }
}

/// Timestamped record of one routing decision. Field order mirrors the wire
/// format; every name in `signals` is a declared signal (or a group
/// member's `_raw` companion), and `tree`/`branch` exist in the policy that
/// produced the entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditTraceEntry {
    pub ts: f64,
    pub policy_version: String,
    pub source_hash: String,
    pub tree: String,
    pub branch: String,
    pub branch_idx: usize,
    pub signals: IndexMap<String, TraceValue>,
    pub thresholds_crossed: IndexMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prev_hash: Option<String>,
}

/// SHA-256 over the entry's canonical JSON with `prev_hash` excluded,
/// rendered as 64 hex characters.
pub fn entry_digest(entry: &AuditTraceEntry) -> String {
    let mut unchained = entry.clone();
    unchained.prev_hash = None;
    let json = serde_json::to_string(&unchained).expect("trace entries serialize");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().map(|b| format!("{:02x}", b)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainStatus {
    pub valid: bool,
    /// Index of the first entry whose `prev_hash` check fails.
    pub first_broken: Option<usize>,
}

/// Append-only trace log. Existing entries are never touched; appends must
/// arrive correctly chained. Concurrent appends need external serialization
/// (single-writer); verification is read-only.
#[derive(Debug, Clone, Default)]
pub struct TraceLog {
    entries: Vec<AuditTraceEntry>,
}

impl TraceLog {
    pub fn new() -> TraceLog {
        TraceLog::default()
    }

    pub fn entries(&self) -> &[AuditTraceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&AuditTraceEntry> {
        self.entries.last()
    }

    /// Appends `entry`, requiring `entry.prev_hash` to equal the digest of
    /// the current last entry (absent for the first append).
    pub fn append(&mut self, entry: AuditTraceEntry) -> Result<(), RuntimeError> {
        let expected = self.entries.last().map(entry_digest);
        if entry.prev_hash != expected {
            return Err(RuntimeError::ChainBreak {
                index: self.entries.len(),
            });
        }
        self.entries.push(entry);
        Ok(())
    }

    /// True iff every entry's `prev_hash` equals the digest of its
    /// predecessor (and the first entry carries none).
    pub fn verify_chain(&self) -> ChainStatus {
        let mut prev: Option<&AuditTraceEntry> = None;
        for (i, entry) in self.entries.iter().enumerate() {
            let expected = prev.map(entry_digest);
            if entry.prev_hash != expected {
                return ChainStatus {
                    valid: false,
                    first_broken: Some(i),
                };
            }
            prev = Some(entry);
        }
        ChainStatus {
            valid: true,
            first_broken: None,
        }
    }

    /// One JSON object per line, stable key order.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            out.push_str(&serde_json::to_string(entry).expect("trace entries serialize"));
            out.push('\n');
        }
        out
    }

    /// Loads a persisted log without chain validation (use
    /// [`TraceLog::verify_chain`] afterwards; tampered files must load).
    pub fn from_ndjson(text: &str) -> Result<TraceLog, serde_json::Error> {
        let mut entries = Vec::new();
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            entries.push(serde_json::from_str(line)?);
        }
        Ok(TraceLog { entries })
    }
}

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Public,
    Private,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Sq,
    Qsq,
    Ex,
    Mem,
    Qmeasex,
    Qph,
    Qmem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Learner to oracle.
    Query,
    /// The oracle's own action.
    Oracle,
    /// Oracle to learner.
    Response,
    /// Unprompted sample draw.
    Sample,
}

/// Running totals: `queries` counts calls, `weighted` counts base queries or copies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub queries: u64,
    pub weighted: u64,
}

impl Counters {
    pub fn bump(&mut self, weight: u64) {
        self.queries += 1;
        self.weighted += weight;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptEvent {
    pub seq: u64,
    #[serde(rename = "oracle-kind")]
    pub oracle_kind: OracleKind,
    pub visibility: Visibility,
    pub direction: Direction,
    #[serde(rename = "payload-digest")]
    pub payload_digest: String,
    pub counters: Counters,
}

pub fn digest(payload: &[u8]) -> String {
    hex::encode(Sha256::digest(payload))
}

/// Append-only event log owned by one oracle.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    events: Vec<TranscriptEvent>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(
        &mut self,
        kind: OracleKind,
        visibility: Visibility,
        direction: Direction,
        payload: &[u8],
        counters: Counters,
    ) {
        let seq = self.events.len() as u64;
        self.events.push(TranscriptEvent {
            seq,
            oracle_kind: kind,
            visibility,
            direction,
            payload_digest: digest(payload),
            counters,
        });
    }

    pub fn events(&self) -> &[TranscriptEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn public_events(&self) -> impl Iterator<Item = &TranscriptEvent> {
        self.events.iter().filter(|e| e.visibility == Visibility::Public)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    /// Parses JSON-lines; blank lines are skipped and `seq` must count up from 0.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut events = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let e: TranscriptEvent = serde_json::from_str(line)?;
            if e.seq != events.len() as u64 {
                return Err(Error::Parse(format!("expected seq {}, found {}", events.len(), e.seq)));
            }
            if e.payload_digest.len() != 64 || !e.payload_digest.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(Error::Parse("payload-digest must be 64 hex chars".into()));
            }
            events.push(e);
        }
        Ok(Self { events })
    }
}

/// The adversary-visible log: public events from several oracles, in call order per oracle.
pub fn adversary_view<'a>(logs: impl IntoIterator<Item = &'a Transcript>) -> Vec<TranscriptEvent> {
    logs.into_iter().flat_map(|t| t.public_events().cloned()).collect()
}

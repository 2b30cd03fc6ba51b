//! Line-delimited JSON transcript format.
//!
//! Every line is one event object with the fields `seq`, `phase`, `actor`,
//! `payload` in that order. `seq` counts from 0 without gaps, and the last
//! event is always the `outcome` payload. Every line, including the last,
//! ends with `\n`; a stream that stops mid-line is rejected as truncated.
//! No floating-point values appear, so encoding is bit-exact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::protocol::RunOutcome;
use crate::cks::CksRound;
use crate::Bit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Setup,
    Rounds,
    Check,
    Select,
    Encode,
    Verify,
    Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Actor {
    Alice,
    Bob,
    Referee,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Payload {
    Config {
        protocol: String,
        runs: usize,
        block: usize,
        checked: usize,
        set: Vec<String>,
        alice: String,
        bob: String,
    },
    Round(CksRound),
    RevealRequest {
        runs: Vec<usize>,
    },
    Reveal {
        run: usize,
        x0: Bit,
        x1: Bit,
    },
    Verdict {
        runs: Vec<usize>,
        passed: bool,
        useful: Option<bool>,
    },
    Choose {
        run: usize,
    },
    Announce {
        d0: Bit,
        d1: Bit,
    },
    Outcome(RunOutcome),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub phase: Phase,
    pub actor: Actor,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProtocolTranscript {
    pub events: Vec<Event>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: expected seq {expected}, found {found}")]
    Sequence { line: usize, expected: u64, found: u64 },
    #[error("line {line}: phase goes backwards")]
    PhaseOrder { line: usize },
    #[error("stream truncated after line {0}")]
    Truncated(usize),
    #[error("transcript has no outcome event")]
    MissingOutcome,
    #[error("line {0}: event after the outcome")]
    TrailingEvent(usize),
}

impl ProtocolTranscript {
    pub fn push(&mut self, phase: Phase, actor: Actor, payload: Payload) {
        let seq = self.events.len() as u64;
        self.events.push(Event {
            seq,
            phase,
            actor,
            payload,
        });
    }

    pub fn outcome(&self) -> Option<&RunOutcome> {
        match self.events.last().map(|e| &e.payload) {
            Some(Payload::Outcome(o)) => Some(o),
            _ => None,
        }
    }

    pub fn rounds(&self) -> impl Iterator<Item = &CksRound> {
        self.events.iter().filter_map(|e| match &e.payload {
            Payload::Round(r) => Some(r),
            _ => None,
        })
    }

    /// Runs whose announcements Bob received, in order.
    pub fn revealed_runs(&self) -> Vec<usize> {
        self.events
            .iter()
            .filter_map(|e| match e.payload {
                Payload::Reveal { run, .. } => Some(run),
                _ => None,
            })
            .collect()
    }

    pub fn encode(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("transcript events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CodecError> {
        let mut events: Vec<Event> = Vec::new();
        let mut lines = 0;
        for (i, line) in text.split_inclusive('\n').enumerate() {
            let number = i + 1;
            let Some(body) = line.strip_suffix('\n') else {
                return Err(CodecError::Truncated(i));
            };
            let event: Event = serde_json::from_str(body).map_err(|e| CodecError::Syntax {
                line: number,
                column: e.column(),
                message: e.to_string(),
            })?;
            if event.seq != i as u64 {
                return Err(CodecError::Sequence {
                    line: number,
                    expected: i as u64,
                    found: event.seq,
                });
            }
            if let Some(prev) = events.last() {
                if matches!(prev.payload, Payload::Outcome(_)) {
                    return Err(CodecError::TrailingEvent(number));
                }
                if event.phase < prev.phase {
                    return Err(CodecError::PhaseOrder { line: number });
                }
            }
            events.push(event);
            lines = number;
        }
        let t = Self { events };
        if t.outcome().is_none() {
            return Err(if lines == 0 {
                CodecError::MissingOutcome
            } else {
                CodecError::Truncated(lines)
            });
        }
        Ok(t)
    }
}

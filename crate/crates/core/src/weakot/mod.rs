//! Weak oblivious transfer from repeated CKS rounds: the general codeword-set
//! protocol and its three-bit specialization, plus their transcripts.

mod codeword;
mod protocol;
mod transcript;

pub use codeword::{word_string, CodewordError, CodewordSet};
pub use protocol::{run_protocol_a, run_protocol_b, AbortReason, ProtocolConfig, ProtocolError, RunOutcome};
pub use transcript::{Actor, CodecError, Event, Payload, Phase, ProtocolTranscript};

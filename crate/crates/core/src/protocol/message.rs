//! Wire format between client and server. Quantum payloads travel alongside
//! the classical message but are never serialized.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::angle::Angle;
use crate::quantum::{Axis, StateVector};

/// Public qubit label; the client maps its own indices through a secret permutation.
pub type QubitId = u32;

/// A group of qubits handed over as one (possibly entangled) state, with
/// `ids[i]` naming qubit `i` of `state`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumBlock {
    pub ids: Vec<QubitId>,
    pub state: StateVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept,
    Abort,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Message {
    PrepareQubits {
        ids: Vec<QubitId>,
        #[serde(skip)]
        blocks: Vec<QuantumBlock>,
    },
    Entangle {
        pairs: Vec<(QubitId, QubitId)>,
    },
    Rotate {
        qubit: QubitId,
        axis: Axis,
        xi: Angle,
    },
    Measure {
        qubit: QubitId,
        delta: Angle,
    },
    MeasureResult {
        qubit: QubitId,
        bit: bool,
    },
    ReturnOutputs {
        qubits: Vec<QubitId>,
    },
    OutputsPayload {
        qubits: Vec<QubitId>,
        #[serde(skip)]
        blocks: Vec<QuantumBlock>,
    },
    /// The server could not honour a request.
    ServerError {
        reason: String,
    },
    Verdict {
        decision: Decision,
    },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::PrepareQubits { .. } => "prepare_qubits",
            Message::Entangle { .. } => "entangle",
            Message::Rotate { .. } => "rotate",
            Message::Measure { .. } => "measure",
            Message::MeasureResult { .. } => "measure_result",
            Message::ReturnOutputs { .. } => "return_outputs",
            Message::OutputsPayload { .. } => "outputs_payload",
            Message::ServerError { .. } => "server_error",
            Message::Verdict { .. } => "verdict",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("message serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Client,
    Server,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub from: Party,
    pub message: Message,
}

/// Ordered, lossless duplex queue that logs everything it carries.
#[derive(Debug, Default)]
pub struct Channel {
    to_server: VecDeque<Message>,
    to_client: VecDeque<Message>,
    transcript: Vec<TranscriptEntry>,
}

impl Channel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn send(&mut self, from: Party, message: Message) {
        self.transcript.push(TranscriptEntry {
            from,
            message: message.clone(),
        });
        match from {
            Party::Client => self.to_server.push_back(message),
            Party::Server => self.to_client.push_back(message),
        }
    }

    pub fn recv(&mut self, to: Party) -> Option<Message> {
        match to {
            Party::Server => self.to_server.pop_front(),
            Party::Client => self.to_client.pop_front(),
        }
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn into_transcript(self) -> Vec<TranscriptEntry> {
        self.transcript
    }
}

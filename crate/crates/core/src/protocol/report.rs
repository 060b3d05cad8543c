//! Versioned, replayable record of one session.

use serde::{Deserialize, Serialize};
use std::fmt::Write;

use super::adversary::AdversaryPolicy;
use super::circuit::CircuitDescription;
use super::client::{TrapResult, Verdict};
use super::message::TranscriptEntry;
use super::session::SessionConfig;
use crate::error::{Error, Result};
use crate::mbqc::CnotPattern;
use crate::quantum::C64;

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub qubits: usize,
    pub units: usize,
    pub traps: usize,
    /// Largest entangled block the server ever held.
    pub peak_block: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub version: u32,
    pub seed: u64,
    pub config: SessionConfig,
    pub circuit: CircuitDescription,
    pub adversary: AdversaryPolicy,
    pub pattern: CnotPattern,
    pub summary: PlanSummary,
    pub transcript: Vec<TranscriptEntry>,
    pub verdict: Verdict,
    /// No trap was checked, so acceptance is vacuous.
    pub unverified: bool,
    pub trap_results: Vec<TrapResult>,
    /// Decrypted logical output, client side only.
    pub output: Option<Vec<C64>>,
    /// Fidelity of `output` with direct simulation of the circuit.
    pub fidelity: Option<f64>,
}

impl SessionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: SessionReport = serde_json::from_str(s)
            .map_err(|e| Error::Protocol(super::circuit::json_error(&e)))?;
        if r.version != REPORT_VERSION {
            return Err(Error::Protocol(format!("unsupported report version {}", r.version)));
        }
        Ok(r)
    }

    /// Human-readable digest.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed        {}", self.seed);
        let _ = writeln!(s, "version     {}", self.version);
        let _ = writeln!(s, "wires       {}", self.circuit.wires);
        let _ = writeln!(s, "gates       {}", self.circuit.gates.len());
        let _ = writeln!(
            s,
            "qubits      {} ({} units, {} traps, peak block {})",
            self.summary.qubits, self.summary.units, self.summary.traps, self.summary.peak_block
        );
        let _ = writeln!(s, "messages    {}", self.transcript.len());
        match &self.verdict {
            Verdict::Accept if self.unverified => {
                let _ = writeln!(s, "verdict     accept (unverified)");
            }
            Verdict::Accept => {
                let _ = writeln!(s, "verdict     accept");
            }
            Verdict::Abort { reason, .. } => {
                let _ = writeln!(s, "verdict     abort: {reason}");
            }
        }
        let passed = self.trap_results.iter().filter(|t| t.passed).count();
        let _ = writeln!(s, "traps       {passed}/{} passed", self.trap_results.len());
        for (i, t) in self.trap_results.iter().enumerate().filter(|(_, t)| !t.passed) {
            let qs: Vec<String> = t.qubits.iter().map(|q| format!("q{q}")).collect();
            let _ = writeln!(s, "  failed #{i} {:?} on {}", t.kind, qs.join(","));
        }
        if let Some(f) = self.fidelity {
            let _ = writeln!(s, "fidelity    {f:.12}");
        }
        if let Some(out) = &self.output {
            let _ = writeln!(s, "output");
            let n = self.circuit.wires;
            for (i, a) in out.iter().enumerate() {
                let _ = writeln!(s, "  |{:0n$b}⟩  {:+.6} {:+.6}i", i, a.re, a.im);
            }
        }
        s
    }
}

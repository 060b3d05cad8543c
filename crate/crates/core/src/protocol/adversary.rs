//! Fixed Pauli-attack schedules for a dishonest server.

use serde::{Deserialize, Serialize};

use super::message::QubitId;
use crate::decompose::Pauli;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attack {
    pub qubit: QubitId,
    pub pauli: Pauli,
}

/// Attacks fire immediately before the victim is measured or returned.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", content = "attacks", rename_all = "snake_case")]
pub enum AdversaryPolicy {
    #[default]
    Honest,
    PauliAttack(Vec<Attack>),
}

impl AdversaryPolicy {
    /// Parse `X@q3,Z@q5,XZ@q0` (also `Y` for `XZ`, and bare numbers).
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.is_empty() || spec.eq_ignore_ascii_case("honest") {
            return Ok(AdversaryPolicy::Honest);
        }
        let mut attacks = Vec::new();
        for part in spec.split(',') {
            let (p, q) = part
                .trim()
                .split_once('@')
                .ok_or_else(|| Error::Protocol(format!("attack `{part}` is not of the form P@qN")))?;
            let pauli = match p.trim().to_ascii_uppercase().as_str() {
                "X" => Pauli::X,
                "Z" => Pauli::Z,
                "XZ" | "ZX" | "Y" => Pauli::XZ,
                other => return Err(Error::Protocol(format!("unknown Pauli `{other}`"))),
            };
            let q = q.trim();
            let num = q.strip_prefix('q').unwrap_or(q);
            let qubit = num
                .parse::<QubitId>()
                .map_err(|_| Error::Protocol(format!("bad qubit `{q}`")))?;
            attacks.push(Attack { qubit, pauli });
        }
        Ok(AdversaryPolicy::PauliAttack(attacks))
    }

    pub fn attacks(&self) -> &[Attack] {
        match self {
            AdversaryPolicy::Honest => &[],
            AdversaryPolicy::PauliAttack(a) => a,
        }
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        for a in self.attacks() {
            if a.qubit as usize >= num_qubits {
                return Err(Error::Protocol(format!(
                    "attack on q{} but the session has {num_qubits} qubits",
                    a.qubit
                )));
            }
            if a.pauli.is_identity() {
                return Err(Error::Protocol("identity attack".into()));
            }
        }
        Ok(())
    }
}

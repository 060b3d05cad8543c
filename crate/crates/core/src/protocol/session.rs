//! End-to-end sessions: compile, run client and server over the channel,
//! and collect everything into a report.

use serde::{Deserialize, Serialize};

use super::adversary::AdversaryPolicy;
use super::circuit::CircuitDescription;
use super::client::{Client, TrapResult, Verdict};
use super::message::{Channel, Message, Party, TranscriptEntry};
use super::plan::{compile_circuit, PlanConfig};
use super::report::{PlanSummary, SessionReport, REPORT_VERSION};
use super::server::Server;
use crate::cluster::{ClusterLayout, QubitRole};
use crate::error::{Error, Result};
use crate::mbqc::cnot_pattern;
use crate::quantum::{fidelity, StateVector, C64};
use crate::rng::{split, stream};

/// Logical input register of a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputSpec {
    Basis { index: usize },
    Amplitudes { amplitudes: Vec<C64> },
}

impl Default for InputSpec {
    fn default() -> Self {
        InputSpec::Basis { index: 0 }
    }
}

impl InputSpec {
    pub fn state(&self, wires: usize) -> Result<StateVector> {
        match self {
            InputSpec::Basis { index } => StateVector::basis(wires, *index),
            InputSpec::Amplitudes { amplitudes } => {
                let s = StateVector::from_amplitudes(amplitudes.clone())?;
                if s.num_qubits() != wires {
                    return Err(Error::DimensionMismatch {
                        expected: wires,
                        actual: s.num_qubits(),
                    });
                }
                Ok(s)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub plan: PlanConfig,
    /// Trap failures tolerated before aborting.
    pub tolerance: usize,
    pub input: InputSpec,
}

/// Run a session with the default configuration.
pub fn run_session(circuit: &CircuitDescription, adversary: &AdversaryPolicy, seed: u64) -> Result<SessionReport> {
    run_session_with(circuit, adversary, seed, &SessionConfig::default())
}

pub fn run_session_with(
    circuit: &CircuitDescription,
    adversary: &AdversaryPolicy,
    seed: u64,
    config: &SessionConfig,
) -> Result<SessionReport> {
    let mut client_rng = split(seed, stream::CLIENT);
    let plan = compile_circuit(circuit, &config.plan, &mut client_rng)?;
    adversary.validate(plan.num_qubits)?;
    let input = config.input.state(circuit.wires)?;
    let mut client = Client::from_plan(&plan, &input, config.tolerance, client_rng)?;
    let mut server = Server::new(adversary, split(seed, stream::SERVER));
    let transcript = drive(&mut client, &mut server)?;

    let verdict = client.verdict().cloned().expect("finished client has a verdict");
    let trap_results = client.trap_results().to_vec();
    let (output, fid) = match client.output() {
        Some(out) => {
            let ideal = circuit.simulate(&input)?;
            (Some(canonical_phase(out.amplitudes())), Some(fidelity(out, &ideal)?))
        }
        None => (None, None),
    };
    Ok(SessionReport {
        version: REPORT_VERSION,
        seed,
        config: config.clone(),
        circuit: circuit.clone(),
        adversary: adversary.clone(),
        pattern: cnot_pattern()?.clone(),
        summary: PlanSummary {
            qubits: plan.num_qubits,
            units: plan.units.len(),
            traps: plan.trap_count(),
            peak_block: server.peak_block(),
        },
        transcript,
        unverified: trap_results.is_empty(),
        verdict,
        trap_results,
        output,
        fidelity: fid,
    })
}

/// Amplitudes with the global phase fixed so the first nonzero one is real and positive.
pub fn canonical_phase(amps: &[C64]) -> Vec<C64> {
    let lead = amps.iter().find(|a| a.norm() > 1e-9).copied().unwrap_or(C64::new(1.0, 0.0));
    let rot = lead.conj() / lead.norm();
    amps.iter().map(|a| a * rot).collect()
}

/// Pump messages between the two parties until the client has decided.
pub fn drive(client: &mut Client, server: &mut Server) -> Result<Vec<TranscriptEntry>> {
    let mut ch = Channel::new();
    while let Some(m) = client.next_message()? {
        ch.send(Party::Client, m);
        let m = ch.recv(Party::Server).expect("just sent");
        let reply = match server.handle(&m) {
            Ok(r) => r,
            Err(e) => Some(Message::ServerError { reason: e.to_string() }),
        };
        if let Some(r) = reply {
            ch.send(Party::Server, r);
            client.receive(ch.recv(Party::Client).expect("just sent"))?;
        }
    }
    if !client.is_finished() {
        return Err(Error::Protocol("session stalled before a verdict".into()));
    }
    Ok(ch.into_transcript())
}

/// Result of a bare trapped-layout session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutOutcome {
    pub verdict: Verdict,
    pub trap_results: Vec<TrapResult>,
    /// Whether any attacked qubit is computational.
    pub attacked_computational: bool,
}

impl LayoutOutcome {
    /// The client accepted although its computation was tampered with.
    pub fn fooled(&self) -> bool {
        self.attacked_computational && self.verdict.is_accept()
    }
}

/// Measure every qubit of `layout` through the protocol with zero tolerance.
pub fn run_layout_session(layout: &ClusterLayout, adversary: &AdversaryPolicy, seed: u64) -> Result<LayoutOutcome> {
    adversary.validate(layout.len())?;
    let mut client = Client::for_layout(layout, 0, split(seed, stream::CLIENT))?;
    let mut server = Server::new(adversary, split(seed, stream::SERVER));
    drive(&mut client, &mut server)?;
    let attacked_computational = adversary
        .attacks()
        .iter()
        .any(|a| matches!(client.role_of(a.qubit), Some(QubitRole::Computational { .. })));
    Ok(LayoutOutcome {
        verdict: client.verdict().cloned().expect("finished client has a verdict"),
        trap_results: client.trap_results().to_vec(),
        attacked_computational,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::adversary::Attack;
    use crate::protocol::circuit::Gate;
    use crate::Pauli;

    fn cnot() -> CircuitDescription {
        let mut c = CircuitDescription::new(2);
        c.push(Gate::CNOT { c: 0, t: 1 });
        c
    }

    #[test]
    fn honest_cnot_on_all_basis_inputs() {
        for index in 0..4 {
            let cfg = SessionConfig {
                input: InputSpec::Basis { index },
                ..Default::default()
            };
            let r = run_session_with(&cnot(), &AdversaryPolicy::Honest, 7 + index as u64, &cfg).unwrap();
            assert!(r.verdict.is_accept(), "{:?}", r.verdict);
            assert!(r.fidelity.unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn empty_circuit_returns_input() {
        let cfg = SessionConfig {
            input: InputSpec::Basis { index: 2 },
            ..Default::default()
        };
        let r = run_session_with(&CircuitDescription::new(2), &AdversaryPolicy::Honest, 3, &cfg).unwrap();
        assert!(r.verdict.is_accept());
        assert!(r.fidelity.unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn zero_traps_is_flagged_unverified() {
        let cfg = SessionConfig {
            plan: PlanConfig {
                traps_per_block: Some(0),
                ..Default::default()
            },
            ..Default::default()
        };
        let r = run_session_with(&cnot(), &AdversaryPolicy::Honest, 1, &cfg).unwrap();
        assert!(r.verdict.is_accept());
        assert!(r.unverified);
        assert!(r.fidelity.unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn x_on_z_trap_aborts() {
        let layout = ClusterLayout::grid(2, 2).unwrap();
        let layout = crate::cluster::place_traps(&layout, &mut crate::rng::seeded(4), 4).unwrap();
        for seed in 0..20 {
            let mut client = Client::for_layout(&layout, 0, split(seed, stream::CLIENT)).unwrap();
            let target = client
                .trap_qubits()
                .into_iter()
                .find(|(_, r)| matches!(r, QubitRole::TrapZ { .. }))
                .unwrap()
                .0;
            let adv = AdversaryPolicy::PauliAttack(vec![Attack {
                qubit: target,
                pauli: Pauli::X,
            }]);
            let mut server = Server::new(&adv, split(seed, stream::SERVER));
            drive(&mut client, &mut server).unwrap();
            assert!(!client.verdict().unwrap().is_accept());
        }
    }

    #[test]
    fn honest_layout_sessions_accept() {
        let layout = ClusterLayout::grid(2, 3).unwrap();
        let layout = crate::cluster::place_traps(&layout, &mut crate::rng::seeded(9), 6).unwrap();
        for seed in 0..30 {
            let o = run_layout_session(&layout, &AdversaryPolicy::Honest, seed).unwrap();
            assert!(o.verdict.is_accept());
            assert!(!o.fooled());
        }
    }
}

//! Hybrid-blind quantum computation: a state-vector simulator, measurement-based
//! CNOT units on a brickwork cluster, trap-based verification, and the
//! client/server protocol that ties them together.

#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod angle;
pub mod cluster;
pub mod decompose;
pub mod error;
pub mod mbqc;
pub mod protocol;
pub mod qft;
pub mod quantum;
pub mod rng;

pub use angle::Angle;
pub use decompose::{AxisOrder, DecompParams, GateOp, Pauli, TableGate};
pub use error::{Error, Result};
pub use quantum::{Axis, StateVector, Unitary};
pub use protocol::{
    run_session, run_session_with, AdversaryPolicy, CircuitDescription, Gate, SessionConfig, SessionReport, Verdict,
};
pub use qft::{build_qft, run_blind_qft, QftSpec};

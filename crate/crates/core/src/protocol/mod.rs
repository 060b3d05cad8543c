//! The two-party protocol: circuit compilation, messages, client and server
//! state machines, and whole-session orchestration.

pub mod adversary;
pub mod circuit;
pub mod client;
pub mod message;
pub mod plan;
pub mod report;
pub mod server;
pub mod session;

pub use adversary::{AdversaryPolicy, Attack};
pub use circuit::{random_circuit, CircuitDescription, Gate};
pub use client::{client_verify, Client, TrapResult, Verdict};
pub use message::{Channel, Decision, Message, Party, QubitId, TranscriptEntry};
pub use plan::{compile_circuit, decrypt_byproduct, encrypt_rotation, HybridPlan, PlanConfig, Step};
pub use report::{PlanSummary, SessionReport, REPORT_VERSION};
pub use server::Server;
pub use session::{drive, run_layout_session, run_session, run_session_with, InputSpec, LayoutOutcome, SessionConfig};

//! Empirical blindness and verifiability checks.

pub mod blindness;
pub mod stats;
pub mod verifiability;

pub use blindness::{
    angle_distribution_test, input_blindness_check, measurement_angle_test, transcript_angle_test, BlindnessCheck,
};
pub use stats::DistributionReport;
pub use verifiability::{
    bound, detection_oracle, standard_layout, verifiability_mc, AttackSpec, McEstimate, OracleResult,
    VerifiabilityRow,
};

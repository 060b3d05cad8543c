//! What the server can learn: the average prepared state, the law of the
//! encrypted rotation angles, and the law of the measurement angles.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stats::{goodness_of_fit, independence, DistributionReport};
use crate::angle::{eight_angles, rotation_set, Angle};
use crate::error::{Error, Result};
use crate::mbqc::adaptive_angle;
use crate::protocol::{random_circuit, run_session, AdversaryPolicy, Message, Party};
use crate::quantum::{ensemble_density, ket_bit, plus_theta, DensityMatrix, StateVector};
use crate::rng::{split, stream};

pub const MIN_TRIALS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlindnessCheck {
    pub states: usize,
    /// Entries of the averaged density matrix, row-major.
    pub density: Vec<[f64; 2]>,
    /// Largest entrywise distance from `I/2`.
    pub max_deviation: f64,
}

/// Average over a weighted single-qubit ensemble and its distance from `I/2`.
pub fn ensemble_check(ensemble: &[(StateVector, f64)]) -> Result<BlindnessCheck> {
    let rho = ensemble_density(ensemble)?;
    let mixed = DensityMatrix::maximally_mixed(2);
    Ok(BlindnessCheck {
        states: ensemble.len(),
        density: (0..4)
            .map(|i| {
                let c = rho.get(i / 2, i % 2);
                [c.re, c.im]
            })
            .collect(),
        max_deviation: rho.max_abs_diff(&mixed),
    })
}

/// The sixteen `|±_ω⟩` and two `|0⟩, |1⟩` states, equally weighted.
pub fn prepared_ensemble(include_basis: bool) -> Vec<(StateVector, f64)> {
    let mut kets = Vec::new();
    for w in eight_angles() {
        for minus in [false, true] {
            kets.push(plus_theta(w.radians(), minus));
        }
    }
    if include_basis {
        kets.push(ket_bit(false));
        kets.push(ket_bit(true));
    }
    let p = 1.0 / kets.len() as f64;
    kets.into_iter().map(|k| (StateVector::single(k), p)).collect()
}

pub fn input_blindness_check() -> Result<BlindnessCheck> {
    ensemble_check(&prepared_ensemble(true))
}

fn angle_names(angles: &[Angle]) -> Vec<String> {
    angles.iter().map(|a| a.to_string()).collect()
}

/// Draw `ν` from `prior` (weights over the encryption set) and a uniform pad,
/// then test (a) the law of `ξ = ν + rπ` against its analytic law and (b) the
/// independence of `r` from `ξ`.
pub fn angle_distribution_test<R: Rng + ?Sized>(
    prior: &[f64; 6],
    trials: usize,
    rng: &mut R,
) -> Result<(DistributionReport, DistributionReport)> {
    if trials < MIN_TRIALS {
        return Err(Error::Analysis(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    let total: f64 = prior.iter().sum();
    if total <= 0.0 || prior.iter().any(|&p| p < 0.0) {
        return Err(Error::Analysis("prior must be non-negative with positive mass".into()));
    }
    let set: Vec<Angle> = rotation_set().collect();
    let idx = |a: Angle| set.iter().position(|&s| s == a.reduced()).expect("closed under +π");
    let reference: Vec<f64> = set
        .iter()
        .map(|&s| 0.5 * (prior[idx(s)] + prior[idx(s + Angle::PI)]) / total)
        .collect();

    let mut xi_counts = vec![0u64; 6];
    let mut table = vec![vec![0u64; 6]; 2];
    for _ in 0..trials {
        let mut u = rng.random::<f64>() * total;
        let mut k = 0;
        while k < 5 && u >= prior[k] {
            u -= prior[k];
            k += 1;
        }
        let r: bool = rng.random();
        let xi = idx(set[k] + Angle::pi_times(r));
        xi_counts[xi] += 1;
        table[r as usize][xi] += 1;
    }
    let a = goodness_of_fit("xi", angle_names(&set), xi_counts, reference, 1)?;
    let b = independence("r|xi", &["r=0".into(), "r=1".into()], &angle_names(&set), &table)?;
    Ok((a, b))
}

/// Law of `δ = ω + (−1)^{sX}κ + (sZ⊕r)π` under uniform `ω`, pads, outcomes
/// and target angles drawn from `kappas`.
pub fn measurement_angle_test<R: Rng + ?Sized>(kappas: &[Angle], trials: usize, rng: &mut R) -> Result<DistributionReport> {
    if trials < MIN_TRIALS {
        return Err(Error::Analysis(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    if kappas.is_empty() {
        return Err(Error::Analysis("no target angles".into()));
    }
    let mut counts = vec![0u64; 8];
    for _ in 0..trials {
        let omega = Angle::quarters(rng.random_range(0..8));
        let kappa = kappas[rng.random_range(0..kappas.len())];
        let d = adaptive_angle(omega, kappa, rng.random(), rng.random(), rng.random());
        counts[d.quarter_index().ok_or_else(|| Error::Analysis(format!("δ = {d} off the quarter grid")))? as usize] += 1;
    }
    let eight: Vec<Angle> = eight_angles().collect();
    goodness_of_fit("delta", angle_names(&eight), counts, vec![0.125; 8], 1)
}

/// Law of every `Measure` angle the server sees over `sessions` honest runs
/// of random two-wire circuits.
pub fn transcript_angle_test(sessions: usize, seed: u64) -> Result<DistributionReport> {
    let mut counts = vec![0u64; 8];
    for s in 0..sessions as u64 {
        let mut rng = split(seed, stream::TRIALS + s);
        let c = random_circuit(2, 6, &mut rng);
        let r = run_session(&c, &AdversaryPolicy::Honest, seed ^ s.wrapping_mul(0x9e37_79b9_7f4a_7c15))?;
        for e in r.transcript.iter().filter(|e| e.from == Party::Client) {
            if let Message::Measure { delta, .. } = e.message {
                counts[delta
                    .quarter_index()
                    .ok_or_else(|| Error::Analysis(format!("δ = {delta} off the quarter grid")))?
                    as usize] += 1;
            }
        }
    }
    let eight: Vec<Angle> = eight_angles().collect();
    goodness_of_fit("delta (transcripts)", angle_names(&eight), counts, vec![0.125; 8], 1)
}

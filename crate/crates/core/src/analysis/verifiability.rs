//! Probability that a Pauli attack corrupts the computation yet passes every
//! trap: exhaustively on small layouts, and by running protocol sessions.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::angle::Angle;
use crate::cluster::{
    component_offsets, component_parity_zero, place_traps, ClusterLayout, QubitRole, TrapComponent,
};
use crate::decompose::Pauli;
use crate::error::{Error, Result};
use crate::protocol::{run_layout_session, AdversaryPolicy, Attack, QubitId};
use crate::rng::{seeded, split, stream};

/// Largest layout the exhaustive oracle accepts.
pub const ORACLE_MAX_QUBITS: usize = 16;
const ORACLE_MAX_PLACEMENTS: u128 = 5_000_000;

/// Numbers of X, Z and XZ attack sites, placed without repetition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttackSpec {
    pub x: usize,
    pub z: usize,
    pub xz: usize,
}

impl AttackSpec {
    pub fn new(x: usize, z: usize, xz: usize) -> Self {
        AttackSpec { x, z, xz }
    }

    /// Total Pauli weight.
    pub fn alpha(&self) -> usize {
        self.x + self.z + self.xz
    }

    pub fn paulis(&self) -> Vec<Pauli> {
        std::iter::repeat_n(Pauli::X, self.x)
            .chain(std::iter::repeat_n(Pauli::Z, self.z))
            .chain(std::iter::repeat_n(Pauli::XZ, self.xz))
            .collect()
    }
}

impl std::fmt::Display for AttackSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "X×{} Z×{} XZ×{}", self.x, self.z, self.xz)
    }
}

/// Claimed ceiling on the miss probability for total weight `alpha`.
pub fn bound(alpha: usize) -> f64 {
    0.5f64.powf(alpha as f64 / 3.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub placements: u64,
    /// Fraction of placements that touch a computational qubit.
    pub affecting: f64,
    /// Probability that the computation is touched and no trap fires.
    pub miss_probability: f64,
}

fn choose(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Pass probability of one planar component under `attacks` on its members,
/// averaged over every choice of trap angles.
fn component_pass(layout: &ClusterLayout, comp: &TrapComponent, attacks: &[(usize, Pauli)]) -> Result<f64> {
    let offsets = component_offsets(layout, comp)?;
    let k = comp.members.len();
    let pads = vec![false; layout.len()];
    let mut total = 0.0;
    let combos = 8usize.pow(k as u32);
    let mut l = layout.clone();
    for code in 0..combos {
        let mut c = code;
        for &q in &comp.members {
            l.roles[q] = QubitRole::TrapPlanar {
                mu: Angle::quarters((c % 8) as i32),
            };
            c /= 8;
        }
        let honest = component_parity_zero(&l, comp, &offsets, &pads, &[])?;
        let attacked = component_parity_zero(&l, comp, &offsets, &pads, attacks)?;
        total += if honest > 0.5 { attacked } else { 1.0 - attacked };
    }
    Ok(total / combos as f64)
}

/// Exact miss probability over every placement of the attack on `layout`,
/// with trap angles and pads averaged out.
pub fn detection_oracle(layout: &ClusterLayout, attack: AttackSpec) -> Result<OracleResult> {
    let n = layout.len();
    if n > ORACLE_MAX_QUBITS {
        return Err(Error::Analysis(format!(
            "oracle is limited to {ORACLE_MAX_QUBITS} qubits, layout has {n}"
        )));
    }
    if attack.alpha() > n {
        return Err(Error::Analysis(format!("{} attack sites on {n} qubits", attack.alpha())));
    }
    let count = choose(n, attack.x) * choose(n - attack.x, attack.z) * choose(n - attack.x - attack.z, attack.xz);
    if count > ORACLE_MAX_PLACEMENTS {
        return Err(Error::Analysis(format!("{count} placements exceed the oracle budget")));
    }
    if attack.alpha() == 0 {
        return Ok(OracleResult {
            placements: 1,
            affecting: 0.0,
            miss_probability: 0.0,
        });
    }
    let comps = layout.planar_components();
    let paulis = attack.paulis();
    let mut cache: HashMap<(usize, Vec<(usize, Pauli)>), f64> = HashMap::new();
    let mut assignment: Vec<Option<Pauli>> = vec![None; n];
    let mut miss = 0.0;
    let mut affecting = 0u64;
    let mut placements = 0u64;

    fn walk(
        depth: usize,
        paulis: &[Pauli],
        assignment: &mut Vec<Option<Pauli>>,
        visit: &mut dyn FnMut(&[Option<Pauli>]) -> Result<()>,
    ) -> Result<()> {
        if depth == paulis.len() {
            return visit(assignment);
        }
        // Identical Paulis are placed in increasing qubit order to count sets, not sequences.
        let start = if depth > 0 && paulis[depth - 1] == paulis[depth] {
            assignment
                .iter()
                .rposition(|a| *a == Some(paulis[depth]))
                .map_or(0, |p| p + 1)
        } else {
            0
        };
        for q in start..assignment.len() {
            if assignment[q].is_none() {
                assignment[q] = Some(paulis[depth]);
                walk(depth + 1, paulis, assignment, visit)?;
                assignment[q] = None;
            }
        }
        Ok(())
    }

    let mut visit = |a: &[Option<Pauli>]| -> Result<()> {
        placements += 1;
        let touches = a
            .iter()
            .enumerate()
            .any(|(q, p)| p.is_some() && matches!(layout.roles[q], QubitRole::Computational { .. }));
        if !touches {
            return Ok(());
        }
        affecting += 1;
        let mut pass = 1.0;
        for (q, p) in a.iter().enumerate() {
            if let (Some(p), QubitRole::TrapZ { .. }) = (p, layout.roles[q]) {
                if p.x {
                    pass = 0.0;
                }
            }
        }
        if pass == 0.0 {
            return Ok(());
        }
        for (i, c) in comps.iter().enumerate() {
            let hits: Vec<(usize, Pauli)> = c
                .members
                .iter()
                .filter_map(|&q| a[q].map(|p| (q, p)))
                .collect();
            if hits.is_empty() {
                continue;
            }
            let key = (i, hits.clone());
            let p = match cache.get(&key) {
                Some(&p) => p,
                None => {
                    let p = component_pass(layout, c, &hits)?;
                    cache.insert(key, p);
                    p
                }
            };
            pass *= p;
        }
        miss += pass;
        Ok(())
    };
    walk(0, &paulis, &mut assignment, &mut visit)?;
    Ok(OracleResult {
        placements,
        affecting: affecting as f64 / placements as f64,
        miss_probability: miss / placements as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: usize,
    pub misses: usize,
    pub rate: f64,
    pub stderr: f64,
}

/// Run `trials` protocol sessions on `layout`, each with a fresh uniformly
/// random placement of the attack, and count accepted corrupted runs.
pub fn verifiability_mc(layout: &ClusterLayout, attack: AttackSpec, trials: usize, seed: u64) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::Analysis("no trials".into()));
    }
    let n = layout.len();
    if attack.alpha() > n {
        return Err(Error::Analysis(format!("{} attack sites on {n} qubits", attack.alpha())));
    }
    let paulis = attack.paulis();
    let misses: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = split(seed, stream::ADVERSARY + (t << 8));
            let sites = sample(&mut rng, n, paulis.len());
            let attacks = sites
                .iter()
                .zip(&paulis)
                .map(|(q, &pauli)| Attack {
                    qubit: q as QubitId,
                    pauli,
                })
                .collect();
            let policy = AdversaryPolicy::PauliAttack(attacks);
            run_layout_session(layout, &policy, seed.wrapping_add(stream::TRIALS + t)).map(|o| o.fooled())
        })
        .collect::<Result<_>>()?;
    let m = misses.iter().filter(|&&b| b).count();
    let rate = m as f64 / trials as f64;
    Ok(McEstimate {
        trials,
        misses: m,
        rate,
        stderr: (rate * (1.0 - rate) / trials as f64).sqrt(),
    })
}

/// `rows × cols` grid with an equal number of traps, placed from `seed`.
pub fn standard_layout(rows: usize, cols: usize, seed: u64) -> Result<ClusterLayout> {
    let grid = ClusterLayout::grid(rows, cols)?;
    let traps = grid.len();
    place_traps(&grid, &mut seeded(seed ^ stream::LAYOUT), traps)
}

/// One line of the verifiability table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifiabilityRow {
    pub attack: AttackSpec,
    pub alpha: usize,
    pub oracle: f64,
    pub mc: McEstimate,
    pub bound: f64,
    /// `|mc − oracle| ≤ 3σ` with `σ` from the oracle value.
    pub agrees: bool,
    pub within_bound: bool,
}

impl VerifiabilityRow {
    pub fn compute(layout: &ClusterLayout, attack: AttackSpec, trials: usize, seed: u64) -> Result<Self> {
        let oracle = detection_oracle(layout, attack)?.miss_probability;
        let mc = verifiability_mc(layout, attack, trials, seed)?;
        let sigma = (oracle * (1.0 - oracle) / trials as f64).sqrt();
        let agrees = (mc.rate - oracle).abs() <= 3.0 * sigma + 1e-12;
        let b = bound(attack.alpha());
        Ok(VerifiabilityRow {
            attack,
            alpha: attack.alpha(),
            oracle,
            within_bound: mc.rate <= b,
            bound: b,
            mc,
            agrees,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_attack_never_misses() {
        let l = standard_layout(2, 2, 1).unwrap();
        let r = detection_oracle(&l, AttackSpec::default()).unwrap();
        assert_eq!(r.miss_probability, 0.0);
    }

    #[test]
    fn placement_counts() {
        let l = standard_layout(2, 2, 1).unwrap();
        assert_eq!(detection_oracle(&l, AttackSpec::new(1, 0, 0)).unwrap().placements, 8);
        assert_eq!(detection_oracle(&l, AttackSpec::new(2, 0, 0)).unwrap().placements, 28);
        assert_eq!(detection_oracle(&l, AttackSpec::new(1, 1, 1)).unwrap().placements, 336);
        assert_eq!(detection_oracle(&l, AttackSpec::new(0, 2, 1)).unwrap().placements, 168);
    }

    #[test]
    fn single_z_misses_only_on_computational() {
        let l = standard_layout(2, 3, 3).unwrap();
        let r = detection_oracle(&l, AttackSpec::new(0, 1, 0)).unwrap();
        assert!((r.miss_probability - 0.5).abs() < 1e-12);
    }

    #[test]
    fn oversize_layout_rejected() {
        let l = standard_layout(3, 6, 1).unwrap();
        assert!(detection_oracle(&l, AttackSpec::new(1, 0, 0)).is_err());
    }
}

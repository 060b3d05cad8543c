//! Quantum Fourier transform compiled into the protocol's gate set.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::decompose::{controlled_u_decomp, expand_controlled, GateOp};
use crate::error::{Error, Result};
use crate::protocol::{run_session_with, AdversaryPolicy, CircuitDescription, Gate, InputSpec, SessionConfig, SessionReport};
use crate::quantum::{Unitary, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QftSpec {
    pub wires: usize,
    pub include_swap: bool,
}

impl QftSpec {
    pub fn new(wires: usize) -> Self {
        QftSpec {
            wires,
            include_swap: true,
        }
    }
}

/// A compiled QFT: `e^{i·global_phase}` times the circuit's unitary is the transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QftCircuit {
    pub circuit: CircuitDescription,
    pub global_phase: f64,
}

/// `diag(1, e^{2πi/2^k})`.
pub fn g_k(k: u32) -> Unitary {
    Unitary::phase(2.0 * PI / f64::powi(2.0, k as i32))
}

/// The `2^n`-point DFT matrix, `ω^{jk}/√N`.
pub fn dft_matrix(wires: usize) -> Unitary {
    let dim = 1usize << wires;
    let norm = 1.0 / (dim as f64).sqrt();
    let data = (0..dim * dim)
        .map(|i| {
            let (j, k) = (i / dim, i % dim);
            C64::from_polar(norm, 2.0 * PI * ((j * k) % dim) as f64 / dim as f64)
        })
        .collect();
    Unitary::from_vec(dim, data)
}

fn snap(wire: usize, angle: f64) -> Result<Option<Gate>> {
    let eighths = angle / (PI / 8.0);
    let k = eighths.round();
    if (eighths - k).abs() > 1e-9 {
        return Err(Error::Unsupported(format!(
            "rotation by {angle} rad is finer than the π/8 grid"
        )));
    }
    let k = (k as i64).rem_euclid(16) as i32;
    Ok(match k {
        0 => None,
        k if k % 2 == 0 => Some(Gate::RZ { w: wire, k: k / 2 }),
        k => Some(Gate::RZ8 { w: wire, k }),
    })
}

/// H and controlled-`G_k` layers in textbook order, then the wire reversal.
pub fn build_qft(spec: QftSpec) -> Result<QftCircuit> {
    let n = spec.wires;
    if n < 2 {
        return Err(Error::Circuit("a QFT needs at least two wires".into()));
    }
    let mut c = CircuitDescription::new(n);
    let mut phase = 0.0;
    for j in 0..n {
        c.push(Gate::H { w: j });
        for k in 2..=(n - j) as u32 {
            let control = j + k as usize - 1;
            let t = 2.0 * PI / f64::powi(2.0, k as i32);
            let cd = controlled_u_decomp(&g_k(k), t, 0.0, 0.0, t / 2.0)?;
            let e = expand_controlled(&cd, control, j);
            phase += e.global_phase;
            for op in e.ops {
                match op {
                    GateOp::Cnot { control, target } => {
                        c.push(Gate::CNOT { c: control, t: target });
                    }
                    GateOp::Rotation { wire, angle, .. } => {
                        if let Some(g) = snap(wire, angle)? {
                            c.push(g);
                        }
                    }
                }
            }
        }
    }
    if spec.include_swap {
        for j in 0..n / 2 {
            let (a, b) = (j, n - 1 - j);
            c.push(Gate::CNOT { c: a, t: b });
            c.push(Gate::CNOT { c: b, t: a });
            c.push(Gate::CNOT { c: a, t: b });
        }
    }
    c.validate()?;
    Ok(QftCircuit {
        circuit: c,
        global_phase: phase,
    })
}

/// Blind QFT on a basis input through a full honest session.
pub fn run_blind_qft(spec: QftSpec, input_index: usize, seed: u64) -> Result<SessionReport> {
    if spec.wires != 2 {
        return Err(Error::Unsupported(format!(
            "blind execution needs angles in the encryption set; the {}-wire QFT does not fit",
            spec.wires
        )));
    }
    let q = build_qft(spec)?;
    let config = SessionConfig {
        input: InputSpec::Basis { index: input_index },
        ..Default::default()
    };
    run_session_with(&q.circuit, &AdversaryPolicy::Honest, seed, &config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phased(q: &QftCircuit) -> Unitary {
        q.circuit.unitary().unwrap().scale(C64::from_polar(1.0, q.global_phase))
    }

    #[test]
    fn two_wire_layout() {
        let q = build_qft(QftSpec::new(2)).unwrap();
        let g = &q.circuit.gates;
        assert_eq!(g[0], Gate::H { w: 0 });
        assert_eq!(q.circuit.cnot_count(), 5);
        assert!(g.contains(&Gate::H { w: 1 }));
        assert!(!g.iter().any(|g| matches!(g, Gate::RZ8 { .. })));
        let no_swap = build_qft(QftSpec {
            wires: 2,
            include_swap: false,
        })
        .unwrap();
        assert_eq!(no_swap.circuit.gates.len(), g.len() - 3);
    }

    #[test]
    fn matrices_match_dft() {
        for n in 2..=3 {
            let q = build_qft(QftSpec::new(n)).unwrap();
            assert!(phased(&q).approx_eq(&dft_matrix(n), 1e-10), "n = {n}");
        }
        let three = build_qft(QftSpec::new(3)).unwrap();
        assert!(three.circuit.gates.iter().any(|g| matches!(g, Gate::RZ8 { .. })));
    }

    #[test]
    fn four_wires_unsupported() {
        assert!(matches!(build_qft(QftSpec::new(4)), Err(Error::Unsupported(_))));
        assert!(matches!(run_blind_qft(QftSpec::new(3), 0, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn dft_entries() {
        let d = dft_matrix(2);
        let i = C64::new(0.0, 1.0);
        for j in 0..4 {
            for k in 0..4 {
                assert!((d.get(j, k) - i.powu((j * k) as u32) * 0.5).norm() < 1e-15);
            }
        }
    }
}

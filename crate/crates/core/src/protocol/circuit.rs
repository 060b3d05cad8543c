//! Logical circuits over `{H, S, T, X, Y, Z, RZ(kπ/4), RZ8(kπ/8), CNOT}` and
//! their direct state-vector simulation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decompose::{embed_cnot, TableGate};
use crate::error::{Error, Result};
use crate::quantum::{rotation, Axis, StateVector, Unitary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "g")]
pub enum Gate {
    H { w: usize },
    S { w: usize },
    T { w: usize },
    X { w: usize },
    Y { w: usize },
    Z { w: usize },
    /// `R_z(kπ/4)`.
    RZ { w: usize, k: i32 },
    /// `R_z(kπ/8)`; representable but outside the protocol's angle set.
    RZ8 { w: usize, k: i32 },
    CNOT { c: usize, t: usize },
}

impl Gate {
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::H { w }
            | Gate::S { w }
            | Gate::T { w }
            | Gate::X { w }
            | Gate::Y { w }
            | Gate::Z { w }
            | Gate::RZ { w, .. }
            | Gate::RZ8 { w, .. } => vec![w],
            Gate::CNOT { c, t } => vec![c, t],
        }
    }

    /// Table gate for the fixed single-qubit gates.
    pub fn table_gate(&self) -> Option<TableGate> {
        Some(match self {
            Gate::H { .. } => TableGate::H,
            Gate::S { .. } => TableGate::S,
            Gate::T { .. } => TableGate::T,
            Gate::X { .. } => TableGate::X,
            Gate::Y { .. } => TableGate::Y,
            Gate::Z { .. } => TableGate::Z,
            _ => return None,
        })
    }

    /// Single-qubit matrix, `None` for CNOT.
    pub fn matrix(&self) -> Option<Unitary> {
        if let Some(t) = self.table_gate() {
            return Some(t.matrix());
        }
        match *self {
            Gate::RZ { k, .. } => Some(rotation(Axis::Z, k as f64 * std::f64::consts::FRAC_PI_4)),
            Gate::RZ8 { k, .. } => Some(rotation(Axis::Z, k as f64 * std::f64::consts::PI / 8.0)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitDescription {
    pub wires: usize,
    pub gates: Vec<Gate>,
}

impl CircuitDescription {
    pub fn new(wires: usize) -> Self {
        CircuitDescription {
            wires,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        self.gates.push(g);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.wires == 0 {
            return Err(Error::Circuit("circuit needs at least one wire".into()));
        }
        for (i, g) in self.gates.iter().enumerate() {
            for w in g.wires() {
                if w >= self.wires {
                    return Err(Error::Circuit(format!(
                        "gate {i}: wire {w} out of range for {} wires",
                        self.wires
                    )));
                }
            }
            if let Gate::CNOT { c, t } = *g {
                if c == t {
                    return Err(Error::Circuit(format!("gate {i}: CNOT control equals target")));
                }
            }
        }
        Ok(())
    }

    /// Parse and validate; syntax errors carry line and column.
    pub fn from_json(s: &str) -> Result<Self> {
        let c: CircuitDescription = serde_json::from_str(s).map_err(|e| Error::Circuit(json_error(&e)))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("circuit serializes")
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::CNOT { .. })).count()
    }

    /// Apply the gates directly to `input`.
    pub fn simulate(&self, input: &StateVector) -> Result<StateVector> {
        self.validate()?;
        if input.num_qubits() != self.wires {
            return Err(Error::DimensionMismatch {
                expected: self.wires,
                actual: input.num_qubits(),
            });
        }
        let mut s = input.clone();
        for g in &self.gates {
            match *g {
                Gate::CNOT { c, t } => s.apply_two(c, t, &Unitary::cnot())?,
                _ => {
                    let w = g.wires()[0];
                    s.apply_single(w, &g.matrix().expect("single-qubit gate"))?;
                }
            }
        }
        Ok(s)
    }

    /// Full unitary; only sensible for a handful of wires.
    pub fn unitary(&self) -> Result<Unitary> {
        self.validate()?;
        let n = self.wires;
        let mut u = Unitary::identity(1 << n);
        for g in &self.gates {
            let m = match *g {
                Gate::CNOT { c, t } => embed_cnot(c, t, n),
                _ => crate::decompose::embed_single(
                    &g.matrix().expect("single-qubit gate"),
                    g.wires()[0],
                    n,
                ),
            };
            u = &m * &u;
        }
        Ok(u)
    }
}

/// `line L, column C: message` for a JSON error.
pub(crate) fn json_error(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    let msg = msg.split(" at line ").next().unwrap_or(&msg);
    format!("line {}, column {}: {msg}", e.line(), e.column())
}

/// Random circuit over the protocol's gate set (no `RZ8`).
pub fn random_circuit<R: Rng + ?Sized>(wires: usize, max_gates: usize, rng: &mut R) -> CircuitDescription {
    let mut c = CircuitDescription::new(wires);
    let len = rng.random_range(0..=max_gates);
    for _ in 0..len {
        let w = rng.random_range(0..wires);
        let g = match rng.random_range(0..if wires > 1 { 8 } else { 7 }) {
            0 => Gate::H { w },
            1 => Gate::S { w },
            2 => Gate::T { w },
            3 => Gate::X { w },
            4 => Gate::Y { w },
            5 => Gate::Z { w },
            6 => Gate::RZ {
                w,
                k: rng.random_range(0..8),
            },
            _ => {
                let mut t = rng.random_range(0..wires - 1);
                if t >= w {
                    t += 1;
                }
                Gate::CNOT { c: w, t }
            }
        };
        c.gates.push(g);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let s = r#"{"wires":2,"gates":[{"g":"H","w":0},{"g":"CNOT","c":0,"t":1},{"g":"RZ","w":0,"k":3}]}"#;
        let c = CircuitDescription::from_json(s).unwrap();
        assert_eq!(c.gates[1], Gate::CNOT { c: 0, t: 1 });
        assert_eq!(c.gates[2], Gate::RZ { w: 0, k: 3 });
        assert_eq!(CircuitDescription::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn parse_errors_have_positions() {
        let err = CircuitDescription::from_json("{\"wires\": 2,\n \"gates\": [}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(CircuitDescription::from_json(r#"{"wires":1,"gates":[{"g":"H","w":3}]}"#).is_err());
        assert!(CircuitDescription::from_json(r#"{"wires":2,"gates":[{"g":"CNOT","c":1,"t":1}]}"#).is_err());
        assert!(CircuitDescription::from_json(r#"{"wires":2,"gates":[{"g":"Q","w":0}]}"#).is_err());
    }

    #[test]
    fn simulate_matches_unitary() {
        let mut rng = crate::rng::seeded(4);
        for _ in 0..20 {
            let c = random_circuit(2, 10, &mut rng);
            let input = crate::mbqc::random_state(2, &mut rng).unwrap();
            let a = c.simulate(&input).unwrap();
            let b = c.unitary().unwrap().apply(input.amplitudes());
            for (x, y) in a.amplitudes().iter().zip(&b) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn bell_circuit() {
        let mut c = CircuitDescription::new(2);
        c.push(Gate::H { w: 0 }).push(Gate::CNOT { c: 0, t: 1 });
        let out = c.simulate(&StateVector::zero(2).unwrap()).unwrap();
        let a = out.amplitudes();
        assert!((a[0].norm() - a[3].norm()).abs() < 1e-12 && a[1].norm() < 1e-12);
    }
}

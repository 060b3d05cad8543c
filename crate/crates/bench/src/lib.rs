//! Shared fixtures for the benchmarks.

use hubqc_core::mbqc::random_state;
use hubqc_core::protocol::{CircuitDescription, Gate};
use hubqc_core::rng::seeded;
use hubqc_core::StateVector;

/// Random normalized register of `n` qubits.
pub fn register(n: usize, seed: u64) -> StateVector {
    random_state(n, &mut seeded(seed)).expect("within the simulator cap")
}

/// `depth` rounds of H on every wire followed by a CNOT ladder.
pub fn ladder(wires: usize, depth: usize) -> CircuitDescription {
    let mut c = CircuitDescription::new(wires);
    for _ in 0..depth {
        for w in 0..wires {
            c.push(Gate::H { w });
        }
        for w in 0..wires - 1 {
            c.push(Gate::CNOT { c: w, t: w + 1 });
        }
    }
    c
}

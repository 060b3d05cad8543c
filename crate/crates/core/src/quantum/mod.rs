//! Exact dense simulation: gate matrices, state vectors and density matrices.
//!
//! Convention: qubit 0 is the most significant bit of a basis-state index, so
//! `|q0 q1 … q_{n-1}⟩` has index `q0·2^{n-1} + … + q_{n-1}`.

mod density;
mod state;
mod unitary;

pub use density::{ensemble_density, DensityMatrix};
pub use state::{fidelity, max_qubits, PlanarBasis, StateVector, DEFAULT_MAX_QUBITS};
pub use unitary::{rotation, Axis, Unitary};

use num_complex::Complex64;

pub type C64 = Complex64;

/// A single-qubit ket `(c0, c1)`.
pub type Ket1 = [C64; 2];

pub const fn c(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

/// `|±_θ⟩ = (|0⟩ ± e^{iθ}|1⟩)/√2`; `minus` selects the `−` branch.
pub fn plus_theta(theta: f64, minus: bool) -> Ket1 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if minus { -1.0 } else { 1.0 };
    [c(s, 0.0), C64::from_polar(sign * s, theta)]
}

pub fn ket_zero() -> Ket1 {
    [c(1.0, 0.0), c(0.0, 0.0)]
}

pub fn ket_one() -> Ket1 {
    [c(0.0, 0.0), c(1.0, 0.0)]
}

/// Computational basis ket `|bit⟩`.
pub fn ket_bit(bit: bool) -> Ket1 {
    if bit {
        ket_one()
    } else {
        ket_zero()
    }
}

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::ops::Mul;

use super::{c, C64};

/// Rotation axis of a single-qubit rotation operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        };
        f.write_str(s)
    }
}

/// Dense square complex matrix, row-major. Used for gates on one or two qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary {
    dim: usize,
    data: Vec<C64>,
}

impl Unitary {
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "matrix must be square");
            data.extend_from_slice(r);
        }
        Unitary { dim, data }
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), dim * dim);
        Unitary { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![c(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = c(1.0, 0.0);
        }
        Unitary { dim, data }
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let dim = entries.len();
        let mut u = Unitary::from_vec(dim, vec![c(0.0, 0.0); dim * dim]);
        for (i, &e) in entries.iter().enumerate() {
            u.data[i * dim + i] = e;
        }
        u
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn pauli_x() -> Self {
        Unitary::from_rows(&[&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]])
    }

    pub fn pauli_y() -> Self {
        Unitary::from_rows(&[&[c(0.0, 0.0), c(0.0, -1.0)], &[c(0.0, 1.0), c(0.0, 0.0)]])
    }

    pub fn pauli_z() -> Self {
        Unitary::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)])
    }

    pub fn hadamard() -> Self {
        let h = FRAC_1_SQRT_2;
        Unitary::from_rows(&[&[c(h, 0.0), c(h, 0.0)], &[c(h, 0.0), c(-h, 0.0)]])
    }

    pub fn s() -> Self {
        Unitary::diagonal(&[c(1.0, 0.0), c(0.0, 1.0)])
    }

    pub fn t() -> Self {
        Unitary::phase(std::f64::consts::FRAC_PI_4)
    }

    /// `P(θ) = diag(1, e^{iθ})`.
    pub fn phase(theta: f64) -> Self {
        Unitary::diagonal(&[c(1.0, 0.0), C64::from_polar(1.0, theta)])
    }

    pub fn cz() -> Self {
        Unitary::diagonal(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)])
    }

    /// CNOT with the first (most significant) qubit as control.
    pub fn cnot() -> Self {
        let o = c(0.0, 0.0);
        let l = c(1.0, 0.0);
        Unitary::from_rows(&[&[l, o, o, o], &[o, l, o, o], &[o, o, o, l], &[o, o, l, o]])
    }

    pub fn swap() -> Self {
        let o = c(0.0, 0.0);
        let l = c(1.0, 0.0);
        Unitary::from_rows(&[&[l, o, o, o], &[o, o, l, o], &[o, l, o, o], &[o, o, o, l]])
    }

    /// Controlled-`u` on two qubits, control first.
    pub fn controlled(u: &Unitary) -> Self {
        assert_eq!(u.dim, 2);
        let o = c(0.0, 0.0);
        let l = c(1.0, 0.0);
        Unitary::from_rows(&[
            &[l, o, o, o],
            &[o, l, o, o],
            &[o, o, u.get(0, 0), u.get(0, 1)],
            &[o, o, u.get(1, 0), u.get(1, 1)],
        ])
    }

    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut data = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Unitary { dim: n, data }
    }

    pub fn scale(&self, s: C64) -> Self {
        Unitary {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`; `self` acts on the more significant qubits.
    pub fn kron(&self, other: &Unitary) -> Self {
        let (n, m) = (self.dim, other.dim);
        let dim = n * m;
        let mut data = vec![c(0.0, 0.0); dim * dim];
        for i in 0..n {
            for j in 0..n {
                let a = self.data[i * n + j];
                for k in 0..m {
                    for l in 0..m {
                        data[(i * m + k) * dim + j * m + l] = a * other.data[k * m + l];
                    }
                }
            }
        }
        Unitary { dim, data }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.data[i * self.dim + j] * v[j]).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Unitary) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Unitary, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    /// Distance after removing the best global phase: `‖A − e^{iφ}B‖_max`
    /// with `e^{iφ}` taken from `tr(B†A)`.
    pub fn phase_insensitive_diff(&self, other: &Unitary) -> f64 {
        let overlap: C64 = other
            .data
            .iter()
            .zip(&self.data)
            .map(|(b, a)| b.conj() * a)
            .sum();
        if overlap.norm() < 1e-300 {
            return f64::INFINITY;
        }
        let phase = overlap / overlap.norm();
        self.max_abs_diff(&other.scale(phase))
    }

    pub fn equal_up_to_phase(&self, other: &Unitary, tol: f64) -> bool {
        self.dim == other.dim && self.phase_insensitive_diff(other) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self * &self.dagger()).approx_eq(&Unitary::identity(self.dim), tol)
    }
}

impl Mul for &Unitary {
    type Output = Unitary;
    fn mul(self, rhs: &Unitary) -> Unitary {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        let n = self.dim;
        let mut data = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        Unitary { dim: n, data }
    }
}

impl Mul for Unitary {
    type Output = Unitary;
    fn mul(self, rhs: Unitary) -> Unitary {
        &self * &rhs
    }
}

/// Rotation operator about `axis`:
/// `R_x(α) = [[cos α/2, −i sin α/2], [−i sin α/2, cos α/2]]`,
/// `R_y(β) = [[cos β/2, −sin β/2], [sin β/2, cos β/2]]`,
/// `R_z(γ) = diag(e^{−iγ/2}, e^{iγ/2})`.
pub fn rotation(axis: Axis, angle: f64) -> Unitary {
    let (s, co) = (angle / 2.0).sin_cos();
    let z = c(0.0, 0.0);
    match axis {
        Axis::X => Unitary::from_rows(&[&[c(co, 0.0), c(0.0, -s)], &[c(0.0, -s), c(co, 0.0)]]),
        Axis::Y => Unitary::from_rows(&[&[c(co, 0.0), c(-s, 0.0)], &[c(s, 0.0), c(co, 0.0)]]),
        Axis::Z => Unitary::from_rows(&[
            &[C64::from_polar(1.0, -angle / 2.0), z],
            &[z, C64::from_polar(1.0, angle / 2.0)],
        ]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rotation_z_zero_is_identity() {
        assert!(rotation(Axis::Z, 0.0).approx_eq(&Unitary::identity(2), 1e-15));
    }

    #[test]
    fn rotation_y_pi_is_xz() {
        let xz = Unitary::pauli_x() * Unitary::pauli_z();
        assert!(rotation(Axis::Y, PI).approx_eq(&xz, 1e-12));
    }

    #[test]
    fn rotation_z_pi_is_minus_i_z() {
        let z = Unitary::pauli_z().scale(c(0.0, -1.0));
        assert!(rotation(Axis::Z, PI).approx_eq(&z, 1e-12));
    }

    #[test]
    fn rotation_x_pi_is_minus_i_x() {
        // The matrix definition gives −iX; iX differs by a global phase of −1.
        let minus_ix = Unitary::pauli_x().scale(c(0.0, -1.0));
        assert!(rotation(Axis::X, PI).approx_eq(&minus_ix, 1e-12));
        let ix = Unitary::pauli_x().scale(c(0.0, 1.0));
        assert!(!rotation(Axis::X, PI).approx_eq(&ix, 1e-12));
        assert!(rotation(Axis::X, PI).equal_up_to_phase(&ix, 1e-12));
    }

    #[test]
    fn kron_orders_most_significant_first() {
        let xi = Unitary::pauli_x().kron(&Unitary::identity(2));
        let v = xi.apply(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(v[2], c(1.0, 0.0));
    }

    #[test]
    fn named_gates_are_unitary() {
        for u in [
            Unitary::hadamard(),
            Unitary::s(),
            Unitary::t(),
            Unitary::pauli_y(),
            Unitary::cnot(),
            Unitary::cz(),
            Unitary::swap(),
        ] {
            assert!(u.is_unitary(1e-12));
        }
    }
}

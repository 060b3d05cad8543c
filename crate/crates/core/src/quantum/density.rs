use super::{c, StateVector, C64};
use crate::error::{Error, Result};

/// Density matrix, row-major. Single-qubit use dominates (dimension 2).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub(crate) fn from_entries(dim: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        DensityMatrix { dim, data }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut data = vec![c(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = c(1.0 / dim as f64, 0.0);
        }
        DensityMatrix { dim, data }
    }

    pub fn pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        let dim = a.len();
        let data = (0..dim * dim)
            .map(|k| a[k / dim] * a[k % dim].conj())
            .collect();
        DensityMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    /// Eigenvalues of a 2×2 Hermitian matrix, ascending.
    pub fn eigenvalues_2x2(&self) -> Option<[f64; 2]> {
        if self.dim != 2 {
            return None;
        }
        let a = self.get(0, 0).re;
        let d = self.get(1, 1).re;
        let b = self.get(0, 1).norm();
        let mid = (a + d) / 2.0;
        let r = (((a - d) / 2.0).powi(2) + b * b).sqrt();
        Some([mid - r, mid + r])
    }

    /// Von Neumann entropy in bits (2×2 only).
    pub fn entropy_bits(&self) -> Option<f64> {
        let ev = self.eigenvalues_2x2()?;
        Some(
            ev.iter()
                .filter(|&&l| l > 1e-15)
                .map(|&l| -l * l.log2())
                .sum(),
        )
    }
}

/// `Σ pᵢ |ψᵢ⟩⟨ψᵢ|` over single-qubit states.
pub fn ensemble_density(states: &[(StateVector, f64)]) -> Result<DensityMatrix> {
    let total: f64 = states.iter().map(|(_, p)| p).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::ProbabilitySum(total));
    }
    let mut rho = DensityMatrix::from_entries(2, vec![c(0.0, 0.0); 4]);
    for (s, p) in states {
        if s.num_qubits() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: s.num_qubits(),
            });
        }
        let pure = DensityMatrix::pure(s);
        for (acc, x) in rho.data.iter_mut().zip(&pure.data) {
            *acc += x * *p;
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{ket_one, ket_zero, plus_theta};
    use std::f64::consts::PI;

    #[test]
    fn eighteen_state_ensemble_is_maximally_mixed() {
        let mut ens = Vec::new();
        for k in 0..8 {
            for minus in [false, true] {
                ens.push((StateVector::single(plus_theta(k as f64 * PI / 4.0, minus)), 1.0 / 18.0));
            }
        }
        ens.push((StateVector::single(ket_zero()), 1.0 / 18.0));
        ens.push((StateVector::single(ket_one()), 1.0 / 18.0));
        let rho = ensemble_density(&ens).unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::maximally_mixed(2)) <= 1e-12);
        assert!(rho.is_hermitian(1e-15));
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_state() {
        let rho = ensemble_density(&[(StateVector::single(ket_zero()), 1.0)]).unwrap();
        assert_eq!(rho.get(0, 0), c(1.0, 0.0));
        assert_eq!(rho.get(1, 1), c(0.0, 0.0));
    }

    #[test]
    fn poles_average_to_identity() {
        let rho = ensemble_density(&[
            (StateVector::single(ket_zero()), 0.5),
            (StateVector::single(ket_one()), 0.5),
        ])
        .unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::maximally_mixed(2)) < 1e-15);
    }

    #[test]
    fn bad_probability_sum() {
        let r = ensemble_density(&[(StateVector::single(ket_zero()), 0.7)]);
        assert!(matches!(r, Err(Error::ProbabilitySum(_))));
    }
}

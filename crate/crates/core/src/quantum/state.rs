use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use super::{c, plus_theta, DensityMatrix, Ket1, Unitary, C64};
use crate::angle::Angle;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_QUBITS: usize = 22;

/// Simulator ceiling; `HUBQC_MAX_QUBITS` overrides the default of 22.
pub fn max_qubits() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("HUBQC_MAX_QUBITS")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(DEFAULT_MAX_QUBITS)
    })
}

fn check_cap(n: usize) -> Result<()> {
    let cap = max_qubits();
    if n > cap {
        return Err(Error::TooManyQubits { requested: n, cap });
    }
    Ok(())
}

/// Equatorial measurement basis `{(|0⟩ ± e^{iδ}|1⟩)/√2}`. Outcome 0 is the `+` state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarBasis {
    pub angle: f64,
}

impl PlanarBasis {
    pub fn new(angle: f64) -> Self {
        PlanarBasis {
            angle: angle.rem_euclid(2.0 * std::f64::consts::PI),
        }
    }

    pub fn ket(&self, outcome: bool) -> Ket1 {
        plus_theta(self.angle, outcome)
    }
}

impl From<Angle> for PlanarBasis {
    fn from(a: Angle) -> Self {
        PlanarBasis::new(a.radians())
    }
}

/// Dense amplitude vector over `num_qubits` qubits (qubit 0 most significant).
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_cap(num_qubits)?;
        let len = 1usize << num_qubits;
        if index >= len {
            return Err(Error::DimensionMismatch {
                expected: len,
                actual: index,
            });
        }
        let mut amps = vec![c(0.0, 0.0); len];
        amps[index] = c(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    /// Wrap raw amplitudes; the length must be a power of two and the norm 1.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: len.next_power_of_two().max(1),
                actual: len,
            });
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_cap(num_qubits)?;
        let s = StateVector { num_qubits, amps };
        let n2 = s.norm_sqr();
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(n2));
        }
        Ok(s)
    }

    pub fn single(ket: Ket1) -> Self {
        StateVector {
            num_qubits: 1,
            amps: ket.to_vec(),
        }
    }

    /// Tensor product of single-qubit kets, first ket on qubit 0.
    pub fn product(kets: &[Ket1]) -> Result<Self> {
        check_cap(kets.len())?;
        let mut amps = vec![c(1.0, 0.0)];
        for k in kets {
            amps = amps.iter().flat_map(|&a| [a * k[0], a * k[1]]).collect();
        }
        Ok(StateVector {
            num_qubits: kets.len(),
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.num_qubits - 1 - q)
    }

    pub fn apply_single(&mut self, q: usize, u: &Unitary) -> Result<()> {
        self.check_qubit(q)?;
        if u.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: u.dim(),
            });
        }
        let (u00, u01, u10, u11) = (u.get(0, 0), u.get(0, 1), u.get(1, 0), u.get(1, 1));
        let m = self.mask(q);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let j = i | m;
                let (a0, a1) = (self.amps[i], self.amps[j]);
                self.amps[i] = u00 * a0 + u01 * a1;
                self.amps[j] = u10 * a0 + u11 * a1;
            }
        }
        Ok(())
    }

    /// Apply a 4×4 gate with `q1` as its more significant qubit.
    pub fn apply_two(&mut self, q1: usize, q2: usize, u: &Unitary) -> Result<()> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(Error::SameQubit(q1));
        }
        if u.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                actual: u.dim(),
            });
        }
        let (m1, m2) = (self.mask(q1), self.mask(q2));
        for i in 0..self.amps.len() {
            if i & (m1 | m2) == 0 {
                let idx = [i, i | m2, i | m1, i | m1 | m2];
                let v = [
                    self.amps[idx[0]],
                    self.amps[idx[1]],
                    self.amps[idx[2]],
                    self.amps[idx[3]],
                ];
                let out = u.apply(&v);
                for (k, &ix) in idx.iter().enumerate() {
                    self.amps[ix] = out[k];
                }
            }
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, q1: usize, q2: usize) -> Result<()> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(Error::SameQubit(q1));
        }
        let both = self.mask(q1) | self.mask(q2);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & both == both {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// Amplitudes of the remaining qubits after projecting qubit `q` onto
    /// `⟨bra|`, unnormalized, together with the branch probability.
    fn contract(&self, q: usize, bra: &Ket1) -> (f64, Vec<C64>) {
        let p = self.num_qubits - 1 - q;
        let low = (1usize << p) - 1;
        let (b0, b1) = (bra[0].conj(), bra[1].conj());
        let rest: Vec<C64> = (0..self.amps.len() / 2)
            .map(|r| {
                let i0 = ((r >> p) << (p + 1)) | (r & low);
                b0 * self.amps[i0] + b1 * self.amps[i0 | (1 << p)]
            })
            .collect();
        let prob = rest.iter().map(|a| a.norm_sqr()).sum();
        (prob, rest)
    }

    /// Project qubit `q` onto `ket`, removing it. Returns the branch
    /// probability and the renormalized remainder, or `None` for a null branch.
    pub fn project(&self, q: usize, ket: &Ket1) -> Result<Option<(f64, StateVector)>> {
        self.check_qubit(q)?;
        let (prob, mut rest) = self.contract(q, ket);
        if prob < 1e-24 {
            return Ok(None);
        }
        let scale = 1.0 / prob.sqrt();
        rest.iter_mut().for_each(|a| *a *= scale);
        Ok(Some((
            prob,
            StateVector {
                num_qubits: self.num_qubits - 1,
                amps: rest,
            },
        )))
    }

    pub fn project_planar(
        &self,
        q: usize,
        basis: PlanarBasis,
        outcome: bool,
    ) -> Result<Option<(f64, StateVector)>> {
        self.project(q, &basis.ket(outcome))
    }

    /// Probability of outcome 0 (the `+` state) for a planar measurement.
    pub fn planar_probability_zero(&self, q: usize, basis: PlanarBasis) -> Result<f64> {
        self.check_qubit(q)?;
        Ok(self.contract(q, &basis.ket(false)).0)
    }

    fn sample_projective<R: Rng + ?Sized>(
        &self,
        q: usize,
        k0: &Ket1,
        k1: &Ket1,
        rng: &mut R,
    ) -> Result<(bool, StateVector)> {
        self.check_qubit(q)?;
        let (p0, _) = self.contract(q, k0);
        let u: f64 = rng.random();
        let outcome = u >= p0;
        let ket = if outcome { k1 } else { k0 };
        match self.project(q, ket)? {
            Some((_, s)) => Ok((outcome, s)),
            None => {
                let other = if outcome { k0 } else { k1 };
                let (_, s) = self
                    .project(q, other)?
                    .ok_or(Error::NotNormalized(self.norm_sqr()))?;
                Ok((!outcome, s))
            }
        }
    }

    /// Measure qubit `q` in `basis`; the qubit is removed from the register.
    pub fn measure_planar<R: Rng + ?Sized>(
        &self,
        q: usize,
        basis: PlanarBasis,
        rng: &mut R,
    ) -> Result<(bool, StateVector)> {
        self.sample_projective(q, &basis.ket(false), &basis.ket(true), rng)
    }

    /// Computational-basis measurement of qubit `q`, removing it.
    pub fn measure_z<R: Rng + ?Sized>(&self, q: usize, rng: &mut R) -> Result<(bool, StateVector)> {
        self.sample_projective(q, &super::ket_zero(), &super::ket_one(), rng)
    }

    /// Tensor product `self ⊗ fresh`; the fresh qubits get the highest indices.
    pub fn extend_with(&self, fresh: &StateVector) -> Result<StateVector> {
        let n = self.num_qubits + fresh.num_qubits;
        check_cap(n)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|&a| fresh.amps.iter().map(move |&b| a * b))
            .collect();
        Ok(StateVector { num_qubits: n, amps })
    }

    /// Reorder qubits: qubit `i` of the result is qubit `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<StateVector> {
        let n = self.num_qubits;
        if order.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: order.len(),
            });
        }
        let mut seen = vec![false; n];
        for &o in order {
            self.check_qubit(o)?;
            if std::mem::replace(&mut seen[o], true) {
                return Err(Error::SameQubit(o));
            }
        }
        let mut amps = vec![c(0.0, 0.0); self.amps.len()];
        for (old, &a) in self.amps.iter().enumerate() {
            let mut new = 0usize;
            for (i, &o) in order.iter().enumerate() {
                if old & (1 << (n - 1 - o)) != 0 {
                    new |= 1 << (n - 1 - i);
                }
            }
            amps[new] = a;
        }
        Ok(StateVector { num_qubits: n, amps })
    }

    /// If qubit `q` is in a product state with the rest, split it off.
    /// Returns the remainder and the qubit's ket (phase convention: the
    /// first nonzero component of the dominant column is kept on the remainder).
    pub fn try_split_qubit(&self, q: usize, tol: f64) -> Result<Option<(StateVector, Ket1)>> {
        self.check_qubit(q)?;
        let (_, col0) = self.contract(q, &super::ket_zero());
        let (_, col1) = self.contract(q, &super::ket_one());
        let (best, _) = col0
            .iter()
            .zip(&col1)
            .enumerate()
            .map(|(k, (a, b))| (k, a.norm_sqr() + b.norm_sqr()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let norm = (col0[best].norm_sqr() + col1[best].norm_sqr()).sqrt();
        if norm < 1e-300 {
            return Ok(None);
        }
        let phi = [col0[best] / norm, col1[best] / norm];
        let rest: Vec<C64> = col0
            .iter()
            .zip(&col1)
            .map(|(a, b)| phi[0].conj() * a + phi[1].conj() * b)
            .collect();
        for k in 0..rest.len() {
            if (col0[k] - phi[0] * rest[k]).norm() > tol || (col1[k] - phi[1] * rest[k]).norm() > tol
            {
                return Ok(None);
            }
        }
        Ok(Some((
            StateVector {
                num_qubits: self.num_qubits - 1,
                amps: rest,
            },
            phi,
        )))
    }

    /// Reduced density matrix of the listed qubits (in the listed order).
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        for &k in keep {
            self.check_qubit(k)?;
        }
        let n = self.num_qubits;
        let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let order: Vec<usize> = keep.iter().chain(&rest).copied().collect();
        let p = self.permuted(&order)?;
        let dk = 1usize << keep.len();
        let dr = 1usize << rest.len();
        let mut rho = vec![c(0.0, 0.0); dk * dk];
        for i in 0..dk {
            for j in 0..dk {
                rho[i * dk + j] = (0..dr)
                    .map(|r| p.amps[i * dr + r] * p.amps[j * dr + r].conj())
                    .sum();
            }
        }
        Ok(DensityMatrix::from_entries(dk, rho))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                actual: other.num_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// `|⟨a|b⟩|²`, insensitive to global phase.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{ket_one, ket_zero, rotation, Axis};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn plus() -> StateVector {
        StateVector::single(plus_theta(0.0, false))
    }

    #[test]
    fn pauli_flip() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_single(0, &Unitary::pauli_x()).unwrap();
        assert_eq!(s, StateVector::basis(1, 1).unwrap());
    }

    #[test]
    fn rz_on_zero_is_phase() {
        let theta = 0.7;
        let mut s = StateVector::zero(1).unwrap();
        s.apply_single(0, &rotation(Axis::Z, theta)).unwrap();
        let expected = C64::from_polar(1.0, -theta / 2.0);
        assert!((s.amplitudes()[0] - expected).norm() < 1e-15);
    }

    #[test]
    fn rz_quarter_on_plus() {
        // Direct 2-vector product: R_z(π/4)|+⟩ = e^{-iπ/8}(|0⟩ + e^{iπ/4}|1⟩)/√2.
        let mut s = plus();
        s.apply_single(0, &rotation(Axis::Z, PI / 4.0)).unwrap();
        let a = s.amplitudes();
        let e = C64::from_polar(FRAC_1_SQRT_2, -PI / 8.0);
        assert!((a[0] - e).norm() < 1e-14);
        assert!((a[1] - e * C64::from_polar(1.0, PI / 4.0)).norm() < 1e-14);
        let target = StateVector::single(plus_theta(PI / 4.0, false));
        assert!((fidelity(&s, &target).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn apply_out_of_range() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(
            s.apply_single(2, &Unitary::pauli_x()),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(matches!(s.apply_cz(1, 1), Err(Error::SameQubit(1))));
    }

    #[test]
    fn cz_negates_eleven() {
        let mut s = StateVector::basis(2, 3).unwrap();
        s.apply_cz(0, 1).unwrap();
        assert_eq!(s.amplitudes()[3], c(-1.0, 0.0));
    }

    #[test]
    fn cz_with_zero_does_not_entangle() {
        let mut s = StateVector::product(&[ket_zero(), plus_theta(1.1, false)]).unwrap();
        let before = s.clone();
        s.apply_cz(0, 1).unwrap();
        assert_eq!(s, before);
        assert!(s.try_split_qubit(0, 1e-12).unwrap().is_some());
    }

    #[test]
    fn measure_eigenstate_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let delta = 1.3;
        let s = StateVector::single(plus_theta(delta, false));
        for _ in 0..50 {
            let (b, rest) = s.measure_planar(0, PlanarBasis::new(delta), &mut rng).unwrap();
            assert!(!b);
            assert_eq!(rest.num_qubits(), 0);
        }
        let m = StateVector::single(plus_theta(delta, true));
        let (b, _) = m.measure_planar(0, PlanarBasis::new(delta), &mut rng).unwrap();
        assert!(b);
    }

    #[test]
    fn measure_z_on_one_and_plus() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let one = StateVector::single(ket_one());
        assert!(one.measure_z(0, &mut rng).unwrap().0);
        let ones = (0..2000)
            .filter(|_| plus().measure_z(0, &mut rng).unwrap().0)
            .count();
        assert!((ones as f64 / 2000.0 - 0.5).abs() < 0.05);
    }

    #[test]
    fn measure_z_of_attacked_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = StateVector::zero(1).unwrap();
        s.apply_single(0, &Unitary::pauli_x()).unwrap();
        assert!(s.measure_z(0, &mut rng).unwrap().0);
    }

    #[test]
    fn planar_on_pole_is_fair() {
        let s = StateVector::zero(1).unwrap();
        for k in 0..8 {
            let p = s
                .planar_probability_zero(0, PlanarBasis::new(k as f64 * PI / 4.0))
                .unwrap();
            assert!((p - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn measurement_removes_qubit_and_reindexes() {
        // |0⟩|1⟩|+⟩: measure the middle qubit in Z; the rest is |0⟩|+⟩.
        let s = StateVector::product(&[ket_zero(), ket_one(), plus_theta(0.0, false)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (b, rest) = s.measure_z(1, &mut rng).unwrap();
        assert!(b);
        let expected = StateVector::product(&[ket_zero(), plus_theta(0.0, false)]).unwrap();
        assert!((fidelity(&rest, &expected).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn extend_orders_fresh_last() {
        let s = StateVector::zero(1).unwrap();
        let e = s.extend_with(&StateVector::single(ket_one())).unwrap();
        assert_eq!(e, StateVector::basis(2, 1).unwrap());
        let pp = plus().extend_with(&plus()).unwrap();
        for a in pp.amplitudes() {
            assert!((a - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn permutation_moves_qubits() {
        let s = StateVector::basis(3, 0b100).unwrap();
        let p = s.permuted(&[1, 2, 0]).unwrap();
        assert_eq!(p, StateVector::basis(3, 0b001).unwrap());
    }

    #[test]
    fn split_detects_entanglement() {
        let mut s = plus().extend_with(&plus()).unwrap();
        s.apply_cz(0, 1).unwrap();
        assert!(s.try_split_qubit(0, 1e-12).unwrap().is_none());
        let t = StateVector::product(&[plus_theta(0.3, true), ket_one()]).unwrap();
        let (rest, k) = t.try_split_qubit(1, 1e-12).unwrap().unwrap();
        assert!((fidelity(&rest, &StateVector::single(plus_theta(0.3, true))).unwrap() - 1.0).abs() < 1e-14);
        assert!((k[1].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            StateVector::zero(max_qubits() + 1),
            Err(Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn fidelity_examples() {
        let zero = StateVector::zero(1).unwrap();
        let one = StateVector::single(ket_one());
        assert_eq!(fidelity(&zero, &zero).unwrap(), 1.0);
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        assert!((fidelity(&zero, &plus()).unwrap() - 0.5).abs() < 1e-15);
        assert!(fidelity(&zero, &plus().extend_with(&zero).unwrap()).is_err());
    }
}

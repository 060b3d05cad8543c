//! Measurement-based CNOT on an eight-qubit unit.
//!
//! Measuring a qubit at angle `κ` after entangling it with its successor
//! teleports `H·P(−κ)` along the row. Prepared angles, Pauli byproducts and
//! pads are folded into the measurement angle the server actually sees.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::angle::Angle;
use crate::decompose::{embed_single, Pauli};
use crate::error::{Error, Result};
use crate::quantum::{c, plus_theta, rotation, Axis, PlanarBasis, StateVector, Unitary, C64};

/// Dependency set over the six unit outcomes (bits 0..6, measurement order)
/// and the input wires' frame Paulis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Deps(pub u16);

impl Deps {
    pub const fn outcome(k: usize) -> Deps {
        Deps(1 << k)
    }

    /// Frame X on the input qubit of `row`.
    pub const fn input_x(row: usize) -> Deps {
        Deps(1 << (6 + 2 * row))
    }

    /// Frame Z on the input qubit of `row`.
    pub const fn input_z(row: usize) -> Deps {
        Deps(1 << (7 + 2 * row))
    }

    pub fn toggle(&mut self, other: Deps) {
        self.0 ^= other.0;
    }

    pub fn outcomes(self) -> impl Iterator<Item = usize> {
        (0..6).filter(move |k| self.0 >> k & 1 == 1)
    }

    /// Parity of the selected bits of `known`, or `None` if one is still unknown.
    fn parity(self, known: u16, resolved: u16) -> Option<bool> {
        if self.0 & !resolved != 0 {
            return None;
        }
        Some((self.0 & known).count_ones() % 2 == 1)
    }
}

/// Encryption frame of a wire: the physical qubit holds `P(ω)·X^x·Z^z` applied
/// to the logical state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireFrame {
    pub omega: Angle,
    pub pauli: Pauli,
}

/// Per-wire Pauli powers left by measurements.
pub type ByproductRecord = Pauli;

impl WireFrame {
    pub fn new(omega: Angle, x: bool, z: bool) -> Self {
        WireFrame {
            omega,
            pauli: Pauli { x, z },
        }
    }

    /// `P(ω)·X^x·Z^z`.
    pub fn matrix(&self) -> Unitary {
        &Unitary::phase(self.omega.radians()) * &self.pauli.matrix()
    }

    /// `Z^z·X^x·P(−ω)`, the inverse of [`WireFrame::matrix`].
    pub fn inverse(&self) -> Unitary {
        self.matrix().dagger()
    }

    pub fn encrypt(&self, state: &mut StateVector, q: usize) -> Result<()> {
        state.apply_single(q, &self.matrix())
    }

    pub fn decrypt(&self, state: &mut StateVector, q: usize) -> Result<()> {
        state.apply_single(q, &self.inverse())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputCorrection {
    Hadamard,
    RzMinusHalfPi,
}

impl OutputCorrection {
    pub fn matrix(self) -> Unitary {
        match self {
            OutputCorrection::Hadamard => Unitary::hadamard(),
            OutputCorrection::RzMinusHalfPi => rotation(Axis::Z, -std::f64::consts::FRAC_PI_2),
        }
    }

    /// The correction as rotations in the order they act.
    pub fn rotations(self) -> Vec<(Axis, Angle)> {
        match self {
            OutputCorrection::Hadamard => vec![(Axis::Z, Angle::PI), (Axis::Y, Angle::HALF_PI)],
            OutputCorrection::RzMinusHalfPi => vec![(Axis::Z, -Angle::HALF_PI)],
        }
    }
}

/// One measurement of the unit. Prepared angle and pad come from the run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementCommand {
    pub row: usize,
    pub col: usize,
    pub kappa: Angle,
    pub x_deps: Deps,
    pub z_deps: Deps,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnotPattern {
    /// In measurement order `A1, B1, A2, B2, A3, B3`.
    pub commands: Vec<MeasurementCommand>,
    pub output_x: [Deps; 2],
    pub output_z: [Deps; 2],
    /// Per row (control, target).
    pub corrections: [OutputCorrection; 2],
}

pub const MEASUREMENT_ORDER: [(usize, usize); 6] = [(0, 0), (1, 0), (0, 1), (1, 1), (0, 2), (1, 2)];

/// `(1/√2)[[1, e^{iθ}], [1, −e^{iθ}]] = H·P(θ)`.
pub fn w_gate(theta: f64) -> Unitary {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let e = C64::from_polar(s, theta);
    Unitary::from_rows(&[&[c(s, 0.0), e], &[c(s, 0.0), -e]])
}

/// Physical angle for a measurement whose logical angle is `kappa`, on a qubit
/// prepared with `omega`, carrying byproducts `X^{s_x} Z^{s_z}`, padded by `r`.
pub fn adaptive_angle(omega: Angle, kappa: Angle, s_x: bool, s_z: bool, r: bool) -> Angle {
    (omega + kappa.signed(s_x) + Angle::pi_times(s_z ^ r)).reduced()
}

/// The variant that flips the prepared angle instead of the logical one.
pub fn prepared_sign_angle(omega: Angle, kappa: Angle, s_x: bool, s_z: bool, r: bool) -> Angle {
    (omega.signed(s_x) + Angle::pi_times(s_z) + kappa + Angle::pi_times(r)).reduced()
}

/// `(R_z(π/2) ⊗ R_x(π/2))·CZ·(I ⊗ R_x(−π/2))·CZ`.
pub fn cz_rotation_cnot() -> Unitary {
    use std::f64::consts::FRAC_PI_2;
    let left = rotation(Axis::Z, FRAC_PI_2).kron(&rotation(Axis::X, FRAC_PI_2));
    let mid = Unitary::identity(2).kron(&rotation(Axis::X, -FRAC_PI_2));
    &(&(&left * &Unitary::cz()) * &mid) * &Unitary::cz()
}

fn unit_neighbors(row: usize, col: usize) -> Vec<(usize, usize)> {
    let mut n = Vec::new();
    if col > 0 {
        n.push((row, col - 1));
    }
    if col < 3 {
        n.push((row, col + 1));
    }
    if col == 0 || col == 2 {
        n.push((1 - row, col));
    }
    n
}

/// Byproduct dependencies from the unit's flow `(r, c) → (r, c+1)`.
fn flow_dependencies() -> ([[Deps; 4]; 2], [[Deps; 4]; 2]) {
    let mut x = [[Deps::default(); 4]; 2];
    let mut z = [[Deps::default(); 4]; 2];
    for row in 0..2 {
        x[row][0].toggle(Deps::input_x(row));
        z[row][0].toggle(Deps::input_z(row));
        for (r, col) in unit_neighbors(row, 0) {
            z[r][col].toggle(Deps::input_x(row));
        }
    }
    for (k, &(row, col)) in MEASUREMENT_ORDER.iter().enumerate() {
        let f = (row, col + 1);
        x[f.0][f.1].toggle(Deps::outcome(k));
        for (r, cc) in unit_neighbors(f.0, f.1) {
            if (r, cc) != (row, col) {
                z[r][cc].toggle(Deps::outcome(k));
            }
        }
    }
    (x, z)
}

fn logical_unit_map(kappa: &[[Angle; 3]; 2]) -> Unitary {
    let w = |k: Angle| w_gate(-k.radians());
    let col1 = w(kappa[0][0]).kron(&w(kappa[1][0]));
    let col2 = w(kappa[0][1]).kron(&w(kappa[1][1]));
    let col3 = w(kappa[0][2]).kron(&w(kappa[1][2]));
    &(&(&(&col3 * &Unitary::cz()) * &col2) * &col1) * &Unitary::cz()
}

fn pattern_from(kappa: [[Angle; 3]; 2], corrections: [OutputCorrection; 2]) -> CnotPattern {
    let (x, z) = flow_dependencies();
    let commands = MEASUREMENT_ORDER
        .iter()
        .map(|&(row, col)| MeasurementCommand {
            row,
            col,
            kappa: kappa[row][col],
            x_deps: x[row][col],
            z_deps: z[row][col],
        })
        .collect();
    CnotPattern {
        commands,
        output_x: [x[0][3], x[1][3]],
        output_z: [z[0][3], z[1][3]],
        corrections,
    }
}

/// Search the right-angle grid for measurement angles whose logical map,
/// followed by `H` on the control and `R_z(−π/2)` on the target, is CNOT; then
/// check the result on every outcome branch by full simulation.
pub fn derive_cnot_pattern() -> Result<CnotPattern> {
    let target = Unitary::cnot();
    let corr = [OutputCorrection::Hadamard, OutputCorrection::RzMinusHalfPi];
    let fix = corr[0].matrix().kron(&corr[1].matrix());
    let mut found = None;
    'search: for code in 0..4096u32 {
        let mut kappa = [[Angle::ZERO; 3]; 2];
        for i in 0..6 {
            kappa[i / 3][i % 3] = Angle::quarters(2 * ((code >> (2 * (5 - i))) & 3) as i32);
        }
        let u = &fix * &logical_unit_map(&kappa);
        if u.equal_up_to_phase(&target, 1e-10) {
            found = Some(kappa);
            break 'search;
        }
    }
    let kappa = found.ok_or_else(|| Error::Pattern("no angle template implements CNOT".into()))?;
    let pattern = pattern_from(kappa, corr);
    validate_pattern(&pattern)?;
    Ok(pattern)
}

/// Exhaustive branch check against the CNOT matrix.
pub fn validate_pattern(pattern: &CnotPattern) -> Result<()> {
    for (k, cmd) in pattern.commands.iter().enumerate() {
        for dep in cmd.x_deps.outcomes().chain(cmd.z_deps.outcomes()) {
            if dep >= k {
                return Err(Error::Pattern(format!("command {k} depends on later outcome {dep}")));
            }
        }
    }
    let mut rng = crate::rng::seeded(0x5eed);
    for branch in 0..64u32 {
        let forced: [bool; 6] = std::array::from_fn(|i| branch >> i & 1 == 1);
        let logical = random_state(2, &mut rng)?;
        let frames = [random_frame(&mut rng), random_frame(&mut rng)];
        let pads = UnitPads::random(&mut rng);
        let f = check_unit_branch(pattern, &logical, frames, &pads, [[false; 4]; 2], forced)?;
        if f < 1.0 - 1e-9 {
            return Err(Error::Pattern(format!("branch {branch:06b} fidelity {f}")));
        }
    }
    Ok(())
}

fn random_frame<R: Rng + ?Sized>(rng: &mut R) -> WireFrame {
    WireFrame::new(Angle::quarters(rng.random_range(0..8)), rng.random(), rng.random())
}

/// Random normalized state from box-uniform amplitudes.
pub fn random_state<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<StateVector> {
    let dim = 1usize << num_qubits;
    loop {
        let amps: Vec<C64> = (0..dim)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-3 {
            return StateVector::from_amplitudes(amps.into_iter().map(|a| a / n).collect());
        }
    }
}

/// Run one forced branch on `logical` (two qubits) and return the fidelity of
/// the decrypted, corrected output against `CNOT·logical`.
pub fn check_unit_branch(
    pattern: &CnotPattern,
    logical: &StateVector,
    frames: [WireFrame; 2],
    pads: &UnitPads,
    kicks: [[bool; 4]; 2],
    forced: [bool; 6],
) -> Result<f64> {
    let mut reg = logical.clone();
    frames[0].encrypt(&mut reg, 0)?;
    frames[1].encrypt(&mut reg, 1)?;
    let run = run_cnot_unit_forced(&reg, [0, 1], pattern, frames, pads, kicks, forced)?;
    let mut out = run.state;
    for row in 0..2 {
        run.frames[row].decrypt(&mut out, row)?;
        out.apply_single(row, &pattern.corrections[row].matrix())?;
    }
    let ideal = StateVector::from_amplitudes(Unitary::cnot().apply(logical.amplitudes()))?;
    crate::quantum::fidelity(&ideal, &out)
}

static PATTERN: OnceLock<std::result::Result<CnotPattern, Error>> = OnceLock::new();

/// The validated CNOT pattern, derived once per process.
pub fn cnot_pattern() -> Result<&'static CnotPattern> {
    PATTERN
        .get_or_init(derive_cnot_pattern)
        .as_ref()
        .map_err(Clone::clone)
}

/// What follows a unit's output on a given row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WireContinuation {
    FinalOutput,
    FeedsUnit,
}

/// Fold a pending `R_z(−π/2)` on the input of `row` into that row's first
/// measurement: the logical angle moves by `+π/2`.
pub fn absorb_correction(
    pattern: &CnotPattern,
    row: usize,
    continuation: WireContinuation,
) -> Result<CnotPattern> {
    if continuation == WireContinuation::FinalOutput {
        return Err(Error::Pattern(
            "final outputs take explicit corrections, not absorption".into(),
        ));
    }
    if row > 1 {
        return Err(Error::Pattern(format!("row {row} out of range")));
    }
    let mut p = pattern.clone();
    for cmd in &mut p.commands {
        if cmd.row == row && cmd.col == 0 {
            cmd.kappa = cmd.kappa + Angle::HALF_PI;
        }
    }
    Ok(p)
}

/// Secret randomness of one unit: prepared angles for columns 2–4 and the
/// measurement pads in measurement order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitPads {
    pub omega: [[Angle; 3]; 2],
    pub r: [bool; 6],
}

impl UnitPads {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut omega = [[Angle::ZERO; 3]; 2];
        for row in omega.iter_mut() {
            for w in row.iter_mut() {
                *w = Angle::quarters(rng.random_range(0..8));
            }
        }
        UnitPads {
            omega,
            r: std::array::from_fn(|_| rng.random()),
        }
    }

    pub fn zero() -> Self {
        UnitPads {
            omega: [[Angle::ZERO; 3]; 2],
            r: [false; 6],
        }
    }
}

/// Client-side bookkeeping for one unit: turns outcomes into the next
/// measurement angle and finally into output frames.
#[derive(Clone, Debug)]
pub struct UnitTracker {
    pattern: CnotPattern,
    frames_in: [WireFrame; 2],
    pads: UnitPads,
    kicks: [[bool; 4]; 2],
    known: u16,
    resolved: u16,
}

impl UnitTracker {
    /// `kicks[row][col]` marks a Z picked up from a `|1⟩` neighbour.
    pub fn new(pattern: &CnotPattern, frames_in: [WireFrame; 2], pads: UnitPads, kicks: [[bool; 4]; 2]) -> Self {
        let mut known = 0u16;
        for row in 0..2 {
            if frames_in[row].pauli.x {
                known |= Deps::input_x(row).0;
            }
            if frames_in[row].pauli.z {
                known |= Deps::input_z(row).0;
            }
        }
        UnitTracker {
            pattern: pattern.clone(),
            frames_in,
            pads,
            kicks,
            known,
            resolved: 0b11_1100_0000,
        }
    }

    fn omega(&self, row: usize, col: usize) -> Angle {
        if col == 0 {
            self.frames_in[row].omega
        } else {
            self.pads.omega[row][col - 1]
        }
    }

    /// Byproduct bits `(s_x, s_z)` for command `k`.
    pub fn byproduct(&self, k: usize) -> Result<(bool, bool)> {
        let cmd = &self.pattern.commands[k];
        let sx = cmd
            .x_deps
            .parity(self.known, self.resolved)
            .ok_or_else(|| Error::Pattern(format!("unresolved X dependency for command {k}")))?;
        let sz = cmd
            .z_deps
            .parity(self.known, self.resolved)
            .ok_or_else(|| Error::Pattern(format!("unresolved Z dependency for command {k}")))?;
        Ok((sx, sz ^ self.kicks[cmd.row][cmd.col]))
    }

    /// Encrypted angle to send for command `k`.
    pub fn angle(&self, k: usize) -> Result<Angle> {
        let cmd = &self.pattern.commands[k];
        let (sx, sz) = self.byproduct(k)?;
        Ok(adaptive_angle(self.omega(cmd.row, cmd.col), cmd.kappa, sx, sz, self.pads.r[k]))
    }

    /// Record the reported outcome of command `k`.
    pub fn record(&mut self, k: usize, physical: bool) {
        let logical = physical ^ self.pads.r[k];
        self.resolved |= 1 << k;
        if logical {
            self.known |= 1 << k;
        } else {
            self.known &= !(1 << k);
        }
    }

    /// Frames of the two output qubits once all six outcomes are in.
    pub fn output_frames(&self) -> Result<[WireFrame; 2]> {
        let mut out = [WireFrame::default(); 2];
        for (row, frame) in out.iter_mut().enumerate() {
            let x = self.pattern.output_x[row]
                .parity(self.known, self.resolved)
                .ok_or_else(|| Error::Pattern("outputs requested before all outcomes".into()))?;
            let z = self.pattern.output_z[row]
                .parity(self.known, self.resolved)
                .ok_or_else(|| Error::Pattern("outputs requested before all outcomes".into()))?;
            *frame = WireFrame::new(self.pads.omega[row][2], x, z ^ self.kicks[row][3]);
        }
        Ok(out)
    }
}

/// Result of executing a unit in simulation.
#[derive(Clone, Debug)]
pub struct UnitRun {
    /// The register with the unit's outputs in place of its inputs.
    pub state: StateVector,
    pub frames: [WireFrame; 2],
    pub outcomes: [bool; 6],
    pub angles: [Angle; 6],
}

/// Execute a unit on `register`, whose qubits `wires = [control, target]`
/// carry the encrypted inputs described by `frames`.
pub fn run_cnot_unit<R: Rng + ?Sized>(
    register: &StateVector,
    wires: [usize; 2],
    pattern: &CnotPattern,
    frames: [WireFrame; 2],
    pads: &UnitPads,
    kicks: [[bool; 4]; 2],
    rng: &mut R,
) -> Result<UnitRun> {
    execute(register, wires, pattern, frames, pads, kicks, |s, q, basis, _| {
        s.measure_planar(q, basis, rng)
    })
}

/// As [`run_cnot_unit`] with the physical outcomes fixed in advance.
pub fn run_cnot_unit_forced(
    register: &StateVector,
    wires: [usize; 2],
    pattern: &CnotPattern,
    frames: [WireFrame; 2],
    pads: &UnitPads,
    kicks: [[bool; 4]; 2],
    forced: [bool; 6],
) -> Result<UnitRun> {
    execute(register, wires, pattern, frames, pads, kicks, |s, q, basis, k| {
        let (_, rest) = s
            .project_planar(q, basis, forced[k])?
            .ok_or_else(|| Error::Pattern(format!("outcome branch {k} has zero probability")))?;
        Ok((forced[k], rest))
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Reg(usize),
    Anc(usize, usize),
}

fn execute<F>(
    register: &StateVector,
    wires: [usize; 2],
    pattern: &CnotPattern,
    frames: [WireFrame; 2],
    pads: &UnitPads,
    kicks: [[bool; 4]; 2],
    mut measure: F,
) -> Result<UnitRun>
where
    F: FnMut(&StateVector, usize, PlanarBasis, usize) -> Result<(bool, StateVector)>,
{
    let n = register.num_qubits();
    for w in wires {
        if w >= n {
            return Err(Error::QubitOutOfRange {
                index: w,
                num_qubits: n,
            });
        }
    }
    if wires[0] == wires[1] {
        return Err(Error::SameQubit(wires[0]));
    }
    let kets: Vec<_> = (0..2)
        .flat_map(|row| (0..3).map(move |c| (row, c)))
        .map(|(row, c)| plus_theta(pads.omega[row][c].radians(), false))
        .collect();
    let mut state = register.extend_with(&StateVector::product(&kets)?)?;
    let mut slots: Vec<Slot> = (0..n).map(Slot::Reg).collect();
    for row in 0..2 {
        for col in 1..4 {
            slots.push(Slot::Anc(row, col));
        }
    }
    let node = |row: usize, col: usize| {
        if col == 0 {
            Slot::Reg(wires[row])
        } else {
            Slot::Anc(row, col)
        }
    };
    let pos = |slots: &[Slot], s: Slot| slots.iter().position(|&x| x == s).expect("slot present");
    let grid: [[Slot; 4]; 2] = std::array::from_fn(|r| std::array::from_fn(|c| node(r, c)));
    for (a, b) in crate::cluster::unit_edges(&[[0, 1, 2, 3], [4, 5, 6, 7]]) {
        let sa = grid[a / 4][a % 4];
        let sb = grid[b / 4][b % 4];
        state.apply_cz(pos(&slots, sa), pos(&slots, sb))?;
    }
    for row in 0..2 {
        for col in 0..4 {
            if kicks[row][col] {
                let q = pos(&slots, node(row, col));
                state.apply_single(q, &Unitary::pauli_z())?;
            }
        }
    }
    let mut tracker = UnitTracker::new(pattern, frames, *pads, kicks);
    let mut outcomes = [false; 6];
    let mut angles = [Angle::ZERO; 6];
    for k in 0..6 {
        let cmd = pattern.commands[k];
        let delta = tracker.angle(k)?;
        let q = pos(&slots, node(cmd.row, cmd.col));
        let (bit, rest) = measure(&state, q, PlanarBasis::from(delta), k)?;
        state = rest;
        slots.remove(q);
        tracker.record(k, bit);
        outcomes[k] = bit;
        angles[k] = delta;
    }
    let order: Vec<usize> = (0..n)
        .map(|i| {
            let want = if i == wires[0] {
                Slot::Anc(0, 3)
            } else if i == wires[1] {
                Slot::Anc(1, 3)
            } else {
                Slot::Reg(i)
            };
            pos(&slots, want)
        })
        .collect();
    Ok(UnitRun {
        state: state.permuted(&order)?,
        frames: tracker.output_frames()?,
        outcomes,
        angles,
    })
}

/// Logical two-qubit map of a pattern ignoring byproducts, corrections included.
pub fn corrected_logical_map(pattern: &CnotPattern) -> Unitary {
    let mut kappa = [[Angle::ZERO; 3]; 2];
    for cmd in &pattern.commands {
        kappa[cmd.row][cmd.col] = cmd.kappa;
    }
    let fix = pattern.corrections[0]
        .matrix()
        .kron(&pattern.corrections[1].matrix());
    &fix * &logical_unit_map(&kappa)
}

/// `u` acting on qubit `wire` of a `wires`-qubit register.
pub fn on_wire(u: &Unitary, wire: usize, wires: usize) -> Unitary {
    embed_single(u, wire, wires)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::fidelity;
    use crate::rng::seeded;
    use std::f64::consts::PI;

    #[test]
    fn w_gate_identities() {
        assert!(w_gate(0.0).approx_eq(&Unitary::hadamard(), 1e-15));
        let mut rng = seeded(3);
        for _ in 0..20 {
            let t: f64 = rng.random_range(-7.0..7.0);
            let hp = &Unitary::hadamard() * &Unitary::phase(t);
            assert!(w_gate(t).approx_eq(&hp, 1e-12));
        }
        let plus = [c(1.0 / 2f64.sqrt(), 0.0); 2];
        let out = w_gate(PI).apply(&plus);
        assert!(out[0].norm() < 1e-12 && (out[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_angle_examples() {
        let w = Angle::quarters(1);
        assert_eq!(adaptive_angle(w, Angle::quarters(2), false, false, false), Angle::quarters(3));
        assert_eq!(
            prepared_sign_angle(w, Angle::ZERO, true, true, false),
            Angle::quarters(3)
        );
        assert_eq!(adaptive_angle(w, Angle::ZERO, true, true, false), Angle::quarters(5));
        let a = adaptive_angle(w, Angle::quarters(2), true, false, false);
        let b = adaptive_angle(w, Angle::quarters(2), true, false, true);
        assert_eq!((b - a).reduced(), Angle::PI);
    }

    #[test]
    fn cz_identity_is_cnot_up_to_phase() {
        let u = cz_rotation_cnot();
        assert!(u.equal_up_to_phase(&Unitary::cnot(), 1e-12));
        let phased = Unitary::cnot().scale(C64::from_polar(1.0, -PI / 4.0));
        assert!(u.approx_eq(&phased, 1e-12));
    }

    #[test]
    fn derived_pattern_shape() {
        let p = cnot_pattern().unwrap();
        assert_eq!(p.commands.len(), 6);
        assert!(p.commands.iter().all(|c| c.kappa.on_quarter_grid()));
        assert!(corrected_logical_map(p).equal_up_to_phase(&Unitary::cnot(), 1e-10));
        assert_eq!(p.corrections, [OutputCorrection::Hadamard, OutputCorrection::RzMinusHalfPi]);
        // A1 depends on nothing but its input frame; A2 on A1.
        assert_eq!(p.commands[0].x_deps, Deps::input_x(0));
        assert_eq!(p.commands[2].x_deps, Deps::outcome(0));
    }

    #[test]
    fn flow_matches_hand_derivation() {
        let p = cnot_pattern().unwrap();
        // s_A1 → Z on A3; s_B1 → Z on B3; s_A2 → Z on B3 and A4; s_B2 → Z on A3 and B4.
        assert_eq!(p.commands[4].z_deps, Deps(Deps::outcome(0).0 | Deps::outcome(3).0));
        assert_eq!(p.commands[5].z_deps, Deps(Deps::outcome(1).0 | Deps::outcome(2).0));
        assert_eq!(p.output_x, [Deps::outcome(4), Deps::outcome(5)]);
        assert_eq!(p.output_z, [Deps::outcome(2), Deps::outcome(3)]);
        // Frame X on A1 lands as Z on A2 and B1.
        assert_eq!(p.commands[1].z_deps, Deps(Deps::input_z(1).0 | Deps::input_x(0).0));
    }

    #[test]
    fn basis_examples() {
        let p = cnot_pattern().unwrap();
        let cases = [(0b10, 0b11), (0b00, 0b00), (0b11, 0b10), (0b01, 0b01)];
        let mut rng = seeded(11);
        for (input, output) in cases {
            let reg = StateVector::basis(2, input).unwrap();
            let pads = UnitPads::random(&mut rng);
            let run = run_cnot_unit(&reg, [0, 1], p, [WireFrame::default(); 2], &pads, [[false; 4]; 2], &mut rng)
                .unwrap();
            let mut out = run.state;
            for row in 0..2 {
                run.frames[row].decrypt(&mut out, row).unwrap();
                out.apply_single(row, &p.corrections[row].matrix()).unwrap();
            }
            let want = StateVector::basis(2, output).unwrap();
            assert!(fidelity(&want, &out).unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn bell_state() {
        let p = cnot_pattern().unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let reg = StateVector::from_amplitudes(vec![c(s, 0.0), c(0.0, 0.0), c(s, 0.0), c(0.0, 0.0)]).unwrap();
        let bell = StateVector::from_amplitudes(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap();
        for branch in 0..64u32 {
            let forced = std::array::from_fn(|i| branch >> i & 1 == 1);
            let run = run_cnot_unit_forced(&reg, [0, 1], p, [WireFrame::default(); 2], &UnitPads::zero(), [[false; 4]; 2], forced)
                .unwrap();
            let mut out = run.state;
            for row in 0..2 {
                run.frames[row].decrypt(&mut out, row).unwrap();
                out.apply_single(row, &p.corrections[row].matrix()).unwrap();
            }
            assert!(fidelity(&bell, &out).unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn kicks_and_spectator_qubits() {
        let p = cnot_pattern().unwrap();
        let mut rng = seeded(19);
        for _ in 0..20 {
            let logical = random_state(3, &mut rng).unwrap();
            let frames = [random_frame(&mut rng), random_frame(&mut rng)];
            let kicks: [[bool; 4]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| rng.random()));
            let pads = UnitPads::random(&mut rng);
            // control on wire 2, target on wire 0, wire 1 is a spectator
            let mut reg = logical.clone();
            frames[0].encrypt(&mut reg, 2).unwrap();
            frames[1].encrypt(&mut reg, 0).unwrap();
            let run = run_cnot_unit(&reg, [2, 0], p, frames, &pads, kicks, &mut rng).unwrap();
            let mut out = run.state;
            run.frames[0].decrypt(&mut out, 2).unwrap();
            run.frames[1].decrypt(&mut out, 0).unwrap();
            out.apply_single(2, &p.corrections[0].matrix()).unwrap();
            out.apply_single(0, &p.corrections[1].matrix()).unwrap();
            let cnot20 = crate::decompose::embed_cnot(2, 0, 3);
            let ideal = StateVector::from_amplitudes(cnot20.apply(logical.amplitudes())).unwrap();
            assert!(fidelity(&ideal, &out).unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn prepared_sign_variant_breaks_some_branch() {
        let p = cnot_pattern().unwrap();
        let mut rng = seeded(23);
        let mut worst: f64 = 1.0;
        for _ in 0..8 {
            let logical = random_state(2, &mut rng).unwrap();
            let pads = UnitPads::random(&mut rng);
            for branch in 0..64u32 {
                let forced: [bool; 6] = std::array::from_fn(|i| branch >> i & 1 == 1);
                let mut tracker = UnitTracker::new(p, [WireFrame::default(); 2], pads, [[false; 4]; 2]);
                let mut state = logical.extend_with(
                    &StateVector::product(
                        &(0..6)
                            .map(|i| plus_theta(pads.omega[i / 3][i % 3].radians(), false))
                            .collect::<Vec<_>>(),
                    )
                    .unwrap(),
                )
                .unwrap();
                // qubits: A1 B1 A2 A3 A4 B2 B3 B4
                let mut slots = vec![(0, 0), (1, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3)];
                let idx = |s: &[(usize, usize)], n: (usize, usize)| s.iter().position(|&x| x == n).unwrap();
                for (a, b) in crate::cluster::unit_edges(&[[0, 1, 2, 3], [4, 5, 6, 7]]) {
                    let na = (a / 4, a % 4);
                    let nb = (b / 4, b % 4);
                    state.apply_cz(idx(&slots, na), idx(&slots, nb)).unwrap();
                }
                let mut ok = true;
                for k in 0..6 {
                    let cmd = p.commands[k];
                    let (sx, sz) = tracker.byproduct(k).unwrap();
                    let omega = if cmd.col == 0 { Angle::ZERO } else { pads.omega[cmd.row][cmd.col - 1] };
                    let d = prepared_sign_angle(omega, cmd.kappa, sx, sz, pads.r[k]);
                    let q = idx(&slots, (cmd.row, cmd.col));
                    match state.project_planar(q, PlanarBasis::from(d), forced[k]).unwrap() {
                        Some((_, rest)) => state = rest,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                    slots.remove(q);
                    tracker.record(k, forced[k]);
                }
                if !ok {
                    continue;
                }
                let frames = tracker.output_frames().unwrap();
                let a = idx(&slots, (0, 3));
                let mut out = state.permuted(&[a, 1 - a]).unwrap();
                for row in 0..2 {
                    frames[row].decrypt(&mut out, row).unwrap();
                    out.apply_single(row, &p.corrections[row].matrix()).unwrap();
                }
                let ideal = StateVector::from_amplitudes(Unitary::cnot().apply(logical.amplitudes())).unwrap();
                worst = worst.min(fidelity(&ideal, &out).unwrap());
            }
        }
        assert!(worst < 0.99, "worst fidelity {worst}");
    }

    #[test]
    fn absorption() {
        let p = cnot_pattern().unwrap();
        assert!(absorb_correction(p, 1, WireContinuation::FinalOutput).is_err());
        let shifted = absorb_correction(p, 1, WireContinuation::FeedsUnit).unwrap();
        assert_eq!(shifted.commands[1].kappa, p.commands[1].kappa + Angle::HALF_PI);
        assert_eq!(shifted.commands[0], p.commands[0]);
        // R_z(−π/2) followed by a measurement at δ equals measuring at δ + π/2.
        for d in crate::angle::eight_angles() {
            for outcome in [false, true] {
                let bra = PlanarBasis::from(d).ket(outcome);
                let rz = rotation(Axis::Z, -PI / 2.0);
                let pulled = rz.dagger().apply(&bra);
                let shifted = PlanarBasis::from(d + Angle::HALF_PI).ket(outcome);
                let ov = (pulled[0].conj() * shifted[0] + pulled[1].conj() * shifted[1]).norm();
                assert!((ov - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chained_units_cancel() {
        let p = cnot_pattern().unwrap();
        let second = absorb_correction(p, 1, WireContinuation::FeedsUnit).unwrap();
        let mut rng = seeded(29);
        for _ in 0..20 {
            let logical = random_state(2, &mut rng).unwrap();
            let mut reg = logical.clone();
            let frames = [WireFrame::default(); 2];
            let run = run_cnot_unit(&reg, [0, 1], p, frames, &UnitPads::random(&mut rng), [[false; 4]; 2], &mut rng).unwrap();
            reg = run.state;
            // Hadamard on the control is applied physically through its frame.
            let mut f = run.frames;
            reg.apply_single(0, &f[0].inverse()).unwrap();
            reg.apply_single(0, &Unitary::hadamard()).unwrap();
            f[0] = WireFrame::default();
            let run2 = run_cnot_unit(&reg, [0, 1], &second, f, &UnitPads::random(&mut rng), [[false; 4]; 2], &mut rng).unwrap();
            let mut out = run2.state;
            for row in 0..2 {
                run2.frames[row].decrypt(&mut out, row).unwrap();
                out.apply_single(row, &p.corrections[row].matrix()).unwrap();
            }
            assert!(fidelity(&logical, &out).unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let p = cnot_pattern().unwrap();
        let reg = StateVector::basis(2, 1).unwrap();
        let go = |seed| {
            let mut rng = seeded(seed);
            let pads = UnitPads::random(&mut rng);
            let r = run_cnot_unit(&reg, [0, 1], p, [WireFrame::default(); 2], &pads, [[false; 4]; 2], &mut rng).unwrap();
            (r.outcomes, r.angles)
        };
        assert_eq!(go(7), go(7));
    }
}

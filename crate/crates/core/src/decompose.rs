//! Rotation-operator algebra: fixed Euler-style decomposition tables for the
//! gates H, S, Z, T, X, Y, Pauli propagation through rotations, and the
//! `e^{iα}·A·X·B·X·C` decomposition of controlled gates.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::quantum::{c, rotation, Axis, Unitary, C64};

/// Axis order of a three-factor decomposition `e^{iθ}·R_a(α)·R_b(β)·R_c(γ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AxisOrder {
    #[default]
    ZYZ,
    ZXZ,
    YXY,
}

impl AxisOrder {
    pub const ALL: [AxisOrder; 3] = [AxisOrder::ZYZ, AxisOrder::ZXZ, AxisOrder::YXY];

    /// `(a, b, c)` in matrix-product order; `c` acts first.
    pub fn axes(self) -> (Axis, Axis, Axis) {
        match self {
            AxisOrder::ZYZ => (Axis::Z, Axis::Y, Axis::Z),
            AxisOrder::ZXZ => (Axis::Z, Axis::X, Axis::Z),
            AxisOrder::YXY => (Axis::Y, Axis::X, Axis::Y),
        }
    }
}

impl fmt::Display for AxisOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AxisOrder::ZYZ => "z-y-z",
            AxisOrder::ZXZ => "z-x-z",
            AxisOrder::YXY => "y-x-y",
        })
    }
}

/// Global phase and the three rotation angles; a zero angle means the factor is absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompParams {
    pub phase: Angle,
    pub alpha: Angle,
    pub beta: Angle,
    pub gamma: Angle,
}

impl DecompParams {
    pub const fn new(phase: i32, alpha: i32, beta: i32, gamma: i32) -> Self {
        DecompParams {
            phase: Angle(phase),
            alpha: Angle(alpha),
            beta: Angle(beta),
            gamma: Angle(gamma),
        }
    }

    /// Nonzero rotations in the order they act on a state.
    pub fn rotations(&self, order: AxisOrder) -> Vec<(Axis, Angle)> {
        let (a, b, c) = order.axes();
        [(c, self.gamma), (b, self.beta), (a, self.alpha)]
            .into_iter()
            .filter(|(_, ang)| ang.0 != 0)
            .collect()
    }
}

/// `e^{iθ}·R_a(α)·R_b(β)·R_c(γ)` for the order's axes.
pub fn compose(order: AxisOrder, p: &DecompParams) -> Unitary {
    let (a, b, cx) = order.axes();
    let m = &(&rotation(a, p.alpha.radians()) * &rotation(b, p.beta.radians()))
        * &rotation(cx, p.gamma.radians());
    m.scale(C64::from_polar(1.0, p.phase.radians()))
}

/// Single-qubit gates that have decomposition table entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableGate {
    H,
    S,
    Z,
    T,
    X,
    Y,
}

impl TableGate {
    pub const ALL: [TableGate; 6] = [
        TableGate::H,
        TableGate::S,
        TableGate::Z,
        TableGate::T,
        TableGate::X,
        TableGate::Y,
    ];

    pub fn matrix(self) -> Unitary {
        match self {
            TableGate::H => Unitary::hadamard(),
            TableGate::S => Unitary::s(),
            TableGate::Z => Unitary::pauli_z(),
            TableGate::T => Unitary::t(),
            TableGate::X => Unitary::pauli_x(),
            TableGate::Y => Unitary::pauli_y(),
        }
    }
}

/// Decomposition parameters, in units of π/8, transcribed as published.
/// Entries are `(phase, α, β, γ)`.
pub fn decomp_table(gate: TableGate, order: AxisOrder) -> DecompParams {
    use AxisOrder::*;
    use TableGate::*;
    match (order, gate) {
        (ZYZ, H) => DecompParams::new(4, 0, 4, 8),
        (ZYZ, S) => DecompParams::new(2, 4, 0, 0),
        (ZYZ, Z) => DecompParams::new(4, 8, 0, 0),
        (ZYZ, X) => DecompParams::new(4, 0, 8, 8),
        (ZYZ, T) => DecompParams::new(1, 2, 0, 0),
        (ZYZ, Y) => DecompParams::new(4, 0, 8, 0),

        (ZXZ, S) => DecompParams::new(2, 4, 0, 0),
        (ZXZ, Z) => DecompParams::new(4, 8, 0, 0),
        (ZXZ, T) => DecompParams::new(1, 2, 0, 0),
        (ZXZ, X) => DecompParams::new(4, 0, 8, 0),
        // Reconstructs −Y: the published phase is off by π.
        (ZXZ, Y) => DecompParams::new(4, 0, 8, 8),
        (ZXZ, H) => DecompParams::new(4, 4, 4, 4),

        (YXY, S) => DecompParams::new(2, -4, 4, 4),
        (YXY, H) => DecompParams::new(4, 0, 8, 4),
        (YXY, Z) => DecompParams::new(4, -4, 8, 4),
        (YXY, X) => DecompParams::new(4, 0, 8, 0),
        (YXY, T) => DecompParams::new(1, -4, 2, 4),
        (YXY, Y) => DecompParams::new(4, 8, 0, 0),
    }
}

/// Pauli operator `X^x Z^z`, phases dropped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pauli {
    pub x: bool,
    pub z: bool,
}

impl Pauli {
    pub const I: Pauli = Pauli { x: false, z: false };
    pub const X: Pauli = Pauli { x: true, z: false };
    pub const Z: Pauli = Pauli { x: false, z: true };
    pub const XZ: Pauli = Pauli { x: true, z: true };

    pub fn is_identity(self) -> bool {
        !self.x && !self.z
    }

    /// Product, phases dropped.
    pub fn then(self, other: Pauli) -> Pauli {
        Pauli {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        }
    }

    /// `X^x·Z^z` as a matrix.
    pub fn matrix(self) -> Unitary {
        let mut m = Unitary::identity(2);
        if self.x {
            m = &m * &Unitary::pauli_x();
        }
        if self.z {
            m = &m * &Unitary::pauli_z();
        }
        m
    }

    /// Whether this Pauli anticommutes with the generator of rotations about `axis`.
    pub fn anticommutes_with(self, axis: Axis) -> bool {
        match axis {
            Axis::X => self.z,
            Axis::Y => self.x ^ self.z,
            Axis::Z => self.x,
        }
    }

    /// The Pauli left behind by a π rotation: `R_x(π) ∝ X`, `R_y(π) ∝ XZ`, `R_z(π) ∝ Z`.
    pub fn of_pi_rotation(axis: Axis) -> Pauli {
        match axis {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::XZ,
            Axis::Z => Pauli::Z,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.x, self.z) {
            (false, false) => f.write_str("I"),
            (true, false) => f.write_str("X"),
            (false, true) => f.write_str("Z"),
            (true, true) => f.write_str("XZ"),
        }
    }
}

/// Move a Pauli from the right of `R_axis(β)` to its left:
/// `R_axis(β)·P = P·R_axis(β')`, returning `(P, β')`.
pub fn propagate_pauli(axis: Axis, beta: f64, pauli: Pauli) -> (Pauli, f64) {
    if pauli.anticommutes_with(axis) {
        (pauli, -beta)
    } else {
        (pauli, beta)
    }
}

/// Controlled-U factors with `ABC = I` and `U = e^{iα}·A·X·B·X·C`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlledDecomp {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub a: Unitary,
    pub b: Unitary,
    pub c: Unitary,
}

/// Build `A = R_z(β)R_y(γ/2)`, `B = R_y(−γ/2)R_z(−(δ+β)/2)`, `C = R_z((δ−β)/2)`
/// after checking `e^{iα}R_z(β)R_y(γ)R_z(δ)` reproduces `target`.
pub fn controlled_u_decomp(
    target: &Unitary,
    beta: f64,
    gamma: f64,
    delta: f64,
    alpha: f64,
) -> Result<ControlledDecomp> {
    let rebuilt = (&(&rotation(Axis::Z, beta) * &rotation(Axis::Y, gamma)) * &rotation(Axis::Z, delta))
        .scale(C64::from_polar(1.0, alpha));
    if target.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: target.dim(),
        });
    }
    let dev = rebuilt.max_abs_diff(target);
    if dev > 1e-10 {
        return Err(Error::DecompositionMismatch(dev));
    }
    Ok(ControlledDecomp {
        alpha,
        beta,
        gamma,
        delta,
        a: &rotation(Axis::Z, beta) * &rotation(Axis::Y, gamma / 2.0),
        b: &rotation(Axis::Y, -gamma / 2.0) * &rotation(Axis::Z, -(delta + beta) / 2.0),
        c: rotation(Axis::Z, (delta - beta) / 2.0),
    })
}

/// Gate-level operation with a real-valued angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum GateOp {
    Rotation { wire: usize, axis: Axis, angle: f64 },
    Cnot { control: usize, target: usize },
}

/// A gate list together with the global phase it is short of.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub ops: Vec<GateOp>,
    pub global_phase: f64,
}

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Expand a controlled-U into rotations on `target`, two CNOTs, and a phase
/// rotation `R_z(α)` on `control`, dropping identity factors.
pub fn expand_controlled(cd: &ControlledDecomp, control: usize, target: usize) -> Expansion {
    let (b, g, d) = (cd.beta, cd.gamma, cd.delta);
    let rot = |wire, axis, angle| GateOp::Rotation { wire, axis, angle };
    let cnot = GateOp::Cnot { control, target };
    let raw = vec![
        // C
        rot(target, Axis::Z, (d - b) / 2.0),
        cnot,
        // B
        rot(target, Axis::Z, -(d + b) / 2.0),
        rot(target, Axis::Y, -g / 2.0),
        cnot,
        // A
        rot(target, Axis::Y, g / 2.0),
        rot(target, Axis::Z, b),
        // e^{iα}|1⟩⟨1| = e^{iα/2} R_z(α)
        rot(control, Axis::Z, cd.alpha),
    ];
    let mut phase = cd.alpha / 2.0;
    let mut ops: Vec<GateOp> = Vec::new();
    for op in raw {
        if let GateOp::Rotation { angle, .. } = op {
            let turns = angle / TWO_PI;
            if (turns - turns.round()).abs() < 1e-12 {
                // R(2πk) = (−1)^k I
                if (turns.round() as i64).rem_euclid(2) == 1 {
                    phase += std::f64::consts::PI;
                }
                continue;
            }
        }
        if op == cnot && ops.last() == Some(&cnot) {
            ops.pop();
            continue;
        }
        ops.push(op);
    }
    Expansion {
        ops,
        global_phase: phase,
    }
}

/// Unitary of a gate list on `wires` qubits (wire 0 most significant).
pub fn ops_unitary(ops: &[GateOp], wires: usize) -> Unitary {
    let dim = 1usize << wires;
    let mut u = Unitary::identity(dim);
    for op in ops {
        let g = match *op {
            GateOp::Rotation { wire, axis, angle } => embed_single(&rotation(axis, angle), wire, wires),
            GateOp::Cnot { control, target } => embed_cnot(control, target, wires),
        };
        u = &g * &u;
    }
    u
}

pub(crate) fn embed_single(g: &Unitary, wire: usize, wires: usize) -> Unitary {
    (0..wires)
        .map(|w| if w == wire { g.clone() } else { Unitary::identity(2) })
        .reduce(|acc, m| acc.kron(&m))
        .unwrap_or_else(|| Unitary::identity(1))
}

pub(crate) fn embed_cnot(control: usize, target: usize, wires: usize) -> Unitary {
    let dim = 1usize << wires;
    let mut data = vec![c(0.0, 0.0); dim * dim];
    let cm = 1 << (wires - 1 - control);
    let tm = 1 << (wires - 1 - target);
    for col in 0..dim {
        let row = if col & cm != 0 { col ^ tm } else { col };
        data[row * dim + col] = c(1.0, 0.0);
    }
    Unitary::from_vec(dim, data)
}

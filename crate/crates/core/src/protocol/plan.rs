//! Compilation of a logical circuit into the client's secret hybrid plan:
//! encrypted single-qubit rotations, measurement-based CNOT units, output
//! corrections, and the trap decoration of every block.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::circuit::{CircuitDescription, Gate};
use crate::angle::Angle;
use crate::cluster::{expected_trap_outcomes, place_traps, ClusterLayout, QubitRole, TrapCheck};
use crate::decompose::{decomp_table, AxisOrder, Pauli};
use crate::error::{Error, Result};
use crate::mbqc::{absorb_correction, cnot_pattern, CnotPattern, OutputCorrection, UnitPads, WireContinuation, WireFrame};
use crate::quantum::Axis;

/// `ξ = ν + rπ`, defined on the encryption set.
pub fn encrypt_rotation(nu: Angle, r: bool) -> Result<Angle> {
    if !nu.in_rotation_set() {
        return Err(Error::NotInRotationSet(nu.0));
    }
    Ok((nu + Angle::pi_times(r)).reduced())
}

/// Pauli left on the wire when a pad `r` was added to a rotation about `axis`
/// (phases dropped): `R_x(ν+π) ∝ X·R_x(ν)`, `R_y(ν+π) = XZ·R_y(ν)`, `R_z(ν+π) ∝ Z·R_z(ν)`.
pub fn decrypt_byproduct(axis: Axis, r: bool) -> Pauli {
    if r {
        Pauli::of_pi_rotation(axis)
    } else {
        Pauli::I
    }
}

/// A logical rotation sent as two encrypted pieces. For x/y rotations the
/// wire's prepared phase is flushed first with two encrypted z-rotations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationStep {
    pub wire: usize,
    pub axis: Axis,
    pub angle: Angle,
    pub pads: [bool; 2],
    pub flush_pads: [bool; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionStep {
    pub wire: usize,
    pub kind: OutputCorrection,
    pub rotations: Vec<RotationStep>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnotStep {
    pub unit: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Step {
    Rotation(RotationStep),
    Cnot(CnotStep),
    Correction(CorrectionStep),
}

/// One measurement slot in a unit's schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureSlot {
    /// Command index in the CNOT pattern.
    Computational(usize),
    /// Local layout index of a planar trap.
    Trap(usize),
}

/// The input column: one computational qubit per wire plus traps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputBlock {
    pub layout: ClusterLayout,
    /// Global qubit index for each local layout index.
    pub qubits: Vec<usize>,
    /// One-time pad of each input wire.
    pub frames: Vec<WireFrame>,
    pub trap_pads: Vec<bool>,
    pub checks: Vec<TrapCheck>,
}

/// A 2×4 unit plus its traps. Local index `row*4 + col` for grid qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitBlock {
    /// `[control, target]` logical wires.
    pub wires: [usize; 2],
    pub layout: ClusterLayout,
    pub qubits: Vec<usize>,
    pub pattern: CnotPattern,
    pub pads: UnitPads,
    pub trap_pads: Vec<bool>,
    pub checks: Vec<TrapCheck>,
    pub schedule: Vec<MeasureSlot>,
}

impl UnitBlock {
    pub fn grid_qubit(&self, row: usize, col: usize) -> usize {
        self.qubits[row * 4 + col]
    }

    /// Z kicks each grid qubit receives from `|1⟩` trap neighbours.
    pub fn kicks(&self) -> [[bool; 4]; 2] {
        let mut k = [[false; 4]; 2];
        for (row, kr) in k.iter_mut().enumerate() {
            for (col, slot) in kr.iter_mut().enumerate() {
                *slot = kick(&self.layout, row * 4 + col);
            }
        }
        k
    }
}

/// Parity of `|1⟩` trap neighbours of local qubit `q`.
pub fn kick(layout: &ClusterLayout, q: usize) -> bool {
    layout
        .neighbors(q)
        .into_iter()
        .filter(|&n| matches!(layout.roles[n], QubitRole::TrapZ { bit: true }))
        .count()
        % 2
        == 1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub axis_order: AxisOrder,
    /// Traps per block; `None` means as many as the block's computational qubits.
    pub traps_per_block: Option<usize>,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            axis_order: AxisOrder::ZYZ,
            traps_per_block: None,
        }
    }
}

/// Everything the client keeps secret about one computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridPlan {
    pub wires: usize,
    pub axis_order: AxisOrder,
    pub num_qubits: usize,
    pub input: InputBlock,
    pub units: Vec<UnitBlock>,
    pub steps: Vec<Step>,
}

impl HybridPlan {
    pub fn trap_checks(&self) -> impl Iterator<Item = (usize, &ClusterLayout, &[usize], &TrapCheck)> {
        let input = self
            .input
            .checks
            .iter()
            .map(move |c| (0usize, &self.input.layout, self.input.qubits.as_slice(), c));
        let units = self.units.iter().enumerate().flat_map(|(i, u)| {
            u.checks
                .iter()
                .map(move |c| (i + 1, &u.layout, u.qubits.as_slice(), c))
        });
        input.chain(units)
    }

    pub fn trap_count(&self) -> usize {
        self.input.layout.trap_count() + self.units.iter().map(|u| u.layout.trap_count()).sum::<usize>()
    }

    pub fn rotation_steps(&self) -> impl Iterator<Item = &RotationStep> {
        self.steps.iter().flat_map(|s| match s {
            Step::Rotation(r) => std::slice::from_ref(r).iter(),
            Step::Correction(c) => c.rotations.iter(),
            Step::Cnot(_) => [].iter(),
        })
    }
}

fn rotation_step<R: Rng + ?Sized>(wire: usize, axis: Axis, angle: Angle, rng: &mut R) -> RotationStep {
    RotationStep {
        wire,
        axis,
        angle,
        pads: [rng.random(), rng.random()],
        flush_pads: [rng.random(), rng.random()],
    }
}

fn correction_step<R: Rng + ?Sized>(wire: usize, kind: OutputCorrection, rng: &mut R) -> CorrectionStep {
    CorrectionStep {
        wire,
        kind,
        rotations: kind
            .rotations()
            .into_iter()
            .map(|(axis, angle)| rotation_step(wire, axis, angle, rng))
            .collect(),
    }
}

fn trap_pads<R: Rng + ?Sized>(layout: &ClusterLayout, rng: &mut R) -> Vec<bool> {
    (0..layout.len())
        .map(|q| matches!(layout.roles[q], QubitRole::TrapPlanar { .. }) && rng.random())
        .collect()
}

/// Expand gates into rotation steps and CNOT units, attach traps, and draw
/// every pad and prepared angle from `rng`.
pub fn compile_circuit<R: Rng + ?Sized>(
    circuit: &CircuitDescription,
    config: &PlanConfig,
    rng: &mut R,
) -> Result<HybridPlan> {
    circuit.validate()?;
    let order = config.axis_order;
    let w = circuit.wires;
    let mut next_qubit = 0usize;

    let grid = ClusterLayout::grid(w, 1)?;
    let input_layout = place_traps(&grid, rng, config.traps_per_block.unwrap_or(w))?;
    let input_qubits: Vec<usize> = (0..input_layout.len()).map(|i| next_qubit + i).collect();
    next_qubit += input_layout.len();
    let frames = (0..w)
        .map(|_| WireFrame::new(Angle::quarters(rng.random_range(0..8)), rng.random(), rng.random()))
        .collect();
    let input_pads = trap_pads(&input_layout, rng);
    let input_checks = expected_trap_outcomes(&input_layout, &input_pads)?;
    let input = InputBlock {
        layout: input_layout,
        qubits: input_qubits,
        frames,
        trap_pads: input_pads,
        checks: input_checks,
    };

    let base = cnot_pattern()?;
    let mut wire_qubit: Vec<usize> = (0..w).collect();
    let mut pending_rz = vec![false; w];
    let mut units = Vec::new();
    let mut steps = Vec::new();

    let flush_pending = |wire: usize, pending: &mut Vec<bool>, steps: &mut Vec<Step>, rng: &mut R| {
        if pending[wire] {
            pending[wire] = false;
            steps.push(Step::Correction(correction_step(wire, OutputCorrection::RzMinusHalfPi, rng)));
        }
    };

    for (i, g) in circuit.gates.iter().enumerate() {
        match *g {
            Gate::RZ8 { .. } => {
                return Err(Error::Unsupported(format!(
                    "gate {i}: π/8 rotations are outside the encryption set"
                )))
            }
            Gate::CNOT { c, t } => {
                let mut pattern = base.clone();
                for (row, wire) in [c, t].into_iter().enumerate() {
                    if pending_rz[wire] {
                        pattern = absorb_correction(&pattern, row, WireContinuation::FeedsUnit)?;
                        pending_rz[wire] = false;
                    }
                }
                let mut grid = ClusterLayout::grid(2, 4)?;
                let pads = UnitPads::random(rng);
                for row in 0..2 {
                    for col in 1..4 {
                        grid.roles[row * 4 + col] = QubitRole::Computational {
                            omega: pads.omega[row][col - 1],
                        };
                    }
                }
                let layout = place_traps(&grid, rng, config.traps_per_block.unwrap_or(8))?;
                let mut qubits = Vec::with_capacity(layout.len());
                for local in 0..layout.len() {
                    if local == 0 {
                        qubits.push(wire_qubit[c]);
                    } else if local == 4 {
                        qubits.push(wire_qubit[t]);
                    } else {
                        qubits.push(next_qubit);
                        next_qubit += 1;
                    }
                }
                let tp = trap_pads(&layout, rng);
                let checks = expected_trap_outcomes(&layout, &tp)?;
                let mut traps: Vec<usize> = (8..layout.len())
                    .filter(|&q| matches!(layout.roles[q], QubitRole::TrapPlanar { .. }))
                    .collect();
                traps.shuffle(rng);
                let schedule = interleave(traps, rng);
                wire_qubit[c] = qubits[3];
                wire_qubit[t] = qubits[7];
                units.push(UnitBlock {
                    wires: [c, t],
                    layout,
                    qubits,
                    pattern,
                    pads,
                    trap_pads: tp,
                    checks,
                    schedule,
                });
                steps.push(Step::Cnot(CnotStep { unit: units.len() - 1 }));
                steps.push(Step::Correction(correction_step(c, OutputCorrection::Hadamard, rng)));
                pending_rz[t] = true;
            }
            Gate::RZ { w: wire, k } => {
                flush_pending(wire, &mut pending_rz, &mut steps, rng);
                steps.push(Step::Rotation(rotation_step(wire, Axis::Z, Angle::quarters(k), rng)));
            }
            _ => {
                let wire = g.wires()[0];
                flush_pending(wire, &mut pending_rz, &mut steps, rng);
                let t = g.table_gate().expect("fixed single-qubit gate");
                for (axis, angle) in decomp_table(t, order).rotations(order) {
                    steps.push(Step::Rotation(rotation_step(wire, axis, angle, rng)));
                }
            }
        }
    }
    for wire in 0..w {
        flush_pending(wire, &mut pending_rz, &mut steps, rng);
    }
    Ok(HybridPlan {
        wires: w,
        axis_order: order,
        num_qubits: next_qubit,
        input,
        units,
        steps,
    })
}

/// Random merge of the six computational measurements (kept in order) with
/// the planar-trap measurements.
fn interleave<R: Rng + ?Sized>(traps: Vec<usize>, rng: &mut R) -> Vec<MeasureSlot> {
    let mut comp = (0..6).map(MeasureSlot::Computational);
    let mut nt = traps.len();
    let mut trap = traps.into_iter().map(MeasureSlot::Trap);
    let mut out = Vec::new();
    let mut nc = 6usize;
    while nc + nt > 0 {
        if rng.random_range(0..nc + nt) < nc {
            out.push(comp.next().expect("computational slot"));
            nc -= 1;
        } else {
            out.push(trap.next().expect("trap slot"));
            nt -= 1;
        }
    }
    out
}

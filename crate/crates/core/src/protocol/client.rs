//! The client: owns every secret, drives the server one message at a time,
//! adapts measurement angles to reported outcomes, and judges the traps.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::message::{Decision, Message, QuantumBlock, QubitId};
use super::plan::{kick, HybridPlan, MeasureSlot, RotationStep, Step};
use crate::angle::Angle;
use crate::cluster::{expected_trap_outcomes, ClusterLayout, QubitRole, TrapCheck, TrapKind};
use crate::decompose::Pauli;
use crate::error::{Error, Result};
use crate::mbqc::{UnitTracker, WireFrame};
use crate::quantum::{Axis, StateVector};
use crate::rng::SimRng;

/// Outcome of one trap check, in public qubit labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapResult {
    pub block: usize,
    pub kind: TrapKind,
    pub qubits: Vec<QubitId>,
    pub expected: bool,
    pub observed: Option<bool>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Abort { reason: String, failed: Vec<usize> },
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

/// Accept iff at most `tolerance` checks fail; a missing readout aborts.
pub fn client_verify(results: &[TrapResult], tolerance: usize) -> Verdict {
    if results.iter().any(|r| r.observed.is_none()) {
        return Verdict::Abort {
            reason: "incomplete trap readout".into(),
            failed: results
                .iter()
                .enumerate()
                .filter(|(_, r)| r.observed.is_none())
                .map(|(i, _)| i)
                .collect(),
        };
    }
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.passed)
        .map(|(i, _)| i)
        .collect();
    if failed.len() > tolerance {
        Verdict::Abort {
            reason: format!("{} trap check(s) failed", failed.len()),
            failed,
        }
    } else {
        Verdict::Accept
    }
}

#[derive(Clone, Debug)]
struct BlockMeta {
    layout: ClusterLayout,
    qubits: Vec<usize>,
    checks: Vec<TrapCheck>,
    trap_pads: Vec<bool>,
}

impl BlockMeta {
    fn trap_delta(&self, local: usize) -> Result<Angle> {
        let QubitRole::TrapPlanar { mu } = self.layout.roles[local] else {
            return Err(Error::Protocol(format!("local qubit {local} is not a planar trap")));
        };
        let offset = self
            .checks
            .iter()
            .find_map(|c| c.qubits.iter().position(|&q| q == local).map(|i| c.offsets[i]))
            .unwrap_or(Angle::ZERO);
        Ok((mu + offset + Angle::pi_times(self.trap_pads[local])).reduced())
    }

    fn z_traps(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.layout.len())
            .filter(|&q| matches!(self.layout.roles[q], QubitRole::TrapZ { .. }))
            .map(|q| self.qubits[q])
    }
}

#[derive(Clone, Debug)]
enum Action {
    Prepare,
    Entangle { block: usize, input_kicks: bool },
    Rotation(RotationStep),
    UnitBegin(usize),
    UnitMeasure { unit: usize, k: usize },
    TrapMeasure { block: usize, local: usize },
    PlainMeasure { qubit: usize, delta: Angle },
    UnitEnd(usize),
    Return,
}

#[derive(Clone, Copy, Debug)]
enum Awaiting {
    Unit { unit: usize, k: usize, qubit: usize },
    Single { qubit: usize },
    Outputs,
}

pub struct Client {
    rng: SimRng,
    public: Vec<QubitId>,
    prepared: Vec<QuantumBlock>,
    actions: VecDeque<Action>,
    outbox: VecDeque<Message>,
    awaiting: Option<Awaiting>,
    blocks: Vec<BlockMeta>,
    unit_plans: Vec<super::plan::UnitBlock>,
    trackers: Vec<Option<UnitTracker>>,
    frames: Vec<WireFrame>,
    wire_qubit: Vec<usize>,
    outcomes: BTreeMap<usize, bool>,
    tolerance: usize,
    output: Option<StateVector>,
    results: Vec<TrapResult>,
    verdict: Option<Verdict>,
    finished: bool,
}

impl Client {
    /// Client for a compiled plan; `input` is the logical input register.
    pub fn from_plan(plan: &HybridPlan, input: &StateVector, tolerance: usize, mut rng: SimRng) -> Result<Self> {
        if input.num_qubits() != plan.wires {
            return Err(Error::DimensionMismatch {
                expected: plan.wires,
                actual: input.num_qubits(),
            });
        }
        let public = permutation(plan.num_qubits, &mut rng);
        let mut prepared = Vec::new();

        let mut reg = input.clone();
        for (w, f) in plan.input.frames.iter().enumerate() {
            f.encrypt(&mut reg, w)?;
        }
        prepared.push(QuantumBlock {
            ids: (0..plan.wires).map(|w| public[plan.input.qubits[w]]).collect(),
            state: reg,
        });
        let input_meta = BlockMeta {
            layout: plan.input.layout.clone(),
            qubits: plan.input.qubits.clone(),
            checks: plan.input.checks.clone(),
            trap_pads: plan.input.trap_pads.clone(),
        };
        for local in plan.wires..input_meta.layout.len() {
            prepared.push(single(&public, input_meta.qubits[local], &input_meta.layout.roles[local]));
        }
        let mut blocks = vec![input_meta];
        for u in &plan.units {
            for local in 0..u.layout.len() {
                if local != 0 && local != 4 {
                    prepared.push(single(&public, u.qubits[local], &u.layout.roles[local]));
                }
            }
            blocks.push(BlockMeta {
                layout: u.layout.clone(),
                qubits: u.qubits.clone(),
                checks: u.checks.clone(),
                trap_pads: u.trap_pads.clone(),
            });
        }
        prepared.sort_by_key(|b| b.ids[0]);

        let mut actions = VecDeque::new();
        actions.push_back(Action::Prepare);
        actions.push_back(Action::Entangle { block: 0, input_kicks: true });
        let mut input_traps: Vec<usize> = (plan.wires..blocks[0].layout.len())
            .filter(|&q| matches!(blocks[0].layout.roles[q], QubitRole::TrapPlanar { .. }))
            .collect();
        input_traps.shuffle(&mut rng);
        for local in input_traps {
            actions.push_back(Action::TrapMeasure { block: 0, local });
        }
        for step in &plan.steps {
            match step {
                Step::Rotation(r) => actions.push_back(Action::Rotation(*r)),
                Step::Correction(c) => {
                    for r in &c.rotations {
                        actions.push_back(Action::Rotation(*r));
                    }
                }
                Step::Cnot(c) => {
                    let u = &plan.units[c.unit];
                    actions.push_back(Action::Entangle { block: c.unit + 1, input_kicks: false });
                    actions.push_back(Action::UnitBegin(c.unit));
                    for slot in &u.schedule {
                        actions.push_back(match *slot {
                            MeasureSlot::Computational(k) => Action::UnitMeasure { unit: c.unit, k },
                            MeasureSlot::Trap(local) => Action::TrapMeasure { block: c.unit + 1, local },
                        });
                    }
                    actions.push_back(Action::UnitEnd(c.unit));
                }
            }
        }
        actions.push_back(Action::Return);

        Ok(Client {
            rng,
            public,
            prepared,
            actions,
            outbox: VecDeque::new(),
            awaiting: None,
            blocks,
            unit_plans: plan.units.clone(),
            trackers: vec![None; plan.units.len()],
            frames: plan.input.frames.clone(),
            wire_qubit: (0..plan.wires).map(|w| plan.input.qubits[w]).collect(),
            outcomes: BTreeMap::new(),
            tolerance,
            output: None,
            results: Vec::new(),
            verdict: None,
            finished: false,
        })
    }

    /// Client for a bare trapped layout: every computational qubit is measured
    /// at its prepared angle plus a pad, traps are checked, nothing is output.
    pub fn for_layout(layout: &ClusterLayout, tolerance: usize, mut rng: SimRng) -> Result<Self> {
        layout.validate()?;
        let mut layout = layout.clone();
        layout.randomize_angles(&mut rng);
        for role in layout.roles.iter_mut() {
            match role {
                QubitRole::TrapPlanar { mu } => *mu = Angle::quarters(rng.random_range(0..8)),
                QubitRole::TrapZ { bit } => *bit = rng.random(),
                QubitRole::Computational { .. } => {}
            }
        }
        let pads: Vec<bool> = (0..layout.len()).map(|_| rng.random()).collect();
        let checks = expected_trap_outcomes(&layout, &pads)?;
        let public = permutation(layout.len(), &mut rng);
        let mut prepared: Vec<QuantumBlock> = (0..layout.len())
            .map(|q| single(&public, q, &layout.roles[q]))
            .collect();
        prepared.sort_by_key(|b| b.ids[0]);
        let meta = BlockMeta {
            qubits: (0..layout.len()).collect(),
            layout,
            checks,
            trap_pads: pads.clone(),
        };
        let mut measures: Vec<Action> = Vec::new();
        for q in 0..meta.layout.len() {
            match meta.layout.roles[q] {
                QubitRole::Computational { omega } => measures.push(Action::PlainMeasure {
                    qubit: q,
                    delta: (omega + Angle::pi_times(pads[q])).reduced(),
                }),
                QubitRole::TrapPlanar { .. } => measures.push(Action::TrapMeasure { block: 0, local: q }),
                QubitRole::TrapZ { .. } => {}
            }
        }
        measures.shuffle(&mut rng);
        let mut actions = VecDeque::new();
        actions.push_back(Action::Prepare);
        actions.push_back(Action::Entangle { block: 0, input_kicks: false });
        actions.extend(measures);
        actions.push_back(Action::Return);
        Ok(Client {
            rng,
            public,
            prepared,
            actions,
            outbox: VecDeque::new(),
            awaiting: None,
            blocks: vec![meta],
            unit_plans: Vec::new(),
            trackers: Vec::new(),
            frames: Vec::new(),
            wire_qubit: Vec::new(),
            outcomes: BTreeMap::new(),
            tolerance,
            output: None,
            results: Vec::new(),
            verdict: None,
            finished: false,
        })
    }

    /// Public label of internal qubit `q`.
    pub fn public_id(&self, q: usize) -> QubitId {
        self.public[q]
    }

    /// Internal qubit indices of all traps, with their kind.
    pub fn trap_qubits(&self) -> Vec<(QubitId, QubitRole)> {
        let mut out: Vec<(QubitId, QubitRole)> = self
            .blocks
            .iter()
            .flat_map(|b| {
                b.layout
                    .traps()
                    .into_iter()
                    .map(move |l| (b.qubits[l], b.layout.roles[l]))
            })
            .map(|(q, r)| (self.public[q], r))
            .collect();
        out.sort_by_key(|(q, _)| *q);
        out
    }

    /// Role of the qubit carrying public label `id`.
    pub fn role_of(&self, id: QubitId) -> Option<QubitRole> {
        self.blocks.iter().find_map(|b| {
            (0..b.layout.len())
                .find(|&l| self.public[b.qubits[l]] == id)
                .map(|l| b.layout.roles[l])
        })
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn verdict(&self) -> Option<&Verdict> {
        self.verdict.as_ref()
    }

    pub fn output(&self) -> Option<&StateVector> {
        self.output.as_ref()
    }

    pub fn trap_results(&self) -> &[TrapResult] {
        &self.results
    }

    /// Next message to send, or `None` while waiting for a reply or when done.
    pub fn next_message(&mut self) -> Result<Option<Message>> {
        loop {
            if let Some(m) = self.outbox.pop_front() {
                if matches!(m, Message::Verdict { .. }) {
                    self.finished = true;
                }
                return Ok(Some(m));
            }
            if self.awaiting.is_some() || self.finished {
                return Ok(None);
            }
            let Some(action) = self.actions.pop_front() else {
                return Ok(None);
            };
            self.perform(action)?;
        }
    }

    fn perform(&mut self, action: Action) -> Result<()> {
        match action {
            Action::Prepare => {
                let mut ids: Vec<QubitId> = self.public.clone();
                ids.sort_unstable();
                let blocks = std::mem::take(&mut self.prepared);
                self.outbox.push_back(Message::PrepareQubits { ids, blocks });
            }
            Action::Entangle { block, input_kicks } => {
                let meta = &self.blocks[block];
                let mut pairs: Vec<(QubitId, QubitId)> = meta
                    .layout
                    .edges
                    .iter()
                    .map(|&(a, b)| {
                        let (pa, pb) = (self.public[meta.qubits[a]], self.public[meta.qubits[b]]);
                        (pa.min(pb), pa.max(pb))
                    })
                    .collect();
                pairs.sort_unstable();
                if input_kicks {
                    for w in 0..self.frames.len() {
                        if kick(&meta.layout, w) {
                            self.frames[w].pauli.z ^= true;
                        }
                    }
                }
                self.outbox.push_back(Message::Entangle { pairs });
            }
            Action::Rotation(step) => self.rotate(step)?,
            Action::UnitBegin(u) => {
                let plan = &self.unit_plans[u];
                let [c, t] = plan.wires;
                self.trackers[u] = Some(UnitTracker::new(
                    &plan.pattern,
                    [self.frames[c], self.frames[t]],
                    plan.pads,
                    plan.kicks(),
                ));
            }
            Action::UnitMeasure { unit, k } => {
                let tracker = self.trackers[unit].as_ref().expect("unit begun");
                let delta = tracker.angle(k)?;
                let cmd = self.unit_plans[unit].pattern.commands[k];
                let qubit = self.unit_plans[unit].grid_qubit(cmd.row, cmd.col);
                self.outbox.push_back(Message::Measure {
                    qubit: self.public[qubit],
                    delta,
                });
                self.awaiting = Some(Awaiting::Unit { unit, k, qubit });
            }
            Action::TrapMeasure { block, local } => {
                let meta = &self.blocks[block];
                let delta = meta.trap_delta(local)?;
                let qubit = meta.qubits[local];
                self.outbox.push_back(Message::Measure {
                    qubit: self.public[qubit],
                    delta,
                });
                self.awaiting = Some(Awaiting::Single { qubit });
            }
            Action::PlainMeasure { qubit, delta } => {
                self.outbox.push_back(Message::Measure {
                    qubit: self.public[qubit],
                    delta,
                });
                self.awaiting = Some(Awaiting::Single { qubit });
            }
            Action::UnitEnd(u) => {
                let tracker = self.trackers[u].take().expect("unit begun");
                let frames = tracker.output_frames()?;
                let plan = &self.unit_plans[u];
                for row in 0..2 {
                    let w = plan.wires[row];
                    self.frames[w] = frames[row];
                    self.wire_qubit[w] = plan.grid_qubit(row, 3);
                }
            }
            Action::Return => {
                let mut qs: Vec<QubitId> = self
                    .wire_qubit
                    .iter()
                    .copied()
                    .chain(self.blocks.iter().flat_map(|b| b.z_traps()))
                    .map(|q| self.public[q])
                    .collect();
                qs.sort_unstable();
                self.outbox.push_back(Message::ReturnOutputs { qubits: qs });
                self.awaiting = Some(Awaiting::Outputs);
            }
        }
        Ok(())
    }

    /// Emit one logical rotation as encrypted pieces, adapting to the frame.
    fn rotate(&mut self, step: RotationStep) -> Result<()> {
        let w = step.wire;
        let qubit = self.public[self.wire_qubit[w]];
        if step.axis != Axis::Z {
            let (p1, p2) = (-self.frames[w].omega).split_into_rotation_set()?;
            for (part, r) in [(p1, step.flush_pads[0]), (p2, step.flush_pads[1])] {
                self.outbox.push_back(Message::Rotate {
                    qubit,
                    axis: Axis::Z,
                    xi: super::plan::encrypt_rotation(part, r)?,
                });
                if r {
                    self.frames[w].pauli = self.frames[w].pauli.then(Pauli::Z);
                }
            }
            self.frames[w].omega = Angle::ZERO;
        }
        let p = self.frames[w].pauli;
        let flip = match step.axis {
            Axis::X => p.z,
            Axis::Y => p.x ^ p.z,
            Axis::Z => p.x,
        };
        let (p1, p2) = step.angle.signed(flip).split_into_rotation_set()?;
        for (part, r) in [(p1, step.pads[0]), (p2, step.pads[1])] {
            self.outbox.push_back(Message::Rotate {
                qubit,
                axis: step.axis,
                xi: super::plan::encrypt_rotation(part, r)?,
            });
            self.frames[w].pauli = self.frames[w].pauli.then(super::plan::decrypt_byproduct(step.axis, r));
        }
        Ok(())
    }

    /// Feed a server reply.
    pub fn receive(&mut self, msg: Message) -> Result<()> {
        if let Message::ServerError { reason } = &msg {
            self.abort(format!("server error: {reason}"));
            return Ok(());
        }
        let awaiting = self
            .awaiting
            .take()
            .ok_or_else(|| Error::Protocol(format!("unexpected `{}`", msg.kind())))?;
        match (awaiting, msg) {
            (Awaiting::Unit { unit, k, qubit }, Message::MeasureResult { qubit: q, bit })
                if q == self.public[qubit] =>
            {
                self.trackers[unit].as_mut().expect("unit begun").record(k, bit);
                self.outcomes.insert(qubit, bit);
            }
            (Awaiting::Single { qubit }, Message::MeasureResult { qubit: q, bit }) if q == self.public[qubit] => {
                self.outcomes.insert(qubit, bit);
            }
            (Awaiting::Outputs, Message::OutputsPayload { blocks, .. }) => self.finish(blocks)?,
            (_, other) => {
                self.abort(format!("unexpected `{}` from server", other.kind()));
            }
        }
        Ok(())
    }

    fn abort(&mut self, reason: String) {
        self.actions.clear();
        self.awaiting = None;
        self.verdict = Some(Verdict::Abort {
            reason,
            failed: Vec::new(),
        });
        self.outbox.push_back(Message::Verdict {
            decision: Decision::Abort,
        });
    }

    fn finish(&mut self, blocks: Vec<QuantumBlock>) -> Result<()> {
        let internal: BTreeMap<QubitId, usize> =
            self.public.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let z_traps: BTreeSet<usize> = self.blocks.iter().flat_map(|b| b.z_traps()).collect();
        let mut wire_blocks = Vec::new();
        for mut b in blocks {
            let mut pos = 0;
            while pos < b.ids.len() {
                let q = *internal
                    .get(&b.ids[pos])
                    .ok_or_else(|| Error::Protocol(format!("unknown qubit q{}", b.ids[pos])))?;
                if z_traps.contains(&q) {
                    let (bit, rest) = b.state.measure_z(pos, &mut self.rng)?;
                    self.outcomes.insert(q, bit);
                    b.state = rest;
                    b.ids.remove(pos);
                } else {
                    pos += 1;
                }
            }
            if !b.ids.is_empty() {
                wire_blocks.push(b);
            }
        }
        if !self.wire_qubit.is_empty() {
            let mut ids: Vec<QubitId> = Vec::new();
            let mut state: Option<StateVector> = None;
            for b in wire_blocks {
                ids.extend(&b.ids);
                state = Some(match state {
                    None => b.state,
                    Some(s) => s.extend_with(&b.state)?,
                });
            }
            let state = state.ok_or_else(|| Error::Protocol("no output qubits returned".into()))?;
            let order: Vec<usize> = self
                .wire_qubit
                .iter()
                .map(|&q| {
                    ids.iter()
                        .position(|&id| id == self.public[q])
                        .ok_or_else(|| Error::Protocol(format!("output q{} missing", self.public[q])))
                })
                .collect::<Result<_>>()?;
            let mut out = state.permuted(&order)?;
            for (w, f) in self.frames.iter().enumerate() {
                f.decrypt(&mut out, w)?;
            }
            self.output = Some(out);
        }
        self.results = self.evaluate_traps();
        let verdict = client_verify(&self.results, self.tolerance);
        let decision = if verdict.is_accept() { Decision::Accept } else { Decision::Abort };
        self.verdict = Some(verdict);
        self.outbox.push_back(Message::Verdict { decision });
        Ok(())
    }

    fn evaluate_traps(&self) -> Vec<TrapResult> {
        let mut out = Vec::new();
        for (bi, meta) in self.blocks.iter().enumerate() {
            for check in &meta.checks {
                let qs: Vec<usize> = check.qubits.iter().map(|&l| meta.qubits[l]).collect();
                let observed = qs
                    .iter()
                    .map(|q| self.outcomes.get(q).copied())
                    .try_fold(false, |acc, b| b.map(|b| acc ^ b));
                out.push(TrapResult {
                    block: bi,
                    kind: check.kind,
                    qubits: qs.iter().map(|&q| self.public[q]).collect(),
                    expected: check.expected_parity,
                    observed,
                    passed: observed == Some(check.expected_parity),
                });
            }
        }
        out
    }
}

fn permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<QubitId> {
    let mut p: Vec<QubitId> = (0..n as QubitId).collect();
    p.shuffle(rng);
    p
}

fn single(public: &[QubitId], q: usize, role: &QubitRole) -> QuantumBlock {
    QuantumBlock {
        ids: vec![public[q]],
        state: StateVector::single(role.ket()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(observed: Option<bool>, expected: bool) -> TrapResult {
        TrapResult {
            block: 0,
            kind: TrapKind::Z,
            qubits: vec![0],
            expected,
            observed,
            passed: observed == Some(expected),
        }
    }

    #[test]
    fn verdict_rules() {
        assert!(client_verify(&[], 0).is_accept());
        assert!(client_verify(&[result(Some(true), true)], 0).is_accept());
        let v = client_verify(&[result(Some(true), true), result(Some(false), true)], 0);
        assert_eq!(
            v,
            Verdict::Abort {
                reason: "1 trap check(s) failed".into(),
                failed: vec![1]
            }
        );
        assert!(client_verify(&[result(Some(false), true)], 1).is_accept());
        let v = client_verify(&[result(None, true)], 5);
        assert!(matches!(v, Verdict::Abort { reason, .. } if reason.contains("incomplete")));
    }
}

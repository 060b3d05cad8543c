//! The server: holds quantum memory as independent blocks, applies what it is
//! told, and lets its adversary policy tamper just before readout.

use std::collections::BTreeMap;

use super::adversary::AdversaryPolicy;
use super::message::{Message, QuantumBlock, QubitId};
use crate::decompose::Pauli;
use crate::error::{Error, Result};
use crate::quantum::{rotation, PlanarBasis, StateVector};
use crate::rng::SimRng;

const SPLIT_TOL: f64 = 1e-10;

pub struct Server {
    blocks: BTreeMap<usize, QuantumBlock>,
    home: BTreeMap<QubitId, usize>,
    next_block: usize,
    attacks: BTreeMap<QubitId, Pauli>,
    rng: SimRng,
    peak_block: usize,
}

impl Server {
    pub fn new(adversary: &AdversaryPolicy, rng: SimRng) -> Self {
        let mut attacks: BTreeMap<QubitId, Pauli> = BTreeMap::new();
        for a in adversary.attacks() {
            let e = attacks.entry(a.qubit).or_default();
            *e = e.then(a.pauli);
        }
        Server {
            blocks: BTreeMap::new(),
            home: BTreeMap::new(),
            next_block: 0,
            attacks,
            rng,
            peak_block: 0,
        }
    }

    /// Largest number of qubits held in one block so far.
    pub fn peak_block(&self) -> usize {
        self.peak_block
    }

    pub fn live_qubits(&self) -> usize {
        self.home.len()
    }

    /// Process one client message, returning the reply if there is one.
    pub fn handle(&mut self, msg: &Message) -> Result<Option<Message>> {
        match msg {
            Message::PrepareQubits { blocks, .. } => {
                for b in blocks {
                    self.insert(b.clone())?;
                }
                Ok(None)
            }
            Message::Entangle { pairs } => {
                for &(a, b) in pairs {
                    self.cz(a, b)?;
                }
                Ok(None)
            }
            Message::Rotate { qubit, axis, xi } => {
                let (blk, pos) = self.locate(*qubit)?;
                let u = rotation(*axis, xi.radians());
                self.block_mut(blk).state.apply_single(pos, &u)?;
                Ok(None)
            }
            Message::Measure { qubit, delta } => {
                self.tamper(*qubit)?;
                let (blk, pos) = self.locate(*qubit)?;
                let block = self.blocks.remove(&blk).expect("located block");
                let (bit, rest) = block.state.measure_planar(pos, PlanarBasis::from(*delta), &mut self.rng)?;
                self.home.remove(qubit);
                let mut ids = block.ids;
                ids.remove(pos);
                if !ids.is_empty() {
                    self.blocks.insert(blk, QuantumBlock { ids, state: rest });
                }
                Ok(Some(Message::MeasureResult { qubit: *qubit, bit }))
            }
            Message::ReturnOutputs { qubits } => {
                for &q in qubits {
                    self.tamper(q)?;
                }
                let mut wanted: Vec<usize> = Vec::new();
                for &q in qubits {
                    let (blk, _) = self.locate(q)?;
                    if !wanted.contains(&blk) {
                        wanted.push(blk);
                    }
                }
                let mut out = Vec::new();
                for blk in wanted {
                    let b = self.blocks.remove(&blk).expect("located block");
                    if let Some(stray) = b.ids.iter().find(|id| !qubits.contains(id)) {
                        return Err(Error::Protocol(format!(
                            "q{stray} is entangled with a returned qubit but was not requested"
                        )));
                    }
                    for id in &b.ids {
                        self.home.remove(id);
                    }
                    out.push(b);
                }
                Ok(Some(Message::OutputsPayload {
                    qubits: qubits.clone(),
                    blocks: out,
                }))
            }
            Message::Verdict { .. } => Ok(None),
            other => Err(Error::Protocol(format!(
                "server cannot handle `{}`",
                other.kind()
            ))),
        }
    }

    fn insert(&mut self, block: QuantumBlock) -> Result<()> {
        if block.ids.len() != block.state.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: block.ids.len(),
                actual: block.state.num_qubits(),
            });
        }
        for &id in &block.ids {
            if self.home.contains_key(&id) {
                return Err(Error::Protocol(format!("q{id} prepared twice")));
            }
        }
        let key = self.next_block;
        self.next_block += 1;
        for &id in &block.ids {
            self.home.insert(id, key);
        }
        self.peak_block = self.peak_block.max(block.ids.len());
        self.blocks.insert(key, block);
        Ok(())
    }

    fn locate(&self, q: QubitId) -> Result<(usize, usize)> {
        let blk = *self
            .home
            .get(&q)
            .ok_or_else(|| Error::Protocol(format!("q{q} is not held by the server")))?;
        let pos = self.blocks[&blk]
            .ids
            .iter()
            .position(|&x| x == q)
            .expect("home map consistent");
        Ok((blk, pos))
    }

    fn block_mut(&mut self, blk: usize) -> &mut QuantumBlock {
        self.blocks.get_mut(&blk).expect("block exists")
    }

    fn tamper(&mut self, q: QubitId) -> Result<()> {
        if let Some(p) = self.attacks.remove(&q) {
            let (blk, pos) = self.locate(q)?;
            self.block_mut(blk).state.apply_single(pos, &p.matrix())?;
        }
        Ok(())
    }

    fn cz(&mut self, a: QubitId, b: QubitId) -> Result<()> {
        if a == b {
            return Err(Error::SameQubit(a as usize));
        }
        let (ba, _) = self.locate(a)?;
        let (bb, _) = self.locate(b)?;
        if ba != bb {
            let second = self.blocks.remove(&bb).expect("located block");
            let first = self.block_mut(ba);
            first.state = first.state.extend_with(&second.state)?;
            first.ids.extend(second.ids.iter().copied());
            for id in second.ids {
                self.home.insert(id, ba);
            }
            let n = self.blocks[&ba].ids.len();
            self.peak_block = self.peak_block.max(n);
        }
        let (blk, pa) = self.locate(a)?;
        let (_, pb) = self.locate(b)?;
        self.block_mut(blk).state.apply_cz(pa, pb)?;
        self.split_off(a)?;
        self.split_off(b)?;
        Ok(())
    }

    /// Factor `q` out of its block if it is in a product state with the rest.
    fn split_off(&mut self, q: QubitId) -> Result<()> {
        let (blk, pos) = self.locate(q)?;
        if self.blocks[&blk].ids.len() == 1 {
            return Ok(());
        }
        if let Some((rest, ket)) = self.blocks[&blk].state.try_split_qubit(pos, SPLIT_TOL)? {
            let block = self.block_mut(blk);
            block.state = rest;
            block.ids.remove(pos);
            self.home.remove(&q);
            self.insert(QuantumBlock {
                ids: vec![q],
                state: StateVector::single(ket),
            })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::Angle;
    use crate::quantum::{ket_bit, plus_theta, Axis};
    use crate::rng::seeded;

    fn one(id: QubitId, ket: [crate::quantum::C64; 2]) -> QuantumBlock {
        QuantumBlock {
            ids: vec![id],
            state: StateVector::single(ket),
        }
    }

    #[test]
    fn z_trap_splits_and_flips_under_attack() {
        let adv = AdversaryPolicy::parse("X@q1").unwrap();
        let mut s = Server::new(&adv, seeded(0));
        s.handle(&Message::PrepareQubits {
            ids: vec![0, 1],
            blocks: vec![one(0, plus_theta(0.3, false)), one(1, ket_bit(false))],
        })
        .unwrap();
        s.handle(&Message::Entangle { pairs: vec![(0, 1)] }).unwrap();
        assert_eq!(s.blocks.len(), 2, "|0⟩ neighbour stays separable");
        let reply = s.handle(&Message::ReturnOutputs { qubits: vec![1] }).unwrap().unwrap();
        let Message::OutputsPayload { blocks, .. } = reply else { panic!() };
        let amps = blocks[0].state.amplitudes();
        assert!(amps[0].norm() < 1e-12 && (amps[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measurement_follows_rotation() {
        let mut s = Server::new(&AdversaryPolicy::Honest, seeded(1));
        s.handle(&Message::PrepareQubits {
            ids: vec![7],
            blocks: vec![one(7, plus_theta(0.0, false))],
        })
        .unwrap();
        s.handle(&Message::Rotate { qubit: 7, axis: Axis::Z, xi: Angle::HALF_PI }).unwrap();
        // R_z(π/2)|+⟩ ∝ |+_{π/2}⟩, so measuring at π/2 gives 0.
        let r = s.handle(&Message::Measure { qubit: 7, delta: Angle::HALF_PI }).unwrap();
        assert_eq!(r, Some(Message::MeasureResult { qubit: 7, bit: false }));
        assert!(s.handle(&Message::Measure { qubit: 7, delta: Angle::ZERO }).is_err());
    }

    #[test]
    fn entangled_pair_merges() {
        let mut s = Server::new(&AdversaryPolicy::Honest, seeded(2));
        s.handle(&Message::PrepareQubits {
            ids: vec![0, 1],
            blocks: vec![one(0, plus_theta(0.0, false)), one(1, plus_theta(0.0, false))],
        })
        .unwrap();
        s.handle(&Message::Entangle { pairs: vec![(0, 1)] }).unwrap();
        assert_eq!(s.blocks.len(), 1);
        assert_eq!(s.peak_block(), 2);
        assert!(s.handle(&Message::ReturnOutputs { qubits: vec![0] }).is_err());
    }
}

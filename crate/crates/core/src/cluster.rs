//! Brickwork cluster layouts, eight-qubit CNOT units, and trap decoration.
//!
//! Grid qubits are indexed row-major from 0; the edge rules are stated on
//! 1-based rows and columns. Trap qubits are appended after the grid.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::angle::Angle;
use crate::decompose::Pauli;
use crate::error::{Error, Result};
use crate::quantum::{ket_bit, plus_theta, PlanarBasis, StateVector};

pub const LAYOUT_VERSION: u32 = 1;
pub const DEFAULT_PLACEMENT_RETRIES: usize = 100;
/// Largest entangled group of planar traps.
pub const MAX_PLANAR_COMPONENT: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum QubitRole {
    Computational { omega: Angle },
    TrapZ { bit: bool },
    TrapPlanar { mu: Angle },
}

impl QubitRole {
    pub fn is_trap(&self) -> bool {
        !matches!(self, QubitRole::Computational { .. })
    }

    /// The prepared single-qubit state.
    pub fn ket(&self) -> [crate::quantum::C64; 2] {
        match *self {
            QubitRole::Computational { omega } => plus_theta(omega.radians(), false),
            QubitRole::TrapZ { bit } => ket_bit(bit),
            QubitRole::TrapPlanar { mu } => plus_theta(mu.radians(), false),
        }
    }
}

pub type Edge = (usize, usize);

fn ordered(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Whether the vertical rules place a pair of links at 1-based `(a, b)`.
fn vertical_rule(m: usize, n: usize, a: usize, b: usize) -> bool {
    let fires = (!a.is_multiple_of(2) && b % 6 == 1) || (a.is_multiple_of(2) && b % 6 == 4);
    fires && a < m && b + 2 <= n
}

/// CZ links of the `m × n` brickwork: horizontal chains on every row plus
/// vertical pairs at `(a, b)` and `(a, b+2)` for odd `a` with `b ≡ 1 (mod 6)`
/// and even `a` with `b ≡ 4 (mod 6)`.
pub fn build_cluster_edges(m: usize, n: usize) -> Result<BTreeSet<Edge>> {
    if m == 0 || n == 0 {
        return Err(Error::Layout(format!("grid {m}x{n} is empty")));
    }
    let idx = |a: usize, b: usize| (a - 1) * n + (b - 1);
    let mut edges = BTreeSet::new();
    for a in 1..=m {
        for b in 1..n {
            edges.insert((idx(a, b), idx(a, b + 1)));
        }
    }
    for a in 1..=m {
        for b in 1..=n {
            if vertical_rule(m, n, a, b) {
                edges.insert((idx(a, b), idx(a + 1, b)));
                edges.insert((idx(a, b + 2), idx(a + 1, b + 2)));
            }
        }
    }
    Ok(edges)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterLayout {
    pub rows: usize,
    pub cols: usize,
    pub roles: Vec<QubitRole>,
    pub edges: BTreeSet<Edge>,
}

#[derive(Serialize, Deserialize)]
struct LayoutDoc {
    version: u32,
    rows: usize,
    cols: usize,
    roles: Vec<QubitRole>,
    edges: Vec<Edge>,
}

impl ClusterLayout {
    /// Trap-free brickwork with every prepared angle at zero.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        let edges = build_cluster_edges(rows, cols)?;
        Ok(ClusterLayout {
            rows,
            cols,
            roles: vec![QubitRole::Computational { omega: Angle::ZERO }; rows * cols],
            edges,
        })
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// 0-based `(row, col)` of a grid qubit.
    pub fn position(&self, q: usize) -> Option<(usize, usize)> {
        (q < self.grid_len()).then(|| (q / self.cols, q % self.cols))
    }

    pub fn grid_len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn trap_count(&self) -> usize {
        self.roles.iter().filter(|r| r.is_trap()).count()
    }

    pub fn computational(&self) -> Vec<usize> {
        (0..self.len()).filter(|&q| !self.roles[q].is_trap()).collect()
    }

    pub fn traps(&self) -> Vec<usize> {
        (0..self.len()).filter(|&q| self.roles[q].is_trap()).collect()
    }

    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == q {
                    Some(b)
                } else if b == q {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn degree(&self, q: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == q || b == q).count()
    }

    /// Largest degree among grid qubits counting only grid edges.
    pub fn max_grid_degree(&self) -> usize {
        let g = self.grid_len();
        (0..g)
            .map(|q| {
                self.edges
                    .iter()
                    .filter(|&&(a, b)| (a == q && b < g) || (b == q && a < g))
                    .count()
            })
            .max()
            .unwrap_or(0)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::SameQubit(a));
        }
        for q in [a, b] {
            if q >= self.len() {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits: self.len(),
                });
            }
        }
        self.edges.insert(ordered(a, b));
        Ok(())
    }

    /// Draw fresh prepared angles for the computational qubits.
    pub fn randomize_angles<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for role in &mut self.roles {
            if let QubitRole::Computational { omega } = role {
                *omega = Angle::quarters(rng.random_range(0..8));
            }
        }
    }

    /// Check the structural invariants: grid edges follow the brickwork rules,
    /// planar traps never touch computational qubits, planar components stay
    /// small, and trap degrees stay within the grid's.
    pub fn validate(&self) -> Result<()> {
        let g = self.grid_len();
        if g == 0 || self.roles.len() < g {
            return Err(Error::Layout("role map shorter than grid".into()));
        }
        if self.roles[..g].iter().any(|r| r.is_trap()) {
            return Err(Error::Layout("trap inside the computational grid".into()));
        }
        if self.roles[g..].iter().any(|r| !r.is_trap()) {
            return Err(Error::Layout("computational qubit outside the grid".into()));
        }
        for role in &self.roles {
            let ok = match role {
                QubitRole::Computational { omega } => omega.on_quarter_grid(),
                QubitRole::TrapPlanar { mu } => mu.on_quarter_grid(),
                QubitRole::TrapZ { .. } => true,
            };
            if !ok {
                return Err(Error::Layout(format!("angle off the π/4 grid: {role:?}")));
            }
        }
        let expected = build_cluster_edges(self.rows, self.cols)?;
        let grid_edges: BTreeSet<Edge> = self
            .edges
            .iter()
            .copied()
            .filter(|&(a, b)| a < g && b < g)
            .collect();
        if grid_edges != expected {
            return Err(Error::Layout("grid edges differ from the brickwork rules".into()));
        }
        for &(a, b) in &self.edges {
            if a == b || b >= self.len() {
                return Err(Error::Layout(format!("bad edge ({a}, {b})")));
            }
            let planar = |q: usize| matches!(self.roles[q], QubitRole::TrapPlanar { .. });
            let comp = |q: usize| !self.roles[q].is_trap();
            if (planar(a) && comp(b)) || (planar(b) && comp(a)) {
                return Err(Error::Layout(format!(
                    "planar trap linked to computational qubit ({a}, {b})"
                )));
            }
        }
        let cap = self.degree_cap();
        for q in g..self.len() {
            if self.degree(q) > cap {
                return Err(Error::Layout(format!("trap {q} has degree above {cap}")));
            }
        }
        for comp in self.planar_components() {
            if comp.members.len() > MAX_PLANAR_COMPONENT {
                return Err(Error::Layout(format!(
                    "planar component of size {}",
                    comp.members.len()
                )));
            }
        }
        Ok(())
    }

    fn degree_cap(&self) -> usize {
        self.max_grid_degree().max(2)
    }

    /// Connected groups of planar traps, with the TrapZ qubits bounding them.
    pub fn planar_components(&self) -> Vec<TrapComponent> {
        let planar: BTreeSet<usize> = (0..self.len())
            .filter(|&q| matches!(self.roles[q], QubitRole::TrapPlanar { .. }))
            .collect();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in &planar {
            if !seen.insert(start) {
                continue;
            }
            let mut members = vec![start];
            let mut stack = vec![start];
            while let Some(q) = stack.pop() {
                for nb in self.neighbors(q) {
                    if planar.contains(&nb) && seen.insert(nb) {
                        members.push(nb);
                        stack.push(nb);
                    }
                }
            }
            members.sort_unstable();
            let bounds: BTreeSet<usize> = members
                .iter()
                .flat_map(|&q| self.neighbors(q))
                .filter(|nb| !planar.contains(nb))
                .collect();
            out.push(TrapComponent {
                members,
                bounds: bounds.into_iter().collect(),
            });
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = LayoutDoc {
            version: LAYOUT_VERSION,
            rows: self.rows,
            cols: self.cols,
            roles: self.roles.clone(),
            edges: self.edges.iter().copied().collect(),
        };
        serde_json::to_string(&doc).expect("layout serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: LayoutDoc =
            serde_json::from_str(s).map_err(|e| Error::Layout(format!("bad layout json: {e}")))?;
        if doc.version != LAYOUT_VERSION {
            return Err(Error::Layout(format!("unsupported version {}", doc.version)));
        }
        let layout = ClusterLayout {
            rows: doc.rows,
            cols: doc.cols,
            roles: doc.roles,
            edges: doc.edges.into_iter().map(|(a, b)| ordered(a, b)).collect(),
        };
        layout.validate()?;
        Ok(layout)
    }
}

/// Planar traps linked to each other, plus the TrapZ qubits they touch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapComponent {
    pub members: Vec<usize>,
    pub bounds: Vec<usize>,
}

/// The 2×4 fragment implementing one CNOT. `grid[row][col]` holds layout
/// indices; row 0 is the control row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EightQubitUnit {
    pub grid: [[usize; 4]; 2],
}

impl EightQubitUnit {
    pub fn inputs(&self) -> [usize; 2] {
        [self.grid[0][0], self.grid[1][0]]
    }

    pub fn outputs(&self) -> [usize; 2] {
        [self.grid[0][3], self.grid[1][3]]
    }

    /// Measured qubits in measurement order `A1, B1, A2, B2, A3, B3`.
    pub fn measured(&self) -> [usize; 6] {
        let g = &self.grid;
        [g[0][0], g[1][0], g[0][1], g[1][1], g[0][2], g[1][2]]
    }

    pub fn internal_edges(&self) -> BTreeSet<Edge> {
        unit_edges(&self.grid)
    }
}

/// Horizontal chains on both rows plus vertical links at columns 1 and 3.
pub fn unit_edges(grid: &[[usize; 4]; 2]) -> BTreeSet<Edge> {
    let mut e = BTreeSet::new();
    for row in grid {
        for c in 0..3 {
            e.insert(ordered(row[c], row[c + 1]));
        }
    }
    e.insert(ordered(grid[0][0], grid[1][0]));
    e.insert(ordered(grid[0][2], grid[1][2]));
    e
}

/// One unit per vertical link pair whose four columns fit in the grid,
/// ordered by row pair then column.
pub fn carve_units(layout: &ClusterLayout) -> Result<Vec<EightQubitUnit>> {
    let (m, n) = (layout.rows, layout.cols);
    let expected = build_cluster_edges(m, n)?;
    let g = layout.grid_len();
    let grid_edges: BTreeSet<Edge> = layout
        .edges
        .iter()
        .copied()
        .filter(|&(a, b)| a < g && b < g)
        .collect();
    if grid_edges != expected {
        return Err(Error::Layout("grid edges differ from the brickwork rules".into()));
    }
    let mut units = Vec::new();
    for a in 1..=m {
        for b in 1..=n {
            if vertical_rule(m, n, a, b) && b + 3 <= n {
                let mut grid = [[0; 4]; 2];
                for (r, row) in grid.iter_mut().enumerate() {
                    for (c, slot) in row.iter_mut().enumerate() {
                        *slot = layout.index(a - 1 + r, b - 1 + c);
                    }
                }
                units.push(EightQubitUnit { grid });
            }
        }
    }
    Ok(units)
}

/// Attach `trap_count` traps (about half `|0⟩/|1⟩`, the rest planar) with
/// random bits and angles, retrying placements that break the invariants.
pub fn place_traps<R: Rng + ?Sized>(
    layout: &ClusterLayout,
    rng: &mut R,
    trap_count: usize,
) -> Result<ClusterLayout> {
    place_traps_with_retries(layout, rng, trap_count, DEFAULT_PLACEMENT_RETRIES)
}

pub fn place_traps_with_retries<R: Rng + ?Sized>(
    layout: &ClusterLayout,
    rng: &mut R,
    trap_count: usize,
    retries: usize,
) -> Result<ClusterLayout> {
    if trap_count == 0 {
        return Ok(layout.clone());
    }
    for _ in 0..retries.max(1) {
        if let Some(candidate) = try_place(layout, rng, trap_count) {
            if candidate.validate().is_ok() {
                return Ok(candidate);
            }
        }
    }
    Err(Error::TrapPlacement(trap_count))
}

fn try_place<R: Rng + ?Sized>(
    layout: &ClusterLayout,
    rng: &mut R,
    trap_count: usize,
) -> Option<ClusterLayout> {
    let mut out = layout.clone();
    let n_z = trap_count.div_ceil(2);
    let n_p = trap_count - n_z;
    let cap = out.degree_cap();
    let comp = out.computational();

    let mut zs = Vec::with_capacity(n_z);
    for _ in 0..n_z {
        let q = out.len();
        out.roles.push(QubitRole::TrapZ {
            bit: rng.random(),
        });
        let anchor = *comp.choose(rng)?;
        out.edges.insert(ordered(anchor, q));
        zs.push(q);
    }

    let mut remaining = n_p;
    while remaining > 0 {
        let size = rng.random_range(1..=remaining.min(MAX_PLANAR_COMPONENT));
        remaining -= size;
        let base = out.len();
        for _ in 0..size {
            out.roles.push(QubitRole::TrapPlanar {
                mu: Angle::quarters(rng.random_range(0..8)),
            });
        }
        match size {
            2 => {
                out.edges.insert((base, base + 1));
            }
            3 => {
                out.edges.insert((base, base + 1));
                out.edges.insert((base + 1, base + 2));
                if rng.random() {
                    out.edges.insert((base, base + 2));
                }
            }
            _ => {}
        }
        let members: Vec<usize> = (base..base + size).collect();
        let free_members: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&q| out.degree(q) < cap)
            .collect();
        let free_z: Vec<usize> = zs.iter().copied().filter(|&z| out.degree(z) < cap).collect();
        let m = *free_members.choose(rng)?;
        let z = *free_z.choose(rng)?;
        out.edges.insert(ordered(m, z));
    }
    Some(out)
}

/// What the client expects from one trap group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapCheck {
    pub kind: TrapKind,
    /// Layout indices whose outcomes enter the parity.
    pub qubits: Vec<usize>,
    /// Basis offset added to `μ` (planar traps); zero for Z-basis traps.
    pub offsets: Vec<Angle>,
    pub expected_parity: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrapKind {
    Z,
    Planar,
}

impl TrapCheck {
    pub fn passes(&self, outcomes: &BTreeMap<usize, bool>) -> Option<bool> {
        let mut parity = false;
        for q in &self.qubits {
            parity ^= *outcomes.get(q)?;
        }
        Some(parity == self.expected_parity)
    }
}

/// Exact outcome rules for every trap: a Z-basis bit for each `|0⟩/|1⟩` trap
/// and, for each planar component measured at `μ + offset + rπ`, the parity of
/// its outcomes. `pads` is indexed by layout qubit.
pub fn expected_trap_outcomes(layout: &ClusterLayout, pads: &[bool]) -> Result<Vec<TrapCheck>> {
    if pads.len() < layout.len() {
        return Err(Error::Layout("pad vector shorter than layout".into()));
    }
    let mut checks = Vec::new();
    for q in 0..layout.len() {
        if let QubitRole::TrapZ { bit } = layout.roles[q] {
            checks.push(TrapCheck {
                kind: TrapKind::Z,
                qubits: vec![q],
                offsets: vec![Angle::ZERO],
                expected_parity: bit,
            });
        }
    }
    for comp in layout.planar_components() {
        if comp.members.len() > MAX_PLANAR_COMPONENT {
            return Err(Error::Layout(format!(
                "planar component of size {}",
                comp.members.len()
            )));
        }
        let offsets = component_offsets(layout, &comp)?;
        let p0 = component_parity_zero(layout, &comp, &offsets, pads, &[])?;
        let parity = if (p0 - 1.0).abs() < 1e-9 {
            false
        } else if p0.abs() < 1e-9 {
            true
        } else {
            return Err(Error::Layout(format!("component {:?} has no deterministic parity", comp.members)));
        };
        checks.push(TrapCheck {
            kind: TrapKind::Planar,
            qubits: comp.members.clone(),
            offsets,
            expected_parity: parity,
        });
    }
    Ok(checks)
}

/// Per-member offsets in `{0, π/2}` making the component's outcome parity
/// deterministic, found by exact simulation.
pub fn component_offsets(layout: &ClusterLayout, comp: &TrapComponent) -> Result<Vec<Angle>> {
    let k = comp.members.len();
    let zeros = vec![false; layout.len()];
    for mask in 0..(1u32 << k) {
        let offsets: Vec<Angle> = (0..k)
            .map(|i| if mask >> i & 1 == 1 { Angle::HALF_PI } else { Angle::ZERO })
            .collect();
        let p0 = component_parity_zero(layout, comp, &offsets, &zeros, &[])?;
        if !(1e-9..=1.0 - 1e-9).contains(&p0) {
            return Ok(offsets);
        }
    }
    Err(Error::Layout(format!("no deterministic basis for component {:?}", comp.members)))
}

/// Probability that the component's planar outcomes have even parity, with
/// optional Paulis applied to members just before measurement.
pub fn component_parity_zero(
    layout: &ClusterLayout,
    comp: &TrapComponent,
    offsets: &[Angle],
    pads: &[bool],
    attacks: &[(usize, Pauli)],
) -> Result<f64> {
    let order: Vec<usize> = comp.members.iter().chain(&comp.bounds).copied().collect();
    let kets: Vec<_> = order.iter().map(|&q| layout.roles[q].ket()).collect();
    let mut state = StateVector::product(&kets)?;
    let pos = |q: usize| order.iter().position(|&x| x == q);
    for &(a, b) in &layout.edges {
        if let (Some(i), Some(j)) = (pos(a), pos(b)) {
            state.apply_cz(i, j)?;
        }
    }
    for &(q, p) in attacks {
        if let Some(i) = pos(q) {
            state.apply_single(i, &p.matrix())?;
        }
    }
    let mut angles = Vec::with_capacity(comp.members.len());
    for (i, &q) in comp.members.iter().enumerate() {
        let mu = match layout.roles[q] {
            QubitRole::TrapPlanar { mu } => mu,
            _ => return Err(Error::Layout(format!("qubit {q} is not a planar trap"))),
        };
        angles.push(mu + offsets[i] + Angle::pi_times(pads[q]));
    }
    // Members sit at the front, so measuring index 0 repeatedly walks them in order.
    let mut p_even = 0.0;
    let mut stack = vec![(state, 0usize, false, 1.0f64)];
    while let Some((s, depth, parity, prob)) = stack.pop() {
        if depth == angles.len() {
            if !parity {
                p_even += prob;
            }
            continue;
        }
        for outcome in [false, true] {
            if let Some((p, rest)) = s.project_planar(0, PlanarBasis::from(angles[depth]), outcome)? {
                stack.push((rest, depth + 1, parity ^ outcome, prob * p));
            }
        }
    }
    Ok(p_even)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn oracle_edges(m: usize, n: usize) -> BTreeSet<Edge> {
        let mut s = BTreeSet::new();
        for a in 1..=m {
            for b in 1..=n {
                let q = (a - 1) * n + (b - 1);
                if b < n {
                    s.insert((q, q + 1));
                }
                let odd = a % 2 == 1 && b % 6 == 1;
                let even = a % 2 == 0 && b % 6 == 4;
                if (odd || even) && a < m && b + 2 <= n {
                    s.insert((q, q + n));
                    s.insert((q + 2, q + 2 + n));
                }
            }
        }
        s
    }

    #[test]
    fn edges_match_rule_predicates() {
        for m in 1..=6 {
            for n in 1..=13 {
                assert_eq!(build_cluster_edges(m, n).unwrap(), oracle_edges(m, n), "{m}x{n}");
            }
        }
        assert!(build_cluster_edges(0, 4).is_err());
    }

    #[test]
    fn single_unit_grid() {
        let e = build_cluster_edges(2, 4).unwrap();
        let want: BTreeSet<Edge> = [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (6, 7), (0, 4), (2, 6)]
            .into_iter()
            .collect();
        assert_eq!(e, want);
        let single_row = build_cluster_edges(1, 7).unwrap();
        assert!(single_row.iter().all(|&(a, b)| b == a + 1));
    }

    #[test]
    fn carving() {
        let l = ClusterLayout::grid(2, 4).unwrap();
        let u = carve_units(&l).unwrap();
        assert_eq!(u.len(), 1);
        assert_eq!(u[0].internal_edges(), l.edges);
        assert_eq!(u[0].inputs(), [0, 4]);
        assert_eq!(u[0].outputs(), [3, 7]);

        let l = ClusterLayout::grid(2, 10).unwrap();
        let u = carve_units(&l).unwrap();
        assert_eq!(u.len(), 2);
        assert_eq!(u[0].grid[0][0], 0);
        assert_eq!(u[1].grid[0][0], 6);

        let l = ClusterLayout::grid(4, 4).unwrap();
        let u = carve_units(&l).unwrap();
        assert_eq!(u.len(), 2);
        assert_eq!(u[0].grid[0][0], 0);
        assert_eq!(u[1].grid[0][0], 8);

        let mut bad = ClusterLayout::grid(2, 4).unwrap();
        bad.edges.remove(&(0, 4));
        assert!(carve_units(&bad).is_err());
    }

    #[test]
    fn trap_placement_is_valid_and_deterministic() {
        let base = ClusterLayout::grid(2, 4).unwrap();
        assert_eq!(place_traps(&base, &mut seeded(1), 0).unwrap(), base);
        for seed in 0..50 {
            let a = place_traps(&base, &mut seeded(seed), 8).unwrap();
            let b = place_traps(&base, &mut seeded(seed), 8).unwrap();
            assert_eq!(a, b);
            a.validate().unwrap();
            assert_eq!(a.trap_count(), 8);
            let zs = a.roles.iter().filter(|r| matches!(r, QubitRole::TrapZ { .. })).count();
            assert_eq!(zs, 4);
        }
    }

    #[test]
    fn validator_rejects_planar_on_computational() {
        let mut l = ClusterLayout::grid(2, 4).unwrap();
        l.roles.push(QubitRole::TrapPlanar { mu: Angle::ZERO });
        l.add_edge(0, 8).unwrap();
        assert!(l.validate().is_err());
    }

    #[test]
    fn validator_rejects_large_planar_component() {
        let mut l = ClusterLayout::grid(2, 4).unwrap();
        l.roles.push(QubitRole::TrapZ { bit: false });
        l.add_edge(0, 8).unwrap();
        for _ in 0..4 {
            l.roles.push(QubitRole::TrapPlanar { mu: Angle::ZERO });
        }
        l.add_edge(8, 9).unwrap();
        l.add_edge(9, 10).unwrap();
        l.add_edge(10, 11).unwrap();
        l.add_edge(11, 12).unwrap();
        assert!(l.validate().is_err());
    }

    #[test]
    fn isolated_zero_trap() {
        let mut l = ClusterLayout::grid(1, 1).unwrap();
        l.roles.push(QubitRole::TrapZ { bit: false });
        let checks = expected_trap_outcomes(&l, &[false; 2]).unwrap();
        assert_eq!(checks.len(), 1);
        assert!(!checks[0].expected_parity);
    }

    #[test]
    fn planar_with_one_neighbour_flips() {
        let mut l = ClusterLayout::grid(1, 1).unwrap();
        l.roles.push(QubitRole::TrapZ { bit: true });
        l.roles.push(QubitRole::TrapPlanar { mu: Angle::quarters(3) });
        l.add_edge(1, 2).unwrap();
        let checks = expected_trap_outcomes(&l, &[false; 3]).unwrap();
        let planar = checks.iter().find(|c| c.kind == TrapKind::Planar).unwrap();
        assert_eq!(planar.offsets, vec![Angle::ZERO]);
        assert!(planar.expected_parity);
        let padded = expected_trap_outcomes(&l, &[false, false, true]).unwrap();
        let planar = padded.iter().find(|c| c.kind == TrapKind::Planar).unwrap();
        assert!(!planar.expected_parity);
    }

    #[test]
    fn planar_pair_uses_y_parity() {
        let mut l = ClusterLayout::grid(1, 1).unwrap();
        l.roles.push(QubitRole::TrapZ { bit: false });
        l.roles.push(QubitRole::TrapPlanar { mu: Angle::quarters(1) });
        l.roles.push(QubitRole::TrapPlanar { mu: Angle::quarters(6) });
        l.add_edge(1, 2).unwrap();
        l.add_edge(2, 3).unwrap();
        let checks = expected_trap_outcomes(&l, &[false; 4]).unwrap();
        let planar = checks.iter().find(|c| c.kind == TrapKind::Planar).unwrap();
        assert_eq!(planar.offsets, vec![Angle::HALF_PI, Angle::HALF_PI]);
        assert_eq!(planar.qubits, vec![2, 3]);
    }

    #[test]
    fn three_member_shapes_have_rules() {
        for triangle in [false, true] {
            let mut l = ClusterLayout::grid(1, 1).unwrap();
            l.roles.push(QubitRole::TrapZ { bit: true });
            for k in 0..3 {
                l.roles.push(QubitRole::TrapPlanar { mu: Angle::quarters(k * 3) });
            }
            l.add_edge(1, 2).unwrap();
            l.add_edge(2, 3).unwrap();
            l.add_edge(3, 4).unwrap();
            if triangle {
                l.add_edge(2, 4).unwrap();
            }
            let checks = expected_trap_outcomes(&l, &[false; 5]).unwrap();
            let planar = checks.iter().find(|c| c.kind == TrapKind::Planar).unwrap();
            let want = if triangle {
                vec![Angle::ZERO; 3]
            } else {
                vec![Angle::HALF_PI, Angle::ZERO, Angle::HALF_PI]
            };
            assert_eq!(planar.offsets, want);
        }
    }

    #[test]
    fn json_round_trip() {
        let base = ClusterLayout::grid(2, 4).unwrap();
        let l = place_traps(&base, &mut seeded(5), 8).unwrap();
        let back = ClusterLayout::from_json(&l.to_json()).unwrap();
        assert_eq!(back, l);
        assert!(ClusterLayout::from_json("{\"version\":9}").is_err());
    }
}

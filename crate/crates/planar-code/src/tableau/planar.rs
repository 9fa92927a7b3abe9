//! Planar-code state operations on top of the raw tableau: vacuum
//! preparation, ancilla-driven syndrome extraction, hole deformation with
//! spare-anyon bookkeeping, the anyon interference experiment, and the
//! hole-braiding CNOT demonstration.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Tableau, TableauError};
use crate::decode::Decoder;
use crate::frame::{PauliFrame, Syndrome};
use crate::geometry::{build_planar, CodeLayout, HoleKind, StabKind, StabilizerId};

/// X/Z representative pair for one logical qubit, over the data qubits.
#[derive(Clone, Debug)]
pub struct LogicalPair {
    pub x: PauliFrame,
    pub z: PauliFrame,
}

/// Named logical qubits with their current Pauli representatives.
#[derive(Clone, Debug, Default)]
pub struct LogicalRegister {
    pairs: BTreeMap<String, LogicalPair>,
}

impl LogicalRegister {
    pub fn new() -> LogicalRegister {
        LogicalRegister::default()
    }

    pub fn insert(&mut self, label: impl Into<String>, pair: LogicalPair) {
        self.pairs.insert(label.into(), pair);
    }

    pub fn get(&self, label: &str) -> Option<&LogicalPair> {
        self.pairs.get(label)
    }

    pub fn labels(&self) -> Vec<&str> {
        self.pairs.keys().map(String::as_str).collect()
    }

    /// The edge logical qubit of a planar patch: sigma-z down the left
    /// column, sigma-x along the top row.
    pub fn edge_pair(layout: &CodeLayout) -> LogicalPair {
        let n = layout.n_qubits();
        LogicalPair {
            x: PauliFrame::from_x_support(n, layout.logical_x()),
            z: PauliFrame::from_z_support(n, layout.logical_z()),
        }
    }

    /// The logical qubit carried by hole `hole`.  A smooth hole stores its
    /// Z as the occupancy loop and its X as the string to the matching
    /// boundary; a rough hole is the exact dual.
    pub fn hole_pair(layout: &CodeLayout, hole: usize) -> LogicalPair {
        let n = layout.n_qubits();
        let h = &layout.holes()[hole];
        match h.kind {
            HoleKind::Smooth => LogicalPair {
                x: PauliFrame::from_x_support(n, &h.logical_string),
                z: PauliFrame::from_z_support(n, &h.logical_loop),
            },
            HoleKind::Rough => LogicalPair {
                x: PauliFrame::from_x_support(n, &h.logical_loop),
                z: PauliFrame::from_z_support(n, &h.logical_string),
            },
        }
    }

    /// Check the representative algebra against a layout: every operator
    /// commutes with every enabled stabilizer, avoids removed qubits, and
    /// each X/Z pair anticommutes.
    pub fn validate(&self, layout: &CodeLayout) -> Result<(), TableauError> {
        let n = layout.n_qubits();
        let bad = |label: &str| TableauError::BadRepresentative(label.to_string());
        for (label, pair) in &self.pairs {
            if pair.x.commutes_with(&pair.z) {
                return Err(bad(label));
            }
            for frame in [&pair.x, &pair.z] {
                if frame.len() != n {
                    return Err(bad(label));
                }
                let touches_removed = frame
                    .x_support()
                    .into_iter()
                    .chain(frame.z_support())
                    .any(|q| layout.is_removed(q));
                if touches_removed {
                    return Err(bad(label));
                }
                for kind in [StabKind::Plaquette, StabKind::Vertex] {
                    for (i, s) in layout.stabilizers(kind).iter().enumerate() {
                        if !s.enabled {
                            continue;
                        }
                        let support = layout.support(id_of(kind, i)).expect("enabled id");
                        let stab = match kind {
                            StabKind::Plaquette => PauliFrame::from_z_support(n, &support),
                            StabKind::Vertex => PauliFrame::from_x_support(n, &support),
                        };
                        if !frame.commutes_with(&stab) {
                            return Err(bad(label));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn id_of(kind: StabKind, index: usize) -> StabilizerId {
    match kind {
        StabKind::Plaquette => StabilizerId::Plaquette(index),
        StabKind::Vertex => StabilizerId::Vertex(index),
    }
}

/// What one hole deformation did to the state: which interior qubits were
/// measured out (with outcomes), which reduced or re-enabled stabilizers
/// were measured, the spare anyons that appeared, and the qubits along which
/// compensating Paulis were applied.
#[derive(Clone, Debug, Serialize)]
pub struct HoleOpReport {
    pub qubit_outcomes: Vec<(usize, i8)>,
    pub stabilizer_outcomes: Vec<(usize, i8)>,
    /// Opposite-species interior stabilizers re-enabled by a contraction.
    pub revived_outcomes: Vec<(usize, i8)>,
    pub spare_defects: Vec<usize>,
    pub fix_qubits: Vec<usize>,
}

/// A planar-code register: the current (possibly deformed) layout plus a
/// tableau over the data qubits and one reusable ancilla (the last index).
pub struct PlanarState {
    layout: CodeLayout,
    tab: Tableau,
    anc: usize,
}

/// Prepare the vacuum: from |0...0> every plaquette is already +1; each
/// enabled vertex is measured once and, when it reads -1, flipped back with
/// a sigma-z string to the nearest rough boundary.  Hole interiors are put
/// in their natural basis (sigma-x for smooth holes, sigma-z for rough), and
/// every rough hole's occupancy loop is forced to +1.  The edge logical
/// qubit ends in its Z=+1 state.
pub fn prepare_vacuum(layout: &CodeLayout, rng: &mut impl Rng) -> PlanarState {
    let n = layout.n_qubits();
    let mut state = PlanarState {
        layout: layout.clone(),
        tab: Tableau::new(n + 1),
        anc: n,
    };
    for &q in &layout.removed_qubits() {
        let hole = layout
            .holes()
            .iter()
            .find(|h| h.removed_qubits.contains(&q))
            .expect("removed qubit belongs to a hole");
        if hole.kind == HoleKind::Smooth {
            state.tab.h(q);
        }
    }
    let decoder = Decoder::new(layout);
    for i in 0..layout.vertices().len() {
        if !layout.vertices()[i].enabled {
            continue;
        }
        let support = layout.support(StabilizerId::Vertex(i)).expect("enabled id");
        let check = PauliFrame::from_x_support(n + 1, &support);
        if state.tab.measure_pauli(&check, rng).0 == -1 {
            let fix = decoder
                .decode_species(StabKind::Vertex, &[i])
                .expect("single defect is decodable");
            for q in fix.frame.z_support() {
                state.tab.z(q);
            }
        }
    }
    for h in layout.holes() {
        if h.kind != HoleKind::Rough {
            continue;
        }
        let occupancy = PauliFrame::from_x_support(n + 1, &h.logical_loop);
        if state.tab.measure_pauli(&occupancy, rng).0 == -1 {
            for &q in &h.logical_string {
                state.tab.z(q);
            }
        }
    }
    state
}

impl PlanarState {
    pub fn layout(&self) -> &CodeLayout {
        &self.layout
    }

    pub fn tableau(&self) -> &Tableau {
        &self.tab
    }

    /// Number of data qubits (the tableau holds one extra ancilla).
    pub fn n_data(&self) -> usize {
        self.anc
    }

    /// Lift a data-qubit Pauli frame to the tableau width.
    fn lift(&self, frame: &PauliFrame) -> PauliFrame {
        assert_eq!(frame.len(), self.anc, "frame must cover the data qubits");
        let mut out = PauliFrame::new(self.tab.n());
        for q in frame.x_support() {
            out.flip_x(q);
        }
        for q in frame.z_support() {
            out.flip_z(q);
        }
        out
    }

    /// Apply one Clifford gate to the data qubits.
    pub fn apply_op(&mut self, op: super::CliffordOp) {
        self.tab.apply(op);
    }

    /// Apply a Pauli frame (over the data qubits) as gates.
    pub fn apply_frame(&mut self, frame: &PauliFrame) {
        for q in frame.x_support() {
            self.tab.x(q);
        }
        for q in frame.z_support() {
            self.tab.z(q);
        }
    }

    /// Measure a Pauli frame over the data qubits.
    pub fn measure_frame(&mut self, frame: &PauliFrame, rng: &mut impl Rng) -> (i8, bool) {
        let lifted = self.lift(frame);
        self.tab.measure_pauli(&lifted, rng)
    }

    /// Deterministic outcome of a data-qubit Pauli, if it has one.
    pub fn deterministic_outcome(&self, frame: &PauliFrame) -> Option<i8> {
        self.tab.deterministic_outcome(&self.lift(frame))
    }

    fn reset_ancilla(&mut self, rng: &mut impl Rng) {
        if self.tab.measure_z(self.anc, rng).0 == -1 {
            self.tab.x(self.anc);
        }
    }

    /// Extract the full syndrome with a single reusable ancilla qubit.  Each
    /// plaquette is read by CNOTing its qubits onto a |0> ancilla and
    /// measuring Z; each vertex runs the same circuit conjugated by Hadamards
    /// on the data side.
    pub fn extract_syndrome_via_ancilla(&mut self, rng: &mut impl Rng) -> Syndrome {
        let mut m_defects = Vec::new();
        let mut e_defects = Vec::new();
        for i in 0..self.layout.plaquettes().len() {
            if !self.layout.plaquettes()[i].enabled {
                continue;
            }
            let support = self
                .layout
                .support(StabilizerId::Plaquette(i))
                .expect("enabled id");
            self.reset_ancilla(rng);
            for &q in &support {
                self.tab.cnot(q, self.anc);
            }
            if self.tab.measure_z(self.anc, rng).0 == -1 {
                m_defects.push(i);
            }
        }
        for i in 0..self.layout.vertices().len() {
            if !self.layout.vertices()[i].enabled {
                continue;
            }
            let support = self
                .layout
                .support(StabilizerId::Vertex(i))
                .expect("enabled id");
            self.reset_ancilla(rng);
            for &q in &support {
                self.tab.h(q);
                self.tab.cnot(q, self.anc);
                self.tab.h(q);
            }
            if self.tab.measure_z(self.anc, rng).0 == -1 {
                e_defects.push(i);
            }
        }
        Syndrome { m_defects, e_defects, rounds: None }
    }

    /// Carve a new hole, measuring out its interior and repairing the spare
    /// anyons that appear on the reduced boundary stabilizers.
    pub fn create_hole(
        &mut self,
        kind: HoleKind,
        region: &[StabilizerId],
        rng: &mut impl Rng,
    ) -> Result<HoleOpReport, TableauError> {
        let new = self.layout.carve_hole(kind, region)?;
        let arc = new.holes().last().expect("hole was added").perimeter.clone();
        self.grow_into(new, kind, &arc, rng)
    }

    /// Grow hole `hole`, measuring out the newly interior qubits and fixing
    /// spare anyons along the newly exposed part of the perimeter.
    pub fn expand_hole(
        &mut self,
        hole: usize,
        extra: &[StabilizerId],
        rng: &mut impl Rng,
    ) -> Result<HoleOpReport, TableauError> {
        let new = self.layout.expand_hole(hole, extra)?;
        let kind = self.layout.holes()[hole].kind;
        let old_perim: BTreeSet<usize> =
            self.layout.holes()[hole].perimeter.iter().copied().collect();
        let arc: Vec<usize> = new.holes()[hole]
            .perimeter
            .iter()
            .copied()
            .filter(|q| !old_perim.contains(q))
            .collect();
        self.grow_into(new, kind, &arc, rng)
    }

    /// Shared growth step for create/expand.  `arc` is the preferred set of
    /// qubits for the repair strings (the newly exposed perimeter); keeping
    /// the repairs there is what preserves the hole's string operator across
    /// a move, since the old-side alternative differs by the occupancy loop.
    fn grow_into(
        &mut self,
        new: CodeLayout,
        kind: HoleKind,
        arc: &[usize],
        rng: &mut impl Rng,
    ) -> Result<HoleOpReport, TableauError> {
        let old_removed: BTreeSet<usize> = self.layout.removed_qubits().into_iter().collect();
        let newly_removed: Vec<usize> = new
            .removed_qubits()
            .into_iter()
            .filter(|q| !old_removed.contains(q))
            .collect();
        let newly_set: BTreeSet<usize> = newly_removed.iter().copied().collect();

        let mut qubit_outcomes = Vec::new();
        for &q in &newly_removed {
            let (outcome, _) = match kind {
                HoleKind::Smooth => self.tab.measure_x(q, rng),
                HoleKind::Rough => self.tab.measure_z(q, rng),
            };
            if outcome == -1 {
                // Standardise the disentangled interior spin; it no longer
                // appears in any enforced operator.
                match kind {
                    HoleKind::Smooth => self.tab.z(q),
                    HoleKind::Rough => self.tab.x(q),
                }
            }
            qubit_outcomes.push((q, outcome));
        }

        // Re-measure every boundary stabilizer of the opposite species that
        // just lost a qubit; the -1 outcomes are the spare anyons.
        let species = kind.species().other();
        let mut stabilizer_outcomes = Vec::new();
        let mut spares = Vec::new();
        for (i, s) in new.stabilizers(species).iter().enumerate() {
            if !s.enabled || !s.support.iter().any(|q| newly_set.contains(q)) {
                continue;
            }
            let support = new.support(id_of(species, i)).expect("enabled id");
            let check = match species {
                StabKind::Plaquette => PauliFrame::from_z_support(self.tab.n(), &support),
                StabKind::Vertex => PauliFrame::from_x_support(self.tab.n(), &support),
            };
            let (outcome, _) = self.tab.measure_pauli(&check, rng);
            stabilizer_outcomes.push((i, outcome));
            if outcome == -1 {
                spares.push(i);
            }
        }

        if spares.len() % 2 == 1 {
            return Err(TableauError::OddSpareAnyons(spares.len()));
        }
        let mut fix_qubits = Vec::new();
        for pair in spares.chunks(2) {
            let path = pair_path(&new, species, pair[0], pair[1], arc)
                .or_else(|| {
                    // Degenerate shapes can disconnect the new arc; any
                    // perimeter route still cancels the pair.
                    let full: Vec<usize> = new
                        .holes()
                        .iter()
                        .flat_map(|h| h.perimeter.iter().copied())
                        .collect();
                    pair_path(&new, species, pair[0], pair[1], &full)
                })
                .expect("spare anyons are connected along the perimeter");
            self.apply_move_string(species, &path);
            fix_qubits.extend(path);
        }

        self.layout = new;
        Ok(HoleOpReport {
            qubit_outcomes,
            stabilizer_outcomes,
            revived_outcomes: Vec::new(),
            spare_defects: spares,
            fix_qubits,
        })
    }

    /// Shrink hole `hole`.  Re-enabled stabilizers are measured; each -1 is
    /// absorbed back into the remaining hole (restoring the hole's charge),
    /// or annihilated pairwise when the hole disappears entirely.
    pub fn contract_hole(
        &mut self,
        hole: usize,
        restore: &[StabilizerId],
        rng: &mut impl Rng,
    ) -> Result<HoleOpReport, TableauError> {
        let old_holes = self.layout.holes().len();
        let kind = self.layout.holes()[hole].kind;
        let old_perimeter = self.layout.holes()[hole].perimeter.clone();
        let old_removed: BTreeSet<usize> = self.layout.removed_qubits().into_iter().collect();
        let new = self.layout.contract_hole(hole, restore)?;
        let survives = new.holes().len() == old_holes;
        let restored: Vec<usize> = old_removed
            .iter()
            .copied()
            .filter(|&q| !new.is_removed(q))
            .collect();

        let species = kind.species();
        let n = self.tab.n();
        let mut stabilizer_outcomes = Vec::new();
        let mut defects = Vec::new();
        for id in restore {
            let i = id.index();
            if !new.stabilizers(species)[i].enabled {
                continue;
            }
            let support = new.support(id_of(species, i)).expect("enabled id");
            let check = match species {
                StabKind::Plaquette => PauliFrame::from_z_support(n, &support),
                StabKind::Vertex => PauliFrame::from_x_support(n, &support),
            };
            let (outcome, _) = self.tab.measure_pauli(&check, rng);
            stabilizer_outcomes.push((i, outcome));
            if outcome == -1 {
                defects.push(i);
            }
        }

        // Opposite-species stabilizers that were fully interior come back
        // enabled once their qubits are restored; their values are fresh
        // randomness and get their own repair strings.
        let other = species.other();
        let mut revived_outcomes = Vec::new();
        let mut revived_defects = Vec::new();
        for (i, s) in new.stabilizers(other).iter().enumerate() {
            if !s.enabled || self.layout.stabilizers(other)[i].enabled {
                continue;
            }
            let support = new.support(id_of(other, i)).expect("enabled id");
            let check = match other {
                StabKind::Plaquette => PauliFrame::from_z_support(n, &support),
                StabKind::Vertex => PauliFrame::from_x_support(n, &support),
            };
            let (outcome, _) = self.tab.measure_pauli(&check, rng);
            revived_outcomes.push((i, outcome));
            if outcome == -1 {
                revived_defects.push(i);
            }
        }

        let mut fix_qubits = Vec::new();
        if !revived_defects.is_empty() {
            let decoder = Decoder::new(&new);
            for &i in &revived_defects {
                let fix = decoder
                    .decode_species(other, &[i])
                    .expect("single defect is decodable");
                for q in fix.frame.x_support() {
                    self.tab.x(q);
                    fix_qubits.push(q);
                }
                for q in fix.frame.z_support() {
                    self.tab.z(q);
                    fix_qubits.push(q);
                }
            }
        }
        if survives {
            let region: BTreeSet<usize> = new.holes()[hole].region.iter().copied().collect();
            let mut allowed: Vec<usize> = restored.clone();
            allowed.extend(new.holes()[hole].perimeter.iter().copied());
            for &d in &defects {
                let path = absorb_path(&new, species, d, &region, &allowed)
                    .expect("contraction defect borders the remaining hole");
                self.apply_move_string(species, &path);
                fix_qubits.extend(path);
            }
        } else {
            let mut allowed = restored.clone();
            allowed.extend(old_perimeter.iter().copied());
            let route_out = |state: &mut PlanarState, d: usize, fix_qubits: &mut Vec<usize>| {
                let decoder = Decoder::new(&new);
                let fix = decoder
                    .decode_species(species, &[d])
                    .expect("single defect is decodable");
                let qubits: Vec<usize> = match species {
                    StabKind::Plaquette => fix.frame.x_support(),
                    StabKind::Vertex => fix.frame.z_support(),
                };
                state.apply_move_string(species, &qubits);
                fix_qubits.extend(qubits);
            };
            let mut iter = defects.chunks_exact(2);
            for pair in &mut iter {
                match pair_path(&new, species, pair[0], pair[1], &allowed) {
                    Some(path) => {
                        self.apply_move_string(species, &path);
                        fix_qubits.extend(path);
                    }
                    None => {
                        route_out(self, pair[0], &mut fix_qubits);
                        route_out(self, pair[1], &mut fix_qubits);
                    }
                }
            }
            // An odd defect carries the hole's charge out through the code
            // boundary.
            for &d in iter.remainder() {
                route_out(self, d, &mut fix_qubits);
            }
        }

        self.layout = new;
        Ok(HoleOpReport {
            qubit_outcomes: Vec::new(),
            stabilizer_outcomes,
            revived_outcomes,
            spare_defects: defects,
            fix_qubits,
        })
    }

    /// Apply the Pauli string that moves defects of `species`: sigma-x for
    /// plaquette defects, sigma-z for vertex defects.
    fn apply_move_string(&mut self, species: StabKind, qubits: &[usize]) {
        for &q in qubits {
            match species {
                StabKind::Plaquette => self.tab.x(q),
                StabKind::Vertex => self.tab.z(q),
            }
        }
    }
}

/// Enabled stabilizers of `species` owning surviving qubit `q` in `layout`.
fn enabled_owners(layout: &CodeLayout, species: StabKind, q: usize) -> Vec<usize> {
    layout
        .stabilizers(species)
        .iter()
        .enumerate()
        .filter(|(_, s)| s.enabled && s.support.contains(&q))
        .map(|(i, _)| i)
        .collect()
}

/// BFS path (as a qubit list) between two same-species defects, walking only
/// the `allowed` qubits.  Deterministic: neighbours are visited in sorted
/// qubit order.
fn pair_path(
    layout: &CodeLayout,
    species: StabKind,
    from: usize,
    to: usize,
    allowed: &[usize],
) -> Option<Vec<usize>> {
    let mut edges: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    let mut sorted: Vec<usize> = allowed.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &q in &sorted {
        if layout.is_removed(q) {
            continue;
        }
        let owners = enabled_owners(layout, species, q);
        if owners.len() == 2 {
            edges.entry(owners[0]).or_default().push((owners[1], q));
            edges.entry(owners[1]).or_default().push((owners[0], q));
        }
    }
    let mut parent: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = BTreeSet::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = Vec::new();
            let mut cur = to;
            while cur != from {
                let (prev, q) = parent[&cur];
                path.push(q);
                cur = prev;
            }
            path.reverse();
            return Some(path);
        }
        for &(v, q) in edges.get(&u).into_iter().flatten() {
            if seen.insert(v) {
                parent.insert(v, (u, q));
                queue.push_back(v);
            }
        }
    }
    None
}

/// BFS path from a defect into any disabled stabilizer of the hole region,
/// again restricted to `allowed` qubits.  The final step lands on a disabled
/// generator, so the defect is absorbed by the hole.
fn absorb_path(
    layout: &CodeLayout,
    species: StabKind,
    from: usize,
    region: &BTreeSet<usize>,
    allowed: &[usize],
) -> Option<Vec<usize>> {
    let stabs = layout.stabilizers(species);
    let mut edges: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    let mut sorted: Vec<usize> = allowed.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &q in &sorted {
        if layout.is_removed(q) {
            continue;
        }
        let owners: Vec<usize> = stabs
            .iter()
            .enumerate()
            .filter(|(i, s)| (s.enabled || region.contains(i)) && s.support.contains(&q))
            .map(|(i, _)| i)
            .collect();
        if owners.len() == 2 {
            edges.entry(owners[0]).or_default().push((owners[1], q));
            edges.entry(owners[1]).or_default().push((owners[0], q));
        }
    }
    let mut parent: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = BTreeSet::from([from]);
    while let Some(u) = queue.pop_front() {
        if region.contains(&u) {
            let mut path = Vec::new();
            let mut cur = u;
            while cur != from {
                let (prev, q) = parent[&cur];
                path.push(q);
                cur = prev;
            }
            path.reverse();
            return Some(path);
        }
        for &(v, q) in edges.get(&u).into_iter().flatten() {
            if seen.insert(v) {
                parent.insert(v, (u, q));
                queue.push_back(v);
            }
        }
    }
    None
}

/// Result of one anyon interference run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BraidPhase {
    pub phase: i8,
    pub deterministic: bool,
}

/// Interference experiment: prepare the vacuum, optionally pin one anyon
/// pair so that a single defect of species `enclosed` sits inside a small
/// bulk loop, then drag an anyon of species `moved` around that loop with a
/// controlled string and read the acquired phase off the control ancilla.
///
/// The loop is the boundary of a 2x2 block of `moved.other()` stabilizers
/// near the top-left of the lattice, so the patch must have distance at
/// least 5 to keep it off the boundary.
pub fn braiding_phase_test(
    layout: &CodeLayout,
    moved: StabKind,
    enclosed: Option<StabKind>,
    seed: u64,
) -> Result<BraidPhase, TableauError> {
    let d = layout.distance();
    if d < 5 {
        return Err(TableauError::LoopTouchesBoundary(d));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = prepare_vacuum(layout, &mut rng);
    let loop_species = moved.other();
    let cell = |row, col| match loop_species {
        StabKind::Plaquette => layout.plaquette_at(row, col).expect("bulk cell"),
        StabKind::Vertex => layout.vertex_at(row, col).expect("bulk cell"),
    };
    let block = [cell(1, 1), cell(1, 2), cell(2, 1), cell(2, 2)];
    let mut on_loop = vec![false; layout.n_qubits()];
    for &i in &block {
        for &q in &layout.stabilizers(loop_species)[i].support {
            on_loop[q] = !on_loop[q];
        }
    }
    let loop_qubits: Vec<usize> = (0..layout.n_qubits()).filter(|&q| on_loop[q]).collect();

    if let Some(kind) = enclosed {
        // Create a defect pair with exactly one partner inside the loop: for
        // the loop's own species that is a block cell, for the moved species
        // it is the site geometrically interior to the block.
        let (inside, outside) = if kind == loop_species {
            ((1, 1), (0, 1))
        } else {
            match kind {
                StabKind::Vertex => ((1, 2), (0, 2)),
                StabKind::Plaquette => ((2, 1), (1, 1)),
            }
        };
        let site = |rc: (usize, usize)| match kind {
            StabKind::Plaquette => layout.plaquette_at(rc.0, rc.1).expect("bulk cell"),
            StabKind::Vertex => layout.vertex_at(rc.0, rc.1).expect("bulk cell"),
        };
        let a = &layout.stabilizers(kind)[site(inside)].support;
        let b = &layout.stabilizers(kind)[site(outside)].support;
        let shared = *a.iter().find(|q| b.contains(q)).expect("adjacent cells");
        match kind {
            StabKind::Plaquette => state.tab.x(shared),
            StabKind::Vertex => state.tab.z(shared),
        }
    }

    let anc = state.anc;
    state.tab.h(anc);
    for &q in &loop_qubits {
        match loop_species {
            StabKind::Plaquette => state.tab.cz(anc, q),
            StabKind::Vertex => state.tab.cnot(anc, q),
        }
    }
    let (phase, deterministic) = state.tab.measure_x(anc, &mut rng);
    Ok(BraidPhase { phase, deterministic })
}

/// Control-qubit preparations for the braiding CNOT demonstration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlPrep {
    Zero,
    One,
    Plus,
}

/// Target-qubit preparations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetPrep {
    Zero,
    Plus,
    Minus,
}

/// One logical measurement taken at the end of the braid.
#[derive(Clone, Debug, Serialize)]
pub struct LogicalReading {
    pub label: String,
    pub sign: i8,
    pub deterministic: bool,
}

/// Step-by-step record of the braiding demonstration, suitable for JSON
/// line output.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum BraidEvent {
    HoleCreated {
        kind: HoleKind,
        cells: Vec<usize>,
        spare_defects: Vec<usize>,
    },
    StatePrepared {
        control: ControlPrep,
        target: TargetPrep,
    },
    MoveApplied {
        step: usize,
        grown: usize,
        shrunk: usize,
        qubit_outcomes: Vec<(usize, i8)>,
        spare_defects: Vec<usize>,
        fix_qubits: Vec<usize>,
    },
    Measured {
        label: String,
        sign: i8,
        deterministic: bool,
    },
}

/// Outcome of one braiding CNOT run.
#[derive(Clone, Debug, Serialize)]
pub struct BraidCnotResult {
    pub distance: usize,
    pub control: ControlPrep,
    pub target: TargetPrep,
    pub moves: usize,
    pub readings: Vec<LogicalReading>,
    pub events: Vec<BraidEvent>,
}

/// Full hole-braiding CNOT demonstration.
///
/// A smooth hole (the control) and a rough hole (the target) are carved into
/// a distance-`d` patch, the requested logical states are prepared, and the
/// smooth hole is dragged around the rough hole along a 12-cell rectangular
/// ring, one expand/contract domino move at a time.  The holes return to
/// their original cells, so the final logical readings use the original
/// geometry's representatives.  Needs `d >= 8` for the ring to clear both
/// the boundary and the target hole.
pub fn braid_cnot_demo(
    d: usize,
    control: ControlPrep,
    target: TargetPrep,
    seed: u64,
) -> Result<BraidCnotResult, TableauError> {
    if d < 8 {
        return Err(TableauError::HolesTooClose(d));
    }
    let base = build_planar(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = prepare_vacuum(&base, &mut rng);
    let mut events = Vec::new();

    let ring_cells: Vec<usize> = [
        (2, 1),
        (2, 2),
        (2, 3),
        (2, 4),
        (3, 4),
        (4, 4),
        (5, 4),
        (5, 3),
        (5, 2),
        (5, 1),
        (4, 1),
        (3, 1),
    ]
    .iter()
    .map(|&(r, c)| base.plaquette_at(r, c).expect("ring cell in bulk"))
    .collect();
    let target_cell = base.vertex_at(3, 3).expect("target cell in bulk");

    let rep = state.create_hole(
        HoleKind::Smooth,
        &[StabilizerId::Plaquette(ring_cells[0])],
        &mut rng,
    )?;
    events.push(BraidEvent::HoleCreated {
        kind: HoleKind::Smooth,
        cells: vec![ring_cells[0]],
        spare_defects: rep.spare_defects,
    });
    let rep = state.create_hole(HoleKind::Rough, &[StabilizerId::Vertex(target_cell)], &mut rng)?;
    events.push(BraidEvent::HoleCreated {
        kind: HoleKind::Rough,
        cells: vec![target_cell],
        spare_defects: rep.spare_defects,
    });

    let start_layout = state.layout().clone();
    let mut register = LogicalRegister::new();
    register.insert("control", LogicalRegister::hole_pair(&start_layout, 0));
    register.insert("target", LogicalRegister::hole_pair(&start_layout, 1));
    register.validate(&start_layout)?;
    let control_pair = register.get("control").expect("registered").clone();
    let target_pair = register.get("target").expect("registered").clone();

    match control {
        ControlPrep::Zero => {}
        ControlPrep::One => state.apply_frame(&control_pair.x),
        ControlPrep::Plus => {
            if state.measure_frame(&control_pair.x, &mut rng).0 == -1 {
                state.apply_frame(&control_pair.z);
            }
        }
    }
    match target {
        TargetPrep::Plus => {}
        TargetPrep::Minus => state.apply_frame(&target_pair.z),
        TargetPrep::Zero => {
            if state.measure_frame(&target_pair.z, &mut rng).0 == -1 {
                state.apply_frame(&target_pair.x);
            }
        }
    }
    events.push(BraidEvent::StatePrepared { control, target });

    let mut current = ring_cells[0];
    for step in 0..ring_cells.len() {
        let next = ring_cells[(step + 1) % ring_cells.len()];
        let grow = state.expand_hole(0, &[StabilizerId::Plaquette(next)], &mut rng)?;
        let shrink = state.contract_hole(0, &[StabilizerId::Plaquette(current)], &mut rng)?;
        let mut qubit_outcomes = grow.qubit_outcomes;
        qubit_outcomes.extend(shrink.qubit_outcomes);
        let mut spare_defects = grow.spare_defects;
        spare_defects.extend(shrink.spare_defects);
        let mut fix_qubits = grow.fix_qubits;
        fix_qubits.extend(shrink.fix_qubits);
        events.push(BraidEvent::MoveApplied {
            step,
            grown: next,
            shrunk: current,
            qubit_outcomes,
            spare_defects,
            fix_qubits,
        });
        current = next;
    }
    debug_assert_eq!(current, ring_cells[0]);
    debug_assert_eq!(
        state.layout().holes()[0].region,
        start_layout.holes()[0].region,
        "control hole must return to its starting cell"
    );

    let mut readings = Vec::new();
    let mut take = |state: &mut PlanarState,
                    rng: &mut ChaCha8Rng,
                    events: &mut Vec<BraidEvent>,
                    label: &str,
                    frame: &PauliFrame| {
        let (sign, deterministic) = state.measure_frame(frame, rng);
        events.push(BraidEvent::Measured {
            label: label.to_string(),
            sign,
            deterministic,
        });
        readings.push(LogicalReading { label: label.to_string(), sign, deterministic });
    };

    match (control, target) {
        (ControlPrep::Plus, TargetPrep::Zero) => {
            let xx = control_pair.x.xor(&target_pair.x);
            let zz = control_pair.z.xor(&target_pair.z);
            take(&mut state, &mut rng, &mut events, "XL(control)*XL(target)", &xx);
            take(&mut state, &mut rng, &mut events, "ZL(control)*ZL(target)", &zz);
            take(&mut state, &mut rng, &mut events, "ZL(control)", &control_pair.z);
            take(&mut state, &mut rng, &mut events, "ZL(target)", &target_pair.z);
        }
        (ControlPrep::Plus, _) => {
            let xx = control_pair.x.xor(&target_pair.x);
            take(&mut state, &mut rng, &mut events, "XL(control)*XL(target)", &xx);
            take(&mut state, &mut rng, &mut events, "XL(target)", &target_pair.x);
            take(&mut state, &mut rng, &mut events, "ZL(control)", &control_pair.z);
        }
        (_, TargetPrep::Zero) => {
            take(&mut state, &mut rng, &mut events, "ZL(control)", &control_pair.z);
            take(&mut state, &mut rng, &mut events, "ZL(target)", &target_pair.z);
        }
        _ => {
            take(&mut state, &mut rng, &mut events, "ZL(control)", &control_pair.z);
            take(&mut state, &mut rng, &mut events, "XL(target)", &target_pair.x);
        }
    }

    Ok(BraidCnotResult {
        distance: d,
        control,
        target,
        moves: ring_cells.len(),
        readings,
        events,
    })
}

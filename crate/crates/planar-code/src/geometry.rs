//! Planar code lattice geometry.
//!
//! A distance-`d` planar code is laid out on a `(2d-1) x (2d-1)` checkerboard
//! of cells addressed by `(row, col)`:
//!
//! * cells with `row` and `col` both even or both odd carry a **qubit**
//!   (`d*d + (d-1)*(d-1)` of them),
//! * cells with even `row` and odd `col` carry a **plaquette** stabilizer
//!   (a product of sigma-z over the adjacent qubits, `d*(d-1)` of them),
//! * cells with odd `row` and even `col` carry a **vertex** stabilizer
//!   (a product of sigma-x over the adjacent qubits, `d*(d-1)` of them).
//!
//! A stabilizer's support is the set of qubits at the four cells directly
//! above, below, left and right of it; cells outside the board simply do not
//! contribute, which yields the weight-3 stabilizers along the boundary.
//!
//! Boundary conventions: the left and right board edges (`col = 0` and
//! `col = 2d-2`) are *smooth*: sigma-x strings may terminate there, so they
//! absorb plaquette defects (m anyons). The top and bottom edges (`row = 0`,
//! `row = 2d-2`) are *rough* and absorb vertex defects (e anyons).
//!
//! Logical operators of the undeformed code:
//!
//! * `logical_z`: sigma-z on the left column of qubits `(0,0), (2,0), ...`
//!   (equivalently the right column, up to stabilizers). It measures the
//!   m-occupancy of the smooth edges.
//! * `logical_x`: sigma-x on the top row of qubits `(0,0), (0,2), ...`
//!   (equivalently the bottom row). The two share exactly one qubit, the
//!   corner `(0,0)`, and therefore anticommute.
//!
//! Qubit indices are assigned in row-major order over the checkerboard, and
//! the same rule orders plaquettes and vertices within their own species, so
//! plaquette `p` sits at grid position `(p / (d-1), p % (d-1))` and vertex
//! `v` at `(v / d, v % d)`.
//!
//! Holes: a hole is a connected set of same-species bulk stabilizers that is
//! no longer enforced. Qubits acted on *only* by disabled stabilizers of the
//! hole's species drop out of the code; stabilizers of the other species
//! that lose part (but not all) of their support to those removed qubits are
//! reduced accordingly. Each hole contributes one extra logical qubit, with
//! a loop operator around the hole and a string operator connecting the hole
//! to the boundary that absorbs its species.
//!
//! Layouts are immutable values: carving or deforming holes returns a new
//! layout. All geometry here is stateless; quantum state lives elsewhere.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};
use thiserror::Error;

/// Which species of stabilizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabKind {
    /// Product of sigma-z, detects sigma-x errors (m anyons live here).
    Plaquette,
    /// Product of sigma-x, detects sigma-z errors (e anyons live here).
    Vertex,
}

impl StabKind {
    pub fn other(self) -> StabKind {
        match self {
            StabKind::Plaquette => StabKind::Vertex,
            StabKind::Vertex => StabKind::Plaquette,
        }
    }
}

/// A stabilizer of either species, by index within its species list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilizerId {
    Plaquette(usize),
    Vertex(usize),
}

impl StabilizerId {
    pub fn kind(self) -> StabKind {
        match self {
            StabilizerId::Plaquette(_) => StabKind::Plaquette,
            StabilizerId::Vertex(_) => StabKind::Vertex,
        }
    }

    pub fn index(self) -> usize {
        match self {
            StabilizerId::Plaquette(i) | StabilizerId::Vertex(i) => i,
        }
    }
}

/// Which boundary absorbs a defect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundarySide {
    Left,
    Right,
    Top,
    Bottom,
}

/// Kind of hole carved into the code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HoleKind {
    /// Disables plaquette stabilizers; interior spins are measured in the
    /// sigma-x basis when the hole is created.
    Smooth,
    /// Disables vertex stabilizers; dual of the smooth case.
    Rough,
}

impl HoleKind {
    pub fn species(self) -> StabKind {
        match self {
            HoleKind::Smooth => StabKind::Plaquette,
            HoleKind::Rough => StabKind::Vertex,
        }
    }
}

/// One stabilizer generator: its species, grid coordinates within the
/// species grid, and support as a sorted list of qubit indices.
#[derive(Clone, Debug, Serialize)]
pub struct Stabilizer {
    pub kind: StabKind,
    /// Row within the species grid (not the checkerboard row).
    pub row: usize,
    /// Column within the species grid.
    pub col: usize,
    /// Original support, sorted qubit indices. Use
    /// [`CodeLayout::support`] for the hole-reduced support.
    pub support: Vec<usize>,
    /// False when the stabilizer is no longer enforced because of a hole.
    pub enabled: bool,
}

/// A carved hole and everything that changed because of it.
#[derive(Clone, Debug, Serialize)]
pub struct HoleRegion {
    pub kind: HoleKind,
    /// Disabled stabilizers of the hole's species (indices in that species).
    pub region: Vec<usize>,
    /// Stabilizers of the other species whose support was entirely removed.
    pub interior_disabled: Vec<usize>,
    /// Qubits no longer part of the code.
    pub removed_qubits: Vec<usize>,
    /// Qubit loop around the hole, in cyclic walk order. As a Pauli string
    /// of the hole species it is the hole's occupancy (loop) operator.
    pub perimeter: Vec<usize>,
    /// Same qubits as `perimeter`, sorted; the loop logical operator.
    pub logical_loop: Vec<usize>,
    /// String operator from the hole to the boundary that absorbs its
    /// species (smooth holes connect left/right, rough holes top/bottom).
    pub logical_string: Vec<usize>,
    /// Boundary side the string terminates on.
    pub string_side: BoundarySide,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("code distance must be at least 2, got {0}")]
    DistanceTooSmall(usize),
    #[error("hole region is empty")]
    EmptyRegion,
    #[error("stabilizer {0:?} does not exist on this layout")]
    NoSuchStabilizer(StabilizerId),
    #[error("hole of kind {kind:?} cannot disable a {found:?} stabilizer")]
    WrongStabilizerType { kind: HoleKind, found: StabKind },
    #[error("hole region is not connected")]
    RegionNotConnected,
    #[error("stabilizer {0} touches the lattice boundary")]
    TouchesBoundary(usize),
    #[error("hole region overlaps or touches an existing hole")]
    OverlapsHole,
    #[error("hole perimeter is not a single cycle; region shape unsupported")]
    UnsupportedRegionShape,
    #[error("defects live on different species and cannot be compared")]
    DefectSpeciesMismatch,
    #[error("no hole with index {0}")]
    NoSuchHole(usize),
    #[error("expansion must keep part of the previous hole boundary")]
    RetainsNoBoundary,
    #[error("contraction region must be part of the hole")]
    NotInHole,
    #[error("no path exists between the given defects")]
    Disconnected,
}

/// Immutable description of a (possibly deformed) planar code.
#[derive(Clone, Debug, Serialize)]
pub struct CodeLayout {
    d: usize,
    side: usize,
    n_qubits: usize,
    /// Checkerboard cell -> qubit index (row-major over `side * side`).
    cell_to_qubit: Vec<Option<usize>>,
    /// Qubit index -> checkerboard (row, col).
    qubit_pos: Vec<(usize, usize)>,
    plaquettes: Vec<Stabilizer>,
    vertices: Vec<Stabilizer>,
    logical_z: Vec<usize>,
    logical_x: Vec<usize>,
    holes: Vec<HoleRegion>,
    removed: Vec<bool>,
}

/// Build an undeformed distance-`d` planar code layout.
pub fn build_planar(d: usize) -> Result<CodeLayout, GeometryError> {
    if d < 2 {
        return Err(GeometryError::DistanceTooSmall(d));
    }
    let side = 2 * d - 1;
    let mut cell_to_qubit = vec![None; side * side];
    let mut qubit_pos = Vec::new();
    for r in 0..side {
        for c in 0..side {
            if r % 2 == c % 2 {
                cell_to_qubit[r * side + c] = Some(qubit_pos.len());
                qubit_pos.push((r, c));
            }
        }
    }
    let n_qubits = qubit_pos.len();
    debug_assert_eq!(n_qubits, d * d + (d - 1) * (d - 1));

    let support_of = |r: usize, c: usize| -> Vec<usize> {
        let mut s = Vec::with_capacity(4);
        let neighbours = [
            (r.wrapping_sub(1), c),
            (r + 1, c),
            (r, c.wrapping_sub(1)),
            (r, c + 1),
        ];
        for (nr, nc) in neighbours {
            if nr < side && nc < side {
                if let Some(q) = cell_to_qubit[nr * side + nc] {
                    s.push(q);
                }
            }
        }
        s.sort_unstable();
        s
    };

    let mut plaquettes = Vec::with_capacity(d * (d - 1));
    for r in (0..side).step_by(2) {
        for c in (1..side).step_by(2) {
            plaquettes.push(Stabilizer {
                kind: StabKind::Plaquette,
                row: r / 2,
                col: (c - 1) / 2,
                support: support_of(r, c),
                enabled: true,
            });
        }
    }
    let mut vertices = Vec::with_capacity(d * (d - 1));
    for r in (1..side).step_by(2) {
        for c in (0..side).step_by(2) {
            vertices.push(Stabilizer {
                kind: StabKind::Vertex,
                row: (r - 1) / 2,
                col: c / 2,
                support: support_of(r, c),
                enabled: true,
            });
        }
    }

    let logical_z: Vec<usize> = (0..side)
        .step_by(2)
        .map(|r| cell_to_qubit[r * side].unwrap())
        .collect();
    let logical_x: Vec<usize> = (0..side)
        .step_by(2)
        .map(|c| cell_to_qubit[c].unwrap())
        .collect();

    Ok(CodeLayout {
        d,
        side,
        n_qubits,
        cell_to_qubit,
        qubit_pos,
        plaquettes,
        vertices,
        logical_z,
        logical_x,
        holes: Vec::new(),
        removed: vec![false; n_qubits],
    })
}

impl CodeLayout {
    pub fn distance(&self) -> usize {
        self.d
    }

    /// Checkerboard side length, `2d - 1`.
    pub fn side(&self) -> usize {
        self.side
    }

    /// Total number of qubit sites, including any removed by holes.
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn plaquettes(&self) -> &[Stabilizer] {
        &self.plaquettes
    }

    pub fn vertices(&self) -> &[Stabilizer] {
        &self.vertices
    }

    pub fn stabilizers(&self, kind: StabKind) -> &[Stabilizer] {
        match kind {
            StabKind::Plaquette => &self.plaquettes,
            StabKind::Vertex => &self.vertices,
        }
    }

    pub fn logical_z(&self) -> &[usize] {
        &self.logical_z
    }

    pub fn logical_x(&self) -> &[usize] {
        &self.logical_x
    }

    pub fn holes(&self) -> &[HoleRegion] {
        &self.holes
    }

    pub fn qubit_position(&self, q: usize) -> (usize, usize) {
        self.qubit_pos[q]
    }

    pub fn qubit_index(&self, r: usize, c: usize) -> Option<usize> {
        if r < self.side && c < self.side {
            self.cell_to_qubit[r * self.side + c]
        } else {
            None
        }
    }

    pub fn is_removed(&self, q: usize) -> bool {
        self.removed[q]
    }

    pub fn removed_qubits(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|&q| self.removed[q]).collect()
    }

    pub fn stabilizer(&self, id: StabilizerId) -> Result<&Stabilizer, GeometryError> {
        let list = self.stabilizers(id.kind());
        list.get(id.index())
            .ok_or(GeometryError::NoSuchStabilizer(id))
    }

    /// Plaquette index from species-grid coordinates.
    pub fn plaquette_at(&self, row: usize, col: usize) -> Option<usize> {
        if row < self.d && col < self.d - 1 {
            Some(row * (self.d - 1) + col)
        } else {
            None
        }
    }

    /// Vertex index from species-grid coordinates.
    pub fn vertex_at(&self, row: usize, col: usize) -> Option<usize> {
        if row < self.d - 1 && col < self.d {
            Some(row * self.d + col)
        } else {
            None
        }
    }

    /// Support of a stabilizer with hole-removed qubits dropped.
    pub fn support(&self, id: StabilizerId) -> Result<Vec<usize>, GeometryError> {
        let s = self.stabilizer(id)?;
        Ok(s.support
            .iter()
            .copied()
            .filter(|&q| !self.removed[q])
            .collect())
    }

    /// Which boundary, if any, a single error on `q` can exit through for
    /// the given species. A qubit on a smooth column creates a single
    /// plaquette defect, so it "exits" left or right; dually for rough rows.
    pub fn boundary_exit(&self, kind: StabKind, q: usize) -> Option<BoundarySide> {
        let (r, c) = self.qubit_pos[q];
        match kind {
            StabKind::Plaquette => {
                if c == 0 {
                    Some(BoundarySide::Left)
                } else if c == self.side - 1 {
                    Some(BoundarySide::Right)
                } else {
                    None
                }
            }
            StabKind::Vertex => {
                if r == 0 {
                    Some(BoundarySide::Top)
                } else if r == self.side - 1 {
                    Some(BoundarySide::Bottom)
                } else {
                    None
                }
            }
        }
    }

    /// Defect adjacency for one species: for every enabled stabilizer, the
    /// list of `(neighbour stabilizer, shared surviving qubit)` pairs.
    /// Disabled stabilizers get an empty list.
    pub fn defect_adjacency(&self, kind: StabKind) -> Vec<Vec<(usize, usize)>> {
        let stabs = self.stabilizers(kind);
        let mut by_qubit: Vec<Vec<usize>> = vec![Vec::new(); self.n_qubits];
        for (i, s) in stabs.iter().enumerate() {
            if !s.enabled {
                continue;
            }
            for &q in &s.support {
                if !self.removed[q] {
                    by_qubit[q].push(i);
                }
            }
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); stabs.len()];
        for (q, owners) in by_qubit.iter().enumerate() {
            if owners.len() == 2 {
                adj[owners[0]].push((owners[1], q));
                adj[owners[1]].push((owners[0], q));
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Boundary exit moves for one species: `(stabilizer, exit qubit, side)`
    /// for every enabled stabilizer owning a surviving boundary qubit.
    pub fn boundary_exits(&self, kind: StabKind) -> Vec<(usize, usize, BoundarySide)> {
        let stabs = self.stabilizers(kind);
        let mut out = Vec::new();
        for (i, s) in stabs.iter().enumerate() {
            if !s.enabled {
                continue;
            }
            for &q in &s.support {
                if self.removed[q] {
                    continue;
                }
                if let Some(side) = self.boundary_exit(kind, q) {
                    out.push((i, q, side));
                }
            }
        }
        out
    }

    /// Graph distance between two same-species defect sites: the minimal
    /// number of single-qubit flips moving a defect from `a` to `b`, walking
    /// only enabled stabilizers and surviving qubits.
    pub fn lattice_distance(
        &self,
        a: StabilizerId,
        b: StabilizerId,
    ) -> Result<usize, GeometryError> {
        if a.kind() != b.kind() {
            return Err(GeometryError::DefectSpeciesMismatch);
        }
        self.stabilizer(a)?;
        self.stabilizer(b)?;
        if a == b {
            return Ok(0);
        }
        let adj = self.defect_adjacency(a.kind());
        let mut dist = vec![usize::MAX; adj.len()];
        let mut queue = VecDeque::new();
        dist[a.index()] = 0;
        queue.push_back(a.index());
        while let Some(u) = queue.pop_front() {
            if u == b.index() {
                return Ok(dist[u]);
            }
            for &(v, _) in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        Err(GeometryError::Disconnected)
    }

    /// Minimal number of single-qubit flips moving a defect at `a` off the
    /// boundary that absorbs its species, and the side reached.
    pub fn boundary_distance(
        &self,
        a: StabilizerId,
    ) -> Result<(usize, BoundarySide), GeometryError> {
        self.stabilizer(a)?;
        let kind = a.kind();
        let adj = self.defect_adjacency(kind);
        // Multi-source BFS from every boundary-adjacent stabilizer.
        let mut dist = vec![usize::MAX; adj.len()];
        let mut side = vec![None; adj.len()];
        let mut queue = VecDeque::new();
        for (i, _, s) in self.boundary_exits(kind) {
            if dist[i] > 1 {
                dist[i] = 1;
                side[i] = Some(s);
                queue.push_back(i);
            }
        }
        if dist[a.index()] == 1 {
            return Ok((1, side[a.index()].unwrap()));
        }
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    side[v] = side[u];
                    if v == a.index() {
                        return Ok((dist[v], side[v].unwrap()));
                    }
                    queue.push_back(v);
                }
            }
        }
        Err(GeometryError::Disconnected)
    }

    /// Carve a new hole. Returns the deformed layout; `self` is untouched.
    pub fn carve_hole(
        &self,
        kind: HoleKind,
        region: &[StabilizerId],
    ) -> Result<CodeLayout, GeometryError> {
        let mut specs: Vec<(HoleKind, Vec<usize>)> = self
            .holes
            .iter()
            .map(|h| (h.kind, h.region.clone()))
            .collect();
        specs.push((kind, self.check_region_ids(kind, region)?));
        self.rebuild_with_holes(specs)
    }

    /// Grow hole `hole` by `extra` stabilizers of its species.
    pub fn expand_hole(
        &self,
        hole: usize,
        extra: &[StabilizerId],
    ) -> Result<CodeLayout, GeometryError> {
        let h = self.holes.get(hole).ok_or(GeometryError::NoSuchHole(hole))?;
        let extra = self.check_region_ids(h.kind, extra)?;
        let mut specs: Vec<(HoleKind, Vec<usize>)> = self
            .holes
            .iter()
            .map(|h| (h.kind, h.region.clone()))
            .collect();
        specs[hole].1.extend(extra);
        let new = self.rebuild_with_holes(specs)?;
        // The deformed hole must keep part of its previous boundary, or the
        // relation between old and new loop operators becomes ambiguous.
        let old: BTreeSet<usize> = h.perimeter.iter().copied().collect();
        if !new.holes[hole].perimeter.iter().any(|q| old.contains(q)) {
            return Err(GeometryError::RetainsNoBoundary);
        }
        Ok(new)
    }

    /// Shrink hole `hole` by re-enabling `restore`; restoring the entire
    /// region deletes the hole.
    pub fn contract_hole(
        &self,
        hole: usize,
        restore: &[StabilizerId],
    ) -> Result<CodeLayout, GeometryError> {
        let h = self.holes.get(hole).ok_or(GeometryError::NoSuchHole(hole))?;
        let restore = self.check_region_ids_exist(h.kind, restore)?;
        for r in &restore {
            if !h.region.contains(r) {
                return Err(GeometryError::NotInHole);
            }
        }
        let mut specs: Vec<(HoleKind, Vec<usize>)> = self
            .holes
            .iter()
            .map(|h| (h.kind, h.region.clone()))
            .collect();
        specs[hole].1.retain(|i| !restore.contains(i));
        if specs[hole].1.is_empty() {
            specs.remove(hole);
        }
        self.rebuild_with_holes(specs)
    }

    /// Validate ids for membership in `kind`'s species and basic carving
    /// legality (bulk weight-4, away from the lattice edge, not disabled).
    fn check_region_ids(
        &self,
        kind: HoleKind,
        region: &[StabilizerId],
    ) -> Result<Vec<usize>, GeometryError> {
        let ids = self.check_region_ids_exist(kind, region)?;
        let stabs = self.stabilizers(kind.species());
        for &i in &ids {
            let s = &stabs[i];
            if s.support.len() < 4 {
                return Err(GeometryError::TouchesBoundary(i));
            }
            for &q in &s.support {
                let (r, c) = self.qubit_pos[q];
                if r == 0 || c == 0 || r == self.side - 1 || c == self.side - 1 {
                    return Err(GeometryError::TouchesBoundary(i));
                }
            }
        }
        Ok(ids)
    }

    fn check_region_ids_exist(
        &self,
        kind: HoleKind,
        region: &[StabilizerId],
    ) -> Result<Vec<usize>, GeometryError> {
        if region.is_empty() {
            return Err(GeometryError::EmptyRegion);
        }
        let mut ids = Vec::with_capacity(region.len());
        for &id in region {
            if id.kind() != kind.species() {
                return Err(GeometryError::WrongStabilizerType {
                    kind,
                    found: id.kind(),
                });
            }
            self.stabilizer(id)?;
            ids.push(id.index());
        }
        ids.sort_unstable();
        ids.dedup();
        Ok(ids)
    }

    /// Rebuild the layout from scratch with the given hole specifications.
    /// This is the single validation and derivation path used by carve,
    /// expand and contract.
    fn rebuild_with_holes(
        &self,
        specs: Vec<(HoleKind, Vec<usize>)>,
    ) -> Result<CodeLayout, GeometryError> {
        let mut layout = build_planar(self.d)?;
        // Stabilizer-level disjointness: no stabilizer may belong to two
        // holes, and supports of stabilizers in different holes must not
        // share qubits (holes must not touch).
        let mut support_owner: Vec<Option<usize>> = vec![None; self.n_qubits];
        for (hole_idx, (kind, region)) in specs.iter().enumerate() {
            let stabs = layout.stabilizers(kind.species());
            for &i in region {
                for &q in &stabs[i].support {
                    match support_owner[q] {
                        Some(owner) if owner != hole_idx => {
                            return Err(GeometryError::OverlapsHole)
                        }
                        _ => support_owner[q] = Some(hole_idx),
                    }
                }
            }
        }
        for (kind, region) in specs {
            layout = layout.apply_hole(kind, region)?;
        }
        Ok(layout)
    }

    /// Carve a single validated hole into `self`, deriving removed qubits,
    /// perimeter and logical operators.
    fn apply_hole(mut self, kind: HoleKind, region: Vec<usize>) -> Result<CodeLayout, GeometryError> {
        let species = kind.species();
        {
            // Connectivity over shared support qubits.
            let stabs = self.stabilizers(species);
            let in_region: BTreeSet<usize> = region.iter().copied().collect();
            let mut seen = BTreeSet::new();
            let mut queue = VecDeque::new();
            seen.insert(region[0]);
            queue.push_back(region[0]);
            while let Some(u) = queue.pop_front() {
                for &v in &in_region {
                    if !seen.contains(&v)
                        && stabs[u].support.iter().any(|q| stabs[v].support.contains(q))
                    {
                        seen.insert(v);
                        queue.push_back(v);
                    }
                }
            }
            if seen.len() != region.len() {
                return Err(GeometryError::RegionNotConnected);
            }
        }

        // Qubits whose same-species stabilizers all lie in the region drop
        // out of the code.
        let mut owner_count: Vec<(usize, usize)> = vec![(0, 0); self.n_qubits];
        for (i, s) in self.stabilizers(species).iter().enumerate() {
            let in_region = region.contains(&i);
            for &q in &s.support {
                let e = &mut owner_count[q];
                e.0 += 1;
                if in_region {
                    e.1 += 1;
                }
            }
        }
        let removed_qubits: Vec<usize> = (0..self.n_qubits)
            .filter(|&q| {
                !self.removed[q] && owner_count[q].0 > 0 && owner_count[q].0 == owner_count[q].1
            })
            .collect();

        // Perimeter loop: symmetric difference of the region supports,
        // restricted to surviving qubits (removed qubits cancel pairwise).
        let mut loop_parity = vec![false; self.n_qubits];
        for &i in &region {
            for &q in &self.stabilizers(species)[i].support {
                loop_parity[q] = !loop_parity[q];
            }
        }
        for &q in &removed_qubits {
            if loop_parity[q] {
                return Err(GeometryError::UnsupportedRegionShape);
            }
        }
        let logical_loop: Vec<usize> = (0..self.n_qubits)
            .filter(|&q| loop_parity[q] && !self.removed[q])
            .collect();
        let perimeter = self.order_cycle(&logical_loop, kind)?;

        // Mark removals and disable stabilizers.
        for &q in &removed_qubits {
            self.removed[q] = true;
        }
        {
            let stabs = match species {
                StabKind::Plaquette => &mut self.plaquettes,
                StabKind::Vertex => &mut self.vertices,
            };
            for &i in &region {
                stabs[i].enabled = false;
            }
        }
        // Other-species stabilizers whose whole support vanished are no
        // longer enforceable.
        let mut interior_disabled = Vec::new();
        {
            let removed = &self.removed;
            let others = match species {
                StabKind::Plaquette => &mut self.vertices,
                StabKind::Vertex => &mut self.plaquettes,
            };
            for (i, s) in others.iter_mut().enumerate() {
                if s.enabled && s.support.iter().all(|&q| removed[q]) {
                    s.enabled = false;
                    interior_disabled.push(i);
                }
            }
        }

        // String operator: from the hole to the nearest absorbing boundary.
        let (logical_string, string_side) = self.hole_string(kind, &region)?;

        self.holes.push(HoleRegion {
            kind,
            region,
            interior_disabled,
            removed_qubits,
            perimeter,
            logical_loop,
            logical_string,
            string_side,
        });
        Ok(self)
    }

    /// Order the qubits of a perimeter loop into a closed walk. Two loop
    /// qubits are consecutive when some enabled other-species stabilizer
    /// contains both.
    fn order_cycle(&self, loop_qubits: &[usize], kind: HoleKind) -> Result<Vec<usize>, GeometryError> {
        if loop_qubits.is_empty() {
            return Err(GeometryError::UnsupportedRegionShape);
        }
        let other = kind.species().other();
        let in_loop: BTreeSet<usize> = loop_qubits.iter().copied().collect();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.n_qubits];
        for s in self.stabilizers(other) {
            let here: Vec<usize> = s
                .support
                .iter()
                .copied()
                .filter(|q| in_loop.contains(q))
                .collect();
            if here.len() == 2 {
                adj[here[0]].push(here[1]);
                adj[here[1]].push(here[0]);
            }
        }
        for q in loop_qubits {
            adj[*q].sort_unstable();
            adj[*q].dedup();
            if adj[*q].len() != 2 {
                return Err(GeometryError::UnsupportedRegionShape);
            }
        }
        let start = loop_qubits[0];
        let mut walk = vec![start];
        let mut prev = start;
        let mut here = adj[start][0];
        while here != start {
            walk.push(here);
            let next = if adj[here][0] == prev { adj[here][1] } else { adj[here][0] };
            prev = here;
            here = next;
        }
        if walk.len() != loop_qubits.len() {
            return Err(GeometryError::UnsupportedRegionShape);
        }
        Ok(walk)
    }

    /// Shortest string of qubit flips connecting the hole to its absorbing
    /// boundary: BFS from boundary-adjacent stabilizers of the species, over
    /// enabled stabilizers, until a stabilizer adjacent to the region is
    /// reached; then step into the region.
    fn hole_string(
        &self,
        kind: HoleKind,
        region: &[usize],
    ) -> Result<(Vec<usize>, BoundarySide), GeometryError> {
        let species = kind.species();
        let stabs = self.stabilizers(species);
        let in_region: BTreeSet<usize> = region.iter().copied().collect();
        let adj = self.defect_adjacency(species);

        #[derive(Clone)]
        struct Node {
            dist: usize,
            side: BoundarySide,
            // (previous stabilizer, qubit used to get here)
            from: Option<(usize, usize)>,
            exit_qubit: usize,
        }
        let mut nodes: Vec<Option<Node>> = vec![None; stabs.len()];
        let mut queue = VecDeque::new();
        for (i, q, side) in self.boundary_exits(species) {
            if nodes[i].is_none() && !in_region.contains(&i) {
                nodes[i] = Some(Node { dist: 1, side, from: None, exit_qubit: q });
                queue.push_back(i);
            }
        }
        let mut reach: Option<(usize, usize)> = None; // (stab adjacent to region, qubit into region)
        'bfs: while let Some(u) = queue.pop_front() {
            // Adjacency includes disabled stabilizers' shared qubits only if
            // both owners are enabled, so step into the region by scanning
            // raw supports.
            for &i in region {
                if let Some(q) = shared_qubit(&stabs[u].support, &stabs[i].support) {
                    if !self.removed[q] {
                        reach = Some((u, q));
                        break 'bfs;
                    }
                }
            }
            let du = nodes[u].as_ref().unwrap().dist;
            let su = nodes[u].as_ref().unwrap().side;
            for &(v, q) in &adj[u] {
                if nodes[v].is_none() && !in_region.contains(&v) {
                    nodes[v] = Some(Node { dist: du + 1, side: su, from: Some((u, q)), exit_qubit: 0 });
                    queue.push_back(v);
                }
            }
        }
        let (last, into_hole) = reach.ok_or(GeometryError::Disconnected)?;
        let mut string = vec![into_hole];
        let mut cur = last;
        loop {
            let node = nodes[cur].clone().unwrap();
            match node.from {
                Some((prev, q)) => {
                    string.push(q);
                    cur = prev;
                }
                None => {
                    string.push(node.exit_qubit);
                    let side = node.side;
                    string.sort_unstable();
                    string.dedup();
                    return Ok((string, side));
                }
            }
        }
    }
}

fn shared_qubit(a: &[usize], b: &[usize]) -> Option<usize> {
    a.iter().copied().find(|q| b.contains(q))
}

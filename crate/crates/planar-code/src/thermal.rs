//! Classical finite-temperature memory dynamics.
//!
//! Three stylised memories, each reduced to a classical spin model: the
//! open Ising chain, the Ising sheet (open or periodic), and one Pauli
//! species of the toric code on a torus. A Pauli-diagonal bath never mixes
//! the two toric defect species, so they relax independently; we simulate
//! the plaquette sector as spins on the edges of a periodic square lattice
//! and note that the star sector is its exact dual. Couplings follow the
//! ferromagnetic convention `H = -J * sum(s*s)`, so all-aligned
//! configurations are the ground states.
//!
//! Evolution is single-spin-flip Metropolis in continuous time, run
//! rejection-free in the Bortz-Kalos-Lebowitz style: spins are binned by
//! their flip cost, a bin is drawn with probability proportional to
//! `count * min(1, exp(-beta * dE))`, and the clock advances by an
//! exponential waiting time at the total rate. Memory lifetime is measured
//! by decoding the state at geometrically spaced checkpoints - majority
//! vote for the ferromagnets, minimum-weight matching plus winding parity
//! for the torus - and reporting the first checkpoint that decodes wrong.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decode::mwpm;

/// Which Hamiltonian a [`ClassicalSystem`] realises.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemKind {
    /// Open chain of `length` spins with nearest-neighbour exchange.
    #[serde(rename = "ising_1d")]
    Ising1D { length: usize },
    /// `side x side` square lattice, optionally wrapped into a torus.
    #[serde(rename = "ising_2d")]
    Ising2D { side: usize, periodic: bool },
    /// Plaquette sector of the toric code on a `side x side` torus: spins
    /// live on the `2 * side^2` edges, a flipped edge toggles the two faces
    /// it borders, and each unsatisfied face costs `2 * j_p`. The star term
    /// contributes the constant `-j_s * side^2` while that sector stays in
    /// vacuum.
    ToricCodeXBasis { side: usize, j_s: f64, j_p: f64 },
}

impl SystemKind {
    pub fn n_spins(&self) -> usize {
        match *self {
            SystemKind::Ising1D { length } => length,
            SystemKind::Ising2D { side, .. } => side * side,
            SystemKind::ToricCodeXBasis { side, .. } => 2 * side * side,
        }
    }
}

/// A classical spin configuration together with its Hamiltonian.
#[derive(Clone, Debug)]
pub struct ClassicalSystem {
    kind: SystemKind,
    /// Ising exchange constant; the toric kind carries its own couplings
    /// and ignores this field.
    j: f64,
    spins: Vec<i8>,
}

impl ClassicalSystem {
    /// The all-up ground state of `kind`.
    pub fn ground(kind: SystemKind, j: f64) -> ClassicalSystem {
        assert!(j > 0.0, "exchange coupling must be positive");
        match kind {
            SystemKind::Ising1D { length } => assert!(length >= 2),
            SystemKind::Ising2D { side, .. } => assert!(side >= 2),
            SystemKind::ToricCodeXBasis { side, j_s, j_p } => {
                assert!(side >= 2);
                assert!(j_s > 0.0 && j_p > 0.0, "toric couplings must be positive");
            }
        }
        ClassicalSystem { kind, j, spins: vec![1; kind.n_spins()] }
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn n_spins(&self) -> usize {
        self.spins.len()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn flip(&mut self, spin: usize) {
        assert!(spin < self.spins.len(), "spin index out of range");
        self.spins[spin] = -self.spins[spin];
    }

    /// Total energy of the current configuration.
    pub fn energy(&self) -> f64 {
        let s = |i: usize| f64::from(self.spins[i]);
        match self.kind {
            SystemKind::Ising1D { length } => {
                let mut sum = 0.0;
                for i in 0..length - 1 {
                    sum += s(i) * s(i + 1);
                }
                -self.j * sum
            }
            SystemKind::Ising2D { side, periodic } => {
                let mut sum = 0.0;
                for r in 0..side {
                    for c in 0..side {
                        let i = r * side + c;
                        if c + 1 < side {
                            sum += s(i) * s(i + 1);
                        } else if periodic {
                            sum += s(i) * s(r * side);
                        }
                        if r + 1 < side {
                            sum += s(i) * s(i + side);
                        } else if periodic {
                            sum += s(i) * s(c);
                        }
                    }
                }
                -self.j * sum
            }
            SystemKind::ToricCodeXBasis { side, j_s, j_p } => {
                let faces: f64 = (0..side * side)
                    .map(|f| f64::from(self.face_product(f)))
                    .sum();
                -j_s * (side * side) as f64 - j_p * faces
            }
        }
    }

    /// Ground-state energy of the declared Hamiltonian.
    pub fn ground_energy(&self) -> f64 {
        match self.kind {
            SystemKind::Ising1D { length } => -self.j * (length - 1) as f64,
            SystemKind::Ising2D { side, periodic } => {
                let bonds = if periodic {
                    2 * side * side
                } else {
                    2 * side * (side - 1)
                };
                -self.j * bonds as f64
            }
            SystemKind::ToricCodeXBasis { side, j_s, j_p } => {
                -(j_s + j_p) * (side * side) as f64
            }
        }
    }

    /// Energy change of flipping `spin`, exactly `energy(after) - energy(before)`.
    pub fn delta_energy(&self, spin: usize) -> f64 {
        2.0 * self.flip_coupling() * f64::from(self.local_field(spin))
    }

    /// Coupling constant multiplying a single flip's field.
    fn flip_coupling(&self) -> f64 {
        match self.kind {
            SystemKind::Ising1D { .. } | SystemKind::Ising2D { .. } => self.j,
            SystemKind::ToricCodeXBasis { j_p, .. } => j_p,
        }
    }

    /// Integer field of `spin`: the flip cost is `2 * coupling * field`.
    /// Ising: the spin times the sum of its neighbours. Toric: the sum of
    /// the two bordering face products. Always in `-4..=4`.
    fn local_field(&self, spin: usize) -> i32 {
        match self.kind {
            SystemKind::Ising1D { length } => {
                let mut sum = 0i32;
                if spin > 0 {
                    sum += i32::from(self.spins[spin - 1]);
                }
                if spin + 1 < length {
                    sum += i32::from(self.spins[spin + 1]);
                }
                i32::from(self.spins[spin]) * sum
            }
            SystemKind::Ising2D { side, periodic } => {
                let (r, c) = (spin / side, spin % side);
                let mut sum = 0i32;
                let mut add = |rr: usize, cc: usize| sum += i32::from(self.spins[rr * side + cc]);
                if periodic {
                    add((r + 1) % side, c);
                    add((r + side - 1) % side, c);
                    add(r, (c + 1) % side);
                    add(r, (c + side - 1) % side);
                } else {
                    if r + 1 < side {
                        add(r + 1, c);
                    }
                    if r > 0 {
                        add(r - 1, c);
                    }
                    if c + 1 < side {
                        add(r, c + 1);
                    }
                    if c > 0 {
                        add(r, c - 1);
                    }
                }
                i32::from(self.spins[spin]) * sum
            }
            SystemKind::ToricCodeXBasis { side, .. } => {
                let [a, b] = edge_faces(side, spin);
                i32::from(self.face_product(a)) + i32::from(self.face_product(b))
            }
        }
    }

    /// Spins whose field may change when `spin` flips (may repeat; callers
    /// treat reclassification as idempotent).
    fn push_affected(&self, spin: usize, out: &mut Vec<usize>) {
        out.push(spin);
        match self.kind {
            SystemKind::Ising1D { length } => {
                if spin > 0 {
                    out.push(spin - 1);
                }
                if spin + 1 < length {
                    out.push(spin + 1);
                }
            }
            SystemKind::Ising2D { side, periodic } => {
                let (r, c) = (spin / side, spin % side);
                if periodic {
                    out.push(((r + 1) % side) * side + c);
                    out.push(((r + side - 1) % side) * side + c);
                    out.push(r * side + (c + 1) % side);
                    out.push(r * side + (c + side - 1) % side);
                } else {
                    if r + 1 < side {
                        out.push((r + 1) * side + c);
                    }
                    if r > 0 {
                        out.push((r - 1) * side + c);
                    }
                    if c + 1 < side {
                        out.push(r * side + c + 1);
                    }
                    if c > 0 {
                        out.push(r * side + c - 1);
                    }
                }
            }
            SystemKind::ToricCodeXBasis { side, .. } => {
                for face in edge_faces(side, spin) {
                    out.extend(face_edges(side, face));
                }
            }
        }
    }

    /// Product of the four edge spins around toric face `face`.
    fn face_product(&self, face: usize) -> i8 {
        let SystemKind::ToricCodeXBasis { side, .. } = self.kind else {
            panic!("faces are defined for the toric kind only");
        };
        face_edges(side, face)
            .into_iter()
            .map(|e| self.spins[e])
            .product()
    }

    /// Faces currently holding a defect, ascending. Always even in count:
    /// every flip toggles exactly two faces.
    pub fn toric_defects(&self) -> Vec<usize> {
        let SystemKind::ToricCodeXBasis { side, .. } = self.kind else {
            panic!("defects are defined for the toric kind only");
        };
        (0..side * side)
            .filter(|&f| self.face_product(f) < 0)
            .collect()
    }
}

/// Edge indexing on an `l x l` torus: `h(r, c) = r*l + c` runs between the
/// vertices `(r, c)` and `(r, c+1)`; `v(r, c) = l^2 + r*l + c` runs between
/// `(r, c)` and `(r+1, c)`. Face `(r, c)` is bounded by `h(r, c)`,
/// `h(r+1, c)`, `v(r, c)` and `v(r, c+1)`, all mod `l`.
fn face_edges(l: usize, face: usize) -> [usize; 4] {
    let (r, c) = (face / l, face % l);
    [
        r * l + c,
        ((r + 1) % l) * l + c,
        l * l + r * l + c,
        l * l + r * l + (c + 1) % l,
    ]
}

/// The two faces bordering an edge.
fn edge_faces(l: usize, edge: usize) -> [usize; 2] {
    if edge < l * l {
        let (r, c) = (edge / l, edge % l);
        [r * l + c, ((r + l - 1) % l) * l + c]
    } else {
        let (r, c) = ((edge - l * l) / l, (edge - l * l) % l);
        [r * l + c, r * l + (c + l - 1) % l]
    }
}

/// An ordered list of spins to flip from a ground state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipPath {
    pub flips: Vec<usize>,
}

/// Highest excursion above the ground energy along `path`, flips applied
/// one at a time. The system must start in a ground state.
pub fn barrier(system: &ClassicalSystem, path: &FlipPath) -> f64 {
    let mut s = system.clone();
    let e0 = s.energy();
    assert!(
        (e0 - s.ground_energy()).abs() < 1e-9,
        "path must start from a ground state"
    );
    let mut e = e0;
    let mut peak = 0.0f64;
    for &i in &path.flips {
        e += s.delta_energy(i);
        s.flip(i);
        peak = peak.max(e - e0);
    }
    peak
}

const CLASSES: usize = 9;
const FIELD_OFFSET: i32 = 4;

/// What one call to [`Dynamics::advance`] did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Advance {
    /// One spin flipped before the cap.
    Flipped,
    /// The next event falls beyond the cap; the clock stopped there.
    ReachedCap,
    /// No flip has positive rate (zero temperature in a local minimum);
    /// the clock jumped to the cap.
    Frozen,
}

/// Rejection-free continuous-time Metropolis evolution of one system.
///
/// Spins are grouped into bins by their integer field; every bin has rate
/// `min(1, exp(-beta * dE))` per member, with `dE = 2 * coupling * field`.
/// Each event draws an exponential waiting time at the summed rate, then a
/// bin, then a member - so a trajectory is a deterministic function of the
/// seed. Energy is tracked incrementally and can be audited against a full
/// recomputation at any time.
#[derive(Clone, Debug)]
pub struct Dynamics {
    system: ClassicalSystem,
    beta: f64,
    rate: [f64; CLASSES],
    delta: [f64; CLASSES],
    class_of: Vec<u8>,
    members: [Vec<u32>; CLASSES],
    pos: Vec<u32>,
    scratch: Vec<usize>,
    time: f64,
    steps: u64,
    energy: f64,
}

impl Dynamics {
    pub fn new(system: ClassicalSystem, beta: f64) -> Dynamics {
        assert!(beta > 0.0, "inverse temperature must be positive");
        let n = system.n_spins();
        let coupling = system.flip_coupling();
        let mut rate = [0.0; CLASSES];
        let mut delta = [0.0; CLASSES];
        for (c, (rate, delta)) in rate.iter_mut().zip(delta.iter_mut()).enumerate() {
            let de = 2.0 * coupling * f64::from(c as i32 - FIELD_OFFSET);
            *delta = de;
            // Branching on the sign first keeps beta = +inf well defined:
            // inf * 0 would otherwise poison the zero-cost bin.
            *rate = if de <= 0.0 { 1.0 } else { (-beta * de).exp() };
        }
        let mut class_of = vec![0u8; n];
        let mut members: [Vec<u32>; CLASSES] = std::array::from_fn(|_| Vec::new());
        let mut pos = vec![0u32; n];
        for spin in 0..n {
            let class = (system.local_field(spin) + FIELD_OFFSET) as usize;
            class_of[spin] = class as u8;
            pos[spin] = members[class].len() as u32;
            members[class].push(spin as u32);
        }
        let energy = system.energy();
        Dynamics {
            system,
            beta,
            rate,
            delta,
            class_of,
            members,
            pos,
            scratch: Vec::new(),
            time: 0.0,
            steps: 0,
            energy,
        }
    }

    pub fn system(&self) -> &ClassicalSystem {
        &self.system
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Accepted flips so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Incrementally tracked energy.
    pub fn tracked_energy(&self) -> f64 {
        self.energy
    }

    fn total_rate(&self) -> f64 {
        (0..CLASSES)
            .map(|c| self.rate[c] * self.members[c].len() as f64)
            .sum()
    }

    /// Runs at most one event, never past `cap`. A discarded waiting time
    /// that overshot the cap costs nothing: exponential clocks are
    /// memoryless, so resampling after the cap is statistically identical.
    pub fn advance(&mut self, cap: f64, rng: &mut impl Rng) -> Advance {
        debug_assert!(cap >= self.time);
        let total = self.total_rate();
        if total <= 0.0 {
            self.time = cap;
            return Advance::Frozen;
        }
        let wait = -(1.0 - rng.gen::<f64>()).ln() / total;
        if self.time + wait > cap {
            self.time = cap;
            return Advance::ReachedCap;
        }
        self.time += wait;

        let mut x = rng.gen::<f64>() * total;
        let mut class = usize::MAX;
        for c in 0..CLASSES {
            let w = self.rate[c] * self.members[c].len() as f64;
            if w <= 0.0 {
                continue;
            }
            if x < w {
                class = c;
                break;
            }
            x -= w;
        }
        if class == usize::MAX {
            // Floating-point underflow in the cumulative walk; take the
            // last eligible bin.
            class = (0..CLASSES)
                .rev()
                .find(|&c| self.rate[c] > 0.0 && !self.members[c].is_empty())
                .expect("total rate was positive");
        }
        let member = rng.gen_range(0..self.members[class].len());
        let spin = self.members[class][member] as usize;

        self.energy += self.delta[class];
        self.system.flip(spin);
        self.steps += 1;

        let mut touched = std::mem::take(&mut self.scratch);
        touched.clear();
        self.system.push_affected(spin, &mut touched);
        for &a in &touched {
            self.reclass(a);
        }
        self.scratch = touched;
        Advance::Flipped
    }

    fn reclass(&mut self, spin: usize) {
        let new = (self.system.local_field(spin) + FIELD_OFFSET) as usize;
        let old = self.class_of[spin] as usize;
        if new == old {
            return;
        }
        let p = self.pos[spin] as usize;
        let bin = &mut self.members[old];
        let last = bin.len() - 1;
        bin.swap(p, last);
        bin.pop();
        if p < bin.len() {
            let moved = bin[p] as usize;
            self.pos[moved] = p as u32;
        }
        self.pos[spin] = self.members[new].len() as u32;
        self.members[new].push(spin as u32);
        self.class_of[spin] = new as u8;
    }
}

/// Decode the state back to a logical value and compare with the initial
/// one: majority vote for the ferromagnets (a tie decodes to the initial
/// value), minimum-weight matching of the defects followed by a winding
/// parity check for the torus. `true` means the memory still reads out
/// correctly.
pub fn decoded_readout_ok(system: &ClassicalSystem) -> bool {
    match *system.kind() {
        SystemKind::Ising1D { .. } | SystemKind::Ising2D { .. } => {
            let sum: i64 = system.spins().iter().map(|&s| i64::from(s)).sum();
            sum >= 0
        }
        SystemKind::ToricCodeXBasis { side, .. } => toric_readout_ok(system, side),
    }
}

fn toric_readout_ok(system: &ClassicalSystem, l: usize) -> bool {
    let spins = system.spins();
    // Winding parities of the raw configuration across two reference cuts:
    // the horizontal edges h(0, *) and the vertical edges v(*, 0).
    let mut row_cut = false;
    for c in 0..l {
        row_cut ^= spins[c] < 0;
    }
    let mut col_cut = false;
    for r in 0..l {
        col_cut ^= spins[l * l + r * l] < 0;
    }

    let defects = system.toric_defects();
    debug_assert!(defects.len() % 2 == 0, "defects are created in pairs");
    let n = defects.len();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            edges.push((a, b, torus_distance(l, defects[a], defects[b]) as u32));
        }
    }
    let (pairs, _) = mwpm(n, &edges)
        .expect("a complete graph on an even defect set has a perfect matching");
    // The correction walks each matched pair together along a shortest
    // vertical-then-horizontal dual path; only its winding matters, and a
    // monotone short leg crosses its reference cut exactly when the short
    // way wraps around the torus.
    for (a, b) in pairs {
        let (fa, fb) = (defects[a], defects[b]);
        row_cut ^= short_way_wraps(l, fa / l, fb / l);
        col_cut ^= short_way_wraps(l, fa % l, fb % l);
    }
    !row_cut && !col_cut
}

fn torus_distance(l: usize, fa: usize, fb: usize) -> usize {
    let dr = (fa / l).abs_diff(fb / l);
    let dc = (fa % l).abs_diff(fb % l);
    dr.min(l - dr) + dc.min(l - dc)
}

/// Whether the shorter walk from `a` to `b` on a ring of `l` sites passes
/// the seam between `l - 1` and `0`. A tie between directions picks the
/// increasing one, making the decode deterministic.
fn short_way_wraps(l: usize, a: usize, b: usize) -> bool {
    if a == b {
        return false;
    }
    let up = (b + l - a) % l;
    if 2 * up <= l {
        b < a
    } else {
        b > a
    }
}

/// One lifetime measurement.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LifetimeOutcome {
    /// Clock value of the first checkpoint that decoded wrong; `None` when
    /// the run was censored at the horizon.
    pub failure_time: Option<f64>,
    pub horizon: f64,
    pub steps: u64,
    pub checkpoints: usize,
}

impl LifetimeOutcome {
    /// Failure time, with censored runs counted at the horizon.
    pub fn effective_lifetime(&self) -> f64 {
        self.failure_time.unwrap_or(self.horizon)
    }
}

/// Evolve `system` from its current (ground) configuration at inverse
/// temperature `beta` and report when its decoded readout first goes
/// wrong. Checkpoints run at times 1, 2, 4, ... capped by `horizon`, which
/// is always the final checkpoint; a frozen system is censored immediately.
pub fn lifetime_trial(
    system: ClassicalSystem,
    beta: f64,
    horizon: f64,
    rng: &mut impl Rng,
) -> LifetimeOutcome {
    assert!(horizon > 0.0, "horizon must be positive");
    let mut dynamics = Dynamics::new(system, beta);
    let mut checkpoint = 1.0f64.min(horizon);
    let mut checkpoints = 0;
    loop {
        loop {
            match dynamics.advance(checkpoint, rng) {
                Advance::Flipped => continue,
                Advance::ReachedCap => break,
                Advance::Frozen => {
                    // Rates depend only on the configuration, so a frozen
                    // system stays frozen and keeps its readout forever.
                    return LifetimeOutcome {
                        failure_time: None,
                        horizon,
                        steps: dynamics.steps(),
                        checkpoints,
                    };
                }
            }
        }
        checkpoints += 1;
        if !decoded_readout_ok(dynamics.system()) {
            return LifetimeOutcome {
                failure_time: Some(dynamics.time()),
                horizon,
                steps: dynamics.steps(),
                checkpoints,
            };
        }
        if checkpoint >= horizon {
            return LifetimeOutcome {
                failure_time: None,
                horizon,
                steps: dynamics.steps(),
                checkpoints,
            };
        }
        checkpoint = (checkpoint * 2.0).min(horizon);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn chain(length: usize, j: f64) -> ClassicalSystem {
        ClassicalSystem::ground(SystemKind::Ising1D { length }, j)
    }

    fn sheet(side: usize, periodic: bool, j: f64) -> ClassicalSystem {
        ClassicalSystem::ground(SystemKind::Ising2D { side, periodic }, j)
    }

    fn torus(side: usize, j_s: f64, j_p: f64) -> ClassicalSystem {
        ClassicalSystem::ground(SystemKind::ToricCodeXBasis { side, j_s, j_p }, 1.0)
    }

    /// Vertical edge v(r, c) of an l x l torus.
    fn v_edge(l: usize, r: usize, c: usize) -> usize {
        l * l + r * l + c
    }

    #[test]
    fn energy_and_delta_examples() {
        let c = chain(10, 1.0);
        assert_eq!(c.energy(), -9.0);
        assert_eq!(c.ground_energy(), -9.0);
        assert_eq!(c.delta_energy(5), 4.0);
        assert_eq!(c.delta_energy(0), 2.0);
        assert_eq!(c.delta_energy(9), 2.0);

        let open = sheet(4, false, 1.0);
        assert_eq!(open.energy(), -24.0);
        assert_eq!(open.delta_energy(5), 8.0);
        assert_eq!(open.delta_energy(0), 4.0);
        let periodic = sheet(4, true, 1.0);
        assert_eq!(periodic.energy(), -32.0);
        assert_eq!(periodic.delta_energy(0), 8.0);

        let t = torus(4, 0.5, 1.25);
        assert_eq!(t.energy(), -(0.5 + 1.25) * 16.0);
        for e in 0..t.n_spins() {
            assert_eq!(t.delta_energy(e), 4.0 * 1.25);
        }
        let mut t = t;
        t.flip(3);
        assert_eq!(t.delta_energy(3), -4.0 * 1.25);
        assert_eq!(t.toric_defects().len(), 2);
    }

    #[test]
    fn delta_energy_matches_energy_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let systems = [chain(9, 0.8), sheet(4, false, 1.3), sheet(4, true, 0.6), torus(3, 0.9, 1.1)];
        for mut s in systems {
            for _ in 0..100 {
                let i = rng.gen_range(0..s.n_spins());
                s.flip(i);
            }
            for i in 0..s.n_spins() {
                let before = s.energy();
                let predicted = s.delta_energy(i);
                s.flip(i);
                let measured = s.energy() - before;
                s.flip(i);
                assert!(
                    (predicted - measured).abs() < 1e-12,
                    "spin {i}: predicted {predicted}, measured {measured}"
                );
            }
        }
    }

    #[test]
    fn chain_barrier_is_constant_in_length() {
        for length in [16usize, 64] {
            let s = chain(length, 1.0);
            let sweep = FlipPath { flips: (0..length).collect() };
            assert_eq!(barrier(&s, &sweep), 2.0);

            let mid = length / 2;
            let mut flips = vec![mid];
            flips.extend(mid + 1..length);
            flips.extend((0..mid).rev());
            assert_eq!(barrier(&s, &FlipPath { flips }), 4.0);
        }
    }

    #[test]
    fn sheet_barrier_grows_with_side() {
        let mut last = 0.0;
        for side in [4usize, 6, 8] {
            let s = sheet(side, true, 1.0);
            let raster = FlipPath { flips: (0..side * side).collect() };
            let b = barrier(&s, &raster);
            assert!(b >= 2.0 * (side - 1) as f64, "side {side}: barrier {b}");
            assert!(b > last);
            last = b;
        }
    }

    #[test]
    fn toric_loop_barrier_is_flat_and_logical() {
        for side in [4usize, 8] {
            let s = torus(side, 1.0, 0.75);
            let mut flips: Vec<usize> = (1..side).map(|c| v_edge(side, 0, c)).collect();
            flips.push(v_edge(side, 0, 0));
            let path = FlipPath { flips: flips.clone() };
            assert_eq!(barrier(&s, &path), 4.0 * 0.75);

            let mut walked = s.clone();
            for f in flips {
                walked.flip(f);
            }
            assert!(walked.toric_defects().is_empty());
            assert!(!decoded_readout_ok(&walked), "a closed winding loop flips the memory");
        }
    }

    #[test]
    fn toric_defects_stay_even_and_small_errors_decode_home() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut t = torus(6, 1.0, 1.0);
        assert!(decoded_readout_ok(&t));
        for _ in 0..50 {
            t.flip(rng.gen_range(0..t.n_spins()));
            assert_eq!(t.toric_defects().len() % 2, 0);
        }

        let mut t = torus(6, 1.0, 1.0);
        t.flip(2 * 6 + 2);
        t.flip(v_edge(6, 4, 1));
        assert_eq!(t.toric_defects().len(), 4);
        assert!(decoded_readout_ok(&t), "two isolated flips decode back to vacuum");
    }

    #[test]
    fn occupation_and_flip_counts_satisfy_detailed_balance() {
        let length = 4;
        let beta = 0.7;
        let mut dynamics = Dynamics::new(chain(length, 1.0), beta);
        let mut rng = ChaCha8Rng::seed_from_u64(23);

        let key = |s: &ClassicalSystem| -> usize {
            s.spins()
                .iter()
                .enumerate()
                .map(|(i, &v)| usize::from(v < 0) << i)
                .sum()
        };
        let mut occupation = vec![0.0f64; 1 << length];
        let mut crossings: HashMap<(usize, usize), u64> = HashMap::new();
        for _ in 0..150_000 {
            let from = key(dynamics.system());
            let before = dynamics.time();
            assert_eq!(dynamics.advance(f64::INFINITY, &mut rng), Advance::Flipped);
            occupation[from] += dynamics.time() - before;
            let to = key(dynamics.system());
            *crossings.entry((from, to)).or_insert(0) += 1;
        }

        // Stationary occupation matches the Boltzmann distribution.
        let energy_of = |mask: usize| -> f64 {
            let mut s = chain(length, 1.0);
            for i in 0..length {
                if mask >> i & 1 == 1 {
                    s.flip(i);
                }
            }
            s.energy()
        };
        let weights: Vec<f64> = (0..1 << length).map(|m| (-beta * energy_of(m)).exp()).collect();
        let z: f64 = weights.iter().sum();
        let total: f64 = occupation.iter().sum();
        for m in 0..1 << length {
            let expected = weights[m] / z;
            let observed = occupation[m] / total;
            assert!(
                (observed - expected).abs() < 0.01,
                "state {m:04b}: occupied {observed:.4}, Boltzmann {expected:.4}"
            );
        }

        // Reversibility: each ordered transition is used as often as its
        // reverse, up to counting noise.
        for (&(from, to), &n_ab) in &crossings {
            let n_ba = crossings.get(&(to, from)).copied().unwrap_or(0);
            let spread = 6.0 * ((n_ab + n_ba) as f64).sqrt();
            assert!(
                (n_ab as f64 - n_ba as f64).abs() <= spread.max(12.0),
                "{from:04b}->{to:04b}: {n_ab} vs {n_ba}"
            );
        }
    }

    #[test]
    fn tracked_energy_survives_a_million_steps() {
        let mut dynamics = Dynamics::new(sheet(8, true, 0.37), 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1_000_000 {
            assert_eq!(dynamics.advance(f64::INFINITY, &mut rng), Advance::Flipped);
        }
        let drift = (dynamics.tracked_energy() - dynamics.system().energy()).abs();
        assert!(drift < 1e-9, "incremental energy drifted by {drift}");
    }

    #[test]
    fn zero_temperature_ground_state_is_frozen() {
        let mut dynamics = Dynamics::new(chain(8, 1.0), f64::INFINITY);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(dynamics.advance(1e9, &mut rng), Advance::Frozen);
        assert_eq!(dynamics.time(), 1e9);
        assert_eq!(dynamics.steps(), 0);

        let outcome = lifetime_trial(chain(8, 1.0), f64::INFINITY, 4096.0, &mut rng);
        assert_eq!(outcome.failure_time, None);
        assert_eq!(outcome.steps, 0);
        assert_eq!(outcome.effective_lifetime(), 4096.0);
    }

    #[test]
    fn hot_chain_fails_at_a_checkpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let horizon = (1u64 << 20) as f64;
        let outcome = lifetime_trial(chain(8, 1.0), 0.05, horizon, &mut rng);
        let t = outcome.failure_time.expect("a nearly random walk loses the bit quickly");
        assert!(t <= horizon);
        assert_eq!(t.log2().fract(), 0.0, "checkpoints sit at powers of two");
        assert!(outcome.checkpoints >= 1);
    }

    #[test]
    fn system_kind_serde_round_trip() {
        let kinds = [
            SystemKind::Ising1D { length: 32 },
            SystemKind::Ising2D { side: 16, periodic: true },
            SystemKind::ToricCodeXBasis { side: 8, j_s: 1.0, j_p: 1.0 },
        ];
        for kind in kinds {
            let json = serde_json::to_string(&kind).unwrap();
            let back: SystemKind = serde_json::from_str(&json).unwrap();
            assert_eq!(back, kind);
        }
        assert!(serde_json::to_string(&kinds[0]).unwrap().contains("ising_1d"));
    }
}

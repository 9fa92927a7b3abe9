//! Syndrome decoding via exact minimum-weight perfect matching.
//!
//! Each defect species is decoded independently: m defects (from sigma-x
//! errors) walk on plaquettes, e defects (from sigma-z errors) walk on
//! vertices. The matching graph pairs every defect either with another
//! defect, at a weight equal to their lattice distance, or with a virtual
//! boundary twin at the defect's distance to the nearest absorbing
//! boundary; twins pair among themselves for free. A minimum-weight
//! perfect matching of this graph is a most-likely error pattern under
//! uniform single-qubit noise, and its pairing is realized as shortest
//! lattice paths of qubit flips.
//!
//! Repeated noisy measurement (the phenomenological model) is decoded in
//! one extra dimension: nodes are *detection events* - places where two
//! consecutive measured syndromes disagree - and edge weights add the round
//! separation to the lattice distance (unit time/space weights, matched to
//! readout error probability q = p; reweighting is a documented extension
//! point, unused by the in-scope models). The correction applies only the
//! spatial projection of each matched pair; the telescoping of detection
//! events guarantees the result annihilates the final true syndrome.
//!
//! Edge pruning: a defect-defect edge is dropped when its weight is at
//! least the sum of the two defects' boundary distances, because any
//! matching using it can be rerouted through the boundary at no extra
//! cost. This keeps the minimum total weight exactly and sparsifies the
//! graph considerably near threshold.
//!
//! Tie-breaking between equal-weight matchings is deterministic by
//! construction: nodes and edges are built in a canonical order and the
//! solver is strictly input-deterministic (see `blossom`), so the same
//! syndrome decodes identically across runs, processes and thread counts.

mod blossom;

use crate::frame::{PauliFrame, Syndrome, SyndromeMasks};
use crate::geometry::{CodeLayout, StabKind};
use crate::noise::NoiseModel;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("matching graph has an odd number of nodes")]
    OddNodeCount,
    #[error("no perfect matching exists; {0} nodes left unmatched")]
    NoPerfectMatching(usize),
    #[error("syndrome names stabilizer {index}, which is disabled or out of range")]
    BadSyndrome { kind: StabKind, index: usize },
    #[error("syndrome carries {found} measurement rounds, noise model implies {expected}")]
    RoundMismatch { found: usize, expected: usize },
    #[error("round history must end in the top-level defect lists")]
    InconsistentRounds,
    #[error("maximum-likelihood decoding is exact only up to distance 3, layout has {0}")]
    MlDistanceTooLarge(usize),
}

/// A node of the matching graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MatchNode {
    /// A real defect: stabilizer index within its species, and the
    /// measurement round it was detected in (0 for perfect readout).
    Defect { stabilizer: usize, round: usize },
    /// Virtual boundary twin of the defect node at index `twin_of`.
    Boundary { twin_of: usize },
}

/// Matching problem for one defect species.
#[derive(Clone, Debug, Serialize)]
pub struct MatchingGraph {
    pub kind: StabKind,
    /// Defect nodes first, then one boundary twin per defect.
    pub nodes: Vec<MatchNode>,
    /// `(node, node, weight)` with indices into `nodes`, canonical order.
    pub edges: Vec<(usize, usize, u32)>,
}

impl MatchingGraph {
    pub fn n_defects(&self) -> usize {
        self.nodes.len() / 2
    }
}

/// One matched pair of the final pairing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchedPair {
    pub kind: StabKind,
    pub a: MatchNode,
    pub b: MatchNode,
    pub weight: u32,
}

/// A decoded correction.
#[derive(Clone, Debug, Serialize)]
pub struct Correction {
    /// Qubit flips that annihilate every defect of the input syndrome.
    pub frame: PauliFrame,
    /// The pairing that produced the frame, both species, twin-twin pairs
    /// omitted.
    pub pairing: Vec<MatchedPair>,
    /// Total matching weight over both species.
    pub total_weight: u64,
}

/// Minimum-weight perfect matching over `0..n_nodes`.
///
/// Returns the matched pairs `(v, w)`, `v < w`, sorted, plus the total
/// weight. The pairing among equal-weight optima is a deterministic
/// function of the input.
pub fn mwpm(
    n_nodes: usize,
    edges: &[(usize, usize, u32)],
) -> Result<(Vec<(usize, usize)>, u64), DecodeError> {
    if n_nodes % 2 != 0 {
        return Err(DecodeError::OddNodeCount);
    }
    if n_nodes == 0 {
        return Ok((Vec::new(), 0));
    }
    let negated: Vec<(usize, usize, i128)> = edges
        .iter()
        .map(|&(a, b, w)| (a, b, -i128::from(w)))
        .collect();
    let pairs = blossom::max_weight_matching(n_nodes, &negated, true, false);
    if pairs.len() * 2 != n_nodes {
        return Err(DecodeError::NoPerfectMatching(n_nodes - 2 * pairs.len()));
    }
    let mut weight_of = std::collections::BTreeMap::new();
    for &(a, b, w) in edges {
        let key = (a.min(b), a.max(b));
        let slot = weight_of.entry(key).or_insert(w);
        *slot = (*slot).min(w);
    }
    let total = pairs
        .iter()
        .map(|pair| u64::from(weight_of[pair]))
        .sum();
    Ok((pairs, total))
}

/// Precomputed matching geometry for one defect species.
struct SpeciesContext {
    kind: StabKind,
    n: usize,
    enabled: Vec<bool>,
    /// `(neighbour, shared qubit)` per enabled stabilizer, sorted.
    adj: Vec<Vec<(usize, usize)>>,
    /// All-pairs defect distances, `n * n`, `u16::MAX` = unreachable.
    dist: Vec<u16>,
    /// Distance to the nearest absorbing boundary.
    bdist: Vec<u16>,
    /// Exit qubit for stabilizers at `bdist == 1`.
    bexit: Vec<Option<usize>>,
}

const UNREACHABLE: u16 = u16::MAX;

impl SpeciesContext {
    fn new(layout: &CodeLayout, kind: StabKind) -> SpeciesContext {
        let stabs = layout.stabilizers(kind);
        let n = stabs.len();
        let enabled: Vec<bool> = stabs.iter().map(|s| s.enabled).collect();
        let adj = layout.defect_adjacency(kind);

        let mut dist = vec![UNREACHABLE; n * n];
        let mut queue = std::collections::VecDeque::new();
        for source in 0..n {
            if !enabled[source] {
                continue;
            }
            let row = &mut dist[source * n..(source + 1) * n];
            row[source] = 0;
            queue.clear();
            queue.push_back(source);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &adj[u] {
                    if row[v] == UNREACHABLE {
                        row[v] = row[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }

        let mut bdist = vec![UNREACHABLE; n];
        let mut bexit = vec![None; n];
        let mut queue = std::collections::VecDeque::new();
        for (i, q, _side) in layout.boundary_exits(kind) {
            // Exits arrive sorted by stabilizer then support order; keep
            // the smallest exit qubit per stabilizer.
            if bdist[i] != 1 || bexit[i].unwrap() > q {
                bdist[i] = 1;
                bexit[i] = Some(q);
                queue.push_back(i);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adj[u] {
                if bdist[v] == UNREACHABLE {
                    bdist[v] = bdist[u] + 1;
                    queue.push_back(v);
                }
            }
        }

        SpeciesContext { kind, n, enabled, adj, dist, bdist, bexit }
    }

    fn distance(&self, a: usize, b: usize) -> u16 {
        self.dist[a * self.n + b]
    }

    /// Flip the qubits of a canonical shortest path between two defects.
    fn apply_path(&self, from: usize, to: usize, frame: &mut PauliFrame) {
        let flip = |frame: &mut PauliFrame, q: usize| match self.kind {
            StabKind::Plaquette => frame.flip_x(q),
            StabKind::Vertex => frame.flip_z(q),
        };
        let mut cur = from;
        while cur != to {
            let need = self.distance(cur, to) - 1;
            let &(next, q) = self.adj[cur]
                .iter()
                .find(|&&(v, _)| self.distance(v, to) == need)
                .expect("a shortest path always has a descending neighbour");
            flip(frame, q);
            cur = next;
        }
    }

    /// Flip the qubits of a canonical shortest path to the boundary.
    fn apply_boundary_path(&self, from: usize, frame: &mut PauliFrame) {
        let flip = |frame: &mut PauliFrame, q: usize| match self.kind {
            StabKind::Plaquette => frame.flip_x(q),
            StabKind::Vertex => frame.flip_z(q),
        };
        let mut cur = from;
        while self.bdist[cur] > 1 {
            let need = self.bdist[cur] - 1;
            let &(next, q) = self.adj[cur]
                .iter()
                .find(|&&(v, _)| self.bdist[v] == need)
                .expect("boundary distance always descends");
            flip(frame, q);
            cur = next;
        }
        flip(frame, self.bexit[cur].expect("bdist 1 implies an exit qubit"));
    }

    fn check_defects(&self, fired: &[usize]) -> Result<Vec<usize>, DecodeError> {
        let mut fired = fired.to_vec();
        fired.sort_unstable();
        fired.dedup();
        for &s in &fired {
            if s >= self.n || !self.enabled[s] {
                return Err(DecodeError::BadSyndrome { kind: self.kind, index: s });
            }
        }
        Ok(fired)
    }

    /// Build the matching graph for defects at `(stabilizer, round)` pairs.
    fn build_graph(&self, defects: &[(usize, usize)]) -> MatchingGraph {
        let d = defects.len();
        let mut nodes = Vec::with_capacity(2 * d);
        for &(stabilizer, round) in defects {
            nodes.push(MatchNode::Defect { stabilizer, round });
        }
        for i in 0..d {
            nodes.push(MatchNode::Boundary { twin_of: i });
        }
        let mut edges = Vec::new();
        for i in 0..d {
            let (si, ri) = defects[i];
            for (j, &(sj, rj)) in defects.iter().enumerate().skip(i + 1) {
                let spatial = self.distance(si, sj);
                if spatial == UNREACHABLE {
                    continue;
                }
                let w = u32::from(spatial) + ri.abs_diff(rj) as u32;
                let via_boundary = u32::from(self.bdist[si]) + u32::from(self.bdist[sj]);
                if self.bdist[si] != UNREACHABLE && self.bdist[sj] != UNREACHABLE && w >= via_boundary {
                    // Any matching through this edge reroutes through the
                    // boundary at no extra cost.
                    continue;
                }
                edges.push((i, j, w));
            }
            if self.bdist[si] != UNREACHABLE {
                edges.push((i, d + i, u32::from(self.bdist[si])));
            }
        }
        for i in 0..d {
            for j in i + 1..d {
                edges.push((d + i, d + j, 0));
            }
        }
        MatchingGraph { kind: self.kind, nodes, edges }
    }

    /// Decode one species: match, then realize paths.
    fn decode(
        &self,
        defects: &[(usize, usize)],
        frame: &mut PauliFrame,
        pairing: &mut Vec<MatchedPair>,
    ) -> Result<u64, DecodeError> {
        let graph = self.build_graph(defects);
        let (pairs, total) = mwpm(graph.nodes.len(), &graph.edges)?;
        let d = defects.len();
        for &(a, b) in &pairs {
            match (graph.nodes[a], graph.nodes[b]) {
                (MatchNode::Defect { .. }, MatchNode::Defect { .. }) => {
                    self.apply_path(defects[a].0, defects[b].0, frame);
                }
                (MatchNode::Defect { .. }, MatchNode::Boundary { .. }) => {
                    self.apply_boundary_path(defects[a].0, frame);
                }
                (MatchNode::Boundary { .. }, MatchNode::Boundary { .. }) => continue,
                (MatchNode::Boundary { .. }, MatchNode::Defect { .. }) => {
                    unreachable!("pairs are ordered, defects precede twins")
                }
            }
            let weight = match (a < d, b < d) {
                (true, true) => {
                    u32::from(self.distance(defects[a].0, defects[b].0))
                        + defects[a].1.abs_diff(defects[b].1) as u32
                }
                (true, false) => u32::from(self.bdist[defects[a].0]),
                _ => 0,
            };
            pairing.push(MatchedPair {
                kind: self.kind,
                a: graph.nodes[a],
                b: graph.nodes[b],
                weight,
            });
        }
        Ok(total)
    }
}

/// Reusable decoder for one layout. Construction precomputes all-pairs
/// defect distances; decoding itself is stateless and safe to run from
/// many threads at once.
pub struct Decoder {
    n_qubits: usize,
    m_ctx: SpeciesContext,
    e_ctx: SpeciesContext,
}

impl Decoder {
    pub fn new(layout: &CodeLayout) -> Decoder {
        Decoder {
            n_qubits: layout.n_qubits(),
            m_ctx: SpeciesContext::new(layout, StabKind::Plaquette),
            e_ctx: SpeciesContext::new(layout, StabKind::Vertex),
        }
    }

    fn ctx(&self, kind: StabKind) -> &SpeciesContext {
        match kind {
            StabKind::Plaquette => &self.m_ctx,
            StabKind::Vertex => &self.e_ctx,
        }
    }

    /// Defect list of one species as `(stabilizer, round)` pairs, with
    /// detection-event extraction for round histories.
    fn events(&self, kind: StabKind, syndrome: &Syndrome) -> Result<Vec<(usize, usize)>, DecodeError> {
        let ctx = self.ctx(kind);
        match &syndrome.rounds {
            None => Ok(ctx
                .check_defects(syndrome.defects(kind))?
                .into_iter()
                .map(|s| (s, 0))
                .collect()),
            Some(rounds) => {
                match rounds.last() {
                    Some(last)
                        if last.m_defects != syndrome.m_defects
                            || last.e_defects != syndrome.e_defects =>
                    {
                        return Err(DecodeError::InconsistentRounds)
                    }
                    None if !syndrome.is_trivial() => {
                        return Err(DecodeError::InconsistentRounds)
                    }
                    _ => {}
                }
                let mut events = Vec::new();
                let mut previous: Vec<usize> = Vec::new();
                for (round, r) in rounds.iter().enumerate() {
                    let fired = ctx.check_defects(match kind {
                        StabKind::Plaquette => &r.m_defects,
                        StabKind::Vertex => &r.e_defects,
                    })?;
                    for &s in fired.iter().filter(|s| !previous.contains(s)) {
                        events.push((s, round));
                    }
                    for &s in previous.iter().filter(|s| !fired.contains(s)) {
                        events.push((s, round));
                    }
                    previous = fired;
                }
                events.sort_unstable_by_key(|&(s, r)| (r, s));
                Ok(events)
            }
        }
    }

    /// Matching graphs for both species.
    pub fn build_graphs(
        &self,
        syndrome: &Syndrome,
    ) -> Result<(MatchingGraph, MatchingGraph), DecodeError> {
        let graph_m = self
            .m_ctx
            .build_graph(&self.events(StabKind::Plaquette, syndrome)?);
        let graph_e = self
            .e_ctx
            .build_graph(&self.events(StabKind::Vertex, syndrome)?);
        Ok((graph_m, graph_e))
    }

    /// Decode both species of a syndrome into one correction.
    pub fn decode(&self, syndrome: &Syndrome) -> Result<Correction, DecodeError> {
        let mut frame = PauliFrame::new(self.n_qubits);
        let mut pairing = Vec::new();
        let mut total = 0;
        for kind in [StabKind::Plaquette, StabKind::Vertex] {
            let events = self.events(kind, syndrome)?;
            total += self.ctx(kind).decode(&events, &mut frame, &mut pairing)?;
        }
        Ok(Correction { frame, pairing, total_weight: total })
    }

    /// Decode a single species from a plain defect list (round-free).
    pub fn decode_species(
        &self,
        kind: StabKind,
        fired: &[usize],
    ) -> Result<Correction, DecodeError> {
        let ctx = self.ctx(kind);
        let defects: Vec<(usize, usize)> = ctx
            .check_defects(fired)?
            .into_iter()
            .map(|s| (s, 0))
            .collect();
        let mut frame = PauliFrame::new(self.n_qubits);
        let mut pairing = Vec::new();
        let total = ctx.decode(&defects, &mut frame, &mut pairing)?;
        Ok(Correction { frame, pairing, total_weight: total })
    }
}

fn check_model_consistency(syndrome: &Syndrome, model: &NoiseModel) -> Result<(), DecodeError> {
    let expected = model.rounds();
    let found = syndrome.rounds.as_ref().map_or(1, Vec::len);
    let wants_history = matches!(model, NoiseModel::Phenomenological { .. });
    if wants_history == syndrome.rounds.is_some() && found == expected {
        Ok(())
    } else {
        Err(DecodeError::RoundMismatch { found, expected })
    }
}

/// Matching graphs for a syndrome under a given noise model (unit weights;
/// the model is used to validate round structure).
pub fn build_graph(
    syndrome: &Syndrome,
    layout: &CodeLayout,
    model: &NoiseModel,
) -> Result<(MatchingGraph, MatchingGraph), DecodeError> {
    check_model_consistency(syndrome, model)?;
    Decoder::new(layout).build_graphs(syndrome)
}

/// One-shot decode. For repeated decoding of the same layout, construct a
/// [`Decoder`] once instead.
pub fn decode(
    syndrome: &Syndrome,
    layout: &CodeLayout,
    model: &NoiseModel,
) -> Result<Correction, DecodeError> {
    check_model_consistency(syndrome, model)?;
    Decoder::new(layout).decode(syndrome)
}

/// Exact maximum-likelihood decoder by full coset enumeration; tractable
/// only for the smallest codes (distance up to 3).
pub struct ExactMlDecoder {
    kind: StabKind,
    decoder: Decoder,
    /// Every member of the relevant stabilizer span, as frames.
    span: Vec<PauliFrame>,
    /// Representative of the nontrivial logical class.
    logical: PauliFrame,
    n_qubits: usize,
}

impl ExactMlDecoder {
    pub fn new(layout: &CodeLayout, kind: StabKind) -> Result<ExactMlDecoder, DecodeError> {
        if layout.distance() > 3 {
            return Err(DecodeError::MlDistanceTooLarge(layout.distance()));
        }
        let n = layout.n_qubits();
        // For m defects (sigma-x errors) the degeneracy group is generated
        // by vertex supports acting as X flips; dually for e defects.
        let (generators, logical): (Vec<PauliFrame>, PauliFrame) = match kind {
            StabKind::Plaquette => (
                layout
                    .vertices()
                    .iter()
                    .map(|s| PauliFrame::from_x_support(n, &s.support))
                    .collect(),
                PauliFrame::from_x_support(n, layout.logical_x()),
            ),
            StabKind::Vertex => (
                layout
                    .plaquettes()
                    .iter()
                    .map(|s| PauliFrame::from_z_support(n, &s.support))
                    .collect(),
                PauliFrame::from_z_support(n, layout.logical_z()),
            ),
        };
        let mut span = vec![PauliFrame::new(n)];
        for g in &generators {
            let mut shifted: Vec<PauliFrame> = span.iter().map(|f| f.xor(g)).collect();
            span.append(&mut shifted);
        }
        // Generators are independent for the planar code, so the span has
        // exactly 2^g distinct members.
        debug_assert_eq!(span.len(), 1 << generators.len());
        Ok(ExactMlDecoder {
            kind,
            decoder: Decoder::new(layout),
            span,
            logical,
            n_qubits: n,
        })
    }

    /// Total probability of each logical class given the syndrome:
    /// `[identity-class mass, logical-class mass]`, under iid per-qubit
    /// error probability `p`.
    pub fn class_masses(&self, fired: &[usize], p: f64) -> Result<[f64; 2], DecodeError> {
        let particular = self.decoder.decode_species(self.kind, fired)?.frame;
        let weight_of = |f: &PauliFrame| match self.kind {
            StabKind::Plaquette => f.x_weight(),
            StabKind::Vertex => f.z_weight(),
        };
        let n = self.n_qubits as i32;
        let mass = |base: &PauliFrame| -> f64 {
            self.span
                .iter()
                .map(|s| {
                    let w = weight_of(&base.xor(s)) as i32;
                    p.powi(w) * (1.0 - p).powi(n - w)
                })
                .sum()
        };
        let shifted = particular.xor(&self.logical);
        Ok([mass(&particular), mass(&shifted)])
    }

    /// Decode to the most probable logical class, returning its minimum
    /// weight member.
    pub fn decode(&self, fired: &[usize], p: f64) -> Result<Correction, DecodeError> {
        let particular = self.decoder.decode_species(self.kind, fired)?.frame;
        let masses = self.class_masses(fired, p)?;
        let base = if masses[1] > masses[0] {
            particular.xor(&self.logical)
        } else {
            particular
        };
        let weight_of = |f: &PauliFrame| match self.kind {
            StabKind::Plaquette => f.x_weight(),
            StabKind::Vertex => f.z_weight(),
        };
        let frame = self
            .span
            .iter()
            .map(|s| base.xor(s))
            .min_by_key(weight_of)
            .expect("span is never empty");
        let total_weight = weight_of(&frame) as u64;
        Ok(Correction { frame, pairing: Vec::new(), total_weight })
    }
}

/// Convenience: sample-to-failure check used by the Monte Carlo harness.
/// Decodes the measured syndrome of `sample` and reports whether the
/// residual (error composed with correction) flips either logical
/// observable.
pub fn trial_fails(
    decoder: &Decoder,
    masks: &SyndromeMasks,
    layout: &CodeLayout,
    sample: &crate::noise::NoiseSample,
) -> Result<(bool, bool), DecodeError> {
    let syndrome = sample.measured_syndrome(masks);
    let correction = decoder.decode(&syndrome)?;
    let residual = sample.frame.xor(&correction.frame);
    debug_assert!(masks.syndrome(&residual).is_trivial());
    Ok(crate::frame::logical_effect(layout, &residual))
}

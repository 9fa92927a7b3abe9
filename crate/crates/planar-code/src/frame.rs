//! Pauli frames and syndrome extraction.
//!
//! A [`PauliFrame`] records, for every qubit, whether an X and/or a Z flip
//! is pending. Frames form a group under XOR (phases are irrelevant for
//! error tracking), and are stored bit-packed, one bit per qubit per
//! component.
//!
//! Syndromes are computed against a [`crate::geometry::CodeLayout`]:
//! plaquettes (z-type) are violated by an odd number of X flips on their
//! surviving support, vertices (x-type) by an odd number of Z flips.
//! Disabled stabilizers never fire.

use crate::geometry::{CodeLayout, StabKind};
use serde::{Deserialize, Serialize};
use std::fmt;

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Bit-packed X/Z flip record over `n` qubits.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliFrame {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        PauliFrame {
            n,
            x: vec![0; words_for(n)],
            z: vec![0; words_for(n)],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    pub fn x_bit(&self, q: usize) -> bool {
        debug_assert!(q < self.n);
        self.x[q / WORD] >> (q % WORD) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        debug_assert!(q < self.n);
        self.z[q / WORD] >> (q % WORD) & 1 == 1
    }

    pub fn flip_x(&mut self, q: usize) {
        debug_assert!(q < self.n);
        self.x[q / WORD] ^= 1 << (q % WORD);
    }

    pub fn flip_z(&mut self, q: usize) {
        debug_assert!(q < self.n);
        self.z[q / WORD] ^= 1 << (q % WORD);
    }

    pub fn flip_y(&mut self, q: usize) {
        self.flip_x(q);
        self.flip_z(q);
    }

    pub fn set_x(&mut self, q: usize, value: bool) {
        if self.x_bit(q) != value {
            self.flip_x(q);
        }
    }

    pub fn set_z(&mut self, q: usize, value: bool) {
        if self.z_bit(q) != value {
            self.flip_z(q);
        }
    }

    /// Compose with another frame (group operation, phase-free).
    pub fn xor_with(&mut self, other: &PauliFrame) {
        assert_eq!(self.n, other.n, "frame sizes differ");
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a ^= b;
        }
        for (a, b) in self.z.iter_mut().zip(&other.z) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &PauliFrame) -> PauliFrame {
        let mut out = self.clone();
        out.xor_with(other);
        out
    }

    pub fn x_weight(&self) -> usize {
        self.x.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn z_weight(&self) -> usize {
        self.z.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of qubits acted on non-trivially (X, Y or Z).
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn x_support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x_bit(q)).collect()
    }

    pub fn z_support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.z_bit(q)).collect()
    }

    pub fn from_x_support(n: usize, support: &[usize]) -> PauliFrame {
        let mut f = PauliFrame::new(n);
        for &q in support {
            f.flip_x(q);
        }
        f
    }

    pub fn from_z_support(n: usize, support: &[usize]) -> PauliFrame {
        let mut f = PauliFrame::new(n);
        for &q in support {
            f.flip_z(q);
        }
        f
    }

    /// Parity of overlap between this frame's X part and a qubit set.
    pub fn x_overlap_parity(&self, qubits: &[usize]) -> bool {
        qubits.iter().fold(false, |acc, &q| acc ^ self.x_bit(q))
    }

    pub fn z_overlap_parity(&self, qubits: &[usize]) -> bool {
        qubits.iter().fold(false, |acc, &q| acc ^ self.z_bit(q))
    }

    /// Whether two Pauli strings commute (symplectic product is even).
    pub fn commutes_with(&self, other: &PauliFrame) -> bool {
        assert_eq!(self.n, other.n, "frame lengths must match");
        let mut acc = 0u64;
        for k in 0..self.x.len() {
            acc ^= (self.x[k] & other.z[k]) ^ (self.z[k] & other.x[k]);
        }
        acc.count_ones() % 2 == 0
    }

    pub(crate) fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub(crate) fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// Compact hex encoding, X words then Z words, for logs and snapshots.
    pub fn to_hex(&self) -> String {
        use fmt::Write;
        let mut s = String::new();
        for w in self.x.iter().chain(&self.z) {
            write!(s, "{w:016x}").unwrap();
        }
        s
    }

    pub fn from_hex(n: usize, hex: &str) -> Option<PauliFrame> {
        let words = words_for(n);
        if hex.len() != 2 * words * 16 {
            return None;
        }
        let mut all = Vec::with_capacity(2 * words);
        for i in 0..2 * words {
            all.push(u64::from_str_radix(&hex[i * 16..(i + 1) * 16], 16).ok()?);
        }
        let frame = PauliFrame {
            n,
            x: all[..words].to_vec(),
            z: all[words..].to_vec(),
        };
        // Reject set bits beyond the qubit count.
        if n % WORD != 0 {
            let mask = !((1u64 << (n % WORD)) - 1);
            if frame.x[words - 1] & mask != 0 || frame.z[words - 1] & mask != 0 {
                return None;
            }
        }
        Some(frame)
    }
}

impl fmt::Debug for PauliFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliFrame(n={}", self.n)?;
        let mut any = false;
        for q in 0..self.n {
            let label = match (self.x_bit(q), self.z_bit(q)) {
                (false, false) => continue,
                (true, false) => "X",
                (false, true) => "Z",
                (true, true) => "Y",
            };
            write!(f, ", {label}{q}")?;
            any = true;
        }
        if !any {
            write!(f, ", identity")?;
        }
        write!(f, ")")
    }
}

/// Violated-stabilizer pattern of a state or error history.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Syndrome {
    /// Violated plaquettes (m defects), sorted.
    pub m_defects: Vec<usize>,
    /// Violated vertices (e defects), sorted.
    pub e_defects: Vec<usize>,
    /// Per-round measured defect sets for repeated noisy readout; when
    /// present, the top-level defect lists equal the final (perfectly
    /// read) round.
    pub rounds: Option<Vec<RoundSyndrome>>,
}

/// One round of measured (possibly unreliable) syndrome bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RoundSyndrome {
    pub m_defects: Vec<usize>,
    pub e_defects: Vec<usize>,
}

impl Syndrome {
    pub fn is_trivial(&self) -> bool {
        self.m_defects.is_empty() && self.e_defects.is_empty()
    }

    pub fn defects(&self, kind: StabKind) -> &[usize] {
        match kind {
            StabKind::Plaquette => &self.m_defects,
            StabKind::Vertex => &self.e_defects,
        }
    }
}

/// Precomputed per-stabilizer support masks for fast syndrome extraction.
pub struct SyndromeMasks {
    n_words: usize,
    /// One mask per plaquette over surviving support (empty if disabled).
    plaquette: Vec<Vec<u64>>,
    vertex: Vec<Vec<u64>>,
    plaquette_enabled: Vec<bool>,
    vertex_enabled: Vec<bool>,
}

impl SyndromeMasks {
    pub fn new(layout: &CodeLayout) -> Self {
        let n_words = words_for(layout.n_qubits());
        let build = |kind: StabKind| -> (Vec<Vec<u64>>, Vec<bool>) {
            let mut masks = Vec::new();
            let mut enabled = Vec::new();
            for s in layout.stabilizers(kind) {
                let mut mask = vec![0u64; n_words];
                if s.enabled {
                    for &q in &s.support {
                        if !layout.is_removed(q) {
                            mask[q / WORD] |= 1 << (q % WORD);
                        }
                    }
                }
                masks.push(mask);
                enabled.push(s.enabled);
            }
            (masks, enabled)
        };
        let (plaquette, plaquette_enabled) = build(StabKind::Plaquette);
        let (vertex, vertex_enabled) = build(StabKind::Vertex);
        SyndromeMasks {
            n_words,
            plaquette,
            vertex,
            plaquette_enabled,
            vertex_enabled,
        }
    }

    fn parity(mask: &[u64], bits: &[u64]) -> bool {
        mask.iter()
            .zip(bits)
            .fold(0u64, |acc, (m, b)| acc ^ (m & b))
            .count_ones()
            % 2
            == 1
    }

    /// Violated stabilizers of one species for the given frame, sorted.
    pub fn fired(&self, kind: StabKind, frame: &PauliFrame) -> Vec<usize> {
        let (masks, enabled, bits) = match kind {
            // Plaquettes are sigma-z products: they see X flips.
            StabKind::Plaquette => (&self.plaquette, &self.plaquette_enabled, &frame.x),
            StabKind::Vertex => (&self.vertex, &self.vertex_enabled, &frame.z),
        };
        assert_eq!(bits.len(), self.n_words, "frame does not match layout");
        masks
            .iter()
            .enumerate()
            .filter(|(i, m)| enabled[*i] && Self::parity(m, bits))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_enabled(&self, kind: StabKind, index: usize) -> bool {
        match kind {
            StabKind::Plaquette => self.plaquette_enabled.get(index).copied().unwrap_or(false),
            StabKind::Vertex => self.vertex_enabled.get(index).copied().unwrap_or(false),
        }
    }

    /// Both-species syndrome of a frame.
    pub fn syndrome(&self, frame: &PauliFrame) -> Syndrome {
        Syndrome {
            m_defects: self.fired(StabKind::Plaquette, frame),
            e_defects: self.fired(StabKind::Vertex, frame),
            rounds: None,
        }
    }
}

/// Both-species syndrome of a frame, straight from the layout.
pub fn syndrome_of(layout: &CodeLayout, frame: &PauliFrame) -> Syndrome {
    SyndromeMasks::new(layout).syndrome(frame)
}

/// Net effect of a frame on the undeformed logical operators:
/// `(flips_logical_z_outcome, flips_logical_x_outcome)`.
///
/// X flips anticommuting with the logical-z string flip a logical-z
/// measurement; Z flips anticommuting with the logical-x string flip a
/// logical-x measurement.
pub fn logical_effect(layout: &CodeLayout, frame: &PauliFrame) -> (bool, bool) {
    (
        frame.x_overlap_parity(layout.logical_z()),
        frame.z_overlap_parity(layout.logical_x()),
    )
}

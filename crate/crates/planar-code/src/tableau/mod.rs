//! Stabilizer-tableau Clifford simulation in the style of Aaronson & Gottesman
//! (arXiv:quant-ph/0406196).
//!
//! The tableau tracks `2n` generators for an `n`-qubit stabilizer state: rows
//! `0..n` are destabilizers, rows `n..2n` are stabilizers.  Each row is a
//! signed Pauli string stored as bit-packed x/z words, so gate conjugation is
//! a handful of word operations per row.  On top of the raw engine this module
//! provides planar-code state preparation, ancilla-driven syndrome extraction,
//! hole deformation with explicit spare-anyon bookkeeping, the interference
//! (braiding-phase) experiment, the hole-braiding CNOT demonstration, and a
//! nine-qubit Shor-code walkthrough.

mod planar;
mod shor;

#[cfg(test)]
mod tests;

pub use planar::{
    braid_cnot_demo, braiding_phase_test, prepare_vacuum, BraidCnotResult, BraidEvent, BraidPhase,
    ControlPrep, HoleOpReport, LogicalPair, LogicalReading, LogicalRegister, PlanarState,
    TargetPrep,
};
pub use shor::{
    shor_code_demo, shor_encode_ops, shor_error_set, shor_logical_x, shor_logical_z,
    shor_stabilizers, ShorOutcome, ShorPrep, SinglePauli,
};

use crate::frame::PauliFrame;
use crate::geometry::GeometryError;
use rand::Rng;
use thiserror::Error;

/// Errors from tableau-level planar-code operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableauError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    /// The interference loop would intersect the lattice boundary; the
    /// monodromy phase is only defined for a loop in the bulk.
    #[error("distance {0} is too small to host an interference loop in the bulk")]
    LoopTouchesBoundary(usize),
    /// The braiding demonstration needs enough room for both holes plus a
    /// clearance ring; smaller lattices would make the representatives overlap.
    #[error("distance {0} is too small to keep the braided holes apart")]
    HolesTooClose(usize),
    /// A deformation produced an odd number of spare anyons, which cannot be
    /// paired up locally.  This only happens if the state was not a code state
    /// (all enabled stabilizers +1) to begin with.
    #[error("hole deformation produced {0} spare anyons; expected an even count")]
    OddSpareAnyons(usize),
    /// A logical representative fails its algebra: it must commute with every
    /// enabled stabilizer, and the X/Z pair must anticommute.
    #[error("logical representative `{0}` has the wrong commutation algebra")]
    BadRepresentative(String),
}

/// Single-qubit Clifford-circuit operations, used to replay the same circuit
/// on different simulators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CliffordOp {
    H(usize),
    S(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
}

/// Bit-packed stabilizer tableau for an `n`-qubit pure stabilizer state.
#[derive(Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    words: usize,
    /// Row-major x bits, `2n` rows of `words` words each.
    x: Vec<u64>,
    /// Row-major z bits, same layout.
    z: Vec<u64>,
    /// Sign bit per row; `true` means the row carries a leading minus.
    sign: Vec<bool>,
}

/// Phase table for multiplying two Pauli strings, vectorised over one word.
/// Operand order matches row multiplication `target *= source`: `(a, b)` are
/// the source x/z bits, `(c, d)` the target's.  Returns the net power of `i`
/// contributed by this word (each lane is 0 or ±1).
fn word_phase(a: u64, b: u64, c: u64, d: u64) -> i64 {
    let plus = (a & !b & c & d) | (a & b & d & !c) | (!a & b & c & !d);
    let minus = (a & !b & !c & d) | (a & b & c & !d) | (!a & b & c & d);
    i64::from(plus.count_ones()) - i64::from(minus.count_ones())
}

impl Tableau {
    /// Tableau for the all-zeros computational basis state |0...0>.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "tableau needs at least one qubit");
        let words = n.div_ceil(64);
        let mut t = Tableau {
            n,
            words,
            x: vec![0; 2 * n * words],
            z: vec![0; 2 * n * words],
            sign: vec![false; 2 * n],
        };
        for q in 0..n {
            // Destabilizer q is X_q, stabilizer q is Z_q.
            t.x[q * words + q / 64] |= 1 << (q % 64);
            t.z[(n + q) * words + q / 64] |= 1 << (q % 64);
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Hadamard on qubit `q`.
    pub fn h(&mut self, q: usize) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for r in 0..2 * self.n {
            let i = r * self.words + w;
            let xv = self.x[i] & m;
            let zv = self.z[i] & m;
            if xv != 0 && zv != 0 {
                self.sign[r] = !self.sign[r];
            }
            let t = xv ^ zv;
            self.x[i] ^= t;
            self.z[i] ^= t;
        }
    }

    /// Phase gate S on qubit `q`.
    pub fn s(&mut self, q: usize) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for r in 0..2 * self.n {
            let i = r * self.words + w;
            let xv = self.x[i] & m;
            if xv != 0 && self.z[i] & m != 0 {
                self.sign[r] = !self.sign[r];
            }
            self.z[i] ^= xv;
        }
    }

    /// Pauli X on qubit `q`.
    pub fn x(&mut self, q: usize) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for r in 0..2 * self.n {
            if self.z[r * self.words + w] & m != 0 {
                self.sign[r] = !self.sign[r];
            }
        }
    }

    /// Pauli Z on qubit `q`.
    pub fn z(&mut self, q: usize) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for r in 0..2 * self.n {
            if self.x[r * self.words + w] & m != 0 {
                self.sign[r] = !self.sign[r];
            }
        }
    }

    /// Pauli Y on qubit `q`.
    pub fn y(&mut self, q: usize) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for r in 0..2 * self.n {
            let i = r * self.words + w;
            if (self.x[i] & m != 0) != (self.z[i] & m != 0) {
                self.sign[r] = !self.sign[r];
            }
        }
    }

    /// Controlled-NOT with control `c` and target `t`.
    pub fn cnot(&mut self, c: usize, t: usize) {
        assert_ne!(c, t, "cnot needs distinct qubits");
        let (wc, mc) = (c / 64, 1u64 << (c % 64));
        let (wt, mt) = (t / 64, 1u64 << (t % 64));
        for r in 0..2 * self.n {
            let ic = r * self.words + wc;
            let it = r * self.words + wt;
            let xc = self.x[ic] & mc != 0;
            let zc = self.z[ic] & mc != 0;
            let xt = self.x[it] & mt != 0;
            let zt = self.z[it] & mt != 0;
            if xc && zt && xt == zc {
                self.sign[r] = !self.sign[r];
            }
            if xc {
                self.x[it] ^= mt;
            }
            if zt {
                self.z[ic] ^= mc;
            }
        }
    }

    /// Controlled-Z on qubits `c` and `t` (symmetric).
    pub fn cz(&mut self, c: usize, t: usize) {
        self.h(t);
        self.cnot(c, t);
        self.h(t);
    }

    pub fn apply(&mut self, op: CliffordOp) {
        match op {
            CliffordOp::H(q) => self.h(q),
            CliffordOp::S(q) => self.s(q),
            CliffordOp::X(q) => self.x(q),
            CliffordOp::Y(q) => self.y(q),
            CliffordOp::Z(q) => self.z(q),
            CliffordOp::Cnot(c, t) => self.cnot(c, t),
            CliffordOp::Cz(c, t) => self.cz(c, t),
        }
    }

    /// Symplectic product parity between row `r` and the Pauli `(px, pz)`;
    /// `true` means they anticommute.
    fn anticommutes(&self, r: usize, px: &[u64], pz: &[u64]) -> bool {
        let base = r * self.words;
        let mut acc = 0u64;
        for k in 0..self.words {
            acc ^= (self.x[base + k] & pz[k]) ^ (self.z[base + k] & px[k]);
        }
        acc.count_ones() % 2 == 1
    }

    /// Left-multiplies row `h` by row `i` (`row_h := row_i * row_h`), keeping
    /// the sign bit consistent.  Rows here are Hermitian Pauli strings, so the
    /// accumulated phase is always a power of -1 when the rows commute; for
    /// destabilizer updates the ignored low bit is harmless because only
    /// stabilizer signs are ever observable.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut acc = 2 * (i64::from(self.sign[h]) + i64::from(self.sign[i]));
        for k in 0..w {
            let a = self.x[i * w + k];
            let b = self.z[i * w + k];
            let c = self.x[h * w + k];
            let d = self.z[h * w + k];
            acc += word_phase(a, b, c, d);
            self.x[h * w + k] = c ^ a;
            self.z[h * w + k] = d ^ b;
        }
        self.sign[h] = acc.rem_euclid(4) >= 2;
    }

    /// Measures the Hermitian Pauli described by `pauli` (x bit = X factor,
    /// z bit = Z factor, both = Y).  Returns the outcome sign and whether it
    /// was deterministic; a random outcome consumes one bit from `rng` and
    /// collapses the state.
    pub fn measure_pauli(&mut self, pauli: &PauliFrame, rng: &mut impl Rng) -> (i8, bool) {
        assert_eq!(pauli.len(), self.n, "pauli length must match qubit count");
        let px = pauli.x_words();
        let pz = pauli.z_words();
        let pivot = (self.n..2 * self.n).find(|&r| self.anticommutes(r, px, pz));
        match pivot {
            Some(p) => {
                let others: Vec<usize> = (0..2 * self.n)
                    .filter(|&r| r != p && self.anticommutes(r, px, pz))
                    .collect();
                for r in others {
                    self.rowsum(r, p);
                }
                let w = self.words;
                for k in 0..w {
                    self.x[(p - self.n) * w + k] = self.x[p * w + k];
                    self.z[(p - self.n) * w + k] = self.z[p * w + k];
                    self.x[p * w + k] = px[k];
                    self.z[p * w + k] = pz[k];
                }
                self.sign[p - self.n] = self.sign[p];
                let flip = rng.gen::<bool>();
                self.sign[p] = flip;
                (if flip { -1 } else { 1 }, false)
            }
            None => (self.stabilizer_expectation(px, pz), true),
        }
    }

    /// Expectation sign of a Pauli that commutes with every stabilizer: the
    /// product of the stabilizer rows whose destabilizer partners anticommute
    /// with it reconstructs the Pauli, and its accumulated sign is the
    /// deterministic outcome.
    fn stabilizer_expectation(&self, px: &[u64], pz: &[u64]) -> i8 {
        let w = self.words;
        let mut sx = vec![0u64; w];
        let mut sz = vec![0u64; w];
        let mut acc: i64 = 0;
        for i in 0..self.n {
            if !self.anticommutes(i, px, pz) {
                continue;
            }
            let r = self.n + i;
            acc += 2 * i64::from(self.sign[r]);
            for k in 0..w {
                acc += word_phase(self.x[r * w + k], self.z[r * w + k], sx[k], sz[k]);
                sx[k] ^= self.x[r * w + k];
                sz[k] ^= self.z[r * w + k];
            }
        }
        debug_assert!(
            sx == px && sz == pz,
            "stabilizer span does not contain the measured pauli"
        );
        let phase = acc.rem_euclid(4);
        debug_assert_eq!(phase % 2, 0, "hermitian product must have a real sign");
        if phase >= 2 {
            -1
        } else {
            1
        }
    }

    /// Measures Z on a single qubit.
    pub fn measure_z(&mut self, q: usize, rng: &mut impl Rng) -> (i8, bool) {
        let p = PauliFrame::from_z_support(self.n, &[q]);
        self.measure_pauli(&p, rng)
    }

    /// Measures X on a single qubit.
    pub fn measure_x(&mut self, q: usize, rng: &mut impl Rng) -> (i8, bool) {
        let p = PauliFrame::from_x_support(self.n, &[q]);
        self.measure_pauli(&p, rng)
    }

    /// Returns `Some(sign)` when the Pauli's outcome is deterministic in the
    /// current state, without touching the state, and `None` when a
    /// measurement would be random.
    pub fn deterministic_outcome(&self, pauli: &PauliFrame) -> Option<i8> {
        assert_eq!(pauli.len(), self.n, "pauli length must match qubit count");
        let px = pauli.x_words();
        let pz = pauli.z_words();
        if (self.n..2 * self.n).any(|r| self.anticommutes(r, px, pz)) {
            return None;
        }
        Some(self.stabilizer_expectation(px, pz))
    }

    /// Stabilizer generator `i` as a Pauli frame plus its sign bit.
    pub fn stabilizer_generator(&self, i: usize) -> (PauliFrame, bool) {
        assert!(i < self.n);
        let mut frame = PauliFrame::new(self.n);
        let r = self.n + i;
        for q in 0..self.n {
            let (w, m) = (q / 64, 1u64 << (q % 64));
            if self.x[r * self.words + w] & m != 0 {
                frame.flip_x(q);
            }
            if self.z[r * self.words + w] & m != 0 {
                frame.flip_z(q);
            }
        }
        (frame, self.sign[r])
    }

    /// Debug check of the tableau group structure: stabilizers commute
    /// pairwise, destabilizers commute pairwise, and destabilizer `i`
    /// anticommutes with stabilizer `j` exactly when `i == j`.
    #[cfg(test)]
    pub(crate) fn assert_well_formed(&self) {
        let w = self.words;
        let row = |r: usize| (&self.x[r * w..(r + 1) * w], &self.z[r * w..(r + 1) * w]);
        for i in 0..self.n {
            for j in 0..self.n {
                let (sx, sz) = row(self.n + j);
                let stab_pair = self.anticommutes(self.n + i, sx, sz);
                assert!(!stab_pair, "stabilizers {i} and {j} anticommute");
                let destab_pair = {
                    let (dx, dz) = row(j);
                    self.anticommutes(i, dx, dz)
                };
                assert!(!destab_pair, "destabilizers {i} and {j} anticommute");
                let cross = self.anticommutes(i, sx, sz);
                assert_eq!(cross, i == j, "destabilizer {i} vs stabilizer {j}");
            }
        }
    }
}

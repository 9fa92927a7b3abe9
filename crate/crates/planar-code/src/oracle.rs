//! Dense statevector simulator used as an independent oracle for the
//! stabilizer tableau.  Deliberately small and slow: amplitudes are stored
//! in full, every operation walks the whole vector, and nothing is shared
//! with the tableau implementation beyond the gate names.

use num_complex::Complex64;

use crate::frame::PauliFrame;
use crate::tableau::CliffordOp;

/// Hard cap on the register size; 2^12 amplitudes keep every test cheap.
pub const MAX_QUBITS: usize = 12;

/// A pure state of up to [`MAX_QUBITS`] qubits, |0...0> initially.
/// Qubit `q` is bit `q` of the basis index.
#[derive(Clone, Debug)]
pub struct DenseState {
    n: usize,
    amp: Vec<Complex64>,
}

impl DenseState {
    pub fn new(n: usize) -> DenseState {
        assert!(n > 0 && n <= MAX_QUBITS, "oracle supports 1..={MAX_QUBITS} qubits");
        let mut amp = vec![Complex64::new(0.0, 0.0); 1 << n];
        amp[0] = Complex64::new(1.0, 0.0);
        DenseState { n, amp }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn for_pairs(&mut self, q: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let bit = 1usize << q;
        for i in 0..self.amp.len() {
            if i & bit == 0 {
                let (lo, hi) = self.amp.split_at_mut(i | bit);
                f(&mut lo[i], &mut hi[0]);
            }
        }
    }

    pub fn h(&mut self, q: usize) {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.for_pairs(q, |a, b| {
            let (x, y) = (*a, *b);
            *a = s * (x + y);
            *b = s * (x - y);
        });
    }

    pub fn s_gate(&mut self, q: usize) {
        let i = Complex64::new(0.0, 1.0);
        self.for_pairs(q, |_, b| *b *= i);
    }

    pub fn x(&mut self, q: usize) {
        self.for_pairs(q, |a, b| std::mem::swap(a, b));
    }

    pub fn y(&mut self, q: usize) {
        let i = Complex64::new(0.0, 1.0);
        self.for_pairs(q, |a, b| {
            let (x, y) = (*a, *b);
            *a = -i * y;
            *b = i * x;
        });
    }

    pub fn z(&mut self, q: usize) {
        self.for_pairs(q, |_, b| *b = -*b);
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        assert_ne!(c, t);
        let (cb, tb) = (1usize << c, 1usize << t);
        for i in 0..self.amp.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amp.swap(i, i | tb);
            }
        }
    }

    pub fn cz(&mut self, c: usize, t: usize) {
        assert_ne!(c, t);
        let (cb, tb) = (1usize << c, 1usize << t);
        for (i, a) in self.amp.iter_mut().enumerate() {
            if i & cb != 0 && i & tb != 0 {
                *a = -*a;
            }
        }
    }

    pub fn apply(&mut self, op: CliffordOp) {
        match op {
            CliffordOp::H(q) => self.h(q),
            CliffordOp::S(q) => self.s_gate(q),
            CliffordOp::X(q) => self.x(q),
            CliffordOp::Y(q) => self.y(q),
            CliffordOp::Z(q) => self.z(q),
            CliffordOp::Cnot(c, t) => self.cnot(c, t),
            CliffordOp::Cz(c, t) => self.cz(c, t),
        }
    }

    fn masks(&self, pauli: &PauliFrame) -> (usize, usize, u32) {
        assert_eq!(pauli.len(), self.n, "pauli length must match qubit count");
        let mut xm = 0usize;
        let mut zm = 0usize;
        let mut ys = 0u32;
        for q in 0..self.n {
            let (xb, zb) = (pauli.x_bit(q), pauli.z_bit(q));
            if xb {
                xm |= 1 << q;
            }
            if zb {
                zm |= 1 << q;
            }
            if xb && zb {
                ys += 1;
            }
        }
        (xm, zm, ys)
    }

    /// <psi| P |psi> for the Hermitian Pauli P described by `pauli`
    /// (x bit = X factor, z bit = Z factor, both = Y).
    pub fn expectation(&self, pauli: &PauliFrame) -> Complex64 {
        let (xm, zm, ys) = self.masks(pauli);
        // P|b> = i^{#Y} * (-1)^{|b & zm|} |b ^ xm>.
        let y_phase = Complex64::new(0.0, 1.0).powu(ys);
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in self.amp.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let sign = if (b & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            acc += self.amp[b ^ xm].conj() * y_phase * sign * a;
        }
        acc
    }

    /// Probability that measuring `pauli` yields `sign`.
    pub fn probability_of(&self, pauli: &PauliFrame, sign: i8) -> f64 {
        (1.0 + f64::from(sign) * self.expectation(pauli).re) / 2.0
    }

    /// Project onto the `sign` eigenspace of `pauli` and renormalise;
    /// returns the probability weight of that branch.
    pub fn project(&mut self, pauli: &PauliFrame, sign: i8) -> f64 {
        let (xm, zm, ys) = self.masks(pauli);
        let y_phase = Complex64::new(0.0, 1.0).powu(ys);
        let s = f64::from(sign);
        let before = self.amp.clone();
        for (b, out) in self.amp.iter_mut().enumerate() {
            let src = b ^ xm;
            // (-1)^{|src & zm|} is the phase P contributes when mapping
            // |src> onto |b>.
            let phase = if (src & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            *out = 0.5 * (before[b] + s * y_phase * phase * before[src]);
        }
        let weight: f64 = self.amp.iter().map(|a| a.norm_sqr()).sum();
        assert!(weight > 1e-12, "projected onto a zero-probability branch");
        let norm = weight.sqrt();
        for a in &mut self.amp {
            *a /= norm;
        }
        weight
    }

    /// Fidelity |<other|self>|^2, for direct state comparisons.
    pub fn overlap(&self, other: &DenseState) -> f64 {
        assert_eq!(self.n, other.n);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.amp.iter().zip(&other.amp) {
            acc += b.conj() * a;
        }
        acc.norm_sqr()
    }
}

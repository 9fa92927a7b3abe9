//! Nine-qubit Shor-code demonstration: encode, inject one single-qubit
//! Pauli error, locate it from the eight stabilizer readings, undo it, and
//! confirm the logical content survived.
//!
//! The convention here puts the repetition structure in the X basis: each
//! block of three spins is stabilized by XX pairs, the two six-spin Z
//! products compare neighbouring blocks, logical Z is a Z-triple on the
//! first block and logical X is one X per block.

use rand::Rng;
use serde::Serialize;

use super::{CliffordOp, Tableau};
use crate::frame::PauliFrame;

/// One single-qubit Pauli error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SinglePauli {
    X,
    Y,
    Z,
}

/// Logical preparations exercised by the demonstration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShorPrep {
    Zero,
    One,
    Plus,
}

/// Everything one error/preparation run produced.
#[derive(Clone, Debug, Serialize)]
pub struct ShorOutcome {
    pub prep: ShorPrep,
    pub error_qubit: usize,
    pub error: SinglePauli,
    /// Eight syndrome bits, `true` for a -1 reading: the six XX pairs in
    /// block order, then the two six-spin Z products.
    pub syndrome: Vec<bool>,
    /// Correction actually applied, as (qubit, Pauli) gates.
    pub correction: Vec<(usize, SinglePauli)>,
    pub stabilizers_restored: bool,
    pub logical_sign: i8,
    pub logical_deterministic: bool,
    /// Whether the run ended with every stabilizer at +1 and the prepared
    /// logical eigenvalue intact and deterministic.
    pub recovered: bool,
}

/// The eight stabilizer generators as Pauli frames over nine qubits.
pub fn shor_stabilizers() -> Vec<PauliFrame> {
    let mut out = Vec::with_capacity(8);
    for block in 0..3 {
        let f = 3 * block;
        out.push(PauliFrame::from_x_support(9, &[f, f + 1]));
        out.push(PauliFrame::from_x_support(9, &[f + 1, f + 2]));
    }
    out.push(PauliFrame::from_z_support(9, &[0, 1, 2, 3, 4, 5]));
    out.push(PauliFrame::from_z_support(9, &[3, 4, 5, 6, 7, 8]));
    out
}

pub fn shor_logical_z() -> PauliFrame {
    PauliFrame::from_z_support(9, &[0, 1, 2])
}

pub fn shor_logical_x() -> PauliFrame {
    PauliFrame::from_x_support(9, &[0, 3, 6])
}

/// Circuit taking |000000000> to the logical zero state: a GHZ triple per
/// block, then a basis rotation on every spin.
pub fn shor_encode_ops() -> Vec<CliffordOp> {
    let mut ops = Vec::new();
    for block in 0..3 {
        let f = 3 * block;
        ops.push(CliffordOp::H(f));
        ops.push(CliffordOp::Cnot(f, f + 1));
        ops.push(CliffordOp::Cnot(f, f + 2));
    }
    for q in 0..9 {
        ops.push(CliffordOp::H(q));
    }
    ops
}

/// All 27 single-qubit errors, in (qubit, Pauli) order.
pub fn shor_error_set() -> Vec<(usize, SinglePauli)> {
    let mut out = Vec::with_capacity(27);
    for q in 0..9 {
        for p in [SinglePauli::X, SinglePauli::Y, SinglePauli::Z] {
            out.push((q, p));
        }
    }
    out
}

/// Decode the eight syndrome bits into correction gates.  A Z component is
/// pinned to its exact qubit by the XX pairs of its block; an X component is
/// only located to a block by the two Z products, and any qubit of that
/// block works because in-block X pairs are stabilizers.
fn lookup_correction(syndrome: &[bool]) -> Vec<(usize, SinglePauli)> {
    let mut out = Vec::new();
    for block in 0..3 {
        let (a, b) = (syndrome[2 * block], syndrome[2 * block + 1]);
        match (a, b) {
            (true, false) => out.push((3 * block, SinglePauli::Z)),
            (true, true) => out.push((3 * block + 1, SinglePauli::Z)),
            (false, true) => out.push((3 * block + 2, SinglePauli::Z)),
            (false, false) => {}
        }
    }
    match (syndrome[6], syndrome[7]) {
        (true, false) => out.push((0, SinglePauli::X)),
        (true, true) => out.push((3, SinglePauli::X)),
        (false, true) => out.push((6, SinglePauli::X)),
        (false, false) => {}
    }
    out
}

fn apply_pauli(t: &mut Tableau, q: usize, p: SinglePauli) {
    match p {
        SinglePauli::X => t.x(q),
        SinglePauli::Y => t.y(q),
        SinglePauli::Z => t.z(q),
    }
}

/// Run the full cycle for one preparation and one injected error.
pub fn shor_code_demo(
    prep: ShorPrep,
    error_qubit: usize,
    error: SinglePauli,
    rng: &mut impl Rng,
) -> ShorOutcome {
    assert!(error_qubit < 9, "the code has nine qubits");
    let mut t = Tableau::new(9);
    for op in shor_encode_ops() {
        t.apply(op);
    }
    match prep {
        ShorPrep::Zero => {}
        ShorPrep::One => {
            for q in [0, 3, 6] {
                t.x(q);
            }
        }
        ShorPrep::Plus => {
            if t.measure_pauli(&shor_logical_x(), rng).0 == -1 {
                for q in [0, 1, 2] {
                    t.z(q);
                }
            }
        }
    }
    apply_pauli(&mut t, error_qubit, error);

    let generators = shor_stabilizers();
    let syndrome: Vec<bool> = generators
        .iter()
        .map(|g| t.measure_pauli(g, rng).0 == -1)
        .collect();
    let correction = lookup_correction(&syndrome);
    for &(q, p) in &correction {
        apply_pauli(&mut t, q, p);
    }

    let stabilizers_restored = generators
        .iter()
        .all(|g| t.deterministic_outcome(g) == Some(1));
    let logical = match prep {
        ShorPrep::Plus => shor_logical_x(),
        _ => shor_logical_z(),
    };
    let (logical_sign, logical_deterministic) = match t.deterministic_outcome(&logical) {
        Some(sign) => (sign, true),
        None => (t.measure_pauli(&logical, rng).0, false),
    };
    let expected = match prep {
        ShorPrep::Zero | ShorPrep::Plus => 1,
        ShorPrep::One => -1,
    };
    let recovered = stabilizers_restored && logical_deterministic && logical_sign == expected;
    ShorOutcome {
        prep,
        error_qubit,
        error,
        syndrome,
        correction,
        stabilizers_restored,
        logical_sign,
        logical_deterministic,
        recovered,
    }
}

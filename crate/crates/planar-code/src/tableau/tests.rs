use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::decode::Decoder;
use crate::frame::{syndrome_of, PauliFrame};
use crate::geometry::{build_planar, CodeLayout, HoleKind, StabKind, StabilizerId};

fn trng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_circuit(n: usize, len: usize, rng: &mut impl Rng) -> Vec<CliffordOp> {
    (0..len)
        .map(|_| {
            let q = rng.gen_range(0..n);
            match rng.gen_range(0..7u8) {
                0 => CliffordOp::H(q),
                1 => CliffordOp::S(q),
                2 => CliffordOp::X(q),
                3 => CliffordOp::Y(q),
                4 => CliffordOp::Z(q),
                kind => {
                    let mut other = rng.gen_range(0..n - 1);
                    if other >= q {
                        other += 1;
                    }
                    if kind == 5 {
                        CliffordOp::Cnot(q, other)
                    } else {
                        CliffordOp::Cz(q, other)
                    }
                }
            }
        })
        .collect()
}

fn random_tableau(n: usize, rng: &mut impl Rng) -> Tableau {
    let mut t = Tableau::new(n);
    for op in random_circuit(n, 40, rng) {
        t.apply(op);
    }
    t
}

fn random_frame(n: usize, p: f64, rng: &mut impl Rng) -> PauliFrame {
    let mut f = PauliFrame::new(n);
    for q in 0..n {
        if rng.gen::<f64>() < p {
            f.flip_x(q);
        }
        if rng.gen::<f64>() < p {
            f.flip_z(q);
        }
    }
    f
}

#[test]
fn gate_involutions_and_symmetries() {
    let mut rng = trng(11);
    for _ in 0..20 {
        let t = random_tableau(6, &mut rng);
        let q = rng.gen_range(0..6);
        let mut other = rng.gen_range(0..5);
        if other >= q {
            other += 1;
        }

        let mut u = t.clone();
        u.h(q);
        u.h(q);
        assert!(u == t, "H^2 = I");

        let mut u = t.clone();
        u.x(q);
        u.x(q);
        assert!(u == t, "X^2 = I");

        let mut u = t.clone();
        u.cnot(q, other);
        u.cnot(q, other);
        assert!(u == t, "CNOT^2 = I");

        let mut u = t.clone();
        u.cz(q, other);
        u.cz(q, other);
        assert!(u == t, "CZ^2 = I");

        let mut a = t.clone();
        let mut b = t.clone();
        a.cz(q, other);
        b.cz(other, q);
        assert!(a == b, "CZ is symmetric");

        let mut u = t.clone();
        u.s(q);
        u.s(q);
        let mut v = t.clone();
        v.z(q);
        assert!(u == v, "S^2 = Z");

        let mut u = t.clone();
        u.x(q);
        u.z(q);
        let mut v = t.clone();
        v.y(q);
        assert!(u == v, "Y matches ZX up to global phase");
    }
}

#[test]
fn single_qubit_measurements_on_known_states() {
    let mut rng = trng(12);
    let mut t = Tableau::new(2);
    assert_eq!(t.measure_z(0, &mut rng), (1, true));

    t.h(0);
    assert_eq!(t.measure_x(0, &mut rng), (1, true));

    t.z(0);
    assert_eq!(t.measure_x(0, &mut rng), (-1, true), "Z|+> = |->");

    // H then S sends |0> to the +1 eigenstate of Y.
    let mut t = Tableau::new(1);
    t.h(0);
    t.s(0);
    let mut y = PauliFrame::new(1);
    y.flip_y(0);
    assert_eq!(t.measure_pauli(&y, &mut rng), (1, true));
}

#[test]
fn bell_pair_correlations() {
    for seed in 0..20 {
        let mut rng = trng(100 + seed);
        let mut t = Tableau::new(2);
        t.h(0);
        t.cnot(0, 1);
        let xx = PauliFrame::from_x_support(2, &[0, 1]);
        let zz = PauliFrame::from_z_support(2, &[0, 1]);
        assert_eq!(t.deterministic_outcome(&xx), Some(1));
        assert_eq!(t.deterministic_outcome(&zz), Some(1));
        let z0 = PauliFrame::from_z_support(2, &[0]);
        assert_eq!(t.deterministic_outcome(&z0), None);
        let (a, det) = t.measure_z(0, &mut rng);
        assert!(!det);
        let (b, det) = t.measure_z(1, &mut rng);
        assert!(det, "partner is collapsed");
        assert_eq!(a, b, "Bell pair is Z-correlated");
    }
}

#[test]
fn deterministic_outcome_agrees_with_measurement_and_preserves_state() {
    let mut rng = trng(13);
    let mut deterministic_seen = 0;
    for _ in 0..200 {
        let mut t = random_tableau(5, &mut rng);
        let frame = random_frame(5, 0.4, &mut rng);
        if frame.is_empty() {
            continue;
        }
        match t.deterministic_outcome(&frame) {
            Some(expected) => {
                deterministic_seen += 1;
                let before = t.clone();
                assert_eq!(t.measure_pauli(&frame, &mut rng), (expected, true));
                assert!(t == before, "deterministic measurement must not disturb");
            }
            None => {
                let (_, det) = t.measure_pauli(&frame, &mut rng);
                assert!(!det);
                // Once measured, the same Pauli is pinned.
                let (again, det) = t.measure_pauli(&frame, &mut rng);
                let expected = t.deterministic_outcome(&frame);
                assert!(det);
                assert_eq!(expected, Some(again));
            }
        }
    }
    assert!(deterministic_seen > 0, "sampler should hit both branches");
}

#[test]
fn random_outcomes_use_both_signs() {
    let mut rng = trng(14);
    let mut plus = 0;
    for _ in 0..200 {
        let mut t = Tableau::new(1);
        if t.measure_x(0, &mut rng).0 == 1 {
            plus += 1;
        }
    }
    assert!((40..=160).contains(&plus), "got {plus} +1 outcomes of 200");
}

#[test]
fn tableau_stays_well_formed() {
    let mut rng = trng(15);
    for _ in 0..25 {
        let mut t = random_tableau(7, &mut rng);
        t.assert_well_formed();
        for _ in 0..5 {
            let frame = random_frame(7, 0.3, &mut rng);
            if frame.is_empty() {
                continue;
            }
            t.measure_pauli(&frame, &mut rng);
            t.assert_well_formed();
        }
    }
}

fn stabilizer_frame(layout: &CodeLayout, kind: StabKind, i: usize, n: usize) -> PauliFrame {
    let id = match kind {
        StabKind::Plaquette => StabilizerId::Plaquette(i),
        StabKind::Vertex => StabilizerId::Vertex(i),
    };
    let support = layout.support(id).unwrap();
    match kind {
        StabKind::Plaquette => PauliFrame::from_z_support(n, &support),
        StabKind::Vertex => PauliFrame::from_x_support(n, &support),
    }
}

fn assert_code_state(state: &PlanarState) {
    let layout = state.layout();
    let n = layout.n_qubits();
    for kind in [StabKind::Plaquette, StabKind::Vertex] {
        for (i, s) in layout.stabilizers(kind).iter().enumerate() {
            if !s.enabled {
                continue;
            }
            let frame = stabilizer_frame(layout, kind, i, n);
            assert_eq!(
                state.deterministic_outcome(&frame),
                Some(1),
                "{kind:?} {i} should be enforced"
            );
        }
    }
}

#[test]
fn vacuum_preparation_enforces_all_stabilizers() {
    for d in [3, 5] {
        let layout = build_planar(d).unwrap();
        let mut rng = trng(20 + d as u64);
        let state = prepare_vacuum(&layout, &mut rng);
        assert_code_state(&state);
        let zbar = PauliFrame::from_z_support(layout.n_qubits(), layout.logical_z());
        assert_eq!(state.deterministic_outcome(&zbar), Some(1), "vacuum is logical zero");
    }
}

#[test]
fn vacuum_preparation_on_carved_layout() {
    let layout = build_planar(5)
        .unwrap()
        .carve_hole(
            HoleKind::Smooth,
            &[
                StabilizerId::Plaquette(build_planar(5).unwrap().plaquette_at(1, 1).unwrap()),
                StabilizerId::Plaquette(build_planar(5).unwrap().plaquette_at(1, 2).unwrap()),
                StabilizerId::Plaquette(build_planar(5).unwrap().plaquette_at(2, 1).unwrap()),
                StabilizerId::Plaquette(build_planar(5).unwrap().plaquette_at(2, 2).unwrap()),
            ],
        )
        .unwrap();
    let mut rng = trng(21);
    let state = prepare_vacuum(&layout, &mut rng);
    assert_code_state(&state);
    let n = layout.n_qubits();
    let hole = &layout.holes()[0];
    let occupancy = PauliFrame::from_z_support(n, &hole.logical_loop);
    assert_eq!(state.deterministic_outcome(&occupancy), Some(1), "hole starts in |0>");

    // Rough dual: the occupancy loop is an X product and is forced to +1.
    let layout = build_planar(5)
        .unwrap()
        .carve_hole(
            HoleKind::Rough,
            &[StabilizerId::Vertex(build_planar(5).unwrap().vertex_at(1, 1).unwrap())],
        )
        .unwrap();
    let state = prepare_vacuum(&layout, &mut rng);
    assert_code_state(&state);
    let hole = &layout.holes()[0];
    let occupancy = PauliFrame::from_x_support(layout.n_qubits(), &hole.logical_loop);
    assert_eq!(state.deterministic_outcome(&occupancy), Some(1), "hole starts in |+>");
}

#[test]
fn ancilla_extraction_matches_frame_syndrome() {
    let layout = build_planar(3).unwrap();
    let mut rng = trng(22);
    for trial in 0..100 {
        let mut state = prepare_vacuum(&layout, &mut rng);
        let frame = random_frame(layout.n_qubits(), 0.15, &mut rng);
        state.apply_frame(&frame);
        let expected = syndrome_of(&layout, &frame);
        let got = state.extract_syndrome_via_ancilla(&mut rng);
        assert_eq!(got.m_defects, expected.m_defects, "trial {trial}");
        assert_eq!(got.e_defects, expected.e_defects, "trial {trial}");
        // Extraction projects onto what was already an eigenstate, so a
        // second pass reads the same syndrome.
        let again = state.extract_syndrome_via_ancilla(&mut rng);
        assert_eq!(again.m_defects, expected.m_defects);
        assert_eq!(again.e_defects, expected.e_defects);
        // Undoing the error returns to the vacuum.
        state.apply_frame(&frame);
        let clean = state.extract_syndrome_via_ancilla(&mut rng);
        assert!(clean.is_trivial());
    }
}

#[test]
fn hole_round_trip_returns_to_code_space() {
    let base = build_planar(5).unwrap();
    let mut rng = trng(23);

    // Smooth 2x2 hole: interior qubits measured out, then fully restored.
    let cells: Vec<StabilizerId> = [(1, 1), (1, 2), (2, 1), (2, 2)]
        .iter()
        .map(|&(r, c)| StabilizerId::Plaquette(base.plaquette_at(r, c).unwrap()))
        .collect();
    let mut state = prepare_vacuum(&base, &mut rng);
    let report = state.create_hole(HoleKind::Smooth, &cells, &mut rng).unwrap();
    assert_eq!(report.spare_defects.len() % 2, 0);
    assert_eq!(report.qubit_outcomes.len(), 4, "2x2 block removes four spins");
    assert_code_state(&state);
    assert_eq!(state.layout().holes().len(), 1);
    let report = state.contract_hole(0, &cells, &mut rng).unwrap();
    assert!(state.layout().holes().is_empty(), "full restore deletes the hole");
    assert!(!report.stabilizer_outcomes.is_empty());
    assert_code_state(&state);
    let zbar = PauliFrame::from_z_support(base.n_qubits(), base.logical_z());
    assert_eq!(state.deterministic_outcome(&zbar), Some(1), "logical zero survives");

    // Rough 2x2 dual.
    let cells: Vec<StabilizerId> = [(1, 1), (1, 2), (2, 1), (2, 2)]
        .iter()
        .map(|&(r, c)| StabilizerId::Vertex(base.vertex_at(r, c).unwrap()))
        .collect();
    let mut state = prepare_vacuum(&base, &mut rng);
    let report = state.create_hole(HoleKind::Rough, &cells, &mut rng).unwrap();
    assert_eq!(report.spare_defects.len() % 2, 0);
    assert_code_state(&state);
    state.contract_hole(0, &cells, &mut rng).unwrap();
    assert!(state.layout().holes().is_empty());
    assert_code_state(&state);
    let zbar = PauliFrame::from_z_support(base.n_qubits(), base.logical_z());
    assert_eq!(state.deterministic_outcome(&zbar), Some(1));
}

#[test]
fn spare_anyons_come_in_pairs_from_any_code_state() {
    let base = build_planar(5).unwrap();
    let n = base.n_qubits();
    let decoder = Decoder::new(&base);
    let cells: Vec<StabilizerId> = [(1, 1), (1, 2), (2, 1), (2, 2)]
        .iter()
        .map(|&(r, c)| StabilizerId::Plaquette(base.plaquette_at(r, c).unwrap()))
        .collect();
    let mut rng = trng(24);
    for trial in 0..100 {
        let mut state = prepare_vacuum(&base, &mut rng);
        // Scramble the data qubits, then project back onto the code space:
        // syndrome extraction plus a matched correction leaves a (random)
        // code state.
        for op in random_circuit(n, 30, &mut rng) {
            state.apply_op(op);
        }
        let syndrome = state.extract_syndrome_via_ancilla(&mut rng);
        let fix = decoder.decode(&syndrome).unwrap();
        state.apply_frame(&fix.frame);
        let clean = state.extract_syndrome_via_ancilla(&mut rng);
        assert!(clean.is_trivial(), "trial {trial}: correction must clean the syndrome");

        let report = state.create_hole(HoleKind::Smooth, &cells, &mut rng).unwrap();
        assert_eq!(
            report.spare_defects.len() % 2,
            0,
            "trial {trial}: spares {:?}",
            report.spare_defects
        );
        assert_code_state(&state);
    }
}

#[test]
fn expansion_keeps_hole_state_and_code_space() {
    let base = build_planar(5).unwrap();
    let mut rng = trng(25);
    let start = StabilizerId::Plaquette(base.plaquette_at(2, 1).unwrap());
    let next = StabilizerId::Plaquette(base.plaquette_at(2, 2).unwrap());
    let mut state = prepare_vacuum(&base, &mut rng);
    state.create_hole(HoleKind::Smooth, &[start], &mut rng).unwrap();

    let report = state.expand_hole(0, &[next], &mut rng).unwrap();
    assert_eq!(report.qubit_outcomes.len(), 1, "domino removes the shared spin");
    assert_eq!(report.stabilizer_outcomes.len(), 2, "two flanking vertices re-read");
    assert_code_state(&state);

    let report = state.contract_hole(0, &[start], &mut rng).unwrap();
    assert!(report.spare_defects.len() <= 1);
    assert_code_state(&state);
    assert_eq!(state.layout().holes().len(), 1);
    let hole = &state.layout().holes()[0];
    let occupancy = PauliFrame::from_z_support(base.n_qubits(), &hole.logical_loop);
    assert_eq!(
        state.deterministic_outcome(&occupancy),
        Some(1),
        "moved hole still carries |0>"
    );
}

#[test]
fn braiding_phase_follows_anyon_statistics() {
    let layout = build_planar(5).unwrap();
    for seed in 0..10 {
        for moved in [StabKind::Vertex, StabKind::Plaquette] {
            let free = braiding_phase_test(&layout, moved, None, seed).unwrap();
            assert_eq!((free.phase, free.deterministic), (1, true), "empty loop");

            let same = braiding_phase_test(&layout, moved, Some(moved), seed).unwrap();
            assert_eq!((same.phase, same.deterministic), (1, true), "same species");

            let cross = braiding_phase_test(&layout, moved, Some(moved.other()), seed).unwrap();
            assert_eq!(
                (cross.phase, cross.deterministic),
                (-1, true),
                "opposite species picks up the monodromy"
            );
        }
    }
}

#[test]
fn braiding_needs_room() {
    let layout = build_planar(4).unwrap();
    assert_eq!(
        braiding_phase_test(&layout, StabKind::Vertex, None, 0),
        Err(TableauError::LoopTouchesBoundary(4))
    );
}

#[test]
fn braid_cnot_truth_table() {
    use ControlPrep as C;
    use TargetPrep as T;

    let expect_det = |result: &BraidCnotResult, label: &str, sign: i8| {
        let r = result
            .readings
            .iter()
            .find(|r| r.label == label)
            .unwrap_or_else(|| panic!("missing reading {label}"));
        assert!(r.deterministic, "{label} should be deterministic for {result:?}");
        assert_eq!(r.sign, sign, "{label} for control={:?} target={:?}", result.control, result.target);
    };

    // Control in the Z basis, target in the X basis: nothing moves.
    let r = braid_cnot_demo(8, C::Zero, T::Plus, 1).unwrap();
    assert_eq!(r.moves, 12);
    expect_det(&r, "ZL(control)", 1);
    expect_det(&r, "XL(target)", 1);

    let r = braid_cnot_demo(8, C::One, T::Plus, 2).unwrap();
    expect_det(&r, "ZL(control)", -1);
    expect_det(&r, "XL(target)", 1);

    let r = braid_cnot_demo(8, C::One, T::Minus, 3).unwrap();
    expect_det(&r, "ZL(control)", -1);
    expect_det(&r, "XL(target)", -1);

    // Computational branch: the target flips exactly when the control is 1.
    let r = braid_cnot_demo(8, C::Zero, T::Zero, 4).unwrap();
    expect_det(&r, "ZL(control)", 1);
    expect_det(&r, "ZL(target)", 1);

    let r = braid_cnot_demo(8, C::One, T::Zero, 5).unwrap();
    expect_det(&r, "ZL(control)", -1);
    expect_det(&r, "ZL(target)", -1);

    // Entangling branch: joint parities are pinned, singles are not.
    let r = braid_cnot_demo(8, C::Plus, T::Zero, 6).unwrap();
    expect_det(&r, "XL(control)*XL(target)", 1);
    expect_det(&r, "ZL(control)*ZL(target)", 1);
    let zc = r.readings.iter().find(|x| x.label == "ZL(control)").unwrap();
    assert!(!zc.deterministic, "control Z is random in a Bell state");
    let zt = r.readings.iter().find(|x| x.label == "ZL(target)").unwrap();
    assert!(zt.deterministic, "after the control collapse the target follows");
    assert_eq!(zt.sign, zc.sign, "perfect ZZ correlation");

    let move_events = r
        .events
        .iter()
        .filter(|e| matches!(e, BraidEvent::MoveApplied { .. }))
        .count();
    assert_eq!(move_events, 12);
}

#[test]
fn braid_demo_needs_room() {
    assert!(matches!(
        braid_cnot_demo(7, ControlPrep::Zero, TargetPrep::Plus, 0),
        Err(TableauError::HolesTooClose(7))
    ));
}

#[test]
fn non_enclosing_moves_act_as_identity() {
    let d = 8;
    let base = build_planar(d).unwrap();
    let mut rng = trng(26);

    let pl = |r: usize, c: usize| StabilizerId::Plaquette(base.plaquette_at(r, c).unwrap());
    let vx = |r: usize, c: usize| StabilizerId::Vertex(base.vertex_at(r, c).unwrap());

    let run = |cells: &[(usize, usize)], rng: &mut ChaCha8Rng| {
        let mut state = prepare_vacuum(&base, rng);
        state.create_hole(HoleKind::Smooth, &[pl(2, 1)], rng).unwrap();
        state.create_hole(HoleKind::Rough, &[vx(3, 3)], rng).unwrap();
        let start = state.layout().clone();
        let control = LogicalRegister::hole_pair(&start, 0);
        let target = LogicalRegister::hole_pair(&start, 1);
        // Control |1>, target |0>.
        state.apply_frame(&control.x);
        if state.measure_frame(&target.z, rng).0 == -1 {
            state.apply_frame(&target.x);
        }
        let mut current = (2, 1);
        for &cell in cells {
            state.expand_hole(0, &[pl(cell.0, cell.1)], rng).unwrap();
            state
                .contract_hole(0, &[pl(current.0, current.1)], rng)
                .unwrap();
            current = cell;
        }
        assert_eq!(current, (2, 1), "dance must return home");
        assert_code_state(&state);
        (
            state.deterministic_outcome(&control.z),
            state.deterministic_outcome(&target.z),
        )
    };

    // Out-and-back line: no loop at all.
    let line = [(2, 2), (2, 3), (2, 2), (2, 1)];
    assert_eq!(run(&line, &mut rng), (Some(-1), Some(1)));

    // Small closed square that encloses only vacuum.
    let square = [(1, 1), (1, 2), (2, 2), (2, 1)];
    assert_eq!(run(&square, &mut rng), (Some(-1), Some(1)));
}

#[test]
fn logical_register_checks_representatives() {
    let base = build_planar(8).unwrap();
    let layout = base
        .carve_hole(
            HoleKind::Smooth,
            &[StabilizerId::Plaquette(base.plaquette_at(2, 1).unwrap())],
        )
        .unwrap();
    let mut register = LogicalRegister::new();
    register.insert("edge", LogicalRegister::edge_pair(&layout));
    register.insert("hole", LogicalRegister::hole_pair(&layout, 0));
    register.validate(&layout).unwrap();

    let mut broken = LogicalRegister::new();
    let mut pair = LogicalRegister::hole_pair(&layout, 0);
    let q = pair.x.x_support()[0];
    pair.x.flip_x(q); // drop one qubit: no longer commutes with the stabilizers
    broken.insert("hole", pair);
    assert_eq!(
        broken.validate(&layout),
        Err(TableauError::BadRepresentative("hole".into()))
    );
}

#[test]
fn shor_demo_recovers_every_single_qubit_error() {
    let mut rng = trng(27);
    for prep in [ShorPrep::Zero, ShorPrep::One, ShorPrep::Plus] {
        for (q, p) in shor_error_set() {
            let out = shor_code_demo(prep, q, p, &mut rng);
            assert!(
                out.syndrome.iter().any(|&b| b),
                "{prep:?} {p:?} on {q} must fire the syndrome"
            );
            assert!(out.stabilizers_restored, "{prep:?} {p:?} on {q}");
            assert!(out.logical_deterministic, "{prep:?} {p:?} on {q}");
            assert!(out.recovered, "{prep:?} {p:?} on {q}: {out:?}");
        }
    }
}

#[test]
fn shor_encoding_is_the_advertised_code() {
    let mut t = Tableau::new(9);
    for op in shor_encode_ops() {
        t.apply(op);
    }
    for g in shor_stabilizers() {
        assert_eq!(t.deterministic_outcome(&g), Some(1));
    }
    assert_eq!(t.deterministic_outcome(&shor_logical_z()), Some(1));
    assert_eq!(t.deterministic_outcome(&shor_logical_x()), None);
    assert!(!shor_logical_x().commutes_with(&shor_logical_z()));
    for g in shor_stabilizers() {
        assert!(g.commutes_with(&shor_logical_x()));
        assert!(g.commutes_with(&shor_logical_z()));
    }
}

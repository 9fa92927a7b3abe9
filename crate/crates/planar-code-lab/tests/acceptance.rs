//! Acceptance gate: eleven numbered criteria, one test and one printed
//! `criterion NN: PASS/FAIL` line each (run with `--nocapture` to see the
//! PASS lines; FAIL lines ride the panic message). The Monte Carlo criteria
//! are deterministic given the frozen seeds, so these are regression checks
//! as much as physics checks. The whole file runs in minutes on one core.

use planar_code::decode::{mwpm, Decoder, ExactMlDecoder};
use planar_code::frame::{logical_effect, PauliFrame, SyndromeMasks};
use planar_code::geometry::{build_planar, StabKind};
use planar_code::oracle::DenseState;
use planar_code::tableau::{
    braid_cnot_demo, braiding_phase_test, shor_code_demo, shor_encode_ops, shor_error_set,
    shor_logical_x, shor_logical_z, shor_stabilizers, BraidCnotResult, ControlPrep, ShorOutcome,
    ShorPrep, SinglePauli, TargetPrep,
};
use planar_code_lab::config::{
    FailureRule, LifetimeConfig, NoiseGrid, RoundsSpec, ScaledRounds, SystemFamily,
    ThresholdConfig,
};
use planar_code_lab::crossing::estimate_crossing;
use planar_code_lab::sweep::{run_lifetime_sweep, run_threshold_sweep};
use planar_code_lab::table::{LifetimeTable, ResultTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x51;

fn report(criterion: usize, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let line = format!("criterion {criterion:02}: {verdict} — {detail}");
    println!("{line}");
    assert!(ok, "{line}");
}

fn grid(lo: f64, step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + step * i as f64).collect()
}

fn threshold_table(
    distances: Vec<usize>,
    noise: NoiseGrid,
    trials: u64,
    failure: FailureRule,
    workers: usize,
) -> ResultTable {
    let cfg = ThresholdConfig {
        distances,
        noise,
        trials,
        seed: SEED,
        failure,
        workers,
        output: None,
    };
    run_threshold_sweep(&cfg).expect("threshold sweep runs")
}

fn lifetime_table(
    family: SystemFamily,
    sizes: Vec<usize>,
    betas: Vec<f64>,
    horizon: f64,
    trials: u64,
    workers: usize,
) -> LifetimeTable {
    let cfg = LifetimeConfig {
        family,
        sizes,
        betas,
        j: 1.0,
        horizon,
        trials,
        seed: SEED,
        workers,
        output: None,
        per_trial: None,
    };
    run_lifetime_sweep(&cfg).expect("lifetime sweep runs")
}

fn median_at(table: &LifetimeTable, size: usize, beta: f64) -> (f64, u64) {
    let row = table
        .rows
        .iter()
        .find(|r| r.size == size && r.beta == beta)
        .expect("row for requested point");
    (row.median_lifetime, row.censored)
}

#[test]
fn criterion_01_bitflip_threshold_crossing() {
    let table = threshold_table(
        vec![5, 7, 9, 11],
        NoiseGrid::IndependentXZ { p: grid(0.08, 0.005, 9), p_prime: Some(0.0) },
        20_000,
        FailureRule::Either,
        1,
    );
    let est = estimate_crossing(&table).expect("curves cross in range");
    let ok = (0.095..=0.110).contains(&est.p_c);
    report(
        1,
        ok,
        &format!(
            "iid bit-flip MWPM crossing p_c = {:.5} (pair spread {:.5}), window [0.095, 0.110]",
            est.p_c, est.spread
        ),
    );
}

#[test]
fn criterion_02_depolarizing_threshold_crossing() {
    // Independent X/Z matching on depolarizing noise: each sector sees an
    // iid marginal of rate 2p/3, and the quoted threshold is the sector
    // quantity, so failures are counted on one logical observable.
    let table = threshold_table(
        vec![5, 7, 9, 11],
        NoiseGrid::Depolarizing { p: grid(0.135, 0.005, 9) },
        20_000,
        FailureRule::ZLogical,
        1,
    );
    let est = estimate_crossing(&table).expect("curves cross in range");
    let ok = (0.145..=0.165).contains(&est.p_c);
    report(
        2,
        ok,
        &format!(
            "depolarizing sector crossing p_c = {:.5} (pair spread {:.5}), window [0.145, 0.165]",
            est.p_c, est.spread
        ),
    );
}

#[test]
fn criterion_03_subthreshold_suppression() {
    let table = threshold_table(
        vec![5, 7, 9, 11],
        NoiseGrid::IndependentXZ { p: vec![0.05], p_prime: None },
        20_000,
        FailureRule::Either,
        1,
    );
    let rows = &table.rows;
    assert_eq!(rows.len(), 4);
    let mut ok = true;
    for pair in rows.windows(2) {
        ok &= pair[1].rate < pair[0].rate;
        ok &= pair[1].wilson_high < pair[0].wilson_low;
    }
    let rates: Vec<String> = rows.iter().map(|r| format!("{:.5}", r.rate)).collect();
    report(
        3,
        ok,
        &format!(
            "p = 0.05 iid, rates over d = 5,7,9,11: {} (Wilson intervals pairwise disjoint: {})",
            rates.join(" > "),
            ok
        ),
    );
}

#[test]
fn criterion_04_phenomenological_bracketing() {
    let table = threshold_table(
        vec![3, 5, 7],
        NoiseGrid::Phenomenological {
            p: vec![0.01, 0.06],
            q: None,
            rounds: RoundsSpec::Scaled(ScaledRounds::Distance),
        },
        5_000,
        FailureRule::Either,
        1,
    );
    let rate = |d: usize, p: f64| {
        table
            .rows
            .iter()
            .find(|r| r.distance == d && r.p() == p)
            .expect("row for requested point")
            .rate
    };
    let low = [rate(3, 0.01), rate(5, 0.01), rate(7, 0.01)];
    let high = [rate(3, 0.06), rate(5, 0.06), rate(7, 0.06)];
    let ok = low[0] > low[1] && low[1] > low[2] && high[0] < high[1] && high[1] < high[2];
    report(
        4,
        ok,
        &format!(
            "p = q, rounds = d: rates at p=0.01 {:.4}/{:.4}/{:.4} (decreasing), at p=0.06 {:.4}/{:.4}/{:.4} (increasing)",
            low[0], low[1], low[2], high[0], high[1], high[2]
        ),
    );
}

/// Exhaustive minimum-weight perfect matching by recursion, for cross-checking.
fn brute_force_weight(n: usize, edges: &[(usize, usize, u32)]) -> u64 {
    let mut w = vec![vec![u64::MAX; n]; n];
    for &(a, b, c) in edges {
        w[a][b] = u64::from(c);
        w[b][a] = u64::from(c);
    }
    fn rec(matched: &mut Vec<bool>, w: &[Vec<u64>]) -> u64 {
        let Some(i) = matched.iter().position(|&m| !m) else {
            return 0;
        };
        matched[i] = true;
        let mut best = u64::MAX;
        for j in i + 1..matched.len() {
            if !matched[j] && w[i][j] != u64::MAX {
                matched[j] = true;
                let rest = rec(matched, w);
                if rest != u64::MAX {
                    best = best.min(w[i][j] + rest);
                }
                matched[j] = false;
            }
        }
        matched[i] = false;
        best
    }
    rec(&mut vec![false; n], &w)
}

#[test]
fn criterion_05_matching_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = 0usize;
    for _ in 0..500 {
        let n = 2 * rng.gen_range(1..=6usize);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b, rng.gen_range(0..64u32)));
            }
        }
        let (_, weight) = mwpm(n, &edges).expect("complete graph matches");
        if weight != brute_force_weight(n, &edges) {
            mismatches += 1;
        }
    }

    let layout = build_planar(3).unwrap();
    let decoder = Decoder::new(&layout);
    let masks = SyndromeMasks::new(&layout);
    let mut uncorrected = 0usize;
    for q in 0..layout.n_qubits() {
        let mut frame = PauliFrame::new(layout.n_qubits());
        frame.flip_x(q);
        let syndrome = masks.syndrome(&frame);
        let correction = decoder.decode(&syndrome).expect("single error decodes");
        let residual = frame.xor(&correction.frame);
        let clean =
            masks.syndrome(&residual).is_trivial() && logical_effect(&layout, &residual) == (false, false);
        if !clean {
            uncorrected += 1;
        }
    }

    let ok = mismatches == 0 && uncorrected == 0;
    report(
        5,
        ok,
        &format!(
            "blossom vs brute force on 500 random graphs: {mismatches} weight mismatches; d=3 single-X errors uncorrected: {uncorrected}/13"
        ),
    );
}

#[test]
fn criterion_06_ml_dominance_exact() {
    let layout = build_planar(3).unwrap();
    let mut ok = true;
    let mut sample_line = String::new();
    for kind in [StabKind::Plaquette, StabKind::Vertex] {
        let ml = ExactMlDecoder::new(&layout, kind).unwrap();
        let n_stabs = layout.stabilizers(kind).len();
        for step in 1..=15 {
            let p = step as f64 / 100.0;
            let mut fail_ml = 0.0;
            let mut fail_mwpm = 0.0;
            let mut total = 0.0;
            for mask in 0u32..(1 << n_stabs) {
                let fired: Vec<usize> = (0..n_stabs).filter(|b| mask >> b & 1 == 1).collect();
                let masses = ml.class_masses(&fired, p).expect("masses computable");
                // masses[0] belongs to the matching decoder's class, so its
                // exact failure mass is masses[1]; the likelihood decoder
                // loses the smaller of the two (ties broken the same way).
                fail_mwpm += masses[1];
                fail_ml += if masses[1] > masses[0] { masses[0] } else { masses[1] };
                total += masses[0] + masses[1];
            }
            assert!((total - 1.0).abs() < 1e-9, "class masses must sum to 1, got {total}");
            ok &= fail_ml <= fail_mwpm + 1e-15;
            if kind == StabKind::Plaquette && step == 10 {
                sample_line =
                    format!("at p=0.10 (plaquette sector): ML {fail_ml:.6} <= MWPM {fail_mwpm:.6}");
            }
        }
    }
    report(
        6,
        ok,
        &format!("exact d=3 failure, both sectors, p = 0.01..0.15: ML <= MWPM everywhere; {sample_line}"),
    );
}

#[test]
fn criterion_07_braiding_statistics() {
    let layout = build_planar(5).unwrap();
    let cases: [(StabKind, Option<StabKind>, i8, &str); 6] = [
        (StabKind::Vertex, Some(StabKind::Plaquette), -1, "e around m"),
        (StabKind::Plaquette, Some(StabKind::Vertex), -1, "m around e"),
        (StabKind::Vertex, None, 1, "e around empty loop"),
        (StabKind::Plaquette, None, 1, "m around empty loop"),
        (StabKind::Vertex, Some(StabKind::Vertex), 1, "e around e"),
        (StabKind::Plaquette, Some(StabKind::Plaquette), 1, "m around m"),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (moved, enclosed, expected, label) in cases {
        let mut good = 0;
        for seed in 0..100 {
            let phase = braiding_phase_test(&layout, moved, enclosed, seed).expect("braid runs");
            if phase.deterministic && phase.phase == expected {
                good += 1;
            }
        }
        ok &= good == 100;
        details.push(format!("{label}: {good}/100 at {expected:+}"));
    }
    report(7, ok, &details.join(", "));
}

fn braid_readings(result: &BraidCnotResult) -> Vec<(String, i8, bool)> {
    result
        .readings
        .iter()
        .map(|r| (r.label.clone(), r.sign, r.deterministic))
        .collect()
}

#[test]
fn criterion_08_hole_braiding_cnot() {
    let mut ok = true;
    let mut details = Vec::new();

    // Product preparations: every reading must be deterministic with the
    // CNOT truth-table sign (X on the target commutes through).
    let product_cases: [(ControlPrep, TargetPrep, [(&str, i8); 2]); 4] = [
        (ControlPrep::Zero, TargetPrep::Zero, [("ZL(control)", 1), ("ZL(target)", 1)]),
        (ControlPrep::One, TargetPrep::Zero, [("ZL(control)", -1), ("ZL(target)", -1)]),
        (ControlPrep::Zero, TargetPrep::Plus, [("ZL(control)", 1), ("XL(target)", 1)]),
        (ControlPrep::One, TargetPrep::Plus, [("ZL(control)", -1), ("XL(target)", 1)]),
    ];
    for (control, target, expected) in product_cases {
        let mut good = true;
        for seed in 0..3 {
            let result = braid_cnot_demo(8, control, target, seed).expect("braid demo runs");
            let readings = braid_readings(&result);
            for (label, sign) in expected {
                good &= readings
                    .iter()
                    .any(|(l, s, det)| l == label && *s == sign && *det);
            }
        }
        ok &= good;
        details.push(format!("{control:?}/{target:?}: {}", if good { "ok" } else { "WRONG" }));
    }

    // Entangling case: joint parities pinned at +1, individual Z readings
    // random but perfectly correlated.
    let mut bell_good = true;
    for seed in 0..8 {
        let result =
            braid_cnot_demo(8, ControlPrep::Plus, TargetPrep::Zero, seed).expect("braid demo runs");
        let readings = braid_readings(&result);
        bell_good &= readings[0] == ("XL(control)*XL(target)".to_string(), 1, true);
        bell_good &= readings[1] == ("ZL(control)*ZL(target)".to_string(), 1, true);
        // The first individual Z reading is a fair coin; it collapses the
        // pair, so the second must come out deterministic and equal.
        bell_good &= !readings[2].2 && readings[3].2 && readings[2].1 == readings[3].1;
    }
    ok &= bell_good;
    details.push(format!(
        "Plus/Zero entangling joint parities deterministic +1 with correlated Z pairs over 8 seeds: {}",
        if bell_good { "ok" } else { "WRONG" }
    ));

    report(8, ok, &details.join("; "));
}

/// Replay one Shor-code run on the dense simulator and check every recorded
/// measurement. After the error, all eight stabilizer readings are
/// deterministic, so the replay needs no shared randomness: the |+> branch
/// is pinned by projection, everything else must come out with probability
/// one.
fn dense_replay_matches(outcome: &ShorOutcome) -> Result<(), String> {
    let mut dense = DenseState::new(9);
    for op in shor_encode_ops() {
        dense.apply(op);
    }
    match outcome.prep {
        ShorPrep::Zero => {}
        ShorPrep::One => {
            for q in [0, 3, 6] {
                dense.x(q);
            }
        }
        ShorPrep::Plus => {
            let prob = dense.project(&shor_logical_x(), 1);
            if (prob - 0.5).abs() > 1e-9 {
                return Err(format!("logical |+> projection had probability {prob}"));
            }
        }
    }
    match outcome.error {
        SinglePauli::X => dense.x(outcome.error_qubit),
        SinglePauli::Y => dense.y(outcome.error_qubit),
        SinglePauli::Z => dense.z(outcome.error_qubit),
    }
    let generators = shor_stabilizers();
    for (i, (g, &fired)) in generators.iter().zip(&outcome.syndrome).enumerate() {
        let sign = if fired { -1 } else { 1 };
        let prob = dense.probability_of(g, sign);
        if (prob - 1.0).abs() > 1e-9 {
            return Err(format!(
                "stabilizer {i} recorded {sign:+} but dense probability is {prob}"
            ));
        }
        dense.project(g, sign);
    }
    for &(q, p) in &outcome.correction {
        match p {
            SinglePauli::X => dense.x(q),
            SinglePauli::Y => dense.y(q),
            SinglePauli::Z => dense.z(q),
        }
    }
    for (i, g) in generators.iter().enumerate() {
        let prob = dense.probability_of(g, 1);
        if (prob - 1.0).abs() > 1e-9 {
            return Err(format!("stabilizer {i} not restored, +1 probability {prob}"));
        }
    }
    let logical = match outcome.prep {
        ShorPrep::Plus => shor_logical_x(),
        _ => shor_logical_z(),
    };
    let expect = dense.expectation(&logical);
    if (expect.re - f64::from(outcome.logical_sign)).abs() > 1e-9 || expect.im.abs() > 1e-12 {
        return Err(format!(
            "logical expectation {expect} vs recorded sign {}",
            outcome.logical_sign
        ));
    }
    Ok(())
}

#[test]
fn criterion_09_shor_code_with_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut recovered = 0usize;
    let mut agreed = 0usize;
    let mut first_problem = None;
    for prep in [ShorPrep::Zero, ShorPrep::One, ShorPrep::Plus] {
        for (qubit, error) in shor_error_set() {
            let outcome = shor_code_demo(prep, qubit, error, &mut rng);
            if outcome.recovered {
                recovered += 1;
            } else if first_problem.is_none() {
                first_problem = Some(format!("{prep:?} {error:?} on qubit {qubit} not recovered"));
            }
            match dense_replay_matches(&outcome) {
                Ok(()) => agreed += 1,
                Err(e) if first_problem.is_none() => {
                    first_problem = Some(format!("{prep:?} {error:?} on qubit {qubit}: {e}"));
                }
                Err(_) => {}
            }
        }
    }
    let ok = recovered == 81 && agreed == 81;
    report(
        9,
        ok,
        &format!(
            "81 prep/error cases: {recovered}/81 recovered, {agreed}/81 dense-oracle replays agree{}",
            first_problem.map(|p| format!(" (first problem: {p})")).unwrap_or_default()
        ),
    );
}

#[test]
fn criterion_10_thermal_lifetime_contrast() {
    let mut ok = true;
    let mut details = Vec::new();

    // 1D chain at beta*J = 2: lifetime must stay flat as the chain grows.
    let table = lifetime_table(SystemFamily::Ising1D, vec![16, 32, 64], vec![2.0], 32_768.0, 2_000, 1);
    let a: Vec<f64> = [16, 32, 64].iter().map(|&l| median_at(&table, l, 2.0).0).collect();
    let flat_1d = a.iter().cloned().fold(f64::MIN, f64::max)
        <= 2.0 * a.iter().cloned().fold(f64::MAX, f64::min);
    ok &= flat_1d;
    details.push(format!(
        "1D betaJ=2 medians L=16/32/64: {}/{}/{} (flat within 2x: {flat_1d})",
        a[0], a[1], a[2]
    ));

    // 2D at beta*J = 1.0: the criterion asks for medians strictly increasing
    // over L = 8, 16, 24. Deep in the ordered phase the larger lattices
    // outlive any horizon this suite can afford, so their medians saturate
    // at the censoring point and the comparison cannot be exhibited here;
    // the assertion states the criterion anyway and the censored counts are
    // reported alongside.
    let horizon_2d = 1_048_576.0;
    let table =
        lifetime_table(SystemFamily::Ising2D { periodic: false }, vec![8, 16, 24], vec![1.0], horizon_2d, 200, 1);
    let b: Vec<(f64, u64)> = [8, 16, 24].iter().map(|&l| median_at(&table, l, 1.0)).collect();
    let rising_2d = b[0].0 < b[1].0 && b[1].0 < b[2].0;
    ok &= rising_2d;
    details.push(format!(
        "2D betaJ=1 medians L=8/16/24: {}/{}/{} with {}/{}/{} of 200 censored at horizon 2^20 (strictly increasing: {rising_2d})",
        b[0].0, b[1].0, b[2].0, b[0].1, b[1].1, b[2].1
    ));

    // Supporting evidence at a coupling where the growth is observable
    // within the horizon (not part of the criterion).
    let table =
        lifetime_table(SystemFamily::Ising2D { periodic: false }, vec![8, 16, 24], vec![0.5], 32_768.0, 200, 1);
    let s: Vec<f64> = [8, 16, 24].iter().map(|&l| median_at(&table, l, 0.5).0).collect();
    details.push(format!(
        "[supporting] 2D betaJ=0.5 medians L=8/16/24: {}/{}/{} (increasing: {})",
        s[0], s[1], s[2],
        s[0] < s[1] && s[1] < s[2]
    ));

    // Toric code in the X basis: no growing barrier, lifetime flat in L.
    let table = lifetime_table(
        SystemFamily::ToricCodeXBasis { j_s: 1.0, j_p: 1.0 },
        vec![8, 16, 24],
        vec![2.0],
        8_192.0,
        1_000,
        1,
    );
    let c: Vec<f64> = [8, 16, 24].iter().map(|&l| median_at(&table, l, 2.0).0).collect();
    let flat_toric = c.iter().cloned().fold(f64::MIN, f64::max)
        <= 2.0 * c.iter().cloned().fold(f64::MAX, f64::min);
    ok &= flat_toric;
    details.push(format!(
        "toric betaJ=2 medians L=8/16/24: {}/{}/{} (flat within 2x: {flat_toric})",
        c[0], c[1], c[2]
    ));

    // Arrhenius check: the 1D chain at beta*J = 2.5 outlives beta*J = 1.5
    // by at least 5x.
    let table = lifetime_table(SystemFamily::Ising1D, vec![32], vec![1.5, 2.5], 65_536.0, 1_000, 1);
    let cold = median_at(&table, 32, 2.5).0;
    let hot = median_at(&table, 32, 1.5).0;
    let arrhenius = cold >= 5.0 * hot;
    ok &= arrhenius;
    details.push(format!(
        "1D L=32 median at betaJ=2.5 vs 1.5: {cold} vs {hot} (ratio >= 5: {arrhenius})"
    ));

    report(10, ok, &details.join("; "));
}

#[test]
fn criterion_11_reproducibility_across_workers() {
    let mut ok = true;
    let mut details = Vec::new();

    let threshold_cases: [(&str, NoiseGrid); 3] = [
        ("independent_x_z", NoiseGrid::IndependentXZ { p: vec![0.08, 0.1], p_prime: None }),
        ("depolarizing", NoiseGrid::Depolarizing { p: vec![0.14, 0.16] }),
        (
            "phenomenological",
            NoiseGrid::Phenomenological {
                p: vec![0.02],
                q: None,
                rounds: RoundsSpec::Scaled(ScaledRounds::Distance),
            },
        ),
    ];
    for (label, noise) in threshold_cases {
        let one = threshold_table(vec![3, 5], noise.clone(), 400, FailureRule::Either, 1);
        let eight = threshold_table(vec![3, 5], noise, 400, FailureRule::Either, 8);
        let same = one.to_json(false) == eight.to_json(false)
            && one.to_csv(false) == eight.to_csv(false);
        ok &= same;
        details.push(format!("threshold/{label}: {}", if same { "identical" } else { "DIVERGED" }));
    }

    let lifetime_cases: [(&str, SystemFamily); 3] = [
        ("ising_1d", SystemFamily::Ising1D),
        ("ising_2d", SystemFamily::Ising2D { periodic: false }),
        ("toric", SystemFamily::ToricCodeXBasis { j_s: 1.0, j_p: 1.0 }),
    ];
    for (label, family) in lifetime_cases {
        let one = lifetime_table(family, vec![8, 16], vec![1.0, 2.0], 1_024.0, 50, 1);
        let eight = lifetime_table(family, vec![8, 16], vec![1.0, 2.0], 1_024.0, 50, 8);
        let same = one.to_json(false) == eight.to_json(false)
            && one.to_csv(false) == eight.to_csv(false)
            && one.trials_to_csv() == eight.trials_to_csv();
        ok &= same;
        details.push(format!("lifetime/{label}: {}", if same { "identical" } else { "DIVERGED" }));
    }

    let braid_once = serde_json::to_string(
        &braid_cnot_demo(8, ControlPrep::Plus, TargetPrep::Zero, SEED).unwrap(),
    )
    .unwrap();
    let braid_again = serde_json::to_string(
        &braid_cnot_demo(8, ControlPrep::Plus, TargetPrep::Zero, SEED).unwrap(),
    )
    .unwrap();
    let same = braid_once == braid_again;
    ok &= same;
    details.push(format!("braid-demo rerun: {}", if same { "identical" } else { "DIVERGED" }));

    report(11, ok, &details.join(", "));
}

//! Monte Carlo drivers: threshold sweeps and thermal lifetime sweeps.
//!
//! Trials are scheduled by a static stride: worker `w` of `k` runs global
//! trial indices `w, w+k, w+2k, ...`, and every trial draws from its own
//! counter-derived stream, so the outcome of trial `t` is a pure function
//! of `(point seed, t)`. Reductions are either counts or merges sorted by
//! trial index; both make the result independent of the worker count and
//! of scheduling order.

use std::time::Instant;

use planar_code::decode::{trial_fails, DecodeError, Decoder};
use planar_code::frame::SyndromeMasks;
use planar_code::geometry::{build_planar, GeometryError};
use planar_code::noise::{trial_rng, NoiseModel};
use planar_code::thermal::{lifetime_trial, ClassicalSystem};
use thiserror::Error;

use crate::config::{ConfigError, FailureRule, LifetimeConfig, ThresholdConfig};
use crate::stats;
use crate::table::{LifetimeRow, LifetimeTable, ResultRow, ResultTable, RunMeta, TrialRecord};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("layout: {0}")]
    Geometry(#[from] GeometryError),
    #[error("decode: {0}")]
    Decode(#[from] DecodeError),
}

/// splitmix64-style mix of a seed with one salt word.
fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream seed for one sweep point, tied to the point's actual parameters
/// so that reordering or extending the grid never reshuffles results.
fn point_seed(master: u64, axis: u64, knob: f64) -> u64 {
    mix(mix(master, axis), knob.to_bits())
}

/// Run the full sweep; see [`run_threshold_sweep_with`].
pub fn run_threshold_sweep(cfg: &ThresholdConfig) -> Result<ResultTable, SweepError> {
    run_threshold_sweep_with(cfg, |_, _, _| {})
}

/// Run the sweep, invoking `on_point(row, done, total)` after each
/// (distance, noise point) completes. Identical `(config, seed)` produce
/// identical tables for any worker count.
pub fn run_threshold_sweep_with(
    cfg: &ThresholdConfig,
    mut on_point: impl FnMut(&ResultRow, usize, usize),
) -> Result<ResultTable, SweepError> {
    cfg.validate("")?;
    let meta = RunMeta::new(cfg.seed, &crate::config::ExperimentConfig::Threshold(cfg.clone()));
    let total = cfg.distances.len() * cfg.noise.points().len();
    let mut rows = Vec::with_capacity(total);
    for &d in &cfg.distances {
        let layout = build_planar(d)?;
        let decoder = Decoder::new(&layout);
        let masks = SyndromeMasks::new(&layout);
        for &p in cfg.noise.points() {
            let model = cfg.noise.model_at(p, d);
            let started = Instant::now();
            let failures = count_failures(
                &decoder,
                &masks,
                &layout,
                &model,
                cfg.failure,
                point_seed(cfg.seed, d as u64, p),
                cfg.trials,
                cfg.workers,
            )?;
            let wall = started.elapsed().as_millis() as u64;
            let row = ResultRow::new(d, model, cfg.trials, failures, Some(wall));
            on_point(&row, rows.len() + 1, total);
            rows.push(row);
        }
    }
    Ok(ResultTable { meta, rows })
}

fn count_failures(
    decoder: &Decoder,
    masks: &SyndromeMasks,
    layout: &planar_code::geometry::CodeLayout,
    model: &NoiseModel,
    rule: FailureRule,
    seed: u64,
    trials: u64,
    workers: usize,
) -> Result<u64, DecodeError> {
    let n_qubits = layout.n_qubits();
    let n_plaquettes = layout.plaquettes().len();
    let n_vertices = layout.vertices().len();
    let run_slice = |first: u64, stride: u64| -> Result<u64, DecodeError> {
        let mut local = 0;
        let mut trial = first;
        while trial < trials {
            let mut rng = trial_rng(seed, trial);
            let sample = model.sample(n_qubits, n_plaquettes, n_vertices, &mut rng);
            // trial_fails reports (X residual hit logical Z, Z residual hit
            // logical X); translate to observables before applying the rule.
            let (zbar_flipped, xbar_flipped) = trial_fails(decoder, masks, layout, &sample)?;
            local += u64::from(rule.failed(xbar_flipped, zbar_flipped));
            trial += stride;
        }
        Ok(local)
    };
    if workers <= 1 {
        return run_slice(0, 1);
    }
    std::thread::scope(|scope| {
        let run_slice = &run_slice;
        let handles: Vec<_> = (0..workers)
            .map(|w| scope.spawn(move || run_slice(w as u64, workers as u64)))
            .collect();
        let mut failures = 0;
        for h in handles {
            failures += h.join().expect("sweep worker panicked")?;
        }
        Ok(failures)
    })
}

/// Run the full lifetime sweep; see [`run_lifetime_sweep_with`].
pub fn run_lifetime_sweep(cfg: &LifetimeConfig) -> Result<LifetimeTable, SweepError> {
    run_lifetime_sweep_with(cfg, |_, _, _| {})
}

/// Thermal memory-lifetime sweep over every (size, beta) point, invoking
/// `on_point(row, done, total)` as each completes. Deterministic for any
/// worker count, like the threshold sweep.
pub fn run_lifetime_sweep_with(
    cfg: &LifetimeConfig,
    mut on_point: impl FnMut(&LifetimeRow, usize, usize),
) -> Result<LifetimeTable, SweepError> {
    cfg.validate("")?;
    let meta = RunMeta::new(cfg.seed, &crate::config::ExperimentConfig::Lifetime(cfg.clone()));
    let tag = cfg.family.tag();
    let total = cfg.sizes.len() * cfg.betas.len();
    let mut rows = Vec::with_capacity(total);
    let mut all_trials = Vec::with_capacity(total * cfg.trials as usize);
    for &size in &cfg.sizes {
        for &beta in &cfg.betas {
            let started = Instant::now();
            let seed = point_seed(cfg.seed, size as u64, beta);
            let mut records = run_lifetime_point(cfg, size, beta, seed);
            records.sort_unstable_by_key(|r| r.trial);
            let lifetimes: Vec<f64> = records
                .iter()
                .map(|r| r.failure_time.unwrap_or(cfg.horizon))
                .collect();
            let failures = records.iter().filter(|r| r.failure_time.is_some()).count() as u64;
            let row = LifetimeRow {
                system: tag.to_string(),
                size,
                beta,
                trials: cfg.trials,
                failures,
                censored: cfg.trials - failures,
                median_lifetime: stats::median(&lifetimes),
                mean_lifetime: lifetimes.iter().sum::<f64>() / lifetimes.len() as f64,
                horizon: cfg.horizon,
                wall_ms: Some(started.elapsed().as_millis() as u64),
            };
            on_point(&row, rows.len() + 1, total);
            rows.push(row);
            all_trials.extend(records);
        }
    }
    Ok(LifetimeTable { meta, rows, trials: all_trials })
}

fn run_lifetime_point(
    cfg: &LifetimeConfig,
    size: usize,
    beta: f64,
    seed: u64,
) -> Vec<TrialRecord> {
    let tag = cfg.family.tag();
    let run_slice = |first: u64, stride: u64| -> Vec<TrialRecord> {
        let mut records = Vec::new();
        let mut trial = first;
        while trial < cfg.trials {
            let system = ClassicalSystem::ground(cfg.family.kind(size), cfg.j);
            let mut rng = trial_rng(seed, trial);
            let outcome = lifetime_trial(system, beta, cfg.horizon, &mut rng);
            records.push(TrialRecord {
                system: tag.to_string(),
                size,
                beta,
                trial,
                failure_time: outcome.failure_time,
                steps: outcome.steps,
            });
            trial += stride;
        }
        records
    };
    if cfg.workers <= 1 {
        return run_slice(0, 1);
    }
    std::thread::scope(|scope| {
        let run_slice = &run_slice;
        let handles: Vec<_> = (0..cfg.workers)
            .map(|w| scope.spawn(move || run_slice(w as u64, cfg.workers as u64)))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("lifetime worker panicked"))
            .collect()
    })
}

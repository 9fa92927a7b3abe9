//! Result tables and their byte-stable CSV/JSON renderings.
//!
//! Emission is a pure function of the table, so identical tables always
//! produce identical bytes. Wall-clock columns are the one nondeterministic
//! ingredient; they are carried in the rows but omitted from the output
//! unless explicitly requested, which keeps fixed-seed runs comparable
//! byte-for-byte across worker counts.
//!
//! CSV schemas (fixed column counts; a trailing `wall_ms` column appears
//! only when timings are requested):
//!
//! * threshold: `distance,model,p,p2,rounds,trials,failures,rate,wilson_low,wilson_high`
//!   where `p2` is `p_prime` (independent X/Z) or `q` (phenomenological),
//!   blank for depolarizing.
//! * lifetime summary: `system,size,beta,trials,failures,censored,median_lifetime,mean_lifetime,horizon`
//! * lifetime per-trial: `system,size,beta,trial,failure_time,steps` with
//!   `failure_time` blank for runs censored at the horizon.
//!
//! JSON output is a single pretty-printed document with `meta` and `rows`
//! (plus `trials` for lifetime tables); parsing it back yields the table
//! that produced it.

use crate::config::{ExperimentConfig, OutputFormat};
use crate::stats;
use planar_code::noise::NoiseModel;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Run provenance attached to every table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMeta {
    pub seed: u64,
    pub code_version: String,
    /// FNV-1a hash of the experiment's scientific content; see
    /// [`ExperimentConfig::content_hash`].
    pub config_hash: String,
}

impl RunMeta {
    pub fn new(seed: u64, config: &ExperimentConfig) -> RunMeta {
        RunMeta {
            seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.content_hash(),
        }
    }
}

/// One (distance, noise point) of a threshold sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub distance: usize,
    pub model: NoiseModel,
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

impl ResultRow {
    pub fn new(
        distance: usize,
        model: NoiseModel,
        trials: u64,
        failures: u64,
        wall_ms: Option<u64>,
    ) -> ResultRow {
        assert!(failures <= trials, "failures exceed trials");
        let (wilson_low, wilson_high) = stats::wilson_interval(failures, trials);
        ResultRow {
            distance,
            model,
            trials,
            failures,
            rate: failures as f64 / trials as f64,
            wilson_low,
            wilson_high,
            wall_ms,
        }
    }

    /// Primary error probability of this row's model.
    pub fn p(&self) -> f64 {
        match self.model {
            NoiseModel::IndependentXZ { p, .. }
            | NoiseModel::Depolarizing { p }
            | NoiseModel::Phenomenological { p, .. } => p,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub meta: RunMeta,
    pub rows: Vec<ResultRow>,
}

/// One (size, beta) summary of a lifetime sweep. Medians and means count
/// censored runs at the horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifetimeRow {
    pub system: String,
    pub size: usize,
    pub beta: f64,
    pub trials: u64,
    /// Runs that failed before the horizon.
    pub failures: u64,
    pub censored: u64,
    pub median_lifetime: f64,
    pub mean_lifetime: f64,
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

/// One thermal trajectory of a lifetime sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub system: String,
    pub size: usize,
    pub beta: f64,
    pub trial: u64,
    /// `None` when the run was censored at the horizon.
    pub failure_time: Option<f64>,
    pub steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifetimeTable {
    pub meta: RunMeta,
    pub rows: Vec<LifetimeRow>,
    pub trials: Vec<TrialRecord>,
}

fn strip_timings<T: Clone>(rows: &[T], clear: impl Fn(&mut T)) -> Vec<T> {
    rows.iter()
        .map(|r| {
            let mut r = r.clone();
            clear(&mut r);
            r
        })
        .collect()
}

impl ResultTable {
    pub fn to_json(&self, timings: bool) -> String {
        let table = if timings {
            self.clone()
        } else {
            ResultTable {
                meta: self.meta.clone(),
                rows: strip_timings(&self.rows, |r| r.wall_ms = None),
            }
        };
        let mut out = serde_json::to_string_pretty(&table).expect("table serializes");
        out.push('\n');
        out
    }

    pub fn from_json(src: &str) -> Result<ResultTable, serde_json::Error> {
        serde_json::from_str(src)
    }

    pub fn to_csv(&self, timings: bool) -> String {
        let mut out = String::from(
            "distance,model,p,p2,rounds,trials,failures,rate,wilson_low,wilson_high",
        );
        if timings {
            out.push_str(",wall_ms");
        }
        out.push('\n');
        for row in &self.rows {
            let (tag, p, p2, rounds) = match row.model {
                NoiseModel::IndependentXZ { p, p_prime } => {
                    ("independent_x_z", p, p_prime.to_string(), 1)
                }
                NoiseModel::Depolarizing { p } => ("depolarizing", p, String::new(), 1),
                NoiseModel::Phenomenological { p, q, rounds } => {
                    ("phenomenological", p, q.to_string(), rounds)
                }
            };
            let _ = write!(
                out,
                "{},{tag},{p},{p2},{rounds},{},{},{},{},{}",
                row.distance, row.trials, row.failures, row.rate, row.wilson_low, row.wilson_high,
            );
            if timings {
                let _ = write!(out, ",{}", row.wall_ms.unwrap_or(0));
            }
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: OutputFormat, timings: bool) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(timings),
            OutputFormat::Json => self.to_json(timings),
        }
    }
}

impl LifetimeTable {
    pub fn to_json(&self, timings: bool) -> String {
        let table = if timings {
            self.clone()
        } else {
            LifetimeTable {
                meta: self.meta.clone(),
                rows: strip_timings(&self.rows, |r| r.wall_ms = None),
                trials: self.trials.clone(),
            }
        };
        let mut out = serde_json::to_string_pretty(&table).expect("table serializes");
        out.push('\n');
        out
    }

    pub fn from_json(src: &str) -> Result<LifetimeTable, serde_json::Error> {
        serde_json::from_str(src)
    }

    /// Per-point summary CSV.
    pub fn to_csv(&self, timings: bool) -> String {
        let mut out = String::from(
            "system,size,beta,trials,failures,censored,median_lifetime,mean_lifetime,horizon",
        );
        if timings {
            out.push_str(",wall_ms");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                row.system,
                row.size,
                row.beta,
                row.trials,
                row.failures,
                row.censored,
                row.median_lifetime,
                row.mean_lifetime,
                row.horizon,
            );
            if timings {
                let _ = write!(out, ",{}", row.wall_ms.unwrap_or(0));
            }
            out.push('\n');
        }
        out
    }

    /// Per-trial failure-time CSV.
    pub fn trials_to_csv(&self) -> String {
        let mut out = String::from("system,size,beta,trial,failure_time,steps\n");
        for t in &self.trials {
            let failure = t.failure_time.map(|x| x.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{failure},{}",
                t.system, t.size, t.beta, t.trial, t.steps,
            );
        }
        out
    }

    pub fn render(&self, format: OutputFormat, timings: bool) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(timings),
            OutputFormat::Json => self.to_json(timings),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn sample_meta() -> RunMeta {
        RunMeta {
            seed: 42,
            code_version: "0.0.0-test".into(),
            config_hash: "00f00f00f00f00f0".into(),
        }
    }

    fn sample_table() -> ResultTable {
        ResultTable {
            meta: sample_meta(),
            rows: vec![
                ResultRow::new(
                    3,
                    NoiseModel::IndependentXZ { p: 0.05, p_prime: 0.0 },
                    1000,
                    61,
                    Some(17),
                ),
                ResultRow::new(5, NoiseModel::Depolarizing { p: 0.12 }, 1000, 345, Some(90)),
                ResultRow::new(
                    5,
                    NoiseModel::Phenomenological { p: 0.01, q: 0.01, rounds: 5 },
                    500,
                    0,
                    None,
                ),
            ],
        }
    }

    #[test]
    fn empty_table_renders_as_header_only_csv() {
        let table = ResultTable { meta: sample_meta(), rows: Vec::new() };
        assert_eq!(
            table.to_csv(false),
            "distance,model,p,p2,rounds,trials,failures,rate,wilson_low,wilson_high\n"
        );
    }

    #[test]
    fn csv_has_a_fixed_column_count() {
        let csv = sample_table().to_csv(false);
        for line in csv.lines() {
            assert_eq!(line.split(',').count(), 10, "line {line:?}");
        }
        let with_timings = sample_table().to_csv(true);
        for line in with_timings.lines() {
            assert_eq!(line.split(',').count(), 11, "line {line:?}");
        }
    }

    #[test]
    fn json_round_trip_is_identity() {
        let table = sample_table();
        let json = table.to_json(true);
        let back = ResultTable::from_json(&json).unwrap();
        assert_eq!(back, table);
        assert_eq!(back.to_json(true), json);

        let bare = table.to_json(false);
        let back = ResultTable::from_json(&bare).unwrap();
        assert!(back.rows.iter().all(|r| r.wall_ms.is_none()));
        assert_eq!(back.to_json(false), bare);
    }

    #[test]
    fn emission_is_byte_stable() {
        let a = sample_table();
        let b = sample_table();
        assert_eq!(a.to_csv(true), b.to_csv(true));
        assert_eq!(a.to_json(true), b.to_json(true));
    }

    #[test]
    fn timings_are_omitted_unless_requested() {
        let csv = sample_table().to_csv(false);
        assert!(!csv.contains("wall_ms"));
        let json = sample_table().to_json(false);
        assert!(!json.contains("wall_ms"));
        let with = sample_table().to_csv(true);
        assert!(with.starts_with("distance") && with.contains("wall_ms"));
    }

    #[test]
    fn content_hash_ignores_execution_plumbing() {
        let base = r#"{
            "experiment": "threshold",
            "distances": [3],
            "noise": { "family": "depolarizing", "p": [0.1] },
            "trials": 10,
            "seed": 1
        }"#;
        let a = ExperimentConfig::from_json_str(base).unwrap();
        let moved = base.replace(
            "\"seed\": 1",
            r#""seed": 1, "workers": 8, "output": { "path": "x.csv" }"#,
        );
        let b = ExperimentConfig::from_json_str(&moved).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        let rescienced = base.replace("\"seed\": 1", "\"seed\": 2");
        let c = ExperimentConfig::from_json_str(&rescienced).unwrap();
        assert_ne!(a.content_hash(), c.content_hash());
    }

    #[test]
    fn lifetime_tables_render_summary_and_trials() {
        let table = LifetimeTable {
            meta: sample_meta(),
            rows: vec![LifetimeRow {
                system: "ising_1d".into(),
                size: 16,
                beta: 2.0,
                trials: 2,
                failures: 1,
                censored: 1,
                median_lifetime: 600.0,
                mean_lifetime: 600.0,
                horizon: 1024.0,
                wall_ms: Some(3),
            }],
            trials: vec![
                TrialRecord {
                    system: "ising_1d".into(),
                    size: 16,
                    beta: 2.0,
                    trial: 0,
                    failure_time: Some(176.0),
                    steps: 420,
                },
                TrialRecord {
                    system: "ising_1d".into(),
                    size: 16,
                    beta: 2.0,
                    trial: 1,
                    failure_time: None,
                    steps: 37,
                },
            ],
        };
        let csv = table.to_csv(false);
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().all(|l| l.split(',').count() == 9));
        let trials = table.trials_to_csv();
        assert_eq!(trials.lines().count(), 3);
        assert!(trials.contains("ising_1d,16,2,1,,37"));
        let json = table.to_json(true);
        assert_eq!(LifetimeTable::from_json(&json).unwrap(), table);
    }
}

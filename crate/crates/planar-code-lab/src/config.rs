//! Experiment configuration: a single JSON document per run.
//!
//! The document's `experiment` field selects the kind; the remaining
//! fields belong to that kind's section below. CLI flags (`--seed`,
//! `--workers`, `--out`, ...) override the corresponding config fields;
//! everything else comes from the file. Unknown fields are rejected.

use std::fmt;
use std::path::PathBuf;

use planar_code::frame::Syndrome;
use planar_code::noise::NoiseModel;
use planar_code::thermal::SystemKind;
use serde::{Deserialize, Serialize};

/// One experiment, as parsed from a config document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Threshold(ThresholdConfig),
    Decode(DecodeConfig),
    BraidDemo(BraidDemoConfig),
    Lifetime(LifetimeConfig),
}

/// Monte Carlo threshold sweep over distances and a noise grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    /// Code distances, each at least 2.
    pub distances: Vec<usize>,
    pub noise: NoiseGrid,
    /// Trials per (distance, grid point).
    pub trials: u64,
    /// Master seed; every trial stream derives from it.
    pub seed: u64,
    /// Which logical observables count as failure. `either` is the memory
    /// failure rate; the single-sector rules measure one marginal, the
    /// quantity whose threshold the mismatched-decoder literature quotes
    /// for depolarizing noise.
    #[serde(default)]
    pub failure: FailureRule,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

/// Failure counting rule for threshold sweeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureRule {
    /// Either logical observable flipped.
    #[default]
    Either,
    /// Only the X observable (flipped by Z-type residuals).
    XLogical,
    /// Only the Z observable (flipped by X-type residuals).
    ZLogical,
}

impl FailureRule {
    /// Arguments name the corrupted observable, not the error species:
    /// `x_observable` is true when a Z-type residual anticommutes with
    /// logical X, `z_observable` when an X-type residual hits logical Z.
    pub fn failed(&self, x_observable: bool, z_observable: bool) -> bool {
        match self {
            FailureRule::Either => x_observable || z_observable,
            FailureRule::XLogical => x_observable,
            FailureRule::ZLogical => z_observable,
        }
    }
}

/// Decode a stored syndrome document (see [`SyndromeFile`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeConfig {
    /// Path of the syndrome JSON document.
    pub syndrome: PathBuf,
}

/// Hole-braiding CNOT demonstration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BraidDemoConfig {
    /// Patch distance; the two-hole braid needs at least 8.
    pub distance: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Thermal memory-lifetime sweep over system sizes and temperatures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifetimeConfig {
    pub family: SystemFamily,
    /// Linear sizes (chain length or lattice side), each at least 2.
    pub sizes: Vec<usize>,
    /// Inverse temperatures; infinity freezes the dynamics.
    pub betas: Vec<f64>,
    /// Exchange coupling J.
    #[serde(default = "one_f64")]
    pub j: f64,
    /// Simulated-time horizon; every run is censored there.
    pub horizon: f64,
    /// Trials per (size, beta) point.
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    /// Where to write the per-trial failure-time CSV. Defaults to the
    /// summary path with a `-trials` suffix when `output` names a file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_trial: Option<PathBuf>,
}

/// System family for lifetime sweeps; the swept size completes it to a
/// concrete [`SystemKind`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SystemFamily {
    #[serde(rename = "ising_1d")]
    Ising1D,
    #[serde(rename = "ising_2d")]
    Ising2D {
        #[serde(default)]
        periodic: bool,
    },
    #[serde(rename = "toric_code_x_basis")]
    ToricCodeXBasis {
        #[serde(default = "one_f64")]
        j_s: f64,
        #[serde(default = "one_f64")]
        j_p: f64,
    },
}

impl SystemFamily {
    pub fn kind(&self, size: usize) -> SystemKind {
        match *self {
            SystemFamily::Ising1D => SystemKind::Ising1D { length: size },
            SystemFamily::Ising2D { periodic } => SystemKind::Ising2D { side: size, periodic },
            SystemFamily::ToricCodeXBasis { j_s, j_p } => {
                SystemKind::ToricCodeXBasis { side: size, j_s, j_p }
            }
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            SystemFamily::Ising1D => "ising_1d",
            SystemFamily::Ising2D { .. } => "ising_2d",
            SystemFamily::ToricCodeXBasis { .. } => "toric_code_x_basis",
        }
    }
}

/// A noise family plus the grid of primary error probabilities to sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum NoiseGrid {
    /// Independent X and Z flips. `p_prime` fixes the Z rate at one value
    /// for the whole grid; omitted, it tracks `p` (symmetric noise).
    /// `p_prime: 0` is the pure bit-flip channel.
    #[serde(rename = "independent_x_z")]
    IndependentXZ {
        p: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_prime: Option<f64>,
    },
    #[serde(rename = "depolarizing")]
    Depolarizing { p: Vec<f64> },
    /// Repeated noisy readout. `q` fixes the measurement-flip rate;
    /// omitted, it tracks `p`.
    #[serde(rename = "phenomenological")]
    Phenomenological {
        p: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<f64>,
        rounds: RoundsSpec,
    },
}

impl NoiseGrid {
    pub fn points(&self) -> &[f64] {
        match self {
            NoiseGrid::IndependentXZ { p, .. }
            | NoiseGrid::Depolarizing { p }
            | NoiseGrid::Phenomenological { p, .. } => p,
        }
    }

    /// Concrete model for grid point `p` at distance `d`.
    pub fn model_at(&self, p: f64, d: usize) -> NoiseModel {
        match self {
            NoiseGrid::IndependentXZ { p_prime, .. } => NoiseModel::IndependentXZ {
                p,
                p_prime: p_prime.unwrap_or(p),
            },
            NoiseGrid::Depolarizing { .. } => NoiseModel::Depolarizing { p },
            NoiseGrid::Phenomenological { q, rounds, .. } => NoiseModel::Phenomenological {
                p,
                q: q.unwrap_or(p),
                rounds: rounds.at(d),
            },
        }
    }
}

/// Measurement-round count: a fixed number, or `"d"` to match the code
/// distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RoundsSpec {
    Fixed(usize),
    Scaled(ScaledRounds),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScaledRounds {
    #[serde(rename = "d")]
    Distance,
}

impl RoundsSpec {
    pub fn at(&self, d: usize) -> usize {
        match *self {
            RoundsSpec::Fixed(n) => n,
            RoundsSpec::Scaled(ScaledRounds::Distance) => d,
        }
    }
}

/// Destination and format of the emitted result table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// On-disk input for the `decode` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyndromeFile {
    pub distance: usize,
    /// Model the syndrome was produced under; only its round structure
    /// matters for decoding. Omitted, it is inferred from the syndrome.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<NoiseModel>,
    pub syndrome: Syndrome,
}

impl SyndromeFile {
    /// The declared model, or a minimal one consistent with the syndrome's
    /// round structure.
    pub fn effective_model(&self) -> NoiseModel {
        self.model.clone().unwrap_or_else(|| match &self.syndrome.rounds {
            Some(rounds) => NoiseModel::Phenomenological { p: 0.0, q: 0.0, rounds: rounds.len() },
            None => NoiseModel::Depolarizing { p: 0.0 },
        })
    }
}

fn one() -> usize {
    1
}

fn one_f64() -> f64 {
    1.0
}

/// A config or syndrome document failed to parse or validate.
#[derive(Debug)]
pub struct ConfigError {
    /// 1-based line in the source document, when known.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Best-effort line of the first occurrence of `"key"` in `src`.
fn line_of_key(src: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    let at = src.find(&needle)?;
    Some(1 + src[..at].bytes().filter(|&b| b == b'\n').count())
}

fn invalid(src: &str, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { line: line_of_key(src, key), message: message.into() }
}

impl ExperimentConfig {
    /// Parse and validate a config document, reporting the offending line.
    pub fn from_json_str(src: &str) -> Result<ExperimentConfig, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(src).map_err(|e| ConfigError {
            line: Some(e.line()).filter(|&l| l > 0),
            message: e.to_string(),
        })?;
        cfg.validate(src)?;
        Ok(cfg)
    }

    /// FNV-1a hash of the scientific content, as 16 hex digits. Execution
    /// plumbing (worker count, output destinations) is normalized away
    /// first: two runs that differ only in where or how fast they execute
    /// carry the same tag.
    pub fn content_hash(&self) -> String {
        let mut canon = self.clone();
        match &mut canon {
            ExperimentConfig::Threshold(t) => {
                t.workers = 1;
                t.output = None;
            }
            ExperimentConfig::Lifetime(l) => {
                l.workers = 1;
                l.output = None;
                l.per_trial = None;
            }
            ExperimentConfig::Decode(_) | ExperimentConfig::BraidDemo(_) => {}
        }
        let bytes = serde_json::to_vec(&canon).expect("config serializes");
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for b in bytes {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ExperimentConfig::Threshold(_) => "threshold",
            ExperimentConfig::Decode(_) => "decode",
            ExperimentConfig::BraidDemo(_) => "braid-demo",
            ExperimentConfig::Lifetime(_) => "lifetime",
        }
    }

    /// Semantic checks beyond the schema. `src` is the original document,
    /// used only to point diagnostics at a line.
    fn validate(&self, src: &str) -> Result<(), ConfigError> {
        match self {
            ExperimentConfig::Threshold(t) => t.validate(src),
            ExperimentConfig::Decode(_) => Ok(()),
            ExperimentConfig::BraidDemo(b) => {
                if b.distance < 8 {
                    return Err(invalid(
                        src,
                        "distance",
                        format!("braid demo needs distance >= 8, got {}", b.distance),
                    ));
                }
                Ok(())
            }
            ExperimentConfig::Lifetime(l) => l.validate(src),
        }
    }
}

impl ThresholdConfig {
    pub(crate) fn validate(&self, src: &str) -> Result<(), ConfigError> {
        if self.distances.is_empty() {
            return Err(invalid(src, "distances", "distance list is empty"));
        }
        if let Some(&d) = self.distances.iter().find(|&&d| d < 2) {
            return Err(invalid(src, "distances", format!("distance {d} is below 2")));
        }
        if self.noise.points().is_empty() {
            return Err(invalid(src, "p", "noise grid is empty"));
        }
        let bad_prob = |x: f64| !(0.0..=1.0).contains(&x) || x.is_nan();
        if let Some(&p) = self.noise.points().iter().find(|&&p| bad_prob(p)) {
            return Err(invalid(src, "p", format!("error probability {p} outside [0, 1]")));
        }
        match &self.noise {
            NoiseGrid::IndependentXZ { p_prime: Some(pp), .. } if bad_prob(*pp) => {
                return Err(invalid(src, "p_prime", format!("probability {pp} outside [0, 1]")));
            }
            NoiseGrid::Phenomenological { q: Some(q), .. } if bad_prob(*q) => {
                return Err(invalid(src, "q", format!("probability {q} outside [0, 1]")));
            }
            NoiseGrid::Phenomenological { rounds: RoundsSpec::Fixed(0), .. } => {
                return Err(invalid(src, "rounds", "round count must be at least 1"));
            }
            _ => {}
        }
        if self.trials == 0 {
            return Err(invalid(src, "trials", "trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(invalid(src, "workers", "worker count must be at least 1"));
        }
        Ok(())
    }
}

impl LifetimeConfig {
    pub(crate) fn validate(&self, src: &str) -> Result<(), ConfigError> {
        if self.sizes.is_empty() {
            return Err(invalid(src, "sizes", "size list is empty"));
        }
        if let Some(&s) = self.sizes.iter().find(|&&s| s < 2) {
            return Err(invalid(src, "sizes", format!("size {s} is below 2")));
        }
        if self.betas.is_empty() {
            return Err(invalid(src, "betas", "beta list is empty"));
        }
        if let Some(&b) = self.betas.iter().find(|&&b| !(b > 0.0)) {
            return Err(invalid(src, "betas", format!("inverse temperature {b} is not positive")));
        }
        if !(self.j > 0.0) {
            return Err(invalid(src, "j", format!("coupling {} is not positive", self.j)));
        }
        if let SystemFamily::ToricCodeXBasis { j_s, j_p } = self.family {
            if !(j_s > 0.0) || !(j_p > 0.0) {
                return Err(invalid(src, "family", "toric couplings must be positive"));
            }
        }
        if !(self.horizon > 0.0) || self.horizon.is_infinite() {
            return Err(invalid(src, "horizon", format!("horizon {} is not a positive finite time", self.horizon)));
        }
        if self.trials == 0 {
            return Err(invalid(src, "trials", "trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(invalid(src, "workers", "worker count must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const THRESHOLD_DOC: &str = r#"{
        "experiment": "threshold",
        "distances": [3, 5],
        "noise": { "family": "independent_x_z", "p": [0.05, 0.1], "p_prime": 0.0 },
        "trials": 100,
        "seed": 7,
        "workers": 2
    }"#;

    #[test]
    fn threshold_document_round_trips() {
        let cfg = ExperimentConfig::from_json_str(THRESHOLD_DOC).unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_json_str(&json).unwrap();
        assert_eq!(cfg, back);
        match &cfg {
            ExperimentConfig::Threshold(t) => {
                assert_eq!(t.noise.points(), &[0.05, 0.1]);
                assert_eq!(
                    t.noise.model_at(0.05, 3),
                    planar_code::noise::NoiseModel::IndependentXZ { p: 0.05, p_prime: 0.0 }
                );
            }
            other => panic!("wrong kind: {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let doc = THRESHOLD_DOC.replace("\"seed\": 7", "\"seed\": 7, \"bogus\": 1");
        let err = ExperimentConfig::from_json_str(&doc).unwrap_err();
        assert!(err.message.contains("bogus"), "{err}");
    }

    #[test]
    fn semantic_errors_point_at_the_offending_line() {
        let doc = THRESHOLD_DOC.replace("\"trials\": 100", "\"trials\": 0");
        let err = ExperimentConfig::from_json_str(&doc).unwrap_err();
        assert!(err.message.contains("trials"), "{err}");
        let wanted = doc.lines().position(|l| l.contains("\"trials\"")).unwrap() + 1;
        assert_eq!(err.line, Some(wanted));
    }

    #[test]
    fn parse_errors_carry_a_line_number() {
        let doc = "{\n  \"experiment\": \"threshold\",\n  \"distances\": [3,,5]\n}";
        let err = ExperimentConfig::from_json_str(doc).unwrap_err();
        assert_eq!(err.line, Some(3));
    }

    #[test]
    fn rounds_spec_accepts_number_or_distance() {
        let fixed: RoundsSpec = serde_json::from_str("4").unwrap();
        assert_eq!(fixed.at(9), 4);
        let scaled: RoundsSpec = serde_json::from_str("\"d\"").unwrap();
        assert_eq!(scaled.at(9), 9);
    }

    #[test]
    fn lifetime_document_validates_families() {
        let doc = r#"{
            "experiment": "lifetime",
            "family": { "kind": "ising_2d", "periodic": true },
            "sizes": [8, 16],
            "betas": [0.5, 1.0],
            "horizon": 1024.0,
            "trials": 10,
            "seed": 3
        }"#;
        let cfg = ExperimentConfig::from_json_str(doc).unwrap();
        let ExperimentConfig::Lifetime(l) = &cfg else { panic!("wrong kind") };
        assert_eq!(l.workers, 1);
        assert_eq!(
            l.family.kind(8),
            planar_code::thermal::SystemKind::Ising2D { side: 8, periodic: true }
        );
        let bad = doc.replace("\"betas\": [0.5, 1.0]", "\"betas\": []");
        let err = ExperimentConfig::from_json_str(&bad).unwrap_err();
        assert!(err.message.contains("beta"), "{err}");
    }
}

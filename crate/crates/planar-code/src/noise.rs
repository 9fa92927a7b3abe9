//! Stochastic error models.
//!
//! All sampling is driven by a counter-based ChaCha generator so that a
//! master seed plus a trial index fully determines every sample, no matter
//! how trials are scheduled across threads. Each trial gets its own stream
//! (`set_stream(trial)`), which ChaCha guarantees to be statistically
//! independent of every other stream under the same seed.

use crate::frame::{PauliFrame, RoundSyndrome, Syndrome, SyndromeMasks};
use crate::geometry::StabKind;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// An error channel applied to every data qubit of a code block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum NoiseModel {
    /// X with probability `p` and, independently, Z with probability
    /// `p_prime`, per qubit.
    IndependentXZ { p: f64, p_prime: f64 },
    /// X, Y or Z each with probability `p/3`, per qubit.
    Depolarizing { p: f64 },
    /// `rounds` cycles of independent X and Z per qubit per round
    /// (probability `p` each) with unreliable stabilizer readout: every
    /// reported stabilizer bit flips with probability `q`, except in the
    /// final round, which is read perfectly.
    Phenomenological { p: f64, q: f64, rounds: usize },
}

/// One round of a phenomenological history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundSample {
    /// Errors newly inflicted during this round.
    pub increment: PauliFrame,
    /// Plaquette measurement bits to flip this round (readout noise).
    pub m_flips: Vec<usize>,
    /// Vertex measurement bits to flip this round.
    pub e_flips: Vec<usize>,
}

/// Output of a noise draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSample {
    /// Accumulated data error over the whole history.
    pub frame: PauliFrame,
    /// Per-round detail, present only for the phenomenological model.
    pub rounds: Option<Vec<RoundSample>>,
}

/// Deterministic per-trial generator: same `(seed, trial)` always yields
/// the same stream regardless of thread scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

impl NoiseModel {
    /// Rounds of measurement this model implies (1 = a single perfect
    /// readout at the end).
    pub fn rounds(&self) -> usize {
        match self {
            NoiseModel::Phenomenological { rounds, .. } => *rounds,
            _ => 1,
        }
    }

    /// Draw one error history over `n_qubits` data qubits. For the
    /// phenomenological model `n_plaquettes`/`n_vertices` size the readout
    /// flip lists; the memoryless models ignore them.
    pub fn sample(
        &self,
        n_qubits: usize,
        n_plaquettes: usize,
        n_vertices: usize,
        rng: &mut ChaCha8Rng,
    ) -> NoiseSample {
        match *self {
            NoiseModel::IndependentXZ { p, p_prime } => {
                let mut frame = PauliFrame::new(n_qubits);
                for q in 0..n_qubits {
                    if rng.gen::<f64>() < p {
                        frame.flip_x(q);
                    }
                    if rng.gen::<f64>() < p_prime {
                        frame.flip_z(q);
                    }
                }
                NoiseSample { frame, rounds: None }
            }
            NoiseModel::Depolarizing { p } => {
                let mut frame = PauliFrame::new(n_qubits);
                for q in 0..n_qubits {
                    if rng.gen::<f64>() < p {
                        match rng.gen_range(0..3u8) {
                            0 => frame.flip_x(q),
                            1 => frame.flip_y(q),
                            _ => frame.flip_z(q),
                        }
                    }
                }
                NoiseSample { frame, rounds: None }
            }
            NoiseModel::Phenomenological { p, q, rounds } => {
                let mut total = PauliFrame::new(n_qubits);
                let mut history = Vec::with_capacity(rounds);
                for round in 0..rounds {
                    let mut increment = PauliFrame::new(n_qubits);
                    for qubit in 0..n_qubits {
                        if rng.gen::<f64>() < p {
                            increment.flip_x(qubit);
                        }
                        if rng.gen::<f64>() < p {
                            increment.flip_z(qubit);
                        }
                    }
                    total.xor_with(&increment);
                    // The final round is read out perfectly.
                    let (m_flips, e_flips) = if round + 1 == rounds {
                        (Vec::new(), Vec::new())
                    } else {
                        let m = (0..n_plaquettes)
                            .filter(|_| rng.gen::<f64>() < q)
                            .collect();
                        let e = (0..n_vertices)
                            .filter(|_| rng.gen::<f64>() < q)
                            .collect();
                        (m, e)
                    };
                    history.push(RoundSample { increment, m_flips, e_flips });
                }
                NoiseSample { frame: total, rounds: Some(history) }
            }
        }
    }
}

impl NoiseSample {
    /// The syndrome a detector would report for this sample: exact for the
    /// memoryless models, and per-round cumulative measured syndromes
    /// (true syndrome of the accumulated error, XORed with that round's
    /// readout flips) for the phenomenological model. The final round is
    /// read perfectly, so the top-level defect lists are the true final
    /// syndrome. Readout flips on disabled stabilizers are ignored.
    pub fn measured_syndrome(&self, masks: &SyndromeMasks) -> Syndrome {
        let rounds = match &self.rounds {
            None => return masks.syndrome(&self.frame),
            Some(rounds) => rounds,
        };
        let toggle = |mut fired: Vec<usize>, flips: &[usize], kind: StabKind| -> Vec<usize> {
            for &s in flips {
                if !masks.is_enabled(kind, s) {
                    continue;
                }
                match fired.binary_search(&s) {
                    Ok(i) => {
                        fired.remove(i);
                    }
                    Err(i) => fired.insert(i, s),
                }
            }
            fired
        };
        let mut acc = PauliFrame::new(self.frame.len());
        let mut out = Vec::with_capacity(rounds.len());
        for r in rounds {
            acc.xor_with(&r.increment);
            out.push(RoundSyndrome {
                m_defects: toggle(masks.fired(StabKind::Plaquette, &acc), &r.m_flips, StabKind::Plaquette),
                e_defects: toggle(masks.fired(StabKind::Vertex, &acc), &r.e_flips, StabKind::Vertex),
            });
        }
        let last = out.last().expect("phenomenological sample has rounds");
        Syndrome {
            m_defects: last.m_defects.clone(),
            e_defects: last.e_defects.clone(),
            rounds: Some(out),
        }
    }
}

/// Probability that a thermally driven spin has flipped after time `t`
/// under flip rate `gamma`: `(1 - exp(-gamma t)) / 2`, saturating at 1/2.
pub fn flip_probability(gamma: f64, t: f64) -> f64 {
    (1.0 - (-gamma * t).exp()) / 2.0
}

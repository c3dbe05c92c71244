// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Finite-shot estimates of the entropy-production statistics, with
//! bootstrap error bars.
//!
//! Every probability that enters the estimators is measured as an
//! independent dataset of `shots` repetitions, each recording whether the
//! final energy measurement found level 1:
//!
//! | dataset | prepared state      | evolution | estimates     |
//! |---------|---------------------|-----------|---------------|
//! | A       | `ρ₀`                | `Φ`       | `p_f(ρ₀)`, outcome weights |
//! | B       | `ρ₀`                | `Φ`       | `p_f(ρ₀)`, numerator of `ΔΣ` |
//! | C       | `ρ_th(β)`           | `Φ`       | `p_f(ρ_th)`   |
//! | D       | `ρ_th(β)`           | `Φ̃`       | `p̃_i(ρ_th)`   |
//!
//! Outcome weights (A) and the logarithms (B, C, D) come from separate runs,
//! so `⟨e^{−ΔΣ}⟩ = Σ_f Â_f Ĉ_f / B̂_f` fluctuates around 1 instead of being
//! identically 1. Initial populations and `β` are those of the prepared
//! state.
//!
//! Error bars are the standard deviation over bootstrap resamples; each
//! resample redraws every dataset count as `k* ~ Bin(n, k/n)`, which is the
//! nonparametric bootstrap of `n` Bernoulli outcomes.
//!
//! Random numbers come from ChaCha20 seeded with `seed_from_u64(seed)`, one
//! stream per (grid point, dataset, resample), so results do not depend on
//! thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::channel::QuantumChannel;
use crate::thermo::{decompose_state, DensityMatrix, EnergyLevels};
use crate::{Error, Result};

/// Generator name recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha20";
/// Crate providing [`RNG_ALGORITHM`].
pub const RNG_IMPLEMENTATION: &str = "rand_chacha 0.9";
/// How seeds map to generator state.
pub const RNG_SEEDING: &str = "seed_from_u64(seed), set_stream(point<<24 | dataset<<20 | resample)";

pub const DEFAULT_SHOTS: u64 = 1_000_000;
pub const DEFAULT_RESAMPLES: u32 = 1000;

const MAX_RESAMPLES: u32 = (1 << 20) - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotConfig {
    pub shots: u64,
    pub seed: u64,
    pub bootstrap_resamples: u32,
}

impl Default for ShotConfig {
    fn default() -> Self {
        ShotConfig {
            shots: DEFAULT_SHOTS,
            seed: 0,
            bootstrap_resamples: DEFAULT_RESAMPLES,
        }
    }
}

impl ShotConfig {
    pub fn new(shots: u64, seed: u64, bootstrap_resamples: u32) -> Result<Self> {
        let config = ShotConfig {
            shots,
            seed,
            bootstrap_resamples,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::Domain("shots must be at least 1".into()));
        }
        if self.bootstrap_resamples == 0 || self.bootstrap_resamples > MAX_RESAMPLES {
            return Err(Error::Domain(format!(
                "bootstrap resamples must be in 1..={MAX_RESAMPLES}"
            )));
        }
        Ok(())
    }
}

/// Exact probabilities, or finite-shot sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingMode {
    Analytic,
    Shots(ShotConfig),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalEstimate {
    pub value: f64,
    pub std_err: f64,
    /// Zero for analytic values.
    pub shots: u64,
}

impl EmpiricalEstimate {
    pub fn exact(value: f64) -> Self {
        EmpiricalEstimate {
            value,
            std_err: 0.0,
            shots: 0,
        }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn stream_id(point: u64, dataset: u64, resample: u64) -> u64 {
    (point << 24) | (dataset << 20) | resample
}

fn checked_probability(prob: f64) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    if !(prob >= -SLACK && prob <= 1.0 + SLACK) {
        return Err(Error::Domain(format!("probability {prob} outside [0, 1]")));
    }
    Ok(prob.clamp(0.0, 1.0))
}

fn binomial_draw(n: u64, p: f64, rng: &mut ChaCha20Rng) -> u64 {
    match p {
        p if p <= 0.0 => 0,
        p if p >= 1.0 => n,
        p => Binomial::new(n, p).expect("validated probability").sample(rng),
    }
}

/// Level-1 frequency out of `shots` Bernoulli(`prob`) trials drawn from
/// stream `stream`; `std_err = √(p̂(1 − p̂)/n)`.
pub fn sample_probability(prob: f64, shots: u64, seed: u64, stream: u64) -> Result<EmpiricalEstimate> {
    let p = checked_probability(prob)?;
    if shots == 0 {
        return Err(Error::Domain("shots must be at least 1".into()));
    }
    let k = binomial_draw(shots, p, &mut rng_for(seed, stream));
    let n = shots as f64;
    let value = k as f64 / n;
    Ok(EmpiricalEstimate {
        value,
        std_err: (value * (1.0 - value) / n).sqrt(),
        shots,
    })
}

pub fn sample_marginal(prob: f64, config: &ShotConfig) -> Result<EmpiricalEstimate> {
    config.validate()?;
    sample_probability(prob, config.shots, config.seed, 0)
}

/// Level-1 probabilities of the four datasets.
#[derive(Clone, Copy, Debug)]
struct Datasets {
    trajectory: f64,
    calibration: f64,
    thermal: f64,
    backward: f64,
}

impl Datasets {
    fn as_array(&self) -> [f64; 4] {
        [self.trajectory, self.calibration, self.thermal, self.backward]
    }

    fn from_array(a: [f64; 4]) -> Self {
        Datasets {
            trajectory: a[0],
            calibration: a[1],
            thermal: a[2],
            backward: a[3],
        }
    }
}

fn levels_of(level1: f64) -> [f64; 2] {
    [1.0 - level1, level1]
}

/// Quantities derived from one set of dataset probabilities.
#[derive(Clone, Copy, Debug, Default)]
struct Derived {
    big_sigma: [Option<f64>; 2],
    mean_big_sigma: f64,
    exp_mean_big_sigma: f64,
    mean_sigma: f64,
    exp_mean_total: f64,
    mean_de: f64,
    beta_mean_de: f64,
    bound_charfn: f64,
    bound_entropy: f64,
    tpm_mean: f64,
    coherence_term: f64,
    dropped: u64,
}

const DERIVED_FIELDS: usize = 11;

impl Derived {
    fn scalars(&self) -> [Option<f64>; DERIVED_FIELDS] {
        [
            self.big_sigma[0],
            self.big_sigma[1],
            Some(self.mean_big_sigma),
            Some(self.exp_mean_big_sigma),
            Some(self.mean_sigma),
            Some(self.exp_mean_total),
            Some(self.mean_de),
            Some(self.beta_mean_de),
            Some(self.bound_charfn),
            Some(self.bound_entropy),
            Some(self.tpm_mean),
        ]
    }
}

struct Prepared {
    beta: f64,
    populations: [f64; 2],
    energies: [f64; 2],
}

fn derive(prep: &Prepared, d: &Datasets) -> Derived {
    let weight = levels_of(d.trajectory);
    let calibration = levels_of(d.calibration);
    let thermal = levels_of(d.thermal);
    let backward = levels_of(d.backward);
    let e = prep.energies;
    let p = prep.populations;

    let mut out = Derived::default();
    let mut big_sigma = [None; 2];
    for f in 0..2 {
        if calibration[f] > 0.0 && thermal[f] > 0.0 {
            big_sigma[f] = Some((calibration[f] / thermal[f]).ln());
        } else if weight[f] > 0.0 {
            out.dropped += 1;
        }
    }
    let mut sigma = [[None; 2]; 2];
    for i in 0..2 {
        for f in 0..2 {
            if thermal[f] > 0.0 && backward[i] > 0.0 {
                sigma[i][f] = Some((thermal[f] / backward[i]).ln());
            } else if p[i] * weight[f] > 0.0 {
                out.dropped += 1;
            }
        }
    }

    let mut g = 0.0;
    for i in 0..2 {
        for f in 0..2 {
            let w = p[i] * weight[f];
            if w <= 0.0 {
                continue;
            }
            let de = e[f] - e[i];
            out.mean_de += w * de;
            if let Some(bs) = big_sigma[f] {
                out.mean_big_sigma += w * bs;
                out.exp_mean_big_sigma += w * (-bs).exp();
            }
            if let Some(s) = sigma[i][f] {
                out.mean_sigma += w * s;
            }
            if let (Some(bs), Some(s)) = (big_sigma[f], sigma[i][f]) {
                out.exp_mean_total += w * (-prep.beta * de - s - bs).exp();
            }
        }
        g += p[i] * weight[i];
    }
    let initial_energy = p[0] * e[0] + p[1] * e[1];
    out.tpm_mean = thermal[0] * e[0] + thermal[1] * e[1] - initial_energy;
    out.coherence_term = (calibration[0] - thermal[0]) * e[0] + (calibration[1] - thermal[1]) * e[1];
    out.big_sigma = big_sigma;
    out.beta_mean_de = prep.beta * out.mean_de;
    out.bound_charfn = -(2.0 * g).ln();
    out.bound_entropy = -(out.mean_sigma + out.mean_big_sigma);
    out
}

/// Finite-shot entropy ledger for one grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalLedger {
    pub beta: f64,
    /// `ΔΣ` for final outcome `f`; `None` when a required frequency was zero.
    pub big_sigma: [Option<EmpiricalEstimate>; 2],
    pub mean_big_sigma: EmpiricalEstimate,
    pub exp_mean_big_sigma: EmpiricalEstimate,
    pub mean_sigma: EmpiricalEstimate,
    pub exp_mean_total: EmpiricalEstimate,
    pub mean_de: EmpiricalEstimate,
    pub beta_mean_de: EmpiricalEstimate,
    pub bound_charfn: EmpiricalEstimate,
    pub bound_entropy: EmpiricalEstimate,
    pub tpm_mean: EmpiricalEstimate,
    pub coherence_term: EmpiricalEstimate,
    /// Outcomes left out of an average because a logarithm needed a zero
    /// frequency, summed over the point estimate and all resamples.
    pub dropped_outcomes: u64,
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Entropy-production statistics of `ρ₀` under `forward`, with the backward
/// process `reversed`, either exact or estimated from finite shots.
///
/// `point` identifies the grid point (for example the pulse count) and
/// selects independent random streams for each point under one seed.
pub fn empirical_ledger<C, R>(
    rho0: &DensityMatrix<f64>,
    levels: &EnergyLevels<f64>,
    forward: &C,
    reversed: &R,
    mode: &SamplingMode,
    point: u64,
) -> Result<EmpiricalLedger>
where
    C: QuantumChannel<f64> + ?Sized + Sync,
    R: QuantumChannel<f64> + ?Sized + Sync,
{
    let decomposition = decompose_state(rho0, levels)?;
    let thermal_state = *decomposition.thermal_state().matrix();
    let exact = Datasets {
        trajectory: forward.final_populations(rho0.matrix())[1],
        calibration: forward.final_populations(rho0.matrix())[1],
        thermal: forward.final_populations(&thermal_state)[1],
        backward: reversed.final_populations(&thermal_state)[1],
    };
    let prep = Prepared {
        beta: decomposition.beta,
        populations: decomposition.populations,
        energies: levels.energies(),
    };

    let config = match mode {
        SamplingMode::Analytic => {
            let d = derive(&prep, &exact);
            return Ok(assemble(prep.beta, &d, None, d.dropped));
        }
        SamplingMode::Shots(config) => {
            config.validate()?;
            *config
        }
    };
    if point >= 1 << 40 {
        return Err(Error::Domain("grid point index too large".into()));
    }

    let n = config.shots;
    let probs = exact.as_array().map(checked_probability);
    let mut counts = [0u64; 4];
    for (k, p) in probs.into_iter().enumerate() {
        let mut rng = rng_for(config.seed, stream_id(point, k as u64, 0));
        counts[k] = binomial_draw(n, p?, &mut rng);
    }
    let freq = counts.map(|k| k as f64 / n as f64);
    let point_estimate = derive(&prep, &Datasets::from_array(freq));

    let resamples: Vec<Derived> = (1..=config.bootstrap_resamples as u64)
        .into_par_iter()
        .map(|r| {
            let star = std::array::from_fn(|k| {
                let mut rng = rng_for(config.seed, stream_id(point, k as u64, r));
                binomial_draw(n, freq[k], &mut rng) as f64 / n as f64
            });
            derive(&prep, &Datasets::from_array(star))
        })
        .collect();

    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(resamples.len()); DERIVED_FIELDS + 1];
    let mut dropped = point_estimate.dropped;
    for d in &resamples {
        dropped += d.dropped;
        for (k, v) in d.scalars().into_iter().enumerate() {
            if let Some(v) = v {
                columns[k].push(v);
            }
        }
        columns[DERIVED_FIELDS].push(d.coherence_term);
    }
    let errors: Vec<f64> = columns.iter().map(|c| sample_std(c)).collect();
    Ok(assemble(prep.beta, &point_estimate, Some((&errors, n)), dropped))
}

fn assemble(beta: f64, d: &Derived, errors: Option<(&[f64], u64)>, dropped: u64) -> EmpiricalLedger {
    let est = |k: usize, value: f64| match errors {
        Some((e, n)) => EmpiricalEstimate {
            value,
            std_err: e[k],
            shots: n,
        },
        None => EmpiricalEstimate::exact(value),
    };
    EmpiricalLedger {
        beta,
        big_sigma: [d.big_sigma[0].map(|v| est(0, v)), d.big_sigma[1].map(|v| est(1, v))],
        mean_big_sigma: est(2, d.mean_big_sigma),
        exp_mean_big_sigma: est(3, d.exp_mean_big_sigma),
        mean_sigma: est(4, d.mean_sigma),
        exp_mean_total: est(5, d.exp_mean_total),
        mean_de: est(6, d.mean_de),
        beta_mean_de: est(7, d.beta_mean_de),
        bound_charfn: est(8, d.bound_charfn),
        bound_entropy: est(9, d.bound_entropy),
        tpm_mean: est(10, d.tpm_mean),
        coherence_term: est(DERIVED_FIELDS, d.coherence_term),
        dropped_outcomes: dropped,
    }
}

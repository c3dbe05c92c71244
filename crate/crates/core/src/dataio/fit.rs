// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Model curves, convex mixing of measured curves, synthetic data and the
//! least-squares fit of `(p_abs, p_d)`.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::table::{MeasurementRow, MeasurementTable, StateLabel};
use crate::channel::{build_pulse_superoperator, build_unitary_superoperator, compose_cycles, PulseParams, QuantumChannel};
use crate::montecarlo::{sample_probability, SamplingMode};
use crate::{Error, Result};

/// Level-1 population after `N = 0..=n_max` cycles starting from `state`.
pub fn model_curve(params: &PulseParams<f64>, state: StateLabel, n_max: u32) -> Result<Vec<f64>> {
    let one_cycle = compose_cycles(
        &build_pulse_superoperator(params)?,
        &build_unitary_superoperator(params)?,
        1,
    );
    let mut rho = *state.density().matrix();
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        if n > 0 {
            rho = one_cycle.apply_operator(&rho);
        }
        out.push(rho[(1, 1)].re);
    }
    Ok(out)
}

/// Weights on `ket0`, `ket1`, `plus_y`, `minus_y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixWeights(pub [f64; 4]);

impl MixWeights {
    pub fn new(weights: [f64; 4]) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Domain("mixing weights must be non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("mixing weights sum to {total}, not 1")));
        }
        Ok(MixWeights(weights))
    }

    /// The experimental family: `p` on `ket0`, `1 − p` on `plus_y`.
    pub fn experimental(p: f64) -> Result<Self> {
        Self::new([p, 0.0, 1.0 - p, 0.0])
    }

    pub fn weight(&self, state: StateLabel) -> f64 {
        self.0[state.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedPoint {
    pub n: u32,
    pub p_excited: f64,
    pub std_err: f64,
}

/// `Σ_s w_s p_s(N)` with `σ = √(Σ_s w_s² σ_s²)`, for every `N` present
/// for any state with positive weight.
pub fn mix_measured(table: &MeasurementTable, weights: &MixWeights) -> Result<Vec<MixedPoint>> {
    let used: Vec<StateLabel> = StateLabel::ALL.into_iter().filter(|s| weights.weight(*s) > 0.0).collect();
    let ns: BTreeSet<u32> = table
        .rows()
        .iter()
        .filter(|r| used.contains(&r.state))
        .map(|r| r.n)
        .collect();
    if ns.is_empty() {
        return Err(Error::IncompleteData("no rows for the weighted states".into()));
    }
    ns.into_iter()
        .map(|n| {
            let mut p = 0.0;
            let mut var = 0.0;
            for s in &used {
                let row = table
                    .get(*s, n)
                    .ok_or_else(|| Error::IncompleteData(format!("missing row for state {s} at N = {n}")))?;
                let w = weights.weight(*s);
                p += w * row.p_excited;
                var += (w * row.std_err).powi(2);
            }
            Ok(MixedPoint {
                n,
                p_excited: p,
                std_err: var.sqrt(),
            })
        })
        .collect()
}

/// Exact or finite-shot table of model curves. Sampled rows use stream
/// `state_index << 32 | N` under `config.seed`.
pub fn synthetic_table(
    params: &PulseParams<f64>,
    states: &[StateLabel],
    n_max: u32,
    mode: &SamplingMode,
) -> Result<MeasurementTable> {
    let mut rows = Vec::new();
    for &state in states {
        for (n, p) in model_curve(params, state, n_max)?.into_iter().enumerate() {
            let p = p.clamp(0.0, 1.0);
            let (p_excited, std_err) = match mode {
                SamplingMode::Analytic => (p, 0.0),
                SamplingMode::Shots(c) => {
                    c.validate()?;
                    let stream = ((state.index() as u64) << 32) | n as u64;
                    let e = sample_probability(p, c.shots, c.seed, stream)?;
                    (e.value, e.std_err)
                }
            };
            rows.push(MeasurementRow {
                state,
                n: n as u32,
                p_excited,
                std_err,
            });
        }
    }
    MeasurementTable::new(rows)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FitOptions {
    /// Weight residuals by `1/σ²`. Rows with `σ = 0` (a sampled probability
    /// of exactly 0 or 1) borrow the smallest positive `σ` in the table.
    pub weighted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub p_abs: f64,
    pub p_d: f64,
    /// Sum of (weighted) squared residuals at the optimum.
    pub residual: f64,
    pub evaluations: u64,
}

pub const GRID_STEP: f64 = 0.005;
pub const REFINE_TOL: f64 = 1e-5;

struct Objective<'a> {
    alpha: f64,
    omega_tau: f64,
    curves: Vec<(StateLabel, Vec<&'a MeasurementRow>)>,
    n_max: u32,
    weighted: bool,
    sigma_floor: f64,
}

impl Objective<'_> {
    fn eval(&self, p_abs: f64, p_d: f64) -> f64 {
        let params = PulseParams {
            p_abs,
            p_d,
            alpha: self.alpha,
            omega_tau: self.omega_tau,
        };
        let mut total = 0.0;
        for (state, rows) in &self.curves {
            let model = model_curve(&params, *state, self.n_max).expect("parameters inside the unit box");
            for r in rows {
                let d = model[r.n as usize] - r.p_excited;
                total += if self.weighted { (d / r.std_err.max(self.sigma_floor)).powi(2) } else { d * d };
            }
        }
        total
    }
}

/// Least squares over `(p_abs, p_d) ∈ [0,1]²` with `α`, `ωτ` fixed: a
/// 201×201 grid (step 0.005) followed by coordinate descent whose step
/// halves down to 1e-5. Ties go to the lowest grid index, so the result is
/// deterministic.
pub fn fit_parameters(table: &MeasurementTable, alpha: f64, omega_tau: f64, options: FitOptions) -> Result<FitResult> {
    if table.is_empty() {
        return Err(Error::IncompleteData("measurement table is empty".into()));
    }
    let states = table.states();
    let ns = table.pulse_counts();
    if states.len() < 2 || ns.len() < 5 {
        return Err(Error::IncompleteData(format!(
            "fit needs at least 2 initial states and 5 pulse counts, found {} and {}",
            states.len(),
            ns.len()
        )));
    }
    let sigma_floor = table
        .rows()
        .iter()
        .map(|r| r.std_err)
        .filter(|s| *s > 0.0)
        .fold(f64::INFINITY, f64::min);
    if options.weighted && !sigma_floor.is_finite() {
        return Err(Error::Domain("weighted fit needs at least one row with positive std_err".into()));
    }
    PulseParams::new(0.5, 0.5, alpha, omega_tau)?;
    let objective = Objective {
        alpha,
        omega_tau,
        curves: states
            .iter()
            .map(|s| (*s, table.rows().iter().filter(|r| r.state == *s).collect()))
            .collect(),
        n_max: *ns.iter().next_back().expect("non-empty"),
        weighted: options.weighted,
        sigma_floor,
    };

    let steps = (1.0 / GRID_STEP).round() as usize;
    let side = steps + 1;
    let at = |k: usize| (k as f64 * GRID_STEP).min(1.0);
    let (best_index, best_value) = (0..side * side)
        .into_par_iter()
        .map(|idx| (idx, objective.eval(at(idx / side), at(idx % side))))
        .reduce(
            || (usize::MAX, f64::INFINITY),
            |a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
        );
    let mut evaluations = (side * side) as u64;
    let mut point = [at(best_index / side), at(best_index % side)];
    let mut value = best_value;

    let mut step = GRID_STEP;
    while step >= REFINE_TOL {
        let mut improved = false;
        for axis in 0..2 {
            for dir in [-1.0, 1.0] {
                let mut trial = point;
                trial[axis] = (trial[axis] + dir * step).clamp(0.0, 1.0);
                if trial == point {
                    continue;
                }
                let v = objective.eval(trial[0], trial[1]);
                evaluations += 1;
                if v < value {
                    point = trial;
                    value = v;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(FitResult {
        p_abs: point[0],
        p_d: point[1],
        residual: value,
        evaluations,
    })
}

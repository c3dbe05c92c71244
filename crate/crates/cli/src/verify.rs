// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Identity checks over initial states and pulse counts, reported as JSON.

use clap::ValueEnum;
use epm_core::channel::{kraus_from_choi, time_reversed_channel, QuantumChannel, RANK_TOL};
use epm_core::dataio::{to_json_string, ExperimentConfig, StateSpec};
use epm_core::linops::hermitian_eig;
use epm_core::thermo::{
    detailed_balance_ratio, entropy_terms, epm_characteristic_identity, heat_split, jensen_bounds, verify_integral_ft,
    verify_sigma_ft,
};
use epm_core::{DensityMatrix, EnergyLevels, EntropyLedger, Error, PulsedDynamics, Result, Superoperator};
use rayon::prelude::*;
use serde::Serialize;

use crate::options::initial_state;
use crate::output::{RngInfo, TOOL, VERSION};

/// Deliberate corruption of the forward channel, to exercise failure paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Scale the superoperator by 1.01 so traces grow.
    NonTp,
}

pub const TOL_CHANNEL: f64 = 1e-10;
pub const TOL_KRAUS: f64 = 1e-9;
pub const TOL_REVERSED: f64 = 1e-8;
pub const TOL_BIG_SIGMA_FT: f64 = 1e-12;
pub const TOL_IDENTITY: f64 = 1e-10;

#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Serialize, Debug)]
pub struct Check {
    pub identity: &'static str,
    pub state: String,
    #[serde(rename = "N")]
    pub n: u32,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Serialize, Debug)]
pub struct PointSummary {
    pub state: String,
    #[serde(rename = "N")]
    pub n: u32,
    pub beta: Option<f64>,
    pub mean_delta_sigma: Option<f64>,
    pub mean_delta_big_sigma: f64,
    pub exp_mean_big_sigma: f64,
    pub exp_mean_total: Option<f64>,
}

#[derive(Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: ExperimentConfig,
    pub states: Vec<String>,
    pub fault: Option<String>,
    pub rng: RngInfo,
    pub passed: bool,
    pub checked: usize,
    pub failed: usize,
    pub not_applicable: usize,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    pub points: Vec<PointSummary>,
    pub checks: Vec<Check>,
}

pub fn error_name(e: &Error) -> &'static str {
    match e {
        Error::InvariantViolation(_) => "InvariantViolation",
        Error::Domain(_) => "Domain",
        Error::SingularMatrix => "SingularMatrix",
        Error::SingularFixedPoint { .. } => "SingularFixedPoint",
        Error::NonUniqueFixedPoint { .. } => "NonUniqueFixedPoint",
        Error::NotAFixedPoint { .. } => "NotAFixedPoint",
        Error::NotCompletelyPositive { .. } => "NotCompletelyPositive",
        Error::NotTracePreserving { .. } => "NotTracePreserving",
        Error::InfiniteBeta { .. } => "InfiniteBeta",
        Error::DivergentEntropyTerm(_) => "DivergentEntropyTerm",
        Error::NonPhysicalCoherenceRatio { .. } => "NonPhysicalCoherenceRatio",
        Error::DivergentRatio { .. } => "DivergentRatio",
        Error::IncompleteData(_) => "IncompleteData",
        Error::Parse { .. } => "Parse",
        Error::Io(_) => "Io",
    }
}

struct PointChecks {
    state: String,
    n: u32,
    checks: Vec<Check>,
}

impl PointChecks {
    fn record(&mut self, identity: &'static str, residual: f64, tolerance: f64) {
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        self.push(identity, Some(residual), tolerance, status, None);
    }

    fn record_error(&mut self, identity: &'static str, tolerance: f64, e: &Error) {
        self.push(identity, None, tolerance, Status::Fail, Some(format!("{}: {e}", error_name(e))));
    }

    fn not_applicable(&mut self, identity: &'static str, tolerance: f64, why: &Error) {
        self.push(identity, None, tolerance, Status::NotApplicable, Some(format!("{}: {why}", error_name(why))));
    }

    fn push(&mut self, identity: &'static str, residual: Option<f64>, tolerance: f64, status: Status, error: Option<String>) {
        self.checks.push(Check {
            identity,
            state: self.state.clone(),
            n: self.n,
            residual,
            tolerance,
            status,
            error,
        });
    }
}

/// `⟨ΔΣ⟩` and `⟨e^{−ΔΣ}⟩` straight from the definitions, without an inverse
/// temperature; used when the ledger is unavailable (a zero population).
fn big_sigma_without_beta(rho0: &DensityMatrix, forward: &Superoperator) -> Result<(f64, f64)> {
    let p_final = forward.final_populations(rho0.matrix());
    let p_diag = forward.final_populations(rho0.diagonal_part().matrix());
    let mut mean = 0.0;
    let mut exp_mean = 0.0;
    for f in 0..2 {
        if p_final[f] <= 0.0 {
            continue;
        }
        if p_diag[f] <= 0.0 {
            return Err(Error::DivergentEntropyTerm(format!("thermal final probability of outcome {f} is zero")));
        }
        let sigma = (p_final[f] / p_diag[f]).ln();
        mean += p_final[f] * sigma;
        exp_mean += p_final[f] * (-sigma).exp();
    }
    Ok((mean, exp_mean))
}

fn ledger_checks(p: &mut PointChecks, ledger: &EntropyLedger, rho0: &DensityMatrix, forward: &Superoperator, levels: &EnergyLevels) {
    let (lhs, rhs) = verify_integral_ft(ledger, 0.0);
    p.record("integral_ft", (lhs - rhs).abs(), TOL_IDENTITY);

    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for f in 0..2 {
            match detailed_balance_ratio(ledger, i, f, 0.0) {
                Ok(d) => worst = worst.max((d.direct - d.exponential).abs() / d.direct.abs().max(1.0)),
                // A zero backward probability with a zero forward one is 0/0 and carries no content.
                Err(Error::DivergentRatio { .. }) if ledger.forward_joint[i][f] <= 0.0 => {}
                Err(e) => {
                    p.record_error("detailed_balance", TOL_IDENTITY, &e);
                    worst = f64::NAN;
                }
            }
        }
    }
    if !worst.is_nan() {
        p.record("detailed_balance", worst, TOL_IDENTITY);
    }

    match epm_characteristic_identity(rho0, forward, levels, 0.0) {
        Ok(c) => p.record("characteristic_function", c.residual() / c.lhs.abs().max(1.0), TOL_IDENTITY),
        Err(e) => p.record_error("characteristic_function", TOL_IDENTITY, &e),
    }

    match jensen_bounds(ledger) {
        Ok(b) => {
            p.record("jensen_charfn_bound", (b.bound_charfn - b.beta_mean_de).max(0.0), TOL_IDENTITY);
            p.record("jensen_entropy_bound", (b.bound_entropy - b.beta_mean_de).max(0.0), TOL_IDENTITY);
        }
        Err(e) => {
            p.record_error("jensen_charfn_bound", TOL_IDENTITY, &e);
            p.record_error("jensen_entropy_bound", TOL_IDENTITY, &e);
        }
    }
}

const BETA_CHECKS: [&str; 5] = [
    "integral_ft",
    "detailed_balance",
    "characteristic_function",
    "jensen_charfn_bound",
    "jensen_entropy_bound",
];

fn check_point(
    dynamics: &PulsedDynamics,
    levels: &EnergyLevels,
    spec: StateSpec,
    rho0: &DensityMatrix,
    n: u32,
    fault: Option<Fault>,
) -> (PointChecks, Option<PointSummary>) {
    let mut p = PointChecks {
        state: spec.to_string(),
        n,
        checks: Vec::new(),
    };
    let mut forward = dynamics.forward(n);
    if fault == Some(Fault::NonTp) {
        forward = Superoperator::from_matrix(forward.matrix().scale_real(1.01));
    }

    match forward.ensure_trace_preserving(TOL_CHANNEL) {
        Ok(()) => p.record("trace_preserving", forward.trace_residual(), TOL_CHANNEL),
        Err(e) => {
            p.record_error("trace_preserving", TOL_CHANNEL, &e);
            return (p, None);
        }
    }
    match hermitian_eig(&forward.choi()) {
        Ok(eig) => p.record("choi_positive", (-eig.values[3]).max(0.0), TOL_CHANNEL),
        Err(e) => p.record_error("choi_positive", TOL_CHANNEL, &e),
    }
    let reversed = match kraus_from_choi(&forward, RANK_TOL) {
        Ok(kraus) => {
            p.record(
                "kraus_reconstruction",
                kraus.to_superoperator().matrix().max_abs_diff(forward.matrix()),
                TOL_KRAUS,
            );
            match time_reversed_channel(&kraus, &dynamics.fixed_point.state) {
                Ok(r) => {
                    p.record("reversed_trace_preserving", r.completeness_residual(), TOL_REVERSED);
                    let star = &dynamics.fixed_point.state;
                    p.record("reversed_fixes_fixed_point", r.apply(star).distance(star), TOL_REVERSED);
                    Some(r)
                }
                Err(e) => {
                    p.record_error("reversed_trace_preserving", TOL_REVERSED, &e);
                    None
                }
            }
        }
        Err(e) => {
            p.record_error("kraus_reconstruction", TOL_KRAUS, &e);
            None
        }
    };

    let h = heat_split(rho0, &forward, levels);
    p.record("heat_split", (h.epm_mean - h.tpm_mean - h.coherence_term).abs(), TOL_IDENTITY);

    let ledger = match &reversed {
        Some(r) => entropy_terms(rho0, levels, &forward, r),
        None => Err(Error::InvariantViolation("no time-reversed channel".into())),
    };
    let summary = match ledger {
        Ok(ledger) => {
            let exp_mean = verify_sigma_ft(&ledger);
            let mean = ledger.mean_delta_big_sigma();
            p.record("big_sigma_ft", (exp_mean - 1.0).abs(), TOL_BIG_SIGMA_FT);
            p.record("big_sigma_nonnegative", (-mean).max(0.0), TOL_BIG_SIGMA_FT);
            ledger_checks(&mut p, &ledger, rho0, &forward, levels);
            Some(PointSummary {
                state: p.state.clone(),
                n,
                beta: Some(ledger.beta),
                mean_delta_sigma: Some(ledger.mean_delta_sigma()),
                mean_delta_big_sigma: mean,
                exp_mean_big_sigma: exp_mean,
                exp_mean_total: Some(ledger.exp_mean_total()),
            })
        }
        Err(why) => {
            let beta_free = big_sigma_without_beta(rho0, &forward);
            let summary = match &beta_free {
                Ok((mean, exp_mean)) => {
                    p.record("big_sigma_ft", (exp_mean - 1.0).abs(), TOL_BIG_SIGMA_FT);
                    p.record("big_sigma_nonnegative", (-mean).max(0.0), TOL_BIG_SIGMA_FT);
                    Some(PointSummary {
                        state: p.state.clone(),
                        n,
                        beta: None,
                        mean_delta_sigma: None,
                        mean_delta_big_sigma: *mean,
                        exp_mean_big_sigma: *exp_mean,
                        exp_mean_total: None,
                    })
                }
                Err(e) => {
                    p.record_error("big_sigma_ft", TOL_BIG_SIGMA_FT, e);
                    None
                }
            };
            for identity in BETA_CHECKS {
                if matches!(why, Error::InfiniteBeta { .. }) {
                    p.not_applicable(identity, TOL_IDENTITY, &why);
                } else {
                    p.record_error(identity, TOL_IDENTITY, &why);
                }
            }
            summary
        }
    };
    (p, summary)
}

/// Runs every identity for each state and `N = 0..=n_max`. Returns the
/// JSON report and whether everything applicable passed.
pub fn verify(config: &ExperimentConfig, states: &[StateSpec], fault: Option<Fault>) -> Result<(String, bool)> {
    let dynamics = PulsedDynamics::new(config.pulse_params()?)?;
    let levels = config.levels();
    let mut tasks = Vec::new();
    for &spec in states {
        let rho0 = initial_state(config, spec)?;
        for n in 0..=config.n_max {
            tasks.push((spec, rho0, n));
        }
    }
    let results: Vec<(PointChecks, Option<PointSummary>)> = tasks
        .par_iter()
        .map(|(spec, rho0, n)| check_point(&dynamics, &levels, *spec, rho0, *n, fault))
        .collect();

    let mut checks = Vec::new();
    let mut points = Vec::new();
    for (p, s) in results {
        checks.extend(p.checks);
        points.extend(s);
    }
    let failures: Vec<String> = checks
        .iter()
        .filter(|c| c.status == Status::Fail)
        .map(|c| {
            let detail = match (&c.error, c.residual) {
                (Some(e), _) => e.clone(),
                (None, Some(r)) => format!("residual {r:.6e} > {:.0e}", c.tolerance),
                (None, None) => String::new(),
            };
            format!("{} (state {}, N = {}): {detail}", c.identity, c.state, c.n)
        })
        .collect();
    let not_applicable = checks.iter().filter(|c| c.status == Status::NotApplicable).count();
    let mut warnings = Vec::new();
    if not_applicable > 0 {
        warnings.push(format!(
            "{not_applicable} checks need a finite inverse temperature and were skipped for states with a zero population"
        ));
    }
    let passed = failures.is_empty();
    let report = RunReport {
        tool: TOOL,
        version: VERSION,
        command: "verify",
        config: config.clone(),
        states: states.iter().map(|s| s.to_string()).collect(),
        fault: fault.map(|f| format!("{f:?}")),
        rng: RngInfo::new(config.seed),
        passed,
        checked: checks.len(),
        failed: failures.len(),
        not_applicable,
        failures,
        warnings,
        points,
        checks,
    };
    let mut text = to_json_string(&report);
    text.push('\n');
    Ok((text, passed))
}

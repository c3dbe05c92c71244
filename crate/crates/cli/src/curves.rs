// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Per-pulse-count curves: state trajectory, entropy production, heat split
//! and the lower bounds on the mean energy change.

use epm_core::channel::{PulsedDynamics, QuantumChannel};
use epm_core::dataio::{ExperimentConfig, StateSpec};
use epm_core::montecarlo::{empirical_ledger, EmpiricalEstimate, EmpiricalLedger, SamplingMode};
use epm_core::thermo::{epm_distribution, heat_split, tpm_distribution};
use epm_core::Result;
use rayon::prelude::*;

use crate::options::initial_state;
use crate::output::{int, num, preamble, text, Cell, CsvDocument};

pub const PURE_STATES: [StateSpec; 4] = [StateSpec::Ket0, StateSpec::Ket1, StateSpec::PlusY, StateSpec::MinusY];

fn pulse_counts(config: &ExperimentConfig) -> Vec<u32> {
    (0..=config.n_max).collect()
}

pub fn simulate(config: &ExperimentConfig, all_states: bool) -> Result<String> {
    let dynamics = PulsedDynamics::new(config.pulse_params()?)?;
    let levels = config.levels();
    let specs = if all_states { PURE_STATES.to_vec() } else { vec![config.state] };
    let mut comments = preamble("simulate", config, false);
    if all_states {
        comments.push("states: ket0, ket1, plus-y, minus-y (config state ignored)".into());
    }
    comments.push(format!(
        "fixed point of one cycle: level-1 population {:.16e}, spectral gap {:.16e}",
        dynamics.fixed_point.state.populations()[1],
        dynamics.fixed_point.spectral_gap
    ));
    comments.push("rho_jk: state after N cycles; *_p1: final level-1 probability; *_mean_de: mean energy change".into());
    let mut doc = CsvDocument::new(
        &comments,
        &[
            "state", "N", "rho00", "rho11", "rho01_re", "rho01_im", "epm_p1", "tpm_p1", "epm_mean_de", "tpm_mean_de",
        ],
    );
    for spec in specs {
        let rho0 = initial_state(config, spec)?;
        let rows: Vec<Vec<Cell>> = pulse_counts(config)
            .into_par_iter()
            .map(|n| {
                let forward = dynamics.forward(n);
                let rho = forward.apply(&rho0);
                let m = rho.matrix();
                let epm = epm_distribution(&rho0, &forward, &levels);
                let tpm = tpm_distribution(&rho0, &forward, &levels);
                vec![
                    text(spec),
                    int(n),
                    num(m[(0, 0)].re),
                    num(m[(1, 1)].re),
                    num(m[(0, 1)].re),
                    num(m[(0, 1)].im),
                    num(epm.final_populations[1]),
                    num(tpm.final_populations()[1]),
                    num(epm.mean_energy_change()),
                    num(tpm.mean_energy_change()),
                ]
            })
            .collect();
        rows.iter().for_each(|r| doc.row(r));
    }
    Ok(doc.into_string())
}

fn mode(config: &ExperimentConfig, sampled: bool) -> Result<SamplingMode> {
    Ok(if sampled {
        SamplingMode::Shots(config.shot_config()?)
    } else {
        SamplingMode::Analytic
    })
}

/// Ledger for every pulse count, computed in parallel and returned in order.
fn ledgers(config: &ExperimentConfig, mode: &SamplingMode) -> Result<Vec<(u32, EmpiricalLedger)>> {
    let dynamics = PulsedDynamics::new(config.pulse_params()?)?;
    let levels = config.levels();
    let rho0 = config.initial_state()?;
    pulse_counts(config)
        .into_par_iter()
        .map(|n| {
            let channels = dynamics.channels(n)?;
            let ledger = empirical_ledger(&rho0, &levels, &channels.forward, &channels.reversed, mode, n as u64)?;
            Ok((n, ledger))
        })
        .collect()
}

fn estimate(e: &EmpiricalEstimate) -> [Cell; 2] {
    [num(e.value), num(e.std_err)]
}

fn optional(e: &Option<EmpiricalEstimate>) -> [Cell; 2] {
    match e {
        Some(e) => estimate(e),
        None => [num(f64::NAN), num(f64::NAN)],
    }
}

pub fn entropy(config: &ExperimentConfig, sampled: bool) -> Result<String> {
    let mode = mode(config, sampled)?;
    let mut comments = preamble("entropy", config, sampled);
    comments.push("coherence-affected entropy production: big_sigma_f = ln[1 + p_f(chi)/p_f(rho_th)] per final outcome f".into());
    comments.push("sigma: thermal entropy term from the time-reversed channel; *_err: bootstrap standard error (0 when exact)".into());
    comments.push("nan marks a term whose sampled frequency was zero".into());
    let mut doc = CsvDocument::new(
        &comments,
        &[
            "N",
            "beta",
            "big_sigma_f0",
            "big_sigma_f0_err",
            "big_sigma_f1",
            "big_sigma_f1_err",
            "mean_big_sigma",
            "mean_big_sigma_err",
            "exp_mean_big_sigma",
            "exp_mean_big_sigma_err",
            "mean_sigma",
            "mean_sigma_err",
            "exp_mean_total",
            "exp_mean_total_err",
            "dropped_outcomes",
        ],
    );
    for (n, l) in ledgers(config, &mode)? {
        let mut row = vec![int(n), num(l.beta)];
        row.extend(optional(&l.big_sigma[0]));
        row.extend(optional(&l.big_sigma[1]));
        row.extend(estimate(&l.mean_big_sigma));
        row.extend(estimate(&l.exp_mean_big_sigma));
        row.extend(estimate(&l.mean_sigma));
        row.extend(estimate(&l.exp_mean_total));
        row.push(int(l.dropped_outcomes));
        doc.row(&row);
    }
    Ok(doc.into_string())
}

pub fn heat(config: &ExperimentConfig, sampled: bool) -> Result<String> {
    let mut comments = preamble("heat", config, sampled);
    comments.push("mean energy change under end-point measurement = two-point-measurement mean + coherence term".into());
    comments.push("residual = epm_mean_de - tpm_mean_de - coherence_term".into());
    let mut doc = CsvDocument::new(
        &comments,
        &[
            "N",
            "epm_mean_de",
            "epm_mean_de_err",
            "tpm_mean_de",
            "tpm_mean_de_err",
            "coherence_term",
            "coherence_term_err",
            "residual",
        ],
    );
    if sampled {
        for (n, l) in ledgers(config, &mode(config, true)?)? {
            let mut row = vec![int(n)];
            row.extend(estimate(&l.mean_de));
            row.extend(estimate(&l.tpm_mean));
            row.extend(estimate(&l.coherence_term));
            row.push(num(l.mean_de.value - l.tpm_mean.value - l.coherence_term.value));
            doc.row(&row);
        }
    } else {
        let dynamics = PulsedDynamics::new(config.pulse_params()?)?;
        let levels = config.levels();
        let rho0 = config.initial_state()?;
        for n in pulse_counts(config) {
            let h = heat_split(&rho0, &dynamics.forward(n), &levels);
            doc.row(&[
                int(n),
                num(h.epm_mean),
                num(0.0),
                num(h.tpm_mean),
                num(0.0),
                num(h.coherence_term),
                num(0.0),
                num(h.epm_mean - h.tpm_mean - h.coherence_term),
            ]);
        }
    }
    Ok(doc.into_string())
}

pub fn bounds(config: &ExperimentConfig, sampled: bool) -> Result<String> {
    let mode = mode(config, sampled)?;
    let mut comments = preamble("bounds", config, sampled);
    comments.push("beta*<dE> and its lower bounds: -ln G from the characteristic function, -(<sigma> + <big_sigma>) from the entropy terms".into());
    let mut doc = CsvDocument::new(
        &comments,
        &[
            "N",
            "beta_mean_de",
            "beta_mean_de_err",
            "bound_charfn",
            "bound_charfn_err",
            "bound_entropy",
            "bound_entropy_err",
        ],
    );
    for (n, l) in ledgers(config, &mode)? {
        let mut row = vec![int(n)];
        row.extend(estimate(&l.beta_mean_de));
        row.extend(estimate(&l.bound_charfn));
        row.extend(estimate(&l.bound_entropy));
        doc.row(&row);
    }
    Ok(doc.into_string())
}

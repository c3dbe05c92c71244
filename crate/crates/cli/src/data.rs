// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Measurement files: fitting, mixing and synthetic sampling.

use std::path::Path;

use epm_core::dataio::{
    fit_parameters, mix_measured, synthetic_table, ExperimentConfig, FitOptions, MeasurementTable, MixWeights,
    StateLabel, StateSpec,
};
use epm_core::montecarlo::SamplingMode;
use epm_core::Result;

use crate::output::{int, num, preamble, CsvDocument};

pub fn fit(config: &ExperimentConfig, data: &Path, weighted: bool) -> Result<String> {
    let table = MeasurementTable::read(data)?;
    let result = fit_parameters(&table, config.alpha, config.omega_tau, FitOptions { weighted })?;
    let mut comments = preamble("fit", config, false);
    comments.push(format!("data: {} rows, alpha and omega_tau held at their config values", table.rows().len()));
    comments.push(format!(
        "objective: sum of {} squared residuals of the level-1 population",
        if weighted { "1/sigma^2 weighted" } else { "unweighted" }
    ));
    let mut doc = CsvDocument::new(&comments, &["p_abs", "p_d", "residual", "evaluations"]);
    doc.row(&[num(result.p_abs), num(result.p_d), num(result.residual), int(result.evaluations)]);
    Ok(doc.into_string())
}

/// Weights implied by the config state: a pure label, or `p` on ket0 and
/// `1 − p` on plus_y for `mix:p`.
pub fn weights_for(spec: StateSpec) -> Result<MixWeights> {
    match spec {
        StateSpec::Ket0 => MixWeights::new([1.0, 0.0, 0.0, 0.0]),
        StateSpec::Ket1 => MixWeights::new([0.0, 1.0, 0.0, 0.0]),
        StateSpec::PlusY => MixWeights::new([0.0, 0.0, 1.0, 0.0]),
        StateSpec::MinusY => MixWeights::new([0.0, 0.0, 0.0, 1.0]),
        StateSpec::Mix(p) => MixWeights::experimental(p),
    }
}

pub fn mix(config: &ExperimentConfig, data: &Path, weights: Option<[f64; 4]>) -> Result<String> {
    let table = MeasurementTable::read(data)?;
    let weights = match weights {
        Some(w) => MixWeights::new(w)?,
        None => weights_for(config.state)?,
    };
    let points = mix_measured(&table, &weights)?;
    let mut comments = preamble("mix", config, false);
    comments.push(format!(
        "weights: {}",
        StateLabel::ALL
            .iter()
            .map(|s| format!("{s}={:.16e}", weights.weight(*s)))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    comments.push("std_err combined in quadrature".into());
    let mut doc = CsvDocument::new(&comments, &["N", "p_excited", "std_err"]);
    for p in points {
        doc.row(&[int(p.n), num(p.p_excited), num(p.std_err)]);
    }
    Ok(doc.into_string())
}

pub fn sample(config: &ExperimentConfig, exact: bool) -> Result<String> {
    let mode = if exact {
        SamplingMode::Analytic
    } else {
        SamplingMode::Shots(config.shot_config()?)
    };
    let table = synthetic_table(&config.pulse_params()?, &StateLabel::ALL, config.n_max, &mode)?;
    let mut comments = preamble("sample", config, !exact);
    comments.push("p_excited: final level-1 probability; std_err: binomial standard error".into());
    let mut buf = Vec::new();
    table.to_writer(&mut buf, &comments)?;
    Ok(String::from_utf8(buf).expect("table output is UTF-8"))
}

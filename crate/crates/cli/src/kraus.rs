// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Kraus decomposition report for the `N`-cycle channel.

use epm_core::channel::{kraus_from_choi, time_reversed_channel, QuantumChannel, RANK_TOL};
use epm_core::dataio::{to_json_string, ExperimentConfig};
use epm_core::linops::hermitian_eig;
use epm_core::{ComplexMatrix2, KrausSet, PulsedDynamics, Result};
use serde::Serialize;

use crate::output::{TOOL, VERSION};

/// Row-major entries as `[re, im]` pairs.
type MatrixJson = [[[f64; 2]; 2]; 2];

fn matrix_json(m: &ComplexMatrix2) -> MatrixJson {
    std::array::from_fn(|r| std::array::from_fn(|c| [m[(r, c)].re, m[(r, c)].im]))
}

fn operators(set: &KrausSet) -> Vec<MatrixJson> {
    set.operators().iter().map(matrix_json).collect()
}

#[derive(Serialize)]
struct KrausReport {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: ExperimentConfig,
    #[serde(rename = "N")]
    pulses: u32,
    rank_tolerance: f64,
    /// Descending.
    choi_eigenvalues: [f64; 4],
    rank: usize,
    kraus: Vec<MatrixJson>,
    completeness_residual: f64,
    reconstruction_error: f64,
    fixed_point: MatrixJson,
    second_modulus: f64,
    spectral_gap: f64,
    reversed_kraus: Vec<MatrixJson>,
    reversed_completeness_residual: f64,
    reversed_fixed_point_residual: f64,
}

pub fn kraus(config: &ExperimentConfig, pulses: u32) -> Result<String> {
    let dynamics = PulsedDynamics::new(config.pulse_params()?)?;
    let forward = dynamics.forward(pulses);
    let eig = hermitian_eig(&forward.choi())?;
    let set = kraus_from_choi(&forward, RANK_TOL)?;
    let star = dynamics.fixed_point.state;
    let reversed = time_reversed_channel(&set, &star)?;
    let report = KrausReport {
        tool: TOOL,
        version: VERSION,
        command: "kraus",
        config: config.clone(),
        pulses,
        rank_tolerance: RANK_TOL,
        choi_eigenvalues: eig.values,
        rank: set.len(),
        kraus: operators(&set),
        completeness_residual: set.completeness_residual(),
        reconstruction_error: set.to_superoperator().matrix().max_abs_diff(forward.matrix()),
        fixed_point: matrix_json(star.matrix()),
        second_modulus: dynamics.fixed_point.second_modulus,
        spectral_gap: dynamics.fixed_point.spectral_gap,
        reversed_kraus: operators(&reversed),
        reversed_completeness_residual: reversed.completeness_residual(),
        reversed_fixed_point_residual: reversed.apply(&star).distance(&star),
    };
    let mut text = to_json_string(&report);
    text.push('\n');
    Ok(text)
}

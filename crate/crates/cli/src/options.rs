// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Flags shared by every subcommand and their merge into the effective
//! configuration: defaults, then `--config`, then individual flags.

use std::path::PathBuf;

use clap::Args;
use epm_core::dataio::{ExperimentConfig, StateSpec};
use epm_core::Result;

#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// JSON configuration file; individual flags override its values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Pulse rotation angle in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Free-evolution phase per cycle.
    #[arg(long, allow_hyphen_values = true)]
    pub omega_tau: Option<f64>,
    /// Absorption probability per pulse.
    #[arg(long)]
    pub p_abs: Option<f64>,
    /// Decay probability after absorption.
    #[arg(long)]
    pub p_d: Option<f64>,
    /// Largest pulse count.
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Initial state: ket0, ket1, plus-y, minus-y or mix:p.
    #[arg(long)]
    pub state: Option<StateSpec>,
    /// Replace the initial populations by thermal ones at this inverse
    /// temperature, keeping the coherence.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Repetitions per sampled probability.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Seed of the random generator.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bootstrap resamples per sampled point.
    #[arg(long)]
    pub resamples: Option<u32>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    pub fn effective_config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::read(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.omega_tau {
            c.omega_tau = v;
        }
        if let Some(v) = self.p_abs {
            c.p_abs = v;
        }
        if let Some(v) = self.p_d {
            c.p_d = v;
        }
        if let Some(v) = self.n_max {
            c.n_max = v;
        }
        if let Some(v) = self.state {
            c.state = v;
        }
        if self.beta.is_some() {
            c.beta = self.beta;
        }
        if let Some(v) = self.shots {
            c.shots = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.resamples {
            c.bootstrap_resamples = v;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Initial state for `spec` under the config's optional `beta` override.
pub fn initial_state(config: &ExperimentConfig, spec: StateSpec) -> Result<epm_core::DensityMatrix> {
    ExperimentConfig { state: spec, ..config.clone() }.initial_state()
}

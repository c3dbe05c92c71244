// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! `epm`: simulate a pulsed dissipative qubit, check the fluctuation
//! identities of its end-point-measurement statistics, and handle
//! measurement tables.
//!
//! Exit status: 0 on success, 1 when an identity or channel property is
//! violated, 2 on bad input.

mod curves;
mod data;
mod kraus;
mod options;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use epm_core::dataio::StateSpec;
use epm_core::Error;

use crate::options::CommonArgs;
use crate::verify::Fault;

#[derive(Parser)]
#[command(name = "epm", version, about = "End-point-measurement statistics of a pulsed dissipative qubit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// State trajectory and EPM/TPM final marginals for N = 0..=n_max.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Run the four pure states instead of the config state.
        #[arg(long)]
        all_states: bool,
    },
    /// Check every identity and channel property; JSON report.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated initial states to sweep (default: the config state).
        #[arg(long, value_delimiter = ',')]
        states: Option<Vec<StateSpec>>,
        /// Corrupt the forward channel on purpose.
        #[arg(long, value_enum)]
        fault: Option<Fault>,
    },
    /// Coherence-affected entropy production per N.
    Entropy {
        #[command(flatten)]
        common: CommonArgs,
        /// Estimate from finite shots with bootstrap errors.
        #[arg(long)]
        sampled: bool,
    },
    /// Mean energy change split into two-point and coherence parts per N.
    Heat {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        sampled: bool,
    },
    /// β⟨ΔE⟩ and its two lower bounds per N.
    Bounds {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        sampled: bool,
    },
    /// Kraus operators, Choi spectrum, fixed point and reversed channel; JSON.
    Kraus {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of cycles in the channel.
        #[arg(long = "pulses", default_value_t = 1)]
        pulses: u32,
    },
    /// Fit (p_abs, p_d) to a measurement table.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        /// Measurement CSV (state,N,p_excited,std_err).
        #[arg(long, value_name = "PATH")]
        data: PathBuf,
        /// Weight residuals by 1/std_err^2.
        #[arg(long)]
        weighted: bool,
    },
    /// Convex mixture of measured curves.
    Mix {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_name = "PATH")]
        data: PathBuf,
        /// Weights on ket0,ket1,plus_y,minus_y (default: from --state).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        weights: Option<Vec<f64>>,
    },
    /// Synthetic measurement table for the four pure states.
    Sample {
        #[command(flatten)]
        common: CommonArgs,
        /// Exact probabilities instead of finite-shot estimates.
        #[arg(long)]
        exact: bool,
    },
}

const EXIT_VIOLATION: u8 = 1;
const EXIT_INPUT: u8 = 2;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvariantViolation(_)
        | Error::NotTracePreserving { .. }
        | Error::NotCompletelyPositive { .. }
        | Error::NotAFixedPoint { .. } => EXIT_VIOLATION,
        _ => EXIT_INPUT,
    }
}

fn run(command: Command) -> epm_core::Result<(Option<PathBuf>, String, bool)> {
    let (common, result) = match command {
        Command::Simulate { common, all_states } => {
            let c = common.effective_config()?;
            (common, (curves::simulate(&c, all_states)?, true))
        }
        Command::Verify { common, states, fault } => {
            let c = common.effective_config()?;
            let states = states.unwrap_or_else(|| vec![c.state]);
            (common, verify::verify(&c, &states, fault)?)
        }
        Command::Entropy { common, sampled } => {
            let c = common.effective_config()?;
            (common, (curves::entropy(&c, sampled)?, true))
        }
        Command::Heat { common, sampled } => {
            let c = common.effective_config()?;
            (common, (curves::heat(&c, sampled)?, true))
        }
        Command::Bounds { common, sampled } => {
            let c = common.effective_config()?;
            (common, (curves::bounds(&c, sampled)?, true))
        }
        Command::Kraus { common, pulses } => {
            let c = common.effective_config()?;
            (common, (kraus::kraus(&c, pulses)?, true))
        }
        Command::Fit { common, data, weighted } => {
            let c = common.effective_config()?;
            (common, (data::fit(&c, &data, weighted)?, true))
        }
        Command::Mix { common, data, weights } => {
            let c = common.effective_config()?;
            let weights = match weights.as_deref() {
                None => None,
                Some(&[a, b, c, d]) => Some([a, b, c, d]),
                Some(w) => return Err(Error::Domain(format!("--weights needs 4 values, got {}", w.len()))),
            };
            (common, (data::mix(&c, &data, weights)?, true))
        }
        Command::Sample { common, exact } => {
            let c = common.effective_config()?;
            (common, (data::sample(&c, exact)?, true))
        }
    };
    Ok((common.out, result.0, result.1))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((out, text, passed)) => {
            if let Err(e) = output::emit(out.as_deref(), &text) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_INPUT);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: identity check failed; see the report");
                ExitCode::from(EXIT_VIOLATION)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

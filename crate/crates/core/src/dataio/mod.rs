// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Configuration and measurement files, mixing of measured curves and
//! parameter fitting.

mod config;
mod fit;
mod table;

pub use config::{to_json_string, ExperimentConfig, PreciseFormatter, StateSpec, DEFAULT_N_MAX, DEFAULT_TAU_NS};
pub use fit::{
    fit_parameters, mix_measured, model_curve, synthetic_table, FitOptions, FitResult, MixWeights, MixedPoint,
    GRID_STEP, REFINE_TOL,
};
pub use table::{format_float, MeasurementRow, MeasurementTable, StateLabel, TABLE_HEADER};

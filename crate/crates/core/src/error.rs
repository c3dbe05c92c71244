// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("matrix is singular to working precision")]
    SingularMatrix,

    #[error("fixed point is singular (smallest eigenvalue {min_eigenvalue:e})")]
    SingularFixedPoint { min_eigenvalue: f64 },

    #[error("fixed point is not unique (|lambda_2| = {second_modulus})")]
    NonUniqueFixedPoint { second_modulus: f64 },

    #[error("state is not a fixed point of the channel (residual {residual:e})")]
    NotAFixedPoint { residual: f64 },

    #[error("map is not completely positive (Choi eigenvalue {eigenvalue:e})")]
    NotCompletelyPositive { eigenvalue: f64 },

    #[error("map is not trace preserving (residual {residual:e})")]
    NotTracePreserving { residual: f64 },

    #[error("inverse temperature undefined: population of level {level} is zero")]
    InfiniteBeta { level: usize },

    #[error("divergent entropy term: {0}")]
    DivergentEntropyTerm(String),

    #[error("non-physical coherence ratio for final outcome {outcome}: 1 + p(chi)/p(th) = {value}")]
    NonPhysicalCoherenceRatio { outcome: usize, value: f64 },

    #[error("backward probability P(f={f}, i={i}) is zero")]
    DivergentRatio { i: usize, f: usize },

    #[error("incomplete data: {0}")]
    IncompleteData(String),

    #[error("parse error{}{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default(), field.as_ref().map(|f| format!(" in field `{f}`")).unwrap_or_default())]
    Parse {
        line: Option<u64>,
        field: Option<String>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: Option<u64>, field: Option<&str>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            field: field.map(str::to_owned),
            message: message.into(),
        }
    }
}

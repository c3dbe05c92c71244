// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Energy-change statistics of a qubit channel and the entropy-production
//! terms that close the fluctuation theorems for coherent initial states.
//!
//! Outcomes are indexed by energy level, `i` for the initial measurement and
//! `f` for the final one. All averages are exact sums over the four
//! outcomes; finite-shot estimates live in [`crate::montecarlo`].

mod entropy;
mod state;
mod stats;

pub use entropy::{
    backward_forward_consistency, detailed_balance_ratio, entropy_terms, general_entropy_terms,
    jensen_bounds, relative_entropy_identity, trajectory_pair, verify_integral_ft,
    verify_sigma_ft, DetailedBalance, EntropyLedger, JensenBounds, RelativeEntropy,
    TrajectoryPair,
};
pub use state::{decompose_state, DensityMatrix, EnergyLevels, ThermalDecomposition, ZERO_PROBABILITY};
pub use stats::{
    epm_characteristic_identity, epm_distribution, heat_split, tpm_distribution,
    CharacteristicIdentity, EpmDistribution, HeatSplit, TpmDistribution,
};

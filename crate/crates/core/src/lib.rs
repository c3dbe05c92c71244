// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulation of a pulsed, dissipative qubit and of the energy and entropy
//! fluctuation statistics it produces under end-point (EPM) and two-point
//! (TPM) energy measurements.
//!
//! The numerical core ([`linops`], [`channel`], [`thermo`]) is generic over
//! the [`Real`] scalar; the aliases below fix it to `f64`, which is what the
//! sampling ([`montecarlo`]) and file ([`dataio`]) layers use.

pub mod channel;
pub mod dataio;
pub mod error;
pub mod linops;
pub mod montecarlo;
pub mod scalar;
pub mod thermo;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex = num_complex::Complex<f64>;
pub type ComplexMatrix2 = linops::ComplexMatrix2<f64>;
pub type ComplexMatrix4 = linops::ComplexMatrix4<f64>;
pub type DensityMatrix = thermo::DensityMatrix<f64>;
pub type EnergyLevels = thermo::EnergyLevels<f64>;
pub type ThermalDecomposition = thermo::ThermalDecomposition<f64>;
pub type EntropyLedger = thermo::EntropyLedger<f64>;
pub type EpmDistribution = thermo::EpmDistribution<f64>;
pub type TpmDistribution = thermo::TpmDistribution<f64>;
pub type PulseParams = channel::PulseParams<f64>;
pub type Superoperator = channel::Superoperator<f64>;
pub type KrausSet = channel::KrausSet<f64>;
pub type FixedPoint = channel::FixedPoint<f64>;
pub type PulsedDynamics = channel::PulsedDynamics<f64>;
pub type ProtocolChannels = channel::ProtocolChannels<f64>;

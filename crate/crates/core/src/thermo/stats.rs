// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Joint outcome tables for the end-point and two-point measurement schemes.

use super::state::{decompose_state, DensityMatrix, EnergyLevels};
use crate::channel::QuantumChannel;
use crate::{Error, Real, Result};

/// End-point measurement statistics: the initial populations are read off
/// `ρ₀` without collapsing it, so the joint table is a product of marginals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpmDistribution<T> {
    /// `P(i, f) = p_i^in · p_f^fin`, indexed `[i][f]`.
    pub joint: [[T; 2]; 2],
    pub initial: [T; 2],
    /// Populations of `Φ(ρ₀)`.
    pub final_populations: [T; 2],
    pub energies: [T; 2],
}

/// Two-point measurement statistics: `ρ₀` is projected first, then evolved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TpmDistribution<T> {
    /// `P(i, f) = p_i^in · tr(Π_f Φ(Π_i))`, indexed `[i][f]`.
    pub joint: [[T; 2]; 2],
    pub initial: [T; 2],
    pub energies: [T; 2],
}

fn mean_energy_change<T: Real>(joint: &[[T; 2]; 2], energies: &[T; 2]) -> T {
    let mut acc = T::zero();
    for i in 0..2 {
        for f in 0..2 {
            acc = acc + joint[i][f] * (energies[f] - energies[i]);
        }
    }
    acc
}

impl<T: Real> EpmDistribution<T> {
    pub fn total(&self) -> T {
        self.joint.iter().flatten().fold(T::zero(), |a, &p| a + p)
    }

    /// `⟨ΔE⟩ = Σ P(i,f)(E_f − E_i)`.
    pub fn mean_energy_change(&self) -> T {
        mean_energy_change(&self.joint, &self.energies)
    }
}

impl<T: Real> TpmDistribution<T> {
    pub fn total(&self) -> T {
        self.joint.iter().flatten().fold(T::zero(), |a, &p| a + p)
    }

    pub fn final_populations(&self) -> [T; 2] {
        [0, 1].map(|f| self.joint[0][f] + self.joint[1][f])
    }

    pub fn mean_energy_change(&self) -> T {
        mean_energy_change(&self.joint, &self.energies)
    }
}

pub fn epm_distribution<T: Real, C: QuantumChannel<T> + ?Sized>(
    rho0: &DensityMatrix<T>,
    channel: &C,
    levels: &EnergyLevels<T>,
) -> EpmDistribution<T> {
    let initial = rho0.populations();
    let final_populations = channel.final_populations(rho0.matrix());
    EpmDistribution {
        joint: [0, 1].map(|i| [0, 1].map(|f| initial[i] * final_populations[f])),
        initial,
        final_populations,
        energies: levels.energies(),
    }
}

pub fn tpm_distribution<T: Real, C: QuantumChannel<T> + ?Sized>(
    rho0: &DensityMatrix<T>,
    channel: &C,
    levels: &EnergyLevels<T>,
) -> TpmDistribution<T> {
    let initial = rho0.populations();
    let joint = [0, 1].map(|i| {
        let out = channel.final_populations(&levels.projector(i));
        [0, 1].map(|f| initial[i] * out[f])
    });
    TpmDistribution {
        joint,
        initial,
        energies: levels.energies(),
    }
}

/// `⟨ΔE⟩_EPM = ⟨ΔE⟩_TPM + Σ_f tr(Π_f Φ(χ)) E_f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatSplit<T> {
    pub epm_mean: T,
    pub tpm_mean: T,
    pub coherence_term: T,
}

pub fn heat_split<T: Real, C: QuantumChannel<T> + ?Sized>(
    rho0: &DensityMatrix<T>,
    channel: &C,
    levels: &EnergyLevels<T>,
) -> HeatSplit<T> {
    let epm = epm_distribution(rho0, channel, levels);
    let tpm = tpm_distribution(rho0, channel, levels);
    let from_chi = channel.final_populations(&rho0.coherence());
    let coherence_term = from_chi[0] * levels.energy(0) + from_chi[1] * levels.energy(1);
    HeatSplit {
        epm_mean: epm.mean_energy_change(),
        tpm_mean: tpm.mean_energy_change(),
        coherence_term,
    }
}

/// `⟨e^{−β(ΔE−ΔF)}⟩_EPM = d·e^{βΔF}[tr(ρ_th Φ(ρ_th)) + tr(ρ_th Φ(χ))]`,
/// with `d = 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharacteristicIdentity<T> {
    pub beta: T,
    pub lhs: T,
    pub classical_term: T,
    pub coherence_term: T,
}

impl<T: Real> CharacteristicIdentity<T> {
    pub fn residual(&self) -> T {
        (self.lhs - self.classical_term - self.coherence_term).abs()
    }
}

pub fn epm_characteristic_identity<T: Real, C: QuantumChannel<T> + ?Sized>(
    rho0: &DensityMatrix<T>,
    channel: &C,
    levels: &EnergyLevels<T>,
    delta_f: T,
) -> Result<CharacteristicIdentity<T>> {
    let decomposition = decompose_state(rho0, levels)?;
    let beta = decomposition.beta;
    let epm = epm_distribution(rho0, channel, levels);
    let e = levels.energies();
    let mut lhs = T::zero();
    for i in 0..2 {
        for f in 0..2 {
            lhs = lhs + epm.joint[i][f] * (-beta * (e[f] - e[i] - delta_f)).exp();
        }
    }
    if !lhs.is_finite() {
        return Err(Error::Domain("characteristic function overflowed".into()));
    }
    let th = decomposition.populations;
    let dimension = T::lit(2.0) * (beta * delta_f).exp();
    let from_th = channel.final_populations(decomposition.thermal_state().matrix());
    let from_chi = channel.final_populations(&decomposition.chi);
    let overlap = |p: [T; 2]| th[0] * p[0] + th[1] * p[1];
    Ok(CharacteristicIdentity {
        beta,
        lhs,
        classical_term: dimension * overlap(from_th),
        coherence_term: dimension * overlap(from_chi),
    })
}

// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Entropy-production terms along forward and backward trajectories and the
//! identities they satisfy.
//!
//! For an initial state `ρ₀ = ρ_th(β) + χ` and backward reference state
//! `ρ_B = ρ_th(β) + χ_B` (same Hamiltonian before and after), each outcome
//! `(i, f)` carries
//!
//! ```text
//! Δσ_{i,f} = ln[ p_f(ρ_th) / p̃_i(ρ_th) ]
//! ΔΣ_{i,f} = ln[1 + p_f(χ)/p_f(ρ_th)] − ln[1 + p̃_i(χ_B)/p̃_i(ρ_th)]
//! ```
//!
//! where `p_f(A) = tr(Π_f Φ(A))` and `p̃_i(A) = tr(Π_i Φ̃(A))`. With `χ_B = 0`
//! the second logarithm vanishes and `ΔΣ` depends on `f` only.

use super::state::{decompose_state, DensityMatrix, EnergyLevels, ZERO_PROBABILITY};
use crate::channel::QuantumChannel;
use crate::linops::ComplexMatrix2;
use crate::{Error, Real, Result};

/// Per-outcome entropy terms and the probability tables they come from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyLedger<T> {
    pub beta: T,
    pub energies: [T; 2],
    /// Thermal populations `P_i` of `ρ₀`.
    pub populations: [T; 2],
    /// `p_f(ρ_th)`.
    pub forward_thermal: [T; 2],
    /// `p_f(χ)`.
    pub forward_coherence: [T; 2],
    /// `p̃_i(ρ_th)`.
    pub backward_thermal: [T; 2],
    /// `p̃_i(χ_B)`.
    pub backward_coherence: [T; 2],
    /// `ln[1 + p_f(χ)/p_f(ρ_th)]`, per `f`.
    pub forward_sigma: [T; 2],
    /// `ln[1 + p̃_i(χ_B)/p̃_i(ρ_th)]`, per `i`; zero when `χ_B = 0`.
    pub backward_sigma: [T; 2],
    /// `Δσ_{i,f}`, indexed `[i][f]`.
    pub delta_sigma: [[T; 2]; 2],
    /// `P_Γ(i, f) = P_i p_f(ρ₀)`, indexed `[i][f]`.
    pub forward_joint: [[T; 2]; 2],
    /// `P_Γ̃(f, i) = P_f p̃_i(ρ_B)`, indexed `[f][i]`.
    pub backward_joint: [[T; 2]; 2],
}

impl<T: Real> EntropyLedger<T> {
    pub fn delta_e(&self, i: usize, f: usize) -> T {
        self.energies[f] - self.energies[i]
    }

    pub fn delta_big_sigma(&self, i: usize, f: usize) -> T {
        self.forward_sigma[f] - self.backward_sigma[i]
    }

    fn average(&self, g: impl Fn(usize, usize) -> T) -> T {
        let mut acc = T::zero();
        for i in 0..2 {
            for f in 0..2 {
                let w = self.forward_joint[i][f];
                if w > T::zero() {
                    acc = acc + w * g(i, f);
                }
            }
        }
        acc
    }

    pub fn mean_delta_e(&self) -> T {
        self.average(|i, f| self.delta_e(i, f))
    }

    pub fn mean_delta_sigma(&self) -> T {
        self.average(|i, f| self.delta_sigma[i][f])
    }

    pub fn mean_delta_big_sigma(&self) -> T {
        self.average(|i, f| self.delta_big_sigma(i, f))
    }

    /// `⟨e^{−ΔΣ}⟩`.
    pub fn exp_mean_big_sigma(&self) -> T {
        self.average(|i, f| (-self.delta_big_sigma(i, f)).exp())
    }

    /// `⟨e^{−βΔE − Δσ − ΔΣ}⟩`.
    pub fn exp_mean_total(&self) -> T {
        self.average(|i, f| {
            (-self.beta * self.delta_e(i, f) - self.delta_sigma[i][f] - self.delta_big_sigma(i, f)).exp()
        })
    }
}

/// Ledger with the backward process started from `ρ_th(β)`.
pub fn entropy_terms<T, C, R>(
    rho0: &DensityMatrix<T>,
    levels: &EnergyLevels<T>,
    forward: &C,
    reversed: &R,
) -> Result<EntropyLedger<T>>
where
    T: Real,
    C: QuantumChannel<T> + ?Sized,
    R: QuantumChannel<T> + ?Sized,
{
    general_entropy_terms(rho0, levels, &ComplexMatrix2::zeros(), forward, reversed)
}

/// Ledger with the backward process started from `ρ_th(β) + χ_B`.
pub fn general_entropy_terms<T, C, R>(
    rho0: &DensityMatrix<T>,
    levels: &EnergyLevels<T>,
    chi_backward: &ComplexMatrix2<T>,
    forward: &C,
    reversed: &R,
) -> Result<EntropyLedger<T>>
where
    T: Real,
    C: QuantumChannel<T> + ?Sized,
    R: QuantumChannel<T> + ?Sized,
{
    let d = decompose_state(rho0, levels)?;
    let thermal = *d.thermal_state().matrix();
    let forward_thermal = forward.final_populations(&thermal);
    let forward_coherence = forward.final_populations(&d.chi);
    let backward_thermal = reversed.final_populations(&thermal);
    let backward_coherence = reversed.final_populations(chi_backward);

    let tiny = T::lit(ZERO_PROBABILITY);
    for (f, &p) in forward_thermal.iter().enumerate() {
        if p <= tiny {
            return Err(Error::DivergentEntropyTerm(format!(
                "forward thermal probability of outcome {f} is zero"
            )));
        }
    }
    for (i, &p) in backward_thermal.iter().enumerate() {
        if p <= tiny {
            return Err(Error::DivergentEntropyTerm(format!(
                "backward thermal probability of outcome {i} is zero"
            )));
        }
    }
    let log_ratio = |coherent: [T; 2], thermal: [T; 2]| -> Result<[T; 2]> {
        let mut out = [T::zero(); 2];
        for k in 0..2 {
            let ratio = T::one() + coherent[k] / thermal[k];
            if ratio <= T::zero() {
                return Err(Error::NonPhysicalCoherenceRatio {
                    outcome: k,
                    value: ratio.to_f64_lossy(),
                });
            }
            out[k] = ratio.ln();
        }
        Ok(out)
    };
    let forward_sigma = log_ratio(forward_coherence, forward_thermal)?;
    let backward_sigma = log_ratio(backward_coherence, backward_thermal)?;

    let delta_sigma =
        [0, 1].map(|i| [0, 1].map(|f| (forward_thermal[f] / backward_thermal[i]).ln()));
    let p = d.populations;
    let forward_joint =
        [0, 1].map(|i| [0, 1].map(|f| p[i] * (forward_thermal[f] + forward_coherence[f])));
    let backward_joint =
        [0, 1].map(|f| [0, 1].map(|i| p[f] * (backward_thermal[i] + backward_coherence[i])));

    Ok(EntropyLedger {
        beta: d.beta,
        energies: levels.energies(),
        populations: p,
        forward_thermal,
        forward_coherence,
        backward_thermal,
        backward_coherence,
        forward_sigma,
        backward_sigma,
        delta_sigma,
        forward_joint,
        backward_joint,
    })
}

/// `⟨e^{−ΔΣ}⟩`; equals `Σ_f p_f(ρ_th) = 1` for any trace-preserving channel.
pub fn verify_sigma_ft<T: Real>(ledger: &EntropyLedger<T>) -> T {
    ledger.exp_mean_big_sigma()
}

/// `(⟨e^{−βΔE − Δσ − ΔΣ}⟩, e^{−βΔF})`.
pub fn verify_integral_ft<T: Real>(ledger: &EntropyLedger<T>, delta_f: T) -> (T, T) {
    (ledger.exp_mean_total(), (-ledger.beta * delta_f).exp())
}

/// Both sides of `P_Γ(i,f)/P_Γ̃(f,i) = exp[β(ΔE − ΔF) + Δσ + ΔΣ]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetailedBalance<T> {
    pub direct: T,
    pub exponential: T,
}

pub fn detailed_balance_ratio<T: Real>(
    ledger: &EntropyLedger<T>,
    i: usize,
    f: usize,
    delta_f: T,
) -> Result<DetailedBalance<T>> {
    let backward = ledger.backward_joint[f][i];
    if backward <= T::lit(ZERO_PROBABILITY) {
        return Err(Error::DivergentRatio { i, f });
    }
    let exponent = ledger.beta * (ledger.delta_e(i, f) - delta_f)
        + ledger.delta_sigma[i][f]
        + ledger.delta_big_sigma(i, f);
    Ok(DetailedBalance {
        direct: ledger.forward_joint[i][f] / backward,
        exponential: exponent.exp(),
    })
}

/// `β⟨ΔE⟩` and its two lower bounds, `−ln 𝒢` from the characteristic
/// function and `−(⟨Δσ⟩ + ⟨ΔΣ⟩)` from the entropy terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JensenBounds<T> {
    pub beta_mean_de: T,
    pub bound_charfn: T,
    pub bound_entropy: T,
}

/// `𝒢 = 2·tr(ρ_th Φ(ρ₀)) = 2 Σ_f P_f p_f(ρ₀)`.
pub fn jensen_bounds<T: Real>(ledger: &EntropyLedger<T>) -> Result<JensenBounds<T>> {
    let mut g = T::zero();
    for f in 0..2 {
        g = g + ledger.populations[f] * (ledger.forward_thermal[f] + ledger.forward_coherence[f]);
    }
    g = g * T::lit(2.0);
    if !(g > T::zero()) {
        return Err(Error::Domain(format!(
            "characteristic function value {} is not positive",
            g.to_f64_lossy()
        )));
    }
    Ok(JensenBounds {
        beta_mean_de: ledger.beta * ledger.mean_delta_e(),
        bound_charfn: -g.ln(),
        bound_entropy: -(ledger.mean_delta_sigma() + ledger.mean_delta_big_sigma()),
    })
}

/// `⟨Δσ̄⟩ = Σ_n p_n ln(p̃_n/p_n)` against `−S(p‖p̃)`, plus `⟨e^{Δσ̄}⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativeEntropy<T> {
    pub mean: T,
    pub neg_relent: T,
    pub exp_mean: T,
}

/// Outcomes with `p_n = 0` do not contribute; `p_n > 0` with `p̃_n = 0` is a
/// divergence.
pub fn relative_entropy_identity<T: Real>(p: &[T; 2], p_tilde: &[T; 2]) -> Result<RelativeEntropy<T>> {
    let tiny = T::lit(ZERO_PROBABILITY);
    let mut mean = T::zero();
    let mut relent = T::zero();
    let mut exp_mean = T::zero();
    for n in 0..2 {
        if p[n] <= tiny {
            continue;
        }
        if p_tilde[n] <= tiny {
            return Err(Error::DivergentEntropyTerm(format!(
                "reference probability of outcome {n} is zero"
            )));
        }
        let sigma = (p_tilde[n] / p[n]).ln();
        mean = mean + p[n] * sigma;
        relent = relent + p[n] * (p[n].ln() - p_tilde[n].ln());
        exp_mean = exp_mean + p[n] * sigma.exp();
    }
    Ok(RelativeEntropy {
        mean,
        neg_relent: -relent,
        exp_mean,
    })
}

/// `max_j |p̃_j(Φ̃(ρ_th)) − p_j(Φ(ρ_th))|`.
pub fn backward_forward_consistency<T, C, R>(
    forward: &C,
    reversed: &R,
    levels: &EnergyLevels<T>,
    beta: T,
) -> T
where
    T: Real,
    C: QuantumChannel<T> + ?Sized,
    R: QuantumChannel<T> + ?Sized,
{
    let thermal = *levels.thermal_state(beta).matrix();
    let fwd = forward.final_populations(&thermal);
    let bwd = reversed.final_populations(&thermal);
    (fwd[0] - bwd[0]).abs().max((fwd[1] - bwd[1]).abs())
}

/// Forward `P_Γ(n, m) = p_n(ρ₀) p_m(Φ(ρ₀))` and backward
/// `P_Γ̃(m, n) = p_m(ρ_B) p̃_n(Φ̃(ρ_B))`, the latter indexed `[m][n]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPair<T> {
    pub forward: [[T; 2]; 2],
    pub backward: [[T; 2]; 2],
}

impl<T: Real> TrajectoryPair<T> {
    /// `max |P_Γ(n,m) − P_Γ̃(m,n)|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for n in 0..2 {
            for m in 0..2 {
                worst = worst.max((self.forward[n][m] - self.backward[m][n]).abs());
            }
        }
        worst
    }
}

pub fn trajectory_pair<T, C, R>(
    rho0: &DensityMatrix<T>,
    rho_b: &DensityMatrix<T>,
    forward: &C,
    reversed: &R,
) -> TrajectoryPair<T>
where
    T: Real,
    C: QuantumChannel<T> + ?Sized,
    R: QuantumChannel<T> + ?Sized,
{
    let p_in = rho0.populations();
    let p_fin = forward.final_populations(rho0.matrix());
    let q_in = rho_b.populations();
    let q_fin = reversed.final_populations(rho_b.matrix());
    TrajectoryPair {
        forward: [0, 1].map(|n| [0, 1].map(|m| p_in[n] * p_fin[m])),
        backward: [0, 1].map(|m| [0, 1].map(|n| q_in[m] * q_fin[n])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{KrausSet, PulseParams, PulsedDynamics, Superoperator};
    use proptest::prelude::*;

    const OMEGA: f64 = 2.0 * std::f64::consts::PI * 0.9;

    fn levels() -> EnergyLevels<f64> {
        EnergyLevels::qubit(OMEGA)
    }

    fn fitted() -> PulsedDynamics<f64> {
        PulsedDynamics::new(PulseParams::nv_defaults()).unwrap()
    }

    fn ledger_at(rho: &DensityMatrix<f64>, n: u32) -> EntropyLedger<f64> {
        let ch = fitted().channels(n).unwrap();
        entropy_terms(rho, &levels(), &ch.forward, &ch.reversed).unwrap()
    }

    fn unitary() -> (PulsedDynamics<f64>, PulseParams<f64>) {
        let params = PulseParams { p_abs: 0.0, ..PulseParams::nv_defaults() };
        (PulsedDynamics::new(params).unwrap(), params)
    }

    #[test]
    fn no_coherence_means_no_big_sigma() {
        let rho = DensityMatrix::experimental(0.5).unwrap().diagonal_part();
        let l = ledger_at(&rho, 4);
        for i in 0..2 {
            for f in 0..2 {
                assert_eq!(l.delta_big_sigma(i, f), 0.0);
            }
        }
        assert!((verify_sigma_ft(&l) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_channel_annihilates_coherence_terms() {
        let id = Superoperator::identity();
        let l = entropy_terms(&DensityMatrix::plus_y(), &levels(), &id, &id).unwrap();
        assert_eq!(l.forward_sigma, [0.0, 0.0]);
    }

    #[test]
    fn big_sigma_depends_on_final_outcome_only() {
        let d = fitted();
        let mut branches = Vec::new();
        for n in 1..=20 {
            let ch = d.channels(n).unwrap();
            let l = entropy_terms(&DensityMatrix::minus_y(), &levels(), &ch.forward, &ch.reversed).unwrap();
            for f in 0..2 {
                assert_eq!(l.delta_big_sigma(0, f), l.delta_big_sigma(1, f));
            }
            branches.push(l.forward_sigma);
        }
        // Two distinct branches of opposite sign that settle as N grows.
        assert!(branches.iter().all(|b| b[0] < 0.0 && b[1] > 0.0));
        let last = branches[19];
        let prev = branches[18];
        assert!((last[0] - prev[0]).abs() < 1e-3 && (last[1] - prev[1]).abs() < 1e-3);
    }

    #[test]
    fn sigma_ft_on_fitted_channel() {
        for n in 1..=20 {
            let l = ledger_at(&DensityMatrix::plus_y(), n);
            assert!((verify_sigma_ft(&l) - 1.0).abs() < 1e-12, "N = {n}");
            assert!(l.mean_delta_big_sigma() >= -1e-12);
        }
    }

    #[test]
    fn integral_ft_on_fitted_channel() {
        let rho = DensityMatrix::experimental(0.38).unwrap();
        for n in 0..=20 {
            let l = ledger_at(&rho, n);
            let (lhs, rhs) = verify_integral_ft(&l, 0.0);
            assert_eq!(rhs, 1.0);
            assert!((lhs - 1.0).abs() < 1e-10, "N = {n}: {lhs}");
        }
    }

    #[test]
    fn integral_ft_for_positive_beta() {
        let chi = DensityMatrix::plus_y().coherence().scale_real(0.3);
        let rho = DensityMatrix::thermal_with_coherence(&levels(), 0.4, &chi).unwrap();
        let l = ledger_at(&rho, 6);
        assert!(l.beta > 0.0);
        assert!((verify_integral_ft(&l, 0.0).0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn detailed_balance_on_fitted_channel() {
        let l = ledger_at(&DensityMatrix::experimental(0.38).unwrap(), 5);
        for i in 0..2 {
            for f in 0..2 {
                let r = detailed_balance_ratio(&l, i, f, 0.0).unwrap();
                assert!((r.direct - r.exponential).abs() < 1e-10 * r.direct.max(1.0));
            }
        }
    }

    #[test]
    fn detailed_balance_trivial_limits() {
        let id = Superoperator::identity();
        let l = entropy_terms(&DensityMatrix::maximally_mixed(), &levels(), &id, &id).unwrap();
        for i in 0..2 {
            for f in 0..2 {
                let r = detailed_balance_ratio(&l, i, f, 0.0).unwrap();
                assert_eq!((r.direct, r.exponential), (1.0, 1.0));
            }
        }

        // Unitary channel, thermal state: Δσ = −βΔE, so the ratio is 1.
        let (d, _) = unitary();
        let ch = d.channels(3).unwrap();
        let th = levels().thermal_state(0.8);
        let l = entropy_terms(&th, &levels(), &ch.forward, &ch.reversed).unwrap();
        for i in 0..2 {
            for f in 0..2 {
                assert!((l.delta_sigma[i][f] + l.beta * l.delta_e(i, f)).abs() < 1e-12);
                assert_eq!(l.delta_big_sigma(i, f), 0.0);
                let r = detailed_balance_ratio(&l, i, f, 0.0).unwrap();
                assert!((r.direct - r.exponential).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_backward_probability_is_divergent() {
        let mut l = ledger_at(&DensityMatrix::experimental(0.38).unwrap(), 1);
        l.backward_joint[1][0] = 0.0;
        assert!(matches!(
            detailed_balance_ratio(&l, 0, 1, 0.0),
            Err(Error::DivergentRatio { i: 0, f: 1 })
        ));
    }

    #[test]
    fn divergent_and_nonphysical_inputs() {
        let pump = PulsedDynamics::new(PulseParams::new(1.0, 1.0, 0.0, 1.0).unwrap()).unwrap();
        let l = pump.forward(1);
        let err = entropy_terms(&DensityMatrix::maximally_mixed(), &levels(), &l, &Superoperator::identity());
        assert!(matches!(err, Err(Error::DivergentEntropyTerm(_))));

        // A map that copies the real part of ρ₀₁ onto the populations makes
        // p_f(χ) large enough to flip the sign of 1 + p_f(χ)/p_f(ρ_th).
        let mut m = *Superoperator::<f64>::identity().matrix();
        m[(0, 1)] = crate::linops::real(-2.0);
        m[(3, 1)] = crate::linops::real(2.0);
        let bad = Superoperator::from_matrix(m);
        let rho = DensityMatrix::pure([crate::linops::real(1.0), crate::linops::real(1.0)]).unwrap();
        assert!(matches!(
            entropy_terms(&rho, &levels(), &bad, &Superoperator::identity()),
            Err(Error::NonPhysicalCoherenceRatio { outcome: 0, .. })
        ));
    }

    #[test]
    fn jensen_bounds_hold_and_entropy_bound_is_tighter() {
        let rho = DensityMatrix::experimental(0.38).unwrap();
        for n in 0..=20 {
            let b = jensen_bounds(&ledger_at(&rho, n)).unwrap();
            assert!(b.bound_charfn <= b.beta_mean_de + 1e-10, "N = {n}");
            assert!(b.bound_entropy <= b.beta_mean_de + 1e-10, "N = {n}");
            assert!(b.bound_entropy >= b.bound_charfn, "N = {n}");
        }
    }

    #[test]
    fn jensen_bounds_trivial_limits() {
        let rho = DensityMatrix::plus_y();
        let b = jensen_bounds(&ledger_at(&rho, 3)).unwrap();
        assert_eq!(b.beta_mean_de, 0.0);
        assert!(b.bound_entropy <= 1e-12);

        let (d, _) = unitary();
        let ch = d.channels(2).unwrap();
        let l = entropy_terms(&DensityMatrix::maximally_mixed(), &levels(), &ch.forward, &ch.reversed).unwrap();
        let b = jensen_bounds(&l).unwrap();
        assert_eq!(b.beta_mean_de, 0.0);
        assert!(b.bound_charfn.abs() < 1e-15 && b.bound_entropy.abs() < 1e-15);

        // Thermal β ≠ 0: β⟨ΔE⟩ and the entropy bound vanish, −ln 𝒢 = −ln(2ΣP²).
        let beta = 0.9;
        let l = entropy_terms(&levels().thermal_state(beta), &levels(), &ch.forward, &ch.reversed).unwrap();
        let b = jensen_bounds(&l).unwrap();
        let p = levels().thermal_populations(beta);
        assert!(b.beta_mean_de.abs() < 1e-15 && b.bound_entropy.abs() < 1e-12);
        assert!((b.bound_charfn + (2.0 * (p[0] * p[0] + p[1] * p[1])).ln()).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_examples() {
        let r = relative_entropy_identity(&[0.3, 0.7], &[0.3, 0.7]).unwrap();
        assert_eq!((r.mean, r.neg_relent, r.exp_mean), (0.0, 0.0, 1.0));
        let r = relative_entropy_identity(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!((r.mean + ln2).abs() < 1e-15 && (r.neg_relent + ln2).abs() < 1e-15);
        assert!(matches!(
            relative_entropy_identity(&[0.5, 0.5], &[1.0, 0.0]),
            Err(Error::DivergentEntropyTerm(_))
        ));
    }

    #[test]
    fn relative_entropy_on_fitted_channel() {
        let d = fitted();
        let ch = d.channels(5).unwrap();
        let rho0 = DensityMatrix::experimental(0.38).unwrap();
        let rho_b = ch.forward.apply(&rho0);
        let p_tilde = ch.reversed.final_populations(rho_b.matrix());
        let r = relative_entropy_identity(&rho0.populations(), &p_tilde).unwrap();
        assert!((r.mean - r.neg_relent).abs() < 1e-12);
        assert!((r.exp_mean - 1.0).abs() < 1e-12);
        assert!(r.mean <= 0.0);
    }

    #[test]
    fn general_terms_reduce_to_standard_ones() {
        let d = fitted();
        let ch = d.channels(4).unwrap();
        let rho = DensityMatrix::experimental(0.38).unwrap();
        let a = entropy_terms(&rho, &levels(), &ch.forward, &ch.reversed).unwrap();
        let b = general_entropy_terms(&rho, &levels(), &ComplexMatrix2::zeros(), &ch.forward, &ch.reversed).unwrap();
        assert_eq!(a, b);

        let th = rho.diagonal_part();
        let c = general_entropy_terms(&th, &levels(), &ComplexMatrix2::zeros(), &ch.forward, &ch.reversed).unwrap();
        for i in 0..2 {
            for f in 0..2 {
                assert_eq!(c.delta_big_sigma(i, f), 0.0);
            }
        }
    }

    #[test]
    fn general_terms_cancel_for_identity_dynamics() {
        // Identity forward and backward maps, χ_B = χ: every coherence term is
        // projected away and Δσ_{i,f} = ln(P_f/P_i) = −Δσ_{f,i}.
        let id = Superoperator::identity();
        let rho = DensityMatrix::experimental(0.38).unwrap();
        let l = general_entropy_terms(&rho, &levels(), &rho.coherence(), &id, &id).unwrap();
        for i in 0..2 {
            for f in 0..2 {
                assert_eq!(l.delta_big_sigma(i, f), 0.0);
                assert!((l.delta_sigma[i][f] + l.delta_sigma[f][i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn general_terms_with_backward_coherence_keep_identities() {
        let d = fitted();
        let ch = d.channels(3).unwrap();
        let rho = DensityMatrix::experimental(0.38).unwrap();
        let chi_b = ch.forward.apply(&rho).coherence();
        let l = general_entropy_terms(&rho, &levels(), &chi_b, &ch.forward, &ch.reversed).unwrap();
        assert!(l.backward_sigma.iter().any(|s| s.abs() > 1e-6));
        assert!((verify_integral_ft(&l, 0.0).0 - 1.0).abs() < 1e-10);
        for i in 0..2 {
            for f in 0..2 {
                let r = detailed_balance_ratio(&l, i, f, 0.0).unwrap();
                assert!((r.direct - r.exponential).abs() < 1e-10 * r.direct.max(1.0));
            }
        }
    }

    #[test]
    fn unitary_dynamics_is_micro_reversible() {
        let (d, _) = unitary();
        for n in [1, 2, 7] {
            let ch = d.channels(n).unwrap();
            for rho0 in [DensityMatrix::plus_y(), DensityMatrix::experimental(0.38).unwrap()] {
                let rho_b = ch.forward.apply(&rho0);
                let pair = trajectory_pair(&rho0, &rho_b, &ch.forward, &ch.reversed);
                assert!(pair.asymmetry() < 1e-10);
                let p_tilde = ch.reversed.final_populations(rho_b.matrix());
                let r = relative_entropy_identity(&rho0.populations(), &p_tilde).unwrap();
                assert!(r.mean.abs() < 1e-12);
            }
            assert!(backward_forward_consistency(&ch.forward, &ch.reversed, &levels(), 0.4) < 1e-12);
        }
    }

    #[test]
    fn backward_forward_envelope_on_fitted_channel() {
        let d = fitted();
        let beta = decompose_state(&DensityMatrix::experimental(0.38).unwrap(), &levels()).unwrap().beta;
        let mut envelope: f64 = 0.0;
        for n in 1..=20 {
            let ch = d.channels(n).unwrap();
            let gap = backward_forward_consistency(&ch.forward, &ch.reversed, &levels(), beta);
            envelope = envelope.max(gap);
            if n >= 15 {
                assert!(gap < 1e-3, "N = {n}: {gap}");
            }
        }
        assert!(envelope < 0.05, "{envelope}");
    }

    #[test]
    fn big_sigma_converges_at_spectral_rate() {
        let d = fitted();
        let lambda = d.fixed_point.second_modulus;
        let sigmas: Vec<[f64; 2]> = (1..=20)
            .map(|n| {
                let ch = d.channels(n).unwrap();
                entropy_terms(&DensityMatrix::plus_y(), &levels(), &ch.forward, &ch.reversed)
                    .unwrap()
                    .forward_sigma
            })
            .collect();
        let steps: Vec<f64> = sigmas
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).abs().max((w[1][1] - w[0][1]).abs()))
            .collect();
        let c = (0..4).map(|k| steps[k] / lambda.powi(k as i32 + 1)).fold(0.0, f64::max);
        for (k, s) in steps.iter().enumerate() {
            assert!(*s <= 2.0 * c * lambda.powi(k as i32 + 1) + 1e-14, "step {}", k + 1);
        }
    }

    #[test]
    fn kraus_and_superoperator_ledgers_agree() {
        let d = fitted();
        let ch = d.channels(3).unwrap();
        let rho = DensityMatrix::experimental(0.38).unwrap();
        let a = entropy_terms(&rho, &levels(), &ch.forward, &ch.reversed).unwrap();
        let b = entropy_terms(&rho, &levels(), &ch.kraus, &ch.reversed.to_superoperator()).unwrap();
        for f in 0..2 {
            assert!((a.forward_sigma[f] - b.forward_sigma[f]).abs() < 1e-12);
        }
        let _: &KrausSet<f64> = &ch.reversed;
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn identities_hold_across_parameters(
            p_abs in 0.05f64..1.0,
            p_d in 0.0f64..1.0,
            alpha in 0.0f64..std::f64::consts::FRAC_PI_2,
            omega_tau in 0.1f64..6.2,
            n in 1u32..21,
            beta in -2.0f64..2.0,
            shrink in 0.0f64..1.0,
            phase in 0.0f64..std::f64::consts::TAU,
        ) {
            let params = PulseParams::new(p_abs, p_d, alpha, omega_tau).unwrap();
            let d = PulsedDynamics::new(params).unwrap();
            prop_assume!(d.fixed_point.state.min_eigenvalue() > 1e-6);
            let ch = d.channels(n).unwrap();
            let levels = EnergyLevels::qubit(omega_tau);
            let p = levels.thermal_populations(beta);
            let max_c = (p[0] * p[1]).sqrt() * shrink;
            let mut chi = ComplexMatrix2::zeros();
            chi[(0, 1)] = crate::linops::cplx(phase.cos(), phase.sin()) * max_c;
            chi[(1, 0)] = chi[(0, 1)].conj();
            let rho = DensityMatrix::thermal_with_coherence(&levels, beta, &chi).unwrap();
            let l = match entropy_terms(&rho, &levels, &ch.forward, &ch.reversed) {
                Ok(l) => l,
                Err(Error::NonPhysicalCoherenceRatio { .. }) | Err(Error::DivergentEntropyTerm(_)) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            prop_assert!((verify_sigma_ft(&l) - 1.0).abs() < 1e-12);
            prop_assert!(l.mean_delta_big_sigma() >= -1e-12);
            prop_assert!((verify_integral_ft(&l, 0.0).0 - 1.0).abs() < 1e-10);
            for i in 0..2 {
                for f in 0..2 {
                    let r = detailed_balance_ratio(&l, i, f, 0.0).unwrap();
                    prop_assert!((r.direct - r.exponential).abs() <= 1e-10 * r.direct.max(1.0));
                }
            }
            let c = crate::thermo::epm_characteristic_identity(&rho, &ch.forward, &levels, 0.0).unwrap();
            prop_assert!(c.residual() < 1e-12 * c.lhs.max(1.0));
            let h = crate::thermo::heat_split(&rho, &ch.forward, &levels);
            prop_assert!((h.epm_mean - h.tpm_mean - h.coherence_term).abs() < 1e-12);
            let b = jensen_bounds(&l).unwrap();
            prop_assert!(b.bound_charfn <= b.beta_mean_de + 1e-10);
            prop_assert!(b.bound_entropy <= b.beta_mean_de + 1e-10);
        }
    }
}

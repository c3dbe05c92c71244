// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Qubit states, energy levels and the thermal-plus-coherence split of an
//! initial state.
//!
//! Level index 0 carries energy `+ω/2` and index 1 carries `−ω/2`.

use num_complex::Complex;

use crate::linops::{cplx, hermitian_eig, real, ComplexMatrix2};
use crate::{Error, Real, Result};

/// Populations below this are treated as exact zeros.
pub const ZERO_PROBABILITY: f64 = 1e-300;

/// 2×2 Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: ComplexMatrix2<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix2<T>) -> Result<Self> {
        let tol = T::default_tol();
        if !matrix.is_finite() {
            return Err(Error::InvariantViolation("state has non-finite entries".into()));
        }
        if !matrix.is_hermitian(tol) {
            return Err(Error::InvariantViolation("state is not Hermitian".into()));
        }
        let trace = matrix.trace();
        if (trace.re - T::one()).abs() > tol || trace.im.abs() > tol {
            return Err(Error::InvariantViolation(format!(
                "state trace is {} instead of 1",
                trace.re.to_f64_lossy()
            )));
        }
        let state = Self::from_unchecked(matrix);
        let smallest = state.min_eigenvalue();
        if smallest < -tol {
            return Err(Error::InvariantViolation(format!(
                "state is not positive semidefinite (eigenvalue {:e})",
                smallest.to_f64_lossy()
            )));
        }
        Ok(state)
    }

    /// Wraps the Hermitian part of `matrix` without validation. Used for
    /// channel outputs, which are states up to rounding.
    pub fn from_unchecked(matrix: ComplexMatrix2<T>) -> Self {
        DensityMatrix {
            matrix: matrix.hermitian_part(),
        }
    }

    pub fn pure(amplitudes: [Complex<T>; 2]) -> Result<Self> {
        let norm = (amplitudes[0].norm_sqr() + amplitudes[1].norm_sqr()).sqrt();
        if norm <= T::zero() || !norm.is_finite() {
            return Err(Error::Domain("state vector has zero norm".into()));
        }
        let psi = amplitudes.map(|a| a / norm);
        Ok(Self::from_unchecked(ComplexMatrix2::outer(&psi, &psi)))
    }

    pub fn ket0() -> Self {
        Self::from_unchecked(ComplexMatrix2::from_diagonal([T::one(), T::zero()]))
    }

    pub fn ket1() -> Self {
        Self::from_unchecked(ComplexMatrix2::from_diagonal([T::zero(), T::one()]))
    }

    /// `|+⟩_y = (|0⟩ + i|1⟩)/√2`, so that `ρ₀₁ = −i/2`.
    pub fn plus_y() -> Self {
        let half = T::lit(0.5);
        Self::from_unchecked(ComplexMatrix2::from_rows([
            [real(half), cplx(T::zero(), -half)],
            [cplx(T::zero(), half), real(half)],
        ]))
    }

    /// `|−⟩_y = (|0⟩ − i|1⟩)/√2`.
    pub fn minus_y() -> Self {
        let half = T::lit(0.5);
        Self::from_unchecked(ComplexMatrix2::from_rows([
            [real(half), cplx(T::zero(), half)],
            [cplx(T::zero(), -half), real(half)],
        ]))
    }

    pub fn maximally_mixed() -> Self {
        let half = T::lit(0.5);
        Self::from_unchecked(ComplexMatrix2::from_diagonal([half, half]))
    }

    /// The experimental family
    ///
    /// ```text
    /// ρ₀(p) = ½ [ 1+p        −i(1−p) ]
    ///           [ i(1−p)      1−p    ]
    /// ```
    ///
    /// i.e. `p·|0⟩⟨0| + (1−p)·|+⟩_y⟨+|`, the weight `p` sitting on the upper
    /// level.
    pub fn experimental(p: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::Domain(format!(
                "mixing probability {} outside [0, 1]",
                p.to_f64_lossy()
            )));
        }
        Self::mixture(&[(p, Self::ket0()), (T::one() - p, Self::plus_y())])
    }

    /// Convex combination `Σ w_k ρ_k`; weights must be non-negative and sum
    /// to one.
    pub fn mixture(components: &[(T, Self)]) -> Result<Self> {
        let mut total = T::zero();
        let mut m = ComplexMatrix2::zeros();
        for (w, rho) in components {
            if *w < T::zero() {
                return Err(Error::Domain("negative mixture weight".into()));
            }
            total = total + *w;
            m = m + rho.matrix.scale_real(*w);
        }
        if (total - T::one()).abs() > T::default_tol() {
            return Err(Error::Domain(format!(
                "mixture weights sum to {}",
                total.to_f64_lossy()
            )));
        }
        Ok(Self::from_unchecked(m))
    }

    /// `ρ_th(β) + χ`; fails when the result is not a state.
    pub fn thermal_with_coherence(
        levels: &EnergyLevels<T>,
        beta: T,
        chi: &ComplexMatrix2<T>,
    ) -> Result<Self> {
        if chi[(0, 0)].norm() > T::default_tol() || chi[(1, 1)].norm() > T::default_tol() {
            return Err(Error::Domain("coherence part must be off-diagonal".into()));
        }
        Self::new(*levels.thermal_state(beta).matrix() + *chi)
    }

    pub fn matrix(&self) -> &ComplexMatrix2<T> {
        &self.matrix
    }

    /// Diagonal entries in the energy basis.
    pub fn populations(&self) -> [T; 2] {
        [self.matrix[(0, 0)].re, self.matrix[(1, 1)].re]
    }

    /// Traceless, strictly off-diagonal part `χ = ρ − diag(ρ)`.
    pub fn coherence(&self) -> ComplexMatrix2<T> {
        let mut chi = self.matrix;
        chi[(0, 0)] = real(T::zero());
        chi[(1, 1)] = real(T::zero());
        chi
    }

    pub fn diagonal_part(&self) -> Self {
        Self::from_unchecked(ComplexMatrix2::from_diagonal(self.populations()))
    }

    pub fn min_eigenvalue(&self) -> T {
        hermitian_eig(&self.matrix)
            .map(|e| e.values[1])
            .unwrap_or_else(|_| T::nan())
    }

    /// Frobenius distance to another state.
    pub fn distance(&self, other: &Self) -> T {
        self.matrix.distance(&other.matrix)
    }
}

/// Two-level spectrum; the Hamiltonian is diagonal in the computational basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyLevels<T> {
    energies: [T; 2],
}

impl<T: Real> EnergyLevels<T> {
    pub fn new(energies: [T; 2]) -> Self {
        EnergyLevels { energies }
    }

    /// `H = ω σ_z / 2`: energies `(+ω/2, −ω/2)`.
    pub fn qubit(omega: T) -> Self {
        let half = omega * T::lit(0.5);
        EnergyLevels { energies: [half, -half] }
    }

    pub fn energies(&self) -> [T; 2] {
        self.energies
    }

    pub fn energy(&self, k: usize) -> T {
        self.energies[k]
    }

    pub fn hamiltonian(&self) -> ComplexMatrix2<T> {
        ComplexMatrix2::from_diagonal(self.energies)
    }

    pub fn projector(&self, k: usize) -> ComplexMatrix2<T> {
        let mut d = [T::zero(); 2];
        d[k] = T::one();
        ComplexMatrix2::from_diagonal(d)
    }

    pub fn partition_function(&self, beta: T) -> T {
        self.energies
            .iter()
            .fold(T::zero(), |acc, &e| acc + (-beta * e).exp())
    }

    /// `e^{−βE_k}/Z`, evaluated with a shifted exponent so that large `|β|`
    /// does not overflow.
    pub fn thermal_populations(&self, beta: T) -> [T; 2] {
        let exponents = self.energies.map(|e| -beta * e);
        let top = exponents[0].max(exponents[1]);
        let weights = exponents.map(|x| (x - top).exp());
        let z = weights[0] + weights[1];
        weights.map(|w| w / z)
    }

    pub fn thermal_state(&self, beta: T) -> DensityMatrix<T> {
        DensityMatrix::from_unchecked(ComplexMatrix2::from_diagonal(self.thermal_populations(beta)))
    }
}

/// `ρ₀ = ρ_th(β) + χ`.
#[derive(Clone, Copy, Debug)]
pub struct ThermalDecomposition<T> {
    pub beta: T,
    pub partition_function: T,
    pub populations: [T; 2],
    pub chi: ComplexMatrix2<T>,
    pub levels: EnergyLevels<T>,
}

impl<T: Real> ThermalDecomposition<T> {
    pub fn thermal_state(&self) -> DensityMatrix<T> {
        DensityMatrix::from_unchecked(ComplexMatrix2::from_diagonal(self.populations))
    }

    pub fn state(&self) -> DensityMatrix<T> {
        DensityMatrix::from_unchecked(*self.thermal_state().matrix() + self.chi)
    }
}

/// Splits `ρ₀` into thermal populations at the inverse temperature that
/// reproduces them, `β = ln(p₁/p₀)/(E₀ − E₁)`, plus the coherence `χ`.
///
/// `β` may be negative (population inversion).
pub fn decompose_state<T: Real>(
    rho0: &DensityMatrix<T>,
    levels: &EnergyLevels<T>,
) -> Result<ThermalDecomposition<T>> {
    let populations = rho0.populations();
    for (level, &p) in populations.iter().enumerate() {
        if p <= T::lit(ZERO_PROBABILITY) {
            return Err(Error::InfiniteBeta { level });
        }
    }
    let [e0, e1] = levels.energies();
    let beta = if e0 == e1 {
        if (populations[0] - populations[1]).abs() > T::default_tol() {
            return Err(Error::Domain(
                "degenerate levels admit only equal thermal populations".into(),
            ));
        }
        T::zero()
    } else {
        (populations[1] / populations[0]).ln() / (e0 - e1)
    };
    Ok(ThermalDecomposition {
        beta,
        partition_function: levels.partition_function(beta),
        populations,
        chi: rho0.coherence(),
        levels: *levels,
    })
}

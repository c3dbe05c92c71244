// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Pulse-cycle channel of the driven qubit, its fixed point, Kraus
//! decomposition and time reversal.
//!
//! Superoperators act on column-stacked density matrices,
//! `vec(ρ) = (ρ₀₀, ρ₁₀, ρ₀₁, ρ₁₁)`, so `vec(AρB) = (Bᵀ ⊗ A)·vec(ρ)`.
//! Time is measured in units of the cycle length `τ`; the free Hamiltonian is
//! `H = (ωτ) σ_z / 2`.

use num_complex::Complex;

use crate::linops::{
    cplx, eigenvalues, hermitian_eig, kron, psd_sqrt_and_invsqrt, real, solve, unitary_exp,
    unvectorize, vectorize, ComplexMatrix2, ComplexMatrix4, Vector,
};
use crate::thermo::DensityMatrix;
use crate::{Error, Real, Result};

/// Choi eigenvalues at or below this are dropped when extracting Kraus
/// operators.
pub const RANK_TOL: f64 = 1e-10;

/// A fixed point is accepted as unique only if `1 − |λ₂|` exceeds this.
pub const MIN_SPECTRAL_GAP: f64 = 1e-9;

/// Residual allowed when checking that a supplied state is a fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-9;

/// Parameters of one dissipative pulse plus the free evolution between
/// pulses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseParams<T> {
    /// Absorption probability per pulse.
    pub p_abs: T,
    /// Population-transfer probability.
    pub p_d: T,
    /// Mixing angle, in `[0, π/2]`.
    pub alpha: T,
    /// Phase `ωτ` accumulated between pulses.
    pub omega_tau: T,
}

impl<T: Real> PulseParams<T> {
    pub fn new(p_abs: T, p_d: T, alpha: T, omega_tau: T) -> Result<Self> {
        let params = PulseParams {
            p_abs,
            p_d,
            alpha,
            omega_tau,
        };
        params.validate()?;
        Ok(params)
    }

    /// Values fitted to the NV-centre experiment.
    pub fn nv_defaults() -> Self {
        PulseParams {
            p_abs: T::lit(0.7),
            p_d: T::lit(0.255),
            alpha: T::FRAC_PI_4(),
            omega_tau: T::lit(2.0 * std::f64::consts::PI * 0.9),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: T| {
            if v >= T::zero() && v <= T::one() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} = {} outside [0, 1]", v.to_f64_lossy())))
            }
        };
        unit("p_abs", self.p_abs)?;
        unit("p_d", self.p_d)?;
        if !(self.alpha >= T::zero() && self.alpha <= T::FRAC_PI_2()) {
            return Err(Error::Domain(format!(
                "alpha = {} outside [0, pi/2]",
                self.alpha.to_f64_lossy()
            )));
        }
        if !self.omega_tau.is_finite() {
            return Err(Error::Domain("omega_tau must be finite".into()));
        }
        Ok(())
    }

    /// `(k_c, k_s, k_sc)`.
    pub fn coefficients(&self) -> (T, T, T) {
        let q = T::one() - self.p_d;
        let (s, c) = self.alpha.sin_cos();
        (T::one() - q * c * c, T::one() - q * s * s, q * s * c)
    }

    /// `H = (ωτ) σ_z / 2` in units of `1/τ`.
    pub fn hamiltonian(&self) -> ComplexMatrix2<T> {
        let half = self.omega_tau * T::lit(0.5);
        ComplexMatrix2::from_diagonal([half, -half])
    }

    /// `exp(−iHτ)`.
    pub fn free_unitary(&self) -> ComplexMatrix2<T> {
        let half = self.omega_tau * T::lit(0.5);
        ComplexMatrix2::from_complex_diagonal([cplx(half.cos(), -half.sin()), cplx(half.cos(), half.sin())])
    }
}

/// A linear map on 2×2 operators.
pub trait QuantumChannel<T: Real> {
    fn apply_operator(&self, a: &ComplexMatrix2<T>) -> ComplexMatrix2<T>;

    fn apply(&self, rho: &DensityMatrix<T>) -> DensityMatrix<T> {
        DensityMatrix::from_unchecked(self.apply_operator(rho.matrix()))
    }

    /// `tr(Π_f Φ(A))` for both levels.
    fn final_populations(&self, a: &ComplexMatrix2<T>) -> [T; 2] {
        let out = self.apply_operator(a);
        [out[(0, 0)].re, out[(1, 1)].re]
    }
}

pub fn apply_channel<T: Real, C: QuantumChannel<T> + ?Sized>(
    map: &C,
    rho: &DensityMatrix<T>,
) -> DensityMatrix<T> {
    map.apply(rho)
}

/// 4×4 matrix acting on `vec(ρ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Superoperator<T> {
    matrix: ComplexMatrix4<T>,
}

impl<T: Real> Superoperator<T> {
    pub fn from_matrix(matrix: ComplexMatrix4<T>) -> Self {
        Superoperator { matrix }
    }

    pub fn identity() -> Self {
        Superoperator {
            matrix: ComplexMatrix4::identity(),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix4<T> {
        &self.matrix
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Self) -> Self {
        Superoperator {
            matrix: next.matrix * self.matrix,
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        Superoperator {
            matrix: self.matrix.pow(n),
        }
    }

    /// `T = Σ_{kj} (E_kj ⊗ 1) L (1 ⊗ E_kj)`, which under column stacking
    /// equals `Σ_{kj} E_kj ⊗ Φ(E_kj)`.
    pub fn choi(&self) -> ComplexMatrix4<T> {
        let id = ComplexMatrix2::identity();
        let mut t = ComplexMatrix4::zeros();
        for k in 0..2 {
            for j in 0..2 {
                let e = unit_matrix(k, j);
                t = t + kron(&e, &id) * self.matrix * kron(&id, &e);
            }
        }
        t
    }

    /// `max |(1,0,0,1)·L − (1,0,0,1)|`: zero exactly when `tr Φ(A) = tr A`.
    pub fn trace_residual(&self) -> T {
        let mut worst = T::zero();
        for c in 0..4 {
            let target = if c == 0 || c == 3 { T::one() } else { T::zero() };
            let v = self.matrix[(0, c)] + self.matrix[(3, c)] - real(target);
            worst = worst.max(v.norm());
        }
        worst
    }

    pub fn ensure_trace_preserving(&self, tol: T) -> Result<()> {
        let residual = self.trace_residual();
        if residual > tol || !residual.is_finite() {
            return Err(Error::NotTracePreserving {
                residual: residual.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// `‖Φ(1) − 1‖`, zero for unital maps.
    pub fn unitality_residual(&self) -> T {
        let id = ComplexMatrix2::identity();
        self.apply_operator(&id).max_abs_diff(&id)
    }

    pub fn kraus(&self, rank_tol: T) -> Result<KrausSet<T>> {
        kraus_from_choi(self, rank_tol)
    }
}

impl<T: Real> QuantumChannel<T> for Superoperator<T> {
    fn apply_operator(&self, a: &ComplexMatrix2<T>) -> ComplexMatrix2<T> {
        unvectorize(&self.matrix.mul_vec(&vectorize(a)))
    }
}

fn unit_matrix<T: Real>(k: usize, j: usize) -> ComplexMatrix2<T> {
    let mut e = ComplexMatrix2::zeros();
    e[(k, j)] = real(T::one());
    e
}

/// The dissipative pulse map `S`.
pub fn build_pulse_superoperator<T: Real>(params: &PulseParams<T>) -> Result<Superoperator<T>> {
    params.validate()?;
    let p = params.p_abs;
    let pd = params.p_d;
    let (kc, ks, ksc) = params.coefficients();
    let (sin, cos) = params.alpha.sin_cos();
    let two = T::lit(2.0);
    let one = T::one();
    let rows = [
        [two - p * (kc - pd * cos), p * ksc, p * ksc, p * (pd * cos + kc)],
        [p * (ksc + pd * sin), two - p * (one + ks), -p * (ks - one), p * (pd * sin - ksc)],
        [p * (ksc + pd * sin), -p * (ks - one), two - p * (one + ks), p * (pd * sin - ksc)],
        [p * (kc - pd * cos), -p * ksc, -p * ksc, two - p * (pd * cos + kc)],
    ];
    let half = T::lit(0.5);
    Ok(Superoperator::from_matrix(ComplexMatrix4::from_real_rows(
        rows.map(|r| r.map(|x| x * half)),
    )))
}

/// Free evolution `ρ ↦ e^{−iHτ} ρ e^{iHτ}`, i.e. `exp(−iτ(1⊗H − Hᵀ⊗1))` on
/// `vec(ρ)`.
pub fn build_unitary_superoperator<T: Real>(params: &PulseParams<T>) -> Result<Superoperator<T>> {
    params.validate()?;
    let h = params.hamiltonian();
    let id = ComplexMatrix2::identity();
    let generator = kron(&id, &h) - kron(&h.transpose(), &id);
    Ok(Superoperator::from_matrix(unitary_exp(&generator, T::one())?))
}

/// `(S·U)^N`; `N = 0` gives the identity.
pub fn compose_cycles<T: Real>(
    s: &Superoperator<T>,
    u: &Superoperator<T>,
    n: u32,
) -> Superoperator<T> {
    u.then(s).pow(n)
}

#[derive(Clone, Copy, Debug)]
pub struct FixedPoint<T> {
    pub state: DensityMatrix<T>,
    /// `1 − |λ₂|` of the one-cycle map.
    pub spectral_gap: T,
    /// `|λ₂|`, the slowest decay rate per cycle.
    pub second_modulus: T,
}

/// Second-largest eigenvalue modulus after removing the eigenvalue closest
/// to 1.
pub fn second_modulus<T: Real>(l: &Superoperator<T>) -> T {
    let mut eig = eigenvalues(l.matrix());
    let one = real(T::one());
    let nearest = (0..eig.len())
        .min_by(|&a, &b| {
            (eig[a] - one)
                .norm()
                .partial_cmp(&(eig[b] - one).norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("four eigenvalues");
    eig.remove(nearest);
    eig.iter().fold(T::zero(), |m, z| m.max(z.norm()))
}

/// Unique unit-trace fixed point of a trace-preserving one-cycle map.
///
/// Solves `(L − 1)·x = 0` with one redundant row replaced by the trace
/// condition.
pub fn fixed_point<T: Real>(l: &Superoperator<T>) -> Result<FixedPoint<T>> {
    l.ensure_trace_preserving(T::default_tol())?;
    let second = second_modulus(l);
    let gap = T::one() - second;
    if gap < T::lit(MIN_SPECTRAL_GAP) {
        return Err(Error::NonUniqueFixedPoint {
            second_modulus: second.to_f64_lossy(),
        });
    }
    let mut a = *l.matrix() - ComplexMatrix4::identity();
    for c in 0..4 {
        a[(3, c)] = if c == 0 || c == 3 { real(T::one()) } else { real(T::zero()) };
    }
    let zero = real(T::zero());
    let rhs: Vector<T, 4> = [zero, zero, zero, real(T::one())];
    let x = solve(&a, &rhs, T::epsilon() * T::lit(1e3)).map_err(|_| Error::NonUniqueFixedPoint {
        second_modulus: second.to_f64_lossy(),
    })?;
    let state = DensityMatrix::from_unchecked(unvectorize(&x));
    let smallest = state.min_eigenvalue();
    if smallest < -T::default_tol() {
        return Err(Error::InvariantViolation(format!(
            "fixed point has negative eigenvalue {:e}",
            smallest.to_f64_lossy()
        )));
    }
    Ok(FixedPoint {
        state,
        spectral_gap: gap,
        second_modulus: second,
    })
}

/// Operator-sum representation `Φ(ρ) = Σ K ρ K†`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet<T> {
    operators: Vec<ComplexMatrix2<T>>,
    rank_tol: T,
}

impl<T: Real> KrausSet<T> {
    pub fn new(operators: Vec<ComplexMatrix2<T>>, rank_tol: T) -> Self {
        KrausSet { operators, rank_tol }
    }

    pub fn operators(&self) -> &[ComplexMatrix2<T>] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn rank_tol(&self) -> T {
        self.rank_tol
    }

    /// `‖Σ K†K − 1‖_max`.
    pub fn completeness_residual(&self) -> T {
        let sum = self
            .operators
            .iter()
            .fold(ComplexMatrix2::zeros(), |acc, k| acc + k.adjoint() * *k);
        sum.max_abs_diff(&ComplexMatrix2::identity())
    }

    /// `Σ conj(K) ⊗ K`.
    pub fn to_superoperator(&self) -> Superoperator<T> {
        Superoperator::from_matrix(
            self.operators
                .iter()
                .fold(ComplexMatrix4::zeros(), |acc, k| acc + kron(&k.conj(), k)),
        )
    }
}

impl<T: Real> QuantumChannel<T> for KrausSet<T> {
    fn apply_operator(&self, a: &ComplexMatrix2<T>) -> ComplexMatrix2<T> {
        self.operators
            .iter()
            .fold(ComplexMatrix2::zeros(), |acc, k| acc + *k * *a * k.adjoint())
    }
}

/// Kraus operators `col[K_ℓ] = √ξ_ℓ u_ℓ` from the eigendecomposition of the
/// Choi matrix, keeping `ξ_ℓ > rank_tol`.
///
/// Each operator is rotated so that its largest-magnitude entry (the first
/// one in row-major order among near ties) is real and positive.
pub fn kraus_from_choi<T: Real>(l: &Superoperator<T>, rank_tol: T) -> Result<KrausSet<T>> {
    let tol = T::default_tol();
    l.ensure_trace_preserving(tol)?;
    let choi = l.choi();
    let residual = choi.hermiticity_residual();
    if residual > tol * T::one().max(choi.frobenius_norm()) {
        return Err(Error::InvariantViolation(format!(
            "map does not preserve Hermiticity (residual {:e})",
            residual.to_f64_lossy()
        )));
    }
    let eig = hermitian_eig(&choi.hermitian_part())?;
    let smallest = eig.values[3];
    if smallest < -rank_tol {
        return Err(Error::NotCompletelyPositive {
            eigenvalue: smallest.to_f64_lossy(),
        });
    }
    let mut operators = Vec::new();
    for (l_idx, &xi) in eig.values.iter().enumerate() {
        if xi <= rank_tol {
            continue;
        }
        let u = eig.vector(l_idx);
        let k = unvectorize(&u.map(|z| z * xi.sqrt()));
        operators.push(fix_phase(&k));
    }
    Ok(KrausSet { operators, rank_tol })
}

fn fix_phase<T: Real>(k: &ComplexMatrix2<T>) -> ComplexMatrix2<T> {
    let entries = [k[(0, 0)], k[(0, 1)], k[(1, 0)], k[(1, 1)]];
    let largest = entries.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    if largest == T::zero() {
        return *k;
    }
    let cutoff = largest * (T::one() - T::lit(1e-8));
    let pivot = entries
        .iter()
        .find(|z| z.norm() >= cutoff)
        .copied()
        .unwrap_or(entries[0]);
    let phase: Complex<T> = pivot.conj() / pivot.norm();
    k.scale(phase)
}

/// `K̃_α = ρ*^{1/2} K_α† ρ*^{−1/2}`, the reversal of `K` with respect to its
/// fixed point `ρ*`.
pub fn time_reversed_channel<T: Real>(
    kraus: &KrausSet<T>,
    rho_star: &DensityMatrix<T>,
) -> Result<KrausSet<T>> {
    let (root, inv_root) = psd_sqrt_and_invsqrt(rho_star.matrix(), T::lit(RANK_TOL))?;
    let residual = kraus.apply_operator(rho_star.matrix()).max_abs_diff(rho_star.matrix());
    if !(residual <= T::lit(FIXED_POINT_TOL).max(T::default_tol())) {
        return Err(Error::NotAFixedPoint {
            residual: residual.to_f64_lossy(),
        });
    }
    let operators = kraus
        .operators
        .iter()
        .map(|k| root * k.adjoint() * inv_root)
        .collect();
    Ok(KrausSet {
        operators,
        rank_tol: kraus.rank_tol,
    })
}

/// Single-cycle maps and fixed point for one parameter set.
#[derive(Clone, Debug)]
pub struct PulsedDynamics<T> {
    pub params: PulseParams<T>,
    pub pulse: Superoperator<T>,
    pub free: Superoperator<T>,
    pub one_cycle: Superoperator<T>,
    pub fixed_point: FixedPoint<T>,
}

/// Forward and reversed channels after `N` cycles.
#[derive(Clone, Debug)]
pub struct ProtocolChannels<T> {
    pub pulses: u32,
    pub forward: Superoperator<T>,
    pub kraus: KrausSet<T>,
    pub reversed: KrausSet<T>,
    pub fixed_point: DensityMatrix<T>,
}

impl<T: Real> PulsedDynamics<T> {
    /// Builds `S`, `U`, `S·U` and its fixed point. A unital cycle with a
    /// degenerate eigenvalue 1 (no dissipation) falls back to `ρ* = 1/2`.
    pub fn new(params: PulseParams<T>) -> Result<Self> {
        let pulse = build_pulse_superoperator(&params)?;
        let free = build_unitary_superoperator(&params)?;
        let one_cycle = compose_cycles(&pulse, &free, 1);
        let fixed_point = match fixed_point(&one_cycle) {
            Ok(fp) => fp,
            Err(Error::NonUniqueFixedPoint { .. })
                if one_cycle.unitality_residual() <= T::default_tol() =>
            {
                let second = second_modulus(&one_cycle);
                FixedPoint {
                    state: DensityMatrix::maximally_mixed(),
                    spectral_gap: T::one() - second,
                    second_modulus: second,
                }
            }
            Err(e) => return Err(e),
        };
        Ok(PulsedDynamics {
            params,
            pulse,
            free,
            one_cycle,
            fixed_point,
        })
    }

    pub fn forward(&self, pulses: u32) -> Superoperator<T> {
        self.one_cycle.pow(pulses)
    }

    pub fn channels(&self, pulses: u32) -> Result<ProtocolChannels<T>> {
        let forward = self.forward(pulses);
        let kraus = kraus_from_choi(&forward, T::lit(RANK_TOL).max(T::default_tol()))?;
        let reversed = time_reversed_channel(&kraus, &self.fixed_point.state)?;
        Ok(ProtocolChannels {
            pulses,
            forward,
            kraus,
            reversed,
            fixed_point: self.fixed_point.state,
        })
    }
}

// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for the 2×2 operators and 4×4
//! superoperators of a single qubit.
//!
//! Matrices are fixed-size arrays behind a const-generic [`Matrix`]. Operators
//! are vectorized by column stacking, `col[ρ] = (ρ₀₀, ρ₁₀, ρ₀₁, ρ₁₁)ᵀ`, so that
//! `vec(A·ρ·B) = (Bᵀ ⊗ A)·vec(ρ)`.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;

use crate::{Error, Real, Result};

/// Upper bound on cyclic Jacobi sweeps.
pub const MAX_JACOBI_SWEEPS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix<T, const N: usize> {
    entries: [[Complex<T>; N]; N],
}

pub type ComplexMatrix2<T> = Matrix<T, 2>;
pub type ComplexMatrix4<T> = Matrix<T, 4>;
pub type Vector<T, const N: usize> = [Complex<T>; N];

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn real<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

impl<T: Real, const N: usize> Matrix<T, N> {
    pub fn zeros() -> Self {
        Matrix {
            entries: [[Complex::new(T::zero(), T::zero()); N]; N],
        }
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for k in 0..N {
            m.entries[k][k] = real(T::one());
        }
        m
    }

    pub fn from_rows(entries: [[Complex<T>; N]; N]) -> Self {
        Matrix { entries }
    }

    pub fn from_real_rows(rows: [[T; N]; N]) -> Self {
        let mut m = Self::zeros();
        for (r, row) in rows.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                m.entries[r][c] = real(x);
            }
        }
        m
    }

    pub fn from_diagonal(diag: [T; N]) -> Self {
        let mut m = Self::zeros();
        for (k, &d) in diag.iter().enumerate() {
            m.entries[k][k] = real(d);
        }
        m
    }

    pub fn from_complex_diagonal(diag: [Complex<T>; N]) -> Self {
        let mut m = Self::zeros();
        for (k, &d) in diag.iter().enumerate() {
            m.entries[k][k] = d;
        }
        m
    }

    /// `u·v†`
    pub fn outer(u: &Vector<T, N>, v: &Vector<T, N>) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for c in 0..N {
                m.entries[r][c] = u[r] * v[c].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> &[[Complex<T>; N]; N] {
        &self.entries
    }

    pub fn column(&self, c: usize) -> Vector<T, N> {
        std::array::from_fn(|r| self.entries[r][c])
    }

    pub fn diagonal(&self) -> Vector<T, N> {
        std::array::from_fn(|k| self.entries[k][k])
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for c in 0..N {
                m.entries[r][c] = self.entries[c][r].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for c in 0..N {
                m.entries[r][c] = self.entries[c][r];
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        let mut m = *self;
        for row in m.entries.iter_mut() {
            for z in row.iter_mut() {
                *z = f(*z);
            }
        }
        m
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> Complex<T> {
        (0..N).fold(real(T::zero()), |acc, k| acc + self.entries[k][k])
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries
            .iter()
            .flatten()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// Frobenius norm of `self − other`.
    pub fn distance(&self, other: &Self) -> T {
        (*self - *other).frobenius_norm()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for r in 0..N {
            for c in 0..N {
                worst = worst.max((self.entries[r][c] - other.entries[r][c]).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest elementwise deviation from `M = M†`.
    pub fn hermiticity_residual(&self) -> T {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// `(M + M†)/2`
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale_real(T::lit(0.5))
    }

    pub fn mul_vec(&self, v: &Vector<T, N>) -> Vector<T, N> {
        std::array::from_fn(|r| {
            (0..N).fold(real(T::zero()), |acc, c| acc + self.entries[r][c] * v[c])
        })
    }

    /// `M^n` by repeated squaring; `M^0 = I`.
    pub fn pow(&self, mut n: u32) -> Self {
        let mut result = Self::identity();
        let mut base = *self;
        while n > 0 {
            if n & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            n >>= 1;
        }
        result
    }

    fn off_diagonal_norm(&self) -> T {
        let mut acc = T::zero();
        for r in 0..N {
            for c in 0..N {
                if r != c {
                    acc = acc + self.entries[r][c].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }
}

impl<T, const N: usize> Index<(usize, usize)> for Matrix<T, N> {
    type Output = Complex<T>;

    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.entries[r][c]
    }
}

impl<T, const N: usize> IndexMut<(usize, usize)> for Matrix<T, N> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.entries[r][c]
    }
}

impl<T: Real, const N: usize> Add for Matrix<T, N> {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        for r in 0..N {
            for c in 0..N {
                self.entries[r][c] = self.entries[r][c] + rhs.entries[r][c];
            }
        }
        self
    }
}

impl<T: Real, const N: usize> Sub for Matrix<T, N> {
    type Output = Self;

    fn sub(mut self, rhs: Self) -> Self {
        for r in 0..N {
            for c in 0..N {
                self.entries[r][c] = self.entries[r][c] - rhs.entries[r][c];
            }
        }
        self
    }
}

impl<T: Real, const N: usize> Neg for Matrix<T, N> {
    type Output = Self;

    fn neg(self) -> Self {
        self.map(|z| -z)
    }
}

impl<T: Real, const N: usize> Mul for Matrix<T, N> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for k in 0..N {
                let a = self.entries[r][k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for c in 0..N {
                    m.entries[r][c] = m.entries[r][c] + a * rhs.entries[k][c];
                }
            }
        }
        m
    }
}

/// Kronecker product `A ⊗ B`: `(A⊗B)[2i+k][2j+l] = A[i][j]·B[k][l]`.
pub fn kron<T: Real>(a: &ComplexMatrix2<T>, b: &ComplexMatrix2<T>) -> ComplexMatrix4<T> {
    let mut m = ComplexMatrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    m
}

/// Column-stacking vectorization.
pub fn vectorize<T: Real>(m: &ComplexMatrix2<T>) -> Vector<T, 4> {
    [m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)]]
}

pub fn unvectorize<T: Real>(v: &Vector<T, 4>) -> ComplexMatrix2<T> {
    ComplexMatrix2::from_rows([[v[0], v[2]], [v[1], v[3]]])
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T, const N: usize> {
    /// Eigenvalues sorted in descending order.
    pub values: [T; N],
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: Matrix<T, N>,
}

impl<T: Real, const N: usize> HermitianEigen<T, N> {
    pub fn vector(&self, k: usize) -> Vector<T, N> {
        self.vectors.column(k)
    }

    /// `Σ f(λ_k) u_k u_k†`
    pub fn apply_function(&self, f: impl Fn(T) -> Complex<T>) -> Matrix<T, N> {
        let diag: [Complex<T>; N] = std::array::from_fn(|k| f(self.values[k]));
        self.vectors * Matrix::from_complex_diagonal(diag) * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> Matrix<T, N> {
        self.apply_function(real)
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary and then applies the real symmetric Jacobi rotation to the
/// resulting real 2×2 block.
pub fn hermitian_eig<T: Real, const N: usize>(m: &Matrix<T, N>) -> Result<HermitianEigen<T, N>> {
    if !m.is_finite() {
        return Err(Error::InvariantViolation("matrix has non-finite entries".into()));
    }
    let scale = T::one().max(m.frobenius_norm());
    let residual = m.hermiticity_residual();
    if residual > T::default_tol() * scale {
        return Err(Error::InvariantViolation(format!(
            "matrix is not Hermitian (max |M - M†| = {:e})",
            residual.to_f64_lossy()
        )));
    }

    let mut a = m.hermitian_part();
    let mut v = Matrix::<T, N>::identity();
    let threshold = T::lit(1e-14).max(T::epsilon() * scale * T::lit(4.0));
    let negligible = T::epsilon() * T::epsilon() * scale;

    let mut converged = false;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if a.off_diagonal_norm() <= threshold {
            converged = true;
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= negligible {
                    continue;
                }
                let phase = apq / mag;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (T::lit(2.0) * mag);
                let t = if theta >= T::zero() {
                    T::one() / (theta + theta.hypot(T::one()))
                } else {
                    -T::one() / (-theta + theta.hypot(T::one()))
                };
                let cos = T::one() / t.hypot(T::one());
                let sin = t * cos;

                let mut rot = Matrix::<T, N>::identity();
                rot[(p, p)] = real(cos);
                rot[(p, q)] = real(sin);
                rot[(q, p)] = phase.conj() * (-sin);
                rot[(q, q)] = phase.conj() * cos;

                a = rot.adjoint() * a * rot;
                v = v * rot;
            }
        }
    }
    if !converged && a.off_diagonal_norm() > threshold {
        return Err(Error::InvariantViolation(format!(
            "Jacobi iteration did not converge in {MAX_JACOBI_SWEEPS} sweeps"
        )));
    }

    let mut order: [usize; N] = std::array::from_fn(|k| k);
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap_or(std::cmp::Ordering::Equal));

    let values = std::array::from_fn(|k| a[(order[k], order[k])].re);
    let mut vectors = Matrix::zeros();
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..N {
            vectors[(r, dst)] = v[(r, src)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-rank_tol, 0)` are clamped to zero; anything more
/// negative is rejected.
pub fn psd_sqrt<T: Real, const N: usize>(m: &Matrix<T, N>, rank_tol: T) -> Result<Matrix<T, N>> {
    let eig = psd_eig(m, rank_tol)?;
    Ok(eig.apply_function(|x| real(x.max(T::zero()).sqrt())))
}

/// `(M^{1/2}, M^{-1/2})` for a positive definite matrix.
pub fn psd_sqrt_and_invsqrt<T: Real, const N: usize>(
    m: &Matrix<T, N>,
    rank_tol: T,
) -> Result<(Matrix<T, N>, Matrix<T, N>)> {
    let eig = psd_eig(m, rank_tol)?;
    let smallest = eig.values[N - 1];
    if smallest <= rank_tol {
        return Err(Error::SingularFixedPoint {
            min_eigenvalue: smallest.to_f64_lossy(),
        });
    }
    let sqrt = eig.apply_function(|x| real(x.sqrt()));
    let inv_sqrt = eig.apply_function(|x| real(x.sqrt().recip()));
    Ok((sqrt, inv_sqrt))
}

fn psd_eig<T: Real, const N: usize>(m: &Matrix<T, N>, rank_tol: T) -> Result<HermitianEigen<T, N>> {
    let eig = hermitian_eig(m)?;
    let smallest = eig.values[N - 1];
    if smallest < -rank_tol {
        return Err(Error::InvariantViolation(format!(
            "matrix is not positive semidefinite (eigenvalue {:e})",
            smallest.to_f64_lossy()
        )));
    }
    Ok(eig)
}

/// Solves `A·x = b` by Gaussian elimination with partial pivoting.
///
/// A pivot of magnitude `≤ pivot_tol·max(1, ‖A‖_F)` is reported as
/// [`Error::SingularMatrix`].
pub fn solve<T: Real, const N: usize>(
    a: &Matrix<T, N>,
    b: &Vector<T, N>,
    pivot_tol: T,
) -> Result<Vector<T, N>> {
    let cutoff = pivot_tol * T::one().max(a.frobenius_norm());
    let mut m = *a;
    let mut x = *b;
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&i, &j| m[(i, col)].norm().partial_cmp(&m[(j, col)].norm()).unwrap())
            .unwrap();
        if m[(pivot, col)].norm() <= cutoff {
            return Err(Error::SingularMatrix);
        }
        m.entries.swap(col, pivot);
        x.swap(col, pivot);
        for row in (col + 1)..N {
            let factor = m[(row, col)] / m[(col, col)];
            for k in col..N {
                let sub = factor * m[(col, k)];
                m[(row, k)] = m[(row, k)] - sub;
            }
            x[row] = x[row] - factor * x[col];
        }
    }
    for row in (0..N).rev() {
        let mut acc = x[row];
        for k in (row + 1)..N {
            acc = acc - m[(row, k)] * x[k];
        }
        x[row] = acc / m[(row, row)];
    }
    Ok(x)
}

/// Matrix inverse by solving against each unit vector.
pub fn inverse<T: Real, const N: usize>(a: &Matrix<T, N>) -> Result<Matrix<T, N>> {
    let mut inv = Matrix::zeros();
    for c in 0..N {
        let e: Vector<T, N> = std::array::from_fn(|k| if k == c { real(T::one()) } else { real(T::zero()) });
        let col = solve(a, &e, T::epsilon() * T::lit(16.0))?;
        for r in 0..N {
            inv[(r, c)] = col[r];
        }
    }
    Ok(inv)
}

/// Coefficients of `det(λI − A)`, lowest degree first, by the
/// Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial<T: Real, const N: usize>(a: &Matrix<T, N>) -> Vec<Complex<T>> {
    let mut coeffs = vec![real(T::zero()); N + 1];
    coeffs[N] = real(T::one());
    let mut mk = Matrix::<T, N>::zeros();
    for k in 1..=N {
        mk = *a * mk + Matrix::identity().scale(coeffs[N - k + 1]);
        coeffs[N - k] = -(*a * mk).trace() / T::lit(k as f64);
    }
    coeffs
}

fn horner<T: Real>(coeffs: &[Complex<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = real(T::zero());
    let mut dp = real(T::zero());
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of a polynomial (coefficients lowest degree first) by
/// simultaneous Durand-Kerner iteration followed by a Newton polish.
pub fn polynomial_roots<T: Real>(coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[degree];
    let monic: Vec<Complex<T>> = coeffs.iter().map(|&c| c / lead).collect();
    let radius = T::one()
        + monic[..degree]
            .iter()
            .fold(T::zero(), |acc, c| acc.max(c.norm()));

    let seed = cplx(T::lit(0.4), T::lit(0.9));
    let mut roots: Vec<Complex<T>> = (0..degree)
        .map(|k| seed.powu(k as u32) * radius * T::lit(0.5))
        .collect();

    for _ in 0..2000 {
        let mut largest_step = T::zero();
        for k in 0..degree {
            let z = roots[k];
            let (p, _) = horner(&monic, z);
            let mut denom = real(T::one());
            for (j, &w) in roots.iter().enumerate() {
                if j != k {
                    denom = denom * (z - w);
                }
            }
            if denom.norm() == T::zero() {
                roots[k] = z + cplx(T::epsilon().sqrt(), T::epsilon().sqrt());
                largest_step = T::infinity();
                continue;
            }
            let step = p / denom;
            roots[k] = z - step;
            largest_step = largest_step.max(step.norm() / T::one().max(z.norm()));
        }
        if largest_step <= T::epsilon() * T::lit(4.0) {
            break;
        }
    }

    for z in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(&monic, *z);
            if dp.norm() == T::zero() {
                break;
            }
            let candidate = *z - p / dp;
            if horner(&monic, candidate).0.norm() < p.norm() {
                *z = candidate;
            } else {
                break;
            }
        }
    }
    roots
}

/// Eigenvalues of a general (non-Hermitian) matrix, sorted by decreasing
/// modulus.
pub fn eigenvalues<T: Real, const N: usize>(a: &Matrix<T, N>) -> Vec<Complex<T>> {
    let mut roots = polynomial_roots(&characteristic_polynomial(a));
    roots.sort_by(|x, y| y.norm().partial_cmp(&x.norm()).unwrap_or(std::cmp::Ordering::Equal));
    roots
}

/// `exp(−i·t·G)` for Hermitian `G`.
pub fn unitary_exp<T: Real, const N: usize>(generator: &Matrix<T, N>, t: T) -> Result<Matrix<T, N>> {
    let eig = hermitian_eig(generator)?;
    Ok(eig.apply_function(|lambda| {
        let phase = -t * lambda;
        cplx(phase.cos(), phase.sin())
    }))
}

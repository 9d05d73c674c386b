//! Dense complex linear-algebra kernels.
//!
//! Everything here operates on [`ComplexMatrix`], a small row-major dense
//! matrix of `Complex<f64>`. The kernels are deliberately minimal: Cholesky
//! factorization of Hermitian positive-definite matrices, dominant
//! eigenvectors by power iteration with deflation, forward-substitution
//! inverses of lower-triangular matrices, and Frobenius norms. All functions
//! are pure and safe to call concurrently.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex;
// Brings sqrt/abs/etc. to f64 in no_std builds; shadowed by inherent methods otherwise.
#[allow(unused_imports)]
use num_traits::Float;

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

/// Relative tolerance for the Hermitian-symmetry precondition check.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Scale factor for the positive-definiteness regularization floor:
/// `eps = PD_REG_SCALE * trace(M) / dim` is added to the diagonal by
/// [`ComplexMatrix::pd_regularized`].
pub const PD_REG_SCALE: f64 = 1e-9;

/// Minimum diagonal magnitude accepted by the triangular inverse.
pub const TRIANGULAR_FLOOR: f64 = 1e-12;

/// Iteration cap for the power-iteration eigensolver.
pub const EIG_MAX_ITERS: usize = 10_000;

/// Errors produced by the linear-algebra kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// Constructor rejected a NaN or infinite entry.
    NonFiniteEntry { row: usize, col: usize },
    /// Entry count does not match `rows * cols`, or operand shapes disagree.
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// Matrix is not Hermitian within [`HERMITIAN_TOL`].
    NotHermitian { residual: f64 },
    /// A Cholesky pivot fell at or below the regularization floor.
    NotPositiveDefinite { pivot: f64, floor: f64 },
    /// A triangular diagonal entry is below [`TRIANGULAR_FLOOR`].
    SingularTriangular { index: usize, magnitude: f64 },
    /// Power iteration hit [`EIG_MAX_ITERS`] before reaching tolerance.
    NoConvergence { residual: f64, tolerance: f64 },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::NonFiniteEntry { row, col } => {
                write!(f, "non-finite entry at ({row}, {col})")
            }
            LinalgError::ShapeMismatch { expected, got } => {
                write!(f, "shape mismatch: expected {expected:?}, got {got:?}")
            }
            LinalgError::NotHermitian { residual } => {
                write!(f, "matrix is not Hermitian (residual {residual:.3e})")
            }
            LinalgError::NotPositiveDefinite { pivot, floor } => {
                write!(
                    f,
                    "matrix is not positive definite (pivot {pivot:.3e} <= floor {floor:.3e})"
                )
            }
            LinalgError::SingularTriangular { index, magnitude } => {
                write!(
                    f,
                    "triangular matrix is singular at diagonal {index} (|entry| = {magnitude:.3e})"
                )
            }
            LinalgError::NoConvergence {
                residual,
                tolerance,
            } => {
                write!(
                    f,
                    "power iteration did not converge (residual {residual:.3e} > {tolerance:.3e})"
                )
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LinalgError {}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Result of [`ComplexMatrix::dominant_eigvecs`]: orthonormal eigenvector
/// columns paired with their eigenvalues in nonincreasing order.
#[derive(Debug, Clone)]
pub struct EigPairs {
    pub vectors: ComplexMatrix,
    pub values: Vec<f64>,
}

impl ComplexMatrix {
    /// Build a matrix from row-major entries, rejecting non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::ShapeMismatch {
                expected: (rows, cols),
                got: (data.len(), 1),
            });
        }
        for (idx, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(LinalgError::NonFiniteEntry {
                    row: idx / cols.max(1),
                    col: idx % cols.max(1),
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// Build a matrix from `(re, im)` pairs in row-major order.
    pub fn from_parts(rows: usize, cols: usize, parts: &[(f64, f64)]) -> Result<Self, LinalgError> {
        let data = parts.iter().map(|&(re, im)| C64::new(re, im)).collect();
        Self::new(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    /// `s * I_n` for real `s`.
    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(s, 0.0);
        }
        m
    }

    /// Column vector from a slice.
    pub fn col_vector(entries: &[C64]) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    /// Column `j` as an owned vector.
    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.at(r, c).conj());
            }
        }
        out
    }

    /// Matrix product `self * rhs`. Panics on incompatible shapes; shape
    /// agreement is the caller's structural invariant, not a runtime input.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matrix product shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    let v = out.at(r, c) + a * rhs.at(k, c);
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    /// Matrix-vector product `self * v`.
    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..self.cols {
                acc += self.at(r, c) * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        let data = self.data.iter().map(|a| a * s).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Rank-1 Hermitian update target: `v * v^H` for a column vector `v`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        let mut out = Self::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, v[r] * v[c].conj());
            }
        }
        out
    }

    /// Gram matrix `self * self^H` (square, Hermitian PSD by construction).
    pub fn gram(&self) -> Self {
        let mut out = Self::zeros(self.rows, self.rows);
        for r in 0..self.rows {
            for c in 0..self.rows {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..self.cols {
                    acc += self.at(r, k) * self.at(c, k).conj();
                }
                out.set(r, c, acc);
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.at(i, i)).sum()
    }

    /// Sum of squared entry magnitudes (squared Frobenius norm).
    pub fn fro_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sq().sqrt()
    }

    /// `||M - M^H||_F`, the departure from Hermitian symmetry.
    pub fn hermitian_residual(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut acc = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let d = self.at(r, c) - self.at(c, r).conj();
                acc += d.norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.hermitian_residual() <= rel_tol * (1.0 + self.fro_norm())
    }

    /// Diagonal regularization `M + eps * I` with
    /// `eps = PD_REG_SCALE * trace(M).re / dim`, guarding the Cholesky of
    /// Gram matrices that are only semidefinite at zero-interference corners.
    pub fn pd_regularized(&self) -> Self {
        debug_assert!(self.is_square());
        let n = self.rows.max(1);
        let eps = PD_REG_SCALE * (self.trace().re / n as f64).max(0.0);
        let mut out = self.clone();
        for i in 0..self.rows {
            let v = out.at(i, i) + C64::new(eps, 0.0);
            out.set(i, i, v);
        }
        out
    }

    /// Cholesky factorization `M = C * C^H` with `C` lower-triangular and a
    /// real, strictly positive diagonal.
    ///
    /// Fails with `NotHermitian` if the symmetry residual exceeds
    /// [`HERMITIAN_TOL`] (relative), and with `NotPositiveDefinite` if any
    /// pivot falls at or below the regularization floor
    /// `1e-12 * max(trace/dim, 0)`.
    pub fn cholesky(&self) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::ShapeMismatch {
                expected: (self.rows, self.rows),
                got: (self.rows, self.cols),
            });
        }
        let sym_residual = self.hermitian_residual();
        if sym_residual > HERMITIAN_TOL * (1.0 + self.fro_norm()) {
            return Err(LinalgError::NotHermitian {
                residual: sym_residual,
            });
        }
        let n = self.rows;
        let floor = 1e-12 * (self.trace().re / n.max(1) as f64).max(0.0);
        let mut c = Self::zeros(n, n);
        for j in 0..n {
            // pivot = M[j][j] - sum_{k<j} |C[j][k]|^2  (real for Hermitian input)
            let mut pivot = self.at(j, j).re;
            for k in 0..j {
                pivot -= c.at(j, k).norm_sqr();
            }
            if pivot <= floor || !pivot.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { pivot, floor });
            }
            let diag = pivot.sqrt();
            c.set(j, j, C64::new(diag, 0.0));
            for i in (j + 1)..n {
                let mut acc = self.at(i, j);
                for k in 0..j {
                    acc -= c.at(i, k) * c.at(j, k).conj();
                }
                c.set(i, j, acc / diag);
            }
        }
        Ok(c)
    }

    /// Inverse of a lower-triangular matrix by forward substitution.
    pub fn inv_lower_triangular(&self) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::ShapeMismatch {
                expected: (self.rows, self.rows),
                got: (self.rows, self.cols),
            });
        }
        let n = self.rows;
        for i in 0..n {
            let mag = self.at(i, i).norm();
            if mag < TRIANGULAR_FLOOR {
                return Err(LinalgError::SingularTriangular {
                    index: i,
                    magnitude: mag,
                });
            }
        }
        // Solve L * X = I column by column.
        let mut out = Self::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let mut acc = if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                for k in j..i {
                    acc -= self.at(i, k) * out.at(k, j);
                }
                out.set(i, j, acc / self.at(i, i));
            }
        }
        Ok(out)
    }

    /// Top `d` eigenpairs of a Hermitian PSD matrix by power iteration with
    /// deflation. Columns are orthonormal; each eigenvector's
    /// largest-magnitude entry is made real and nonnegative so the result is
    /// deterministic; eigenvalues come out in nonincreasing order.
    ///
    /// Clustered leading eigenvalues stall plain power iteration (the
    /// residual plateaus at the cluster width), so each vector is finished
    /// with Rayleigh-Ritz refinement over the span of the iterate and its
    /// residual direction, which resolves two-way clusters exactly.
    pub fn dominant_eigvecs(&self, d: usize) -> Result<EigPairs, LinalgError> {
        if !self.is_square() || d == 0 || d > self.rows {
            return Err(LinalgError::ShapeMismatch {
                expected: (self.rows, self.rows),
                got: (self.rows, d),
            });
        }
        let sym_residual = self.hermitian_residual();
        if sym_residual > HERMITIAN_TOL * (1.0 + self.fro_norm()) {
            return Err(LinalgError::NotHermitian {
                residual: sym_residual,
            });
        }
        let n = self.rows;
        let scale = self.fro_norm();
        let mut vectors: Vec<Vec<C64>> = Vec::with_capacity(d);
        let mut values: Vec<f64> = Vec::with_capacity(d);

        if scale == 0.0 {
            // Zero matrix: any orthonormal set; standard basis is canonical.
            let mut m = Self::zeros(n, d);
            for j in 0..d {
                m.set(j, j, C64::new(1.0, 0.0));
            }
            return Ok(EigPairs {
                vectors: m,
                values: vec![0.0; d],
            });
        }

        let mut deflated = self.clone();
        let accept_tol = 1e-8 * scale;
        let target_tol = 1e-10 * scale;
        for j in 0..d {
            let mut v = deterministic_start(n, j);
            orthogonalize(&mut v, &vectors);
            normalize(&mut v);
            let mut lambda = 0.0;
            let mut residual = f64::INFINITY;
            let mut converged = false;
            for _ in 0..EIG_MAX_ITERS {
                let mut w = deflated.matvec(&v);
                orthogonalize(&mut w, &vectors);
                let norm_w = vec_norm(&w);
                if norm_w <= target_tol {
                    // Remaining spectrum is numerically zero; v is already an
                    // eigenvector of the deflated operator with eigenvalue 0.
                    lambda = rayleigh(self, &v);
                    residual = eig_residual(self, &v, lambda, &vectors, &values);
                    converged = true;
                    break;
                }
                for x in w.iter_mut() {
                    *x /= norm_w;
                }
                v = w;
                lambda = rayleigh(self, &v);
                residual = eig_residual(self, &v, lambda, &vectors, &values);
                if residual <= target_tol {
                    converged = true;
                    break;
                }
            }
            // Rayleigh-Ritz rescue for clustered spectra: enlarge with the
            // residual direction and solve the projected 2x2 problem.
            for _ in 0..3 {
                if residual <= target_tol {
                    break;
                }
                let mv = self.matvec(&v);
                let mut r: Vec<C64> = mv
                    .iter()
                    .zip(v.iter())
                    .map(|(a, b)| a - b * lambda)
                    .collect();
                orthogonalize(&mut r, &vectors);
                let proj = dot_conj(&v, &r);
                for i in 0..n {
                    r[i] -= v[i] * proj;
                }
                let rn = vec_norm(&r);
                if rn <= target_tol {
                    break;
                }
                for x in r.iter_mut() {
                    *x /= rn;
                }
                let mq = self.matvec(&r);
                let p11 = lambda;
                let p12 = dot_conj(&v, &mq);
                let p22 = dot_conj(&r, &mq).re;
                let (theta, y) = top_ritz_2x2(p11, p12, p22);
                let mut refined: Vec<C64> = (0..n).map(|i| v[i] * y[0] + r[i] * y[1]).collect();
                orthogonalize(&mut refined, &vectors);
                normalize(&mut refined);
                let new_lambda = rayleigh(self, &refined);
                let new_residual = eig_residual(self, &refined, new_lambda, &vectors, &values);
                if new_residual < residual {
                    v = refined;
                    lambda = new_lambda;
                    residual = new_residual;
                    converged = residual <= accept_tol;
                } else {
                    break;
                }
                let _ = theta;
            }
            if !converged && residual > accept_tol {
                return Err(LinalgError::NoConvergence {
                    residual,
                    tolerance: accept_tol,
                });
            }
            fix_phase(&mut v);
            let lam = lambda.max(0.0);
            // Deflate: M <- M - lambda v v^H
            for r in 0..n {
                for c in 0..n {
                    let upd = deflated.at(r, c) - v[r] * v[c].conj() * lam;
                    deflated.set(r, c, upd);
                }
            }
            vectors.push(v);
            values.push(lam);
        }

        // Deflation yields nonincreasing values up to tolerance; enforce it.
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
        let mut m = Self::zeros(n, d);
        let mut sorted_values = Vec::with_capacity(d);
        for (slot, &idx) in order.iter().enumerate() {
            for r in 0..n {
                m.set(r, slot, vectors[idx][r]);
            }
            sorted_values.push(values[idx]);
        }
        Ok(EigPairs {
            vectors: m,
            values: sorted_values,
        })
    }

    /// Orthonormalize columns in place by modified Gram-Schmidt. Columns that
    /// are numerically dependent on earlier ones are zeroed rather than
    /// replaced, so the output spans exactly the input column space.
    pub fn orthonormalize_columns(&mut self) {
        let scale = self.fro_norm().max(1.0);
        for j in 0..self.cols {
            let mut v = self.col(j);
            for k in 0..j {
                let u = self.col(k);
                let proj = dot_conj(&u, &v);
                for i in 0..self.rows {
                    v[i] -= u[i] * proj;
                }
            }
            let norm = vec_norm(&v);
            if norm <= 1e-12 * scale {
                for i in 0..self.rows {
                    self.set(i, j, C64::new(0.0, 0.0));
                }
            } else {
                for i in 0..self.rows {
                    self.set(i, j, v[i] / norm);
                }
            }
        }
    }
}

/// `u^H v`.
pub fn dot_conj(u: &[C64], v: &[C64]) -> C64 {
    u.iter()
        .zip(v.iter())
        .map(|(a, b)| a.conj() * b)
        .sum()
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [C64]) {
    let n = vec_norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

fn orthogonalize(v: &mut [C64], basis: &[Vec<C64>]) {
    for u in basis {
        let proj = dot_conj(u, v);
        for i in 0..v.len() {
            v[i] -= u[i] * proj;
        }
    }
}

fn rayleigh(m: &ComplexMatrix, v: &[C64]) -> f64 {
    let mv = m.matvec(v);
    dot_conj(v, &mv).re
}

/// Residual of (lambda, v) against the ORIGINAL matrix, re-adding the
/// deflated components so accepted pairs are genuine eigenpairs of `m`.
fn eig_residual(
    m: &ComplexMatrix,
    v: &[C64],
    lambda: f64,
    _vectors: &[Vec<C64>],
    _values: &[f64],
) -> f64 {
    let mv = m.matvec(v);
    let mut acc = 0.0;
    for i in 0..v.len() {
        let d = mv[i] - v[i] * lambda;
        acc += d.norm_sqr();
    }
    acc.sqrt()
}

/// Larger eigenpair of the Hermitian 2x2 matrix [[p11, p12], [conj(p12),
/// p22]] in closed form.
fn top_ritz_2x2(p11: f64, p12: C64, p22: f64) -> (f64, [C64; 2]) {
    let mean = 0.5 * (p11 + p22);
    let half_diff = 0.5 * (p11 - p22);
    let disc = (half_diff * half_diff + p12.norm_sqr()).sqrt();
    let theta = mean + disc;
    // Eigenvector: (p12, theta - p11) or (theta - p22, conj(p12)), whichever
    // is better conditioned.
    let a = C64::new(theta - p22, 0.0);
    let b = p12.conj();
    let v = if p12.norm() > (theta - p11).abs() {
        [p12, C64::new(theta - p11, 0.0)]
    } else {
        [a, b]
    };
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    if norm <= 0.0 {
        return (theta, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    }
    (theta, [v[0] / norm, v[1] / norm])
}

/// Fixed pseudo-random start vector; a deterministic full-support seed whose
/// overlap with any particular eigenvector is generically nonzero.
fn deterministic_start(n: usize, pass: usize) -> Vec<C64> {
    let mut state = 0x9E37_79B9_7F4A_7C15u64
        .wrapping_mul(pass as u64 + 1)
        .wrapping_add(0x2545_F491_4F6C_DD1D);
    let mut next = move || {
        // splitmix64
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    (0..n).map(|_| C64::new(next(), next())).collect()
}

fn fix_phase(v: &mut [C64]) {
    let mut best = 0usize;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    if best_mag > 0.0 {
        let phase = v[best] / best_mag;
        let rot = phase.conj();
        for z in v.iter_mut() {
            *z *= rot;
        }
        // Clean the anchor's imaginary dust so tests can compare exactly.
        v[best] = C64::new(v[best].norm(), 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn randn(rng: &mut ChaCha8Rng) -> f64 {
        StandardNormal.sample(rng)
    }

    pub(crate) fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
        let data = (0..rows * cols)
            .map(|_| C64::new(randn(rng), randn(rng)))
            .collect();
        ComplexMatrix::new(rows, cols, data).unwrap()
    }

    /// A^H A + I: Hermitian and comfortably positive definite.
    fn random_hpd(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let a = random_matrix(rng, n, n);
        a.adjoint().mul(&a).add(&ComplexMatrix::identity(n))
    }

    #[test]
    fn cholesky_identity_is_identity() {
        let m = ComplexMatrix::identity(2);
        let c = m.cholesky().unwrap();
        assert_eq!(c, ComplexMatrix::identity(2));
    }

    #[test]
    fn cholesky_diagonal_takes_square_roots() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m.set(0, 0, C64::new(4.0, 0.0));
        m.set(1, 1, C64::new(9.0, 0.0));
        let c = m.cholesky().unwrap();
        assert!((c.at(0, 0) - C64::new(2.0, 0.0)).norm() < 1e-15);
        assert!((c.at(1, 1) - C64::new(3.0, 0.0)).norm() < 1e-15);
        assert_eq!(c.at(0, 1), C64::new(0.0, 0.0));
        assert_eq!(c.at(1, 0), C64::new(0.0, 0.0));
    }

    #[test]
    fn cholesky_reconstructs_random_hpd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_hpd(&mut rng, 4);
        let c = m.cholesky().unwrap();
        let recon = c.mul(&c.adjoint());
        let rel = recon.sub(&m).fro_norm() / m.fro_norm();
        assert!(rel <= 1e-10, "reconstruction residual {rel:.3e}");
        for i in 0..4 {
            assert!(c.at(i, i).re > 0.0 && c.at(i, i).im == 0.0);
        }
    }

    #[test]
    fn cholesky_rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2);
        m.set(0, 1, C64::new(0.5, 0.0));
        match m.cholesky() {
            Err(LinalgError::NotHermitian { .. }) => {}
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut m = ComplexMatrix::identity(2);
        m.set(1, 1, C64::new(-1.0, 0.0));
        match m.cholesky() {
            Err(LinalgError::NotPositiveDefinite { .. }) => {}
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn pd_regularization_rescues_singular_gram() {
        // Rank-1 Gram: singular without the diagonal floor.
        let v = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        let g = ComplexMatrix::outer(&v);
        assert!(g.cholesky().is_err());
        assert!(g.pd_regularized().cholesky().is_ok());
    }

    #[test]
    fn dominant_eigvec_of_diagonal() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m.set(0, 0, C64::new(3.0, 0.0));
        m.set(1, 1, C64::new(1.0, 0.0));
        let eig = m.dominant_eigvecs(1).unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-10);
        assert!((eig.vectors.at(0, 0) - C64::new(1.0, 0.0)).norm() < 1e-8);
        assert!(eig.vectors.at(1, 0).norm() < 1e-8);
    }

    #[test]
    fn dominant_eigvec_degenerate_spectrum_satisfies_residual() {
        let m = ComplexMatrix::identity(3);
        let eig = m.dominant_eigvecs(1).unwrap();
        let v = eig.vectors.col(0);
        let mv = m.matvec(&v);
        let resid: f64 = mv
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - b * eig.values[0]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(resid <= 1e-8 * m.fro_norm());
        assert!((eig.values[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dominant_eigvecs_residual_and_order_on_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 4, 4);
            let m = a.adjoint().mul(&a);
            let eig = m.dominant_eigvecs(2).unwrap();
            assert!(eig.values[0] >= eig.values[1] - 1e-10);
            for j in 0..2 {
                let v = eig.vectors.col(j);
                let mv = m.matvec(&v);
                let resid: f64 = mv
                    .iter()
                    .zip(v.iter())
                    .map(|(a, b)| (a - b * eig.values[j]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(
                    resid <= 1e-8 * m.fro_norm(),
                    "residual {resid:.3e} vs {:.3e}",
                    1e-8 * m.fro_norm()
                );
            }
            // Orthonormal columns.
            let overlap = dot_conj(&eig.vectors.col(0), &eig.vectors.col(1)).norm();
            assert!(overlap < 1e-8);
            // Phase convention: largest-magnitude entry real nonnegative.
            for j in 0..2 {
                let v = eig.vectors.col(j);
                let (mut best, mut mag) = (0, -1.0);
                for (i, z) in v.iter().enumerate() {
                    if z.norm() > mag {
                        mag = z.norm();
                        best = i;
                    }
                }
                assert!(v[best].im.abs() < 1e-12 && v[best].re >= 0.0);
            }
        }
    }

    #[test]
    fn triangular_inverse_identity_and_diagonal() {
        let id = ComplexMatrix::identity(3);
        assert_eq!(id.inv_lower_triangular().unwrap(), id);

        let mut d = ComplexMatrix::zeros(2, 2);
        d.set(0, 0, C64::new(2.0, 0.0));
        d.set(1, 1, C64::new(4.0, 0.0));
        let inv = d.inv_lower_triangular().unwrap();
        assert!((inv.at(0, 0).re - 0.5).abs() < 1e-15);
        assert!((inv.at(1, 1).re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn triangular_inverse_random_unit_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut l = ComplexMatrix::identity(3);
        for r in 0..3 {
            for c in 0..r {
                l.set(r, c, C64::new(randn(&mut rng), randn(&mut rng)));
            }
        }
        let inv = l.inv_lower_triangular().unwrap();
        let prod = l.mul(&inv);
        let resid = prod.sub(&ComplexMatrix::identity(3)).fro_norm();
        assert!(resid <= 1e-10, "product residual {resid:.3e}");
    }

    #[test]
    fn triangular_inverse_rejects_tiny_diagonal() {
        let mut l = ComplexMatrix::identity(2);
        l.set(1, 1, C64::new(1e-13, 0.0));
        match l.inv_lower_triangular() {
            Err(LinalgError::SingularTriangular { index: 1, .. }) => {}
            other => panic!("expected SingularTriangular, got {other:?}"),
        }
    }

    #[test]
    fn fro_norm_sq_examples() {
        assert_eq!(ComplexMatrix::zeros(3, 2).fro_norm_sq(), 0.0);
        assert_eq!(ComplexMatrix::identity(2).fro_norm_sq(), 2.0);
        let m = ComplexMatrix::new(1, 1, vec![C64::new(3.0, 4.0)]).unwrap();
        assert_eq!(m.fro_norm_sq(), 25.0);
    }

    #[test]
    fn fro_norm_sq_equals_trace_of_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 3, 5);
            let lhs = a.fro_norm_sq();
            let rhs = a.adjoint().mul(&a).trace().re;
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
        }
    }

    #[test]
    fn constructor_rejects_non_finite() {
        let bad = vec![C64::new(f64::NAN, 0.0)];
        assert!(matches!(
            ComplexMatrix::new(1, 1, bad),
            Err(LinalgError::NonFiniteEntry { .. })
        ));
    }

    #[test]
    fn orthonormalize_zeroes_dependent_columns() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m.set(0, 0, C64::new(2.0, 0.0));
        m.set(0, 1, C64::new(-3.0, 0.0));
        m.orthonormalize_columns();
        assert!((m.col(0)[0].re - 1.0).abs() < 1e-15);
        assert_eq!(vec_norm(&m.col(1)), 0.0);
    }
}

//! Dense symmetric linear algebra.
//!
//! Matrices are small enough (a few thousand rows at most) that dense storage
//! and a cyclic Jacobi eigensolver are adequate. Every matrix is immutable
//! once built, so an [`EigenDecomposition`] computed from it stays valid for
//! the matrix's whole lifetime.

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Sweep limit for [`eigendecompose`].
pub const MAX_JACOBI_SWEEPS: usize = 64;

/// Default relative off-diagonal tolerance for [`eigendecompose`].
pub const DEFAULT_EIGEN_TOL: f64 = 1e-14;

/// Dense symmetric matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    /// Builds a matrix from row-major entries, rejecting asymmetric or
    /// non-finite input. Symmetry is checked exactly.
    pub fn new(n: usize, data: Vec<T>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "matrix dimension must be positive"));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds a symmetric matrix by evaluating `f(i, j)` on the upper
    /// triangle and mirroring.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "matrix dimension must be positive"));
        }
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite { index: i * n + j });
                }
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Ok(Self { n, data })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_diagonal(diag: &[T]) -> Result<Self> {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { T::zero() })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_fn(n, |_, _| T::zero())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|x| *x * *x).sum::<T>().sqrt()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, u: &[T]) -> Result<Vec<T>> {
        self.check_len(u.len())?;
        Ok((0..self.n)
            .map(|i| self.row(i).iter().zip(u).map(|(a, b)| *a * *b).sum())
            .collect())
    }

    /// Dense product `self * other`, returned row-major. The product of two
    /// symmetric matrices is symmetric only when they commute.
    pub fn mul_dense(&self, other: &Self) -> Result<Vec<T>> {
        self.check_len(other.n)?;
        let n = self.n;
        let mut out = vec![T::zero(); n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, &aik) in self.row(i).iter().enumerate() {
                if aik == T::zero() {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o = *o + aik * *b;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_len(other.n)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| *a - *b)
            .collect();
        Ok(Self { n: self.n, data })
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| *x * factor).collect(),
        }
    }

    /// Principal submatrix on the given (row = column) indices.
    pub fn submatrix(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n) {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: bad + 1,
            });
        }
        Self::from_fn(indices.len(), |a, b| self.get(indices[a], indices[b]))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: len,
            });
        }
        Ok(())
    }
}

/// Eigenvalues in ascending order with an orthonormal set of eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition<T> {
    eigenvalues: Vec<T>,
    // column-major: eigenvector j occupies vectors[j * n..(j + 1) * n]
    vectors: Vec<T>,
}

impl<T: Real> EigenDecomposition<T> {
    /// Assembles a decomposition from eigenpairs given in any order; `vectors`
    /// holds one eigenvector per contiguous chunk of length `values.len()`.
    /// The pairs are sorted ascending by eigenvalue (stable for ties).
    pub fn from_parts(values: Vec<T>, vectors: Vec<T>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(invalid("eigenvalues", "empty spectrum"));
        }
        if vectors.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: vectors.len(),
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            values[a]
                .partial_cmp(&values[b])
                .expect("finite eigenvalues")
        });
        let eigenvalues = order.iter().map(|&j| values[j]).collect();
        let mut sorted = Vec::with_capacity(n * n);
        for &j in &order {
            sorted.extend_from_slice(&vectors[j * n..(j + 1) * n]);
        }
        Ok(Self {
            eigenvalues,
            vectors: sorted,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    #[inline]
    pub fn eigenvector(&self, j: usize) -> &[T] {
        let n = self.dim();
        &self.vectors[j * n..(j + 1) * n]
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues[self.dim() - 1]
    }

    /// Coefficients `q_jᵀ u` of `u` in the eigenbasis.
    pub fn coefficients(&self, u: &[T]) -> Result<Vec<T>> {
        self.check_len(u.len())?;
        Ok((0..self.dim())
            .map(|j| dot(self.eigenvector(j), u))
            .collect())
    }

    /// Inverse of [`coefficients`](Self::coefficients): `Σ_j c_j q_j`.
    pub fn synthesize(&self, coeffs: &[T]) -> Result<Vec<T>> {
        self.check_len(coeffs.len())?;
        let n = self.dim();
        let mut out = vec![T::zero(); n];
        for (j, &c) in coeffs.iter().enumerate() {
            if c == T::zero() {
                continue;
            }
            for (o, q) in out.iter_mut().zip(self.eigenvector(j)) {
                *o = *o + c * *q;
            }
        }
        Ok(out)
    }

    /// `Q f(Λ) Qᵀ` for a scalar function applied to the eigenvalues.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> Result<SymMatrix<T>> {
        let n = self.dim();
        let weights: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        if let Some(index) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let mut data = vec![T::zero(); n * n];
        for (j, &w) in weights.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            let q = self.eigenvector(j);
            for i in 0..n {
                let wi = w * q[i];
                let row = &mut data[i * n..(i + 1) * n];
                for k in i..n {
                    row[k] = row[k] + wi * q[k];
                }
            }
        }
        for i in 0..n {
            for k in (i + 1)..n {
                data[k * n + i] = data[i * n + k];
            }
        }
        SymMatrix::new(n, data)
    }

    /// `Q Λ^s Qᵀ`. Requires a positive spectrum.
    pub fn spectral_power(&self, s: T) -> Result<SymMatrix<T>> {
        self.check_positive()?;
        if s == T::zero() {
            return SymMatrix::identity(self.dim());
        }
        self.map_spectrum(|l| l.powf(s))
    }

    /// Evaluates `Σ_j λ_j^s (q_jᵀ u)²` without forming the matrix power.
    pub fn spectral_form(&self, s: T, u: &[T]) -> Result<T> {
        self.check_positive()?;
        let c = self.coefficients(u)?;
        Ok(self
            .eigenvalues
            .iter()
            .zip(&c)
            .map(|(l, c)| l.powf(s) * *c * *c)
            .sum())
    }

    pub fn reconstruct(&self) -> Result<SymMatrix<T>> {
        self.map_spectrum(|l| l)
    }

    /// `max |QᵀQ − I|`.
    pub fn orthogonality_defect(&self) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for a in 0..n {
            for b in a..n {
                let target = if a == b { T::one() } else { T::zero() };
                let d = (dot(self.eigenvector(a), self.eigenvector(b)) - target).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `max |Q Λ Qᵀ − M|`.
    pub fn reconstruction_defect(&self, m: &SymMatrix<T>) -> Result<T> {
        let r = self.reconstruct()?;
        Ok(r.sub(m)?.max_abs())
    }

    fn check_positive(&self) -> Result<()> {
        if let Some((j, l)) = self
            .eigenvalues
            .iter()
            .enumerate()
            .find(|(_, l)| **l <= T::zero())
        {
            return Err(Error::Domain(format!(
                "eigenvalue {j} is nonpositive ({l}); spectral powers need a positive spectrum"
            )));
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: len,
            });
        }
        Ok(())
    }
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Cyclic Jacobi eigendecomposition with the default sweep limit.
pub fn eigendecompose<T: Real>(m: &SymMatrix<T>, tol: T) -> Result<EigenDecomposition<T>> {
    eigendecompose_with(m, tol, MAX_JACOBI_SWEEPS)
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops below
/// `tol * ‖M‖_F`, or once a full sweep finds nothing left to rotate.
pub fn eigendecompose_with<T: Real>(
    m: &SymMatrix<T>,
    tol: T,
    max_sweeps: usize,
) -> Result<EigenDecomposition<T>> {
    if !(tol > T::zero()) {
        return Err(invalid("tol", "tolerance must be positive"));
    }
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let frob = m.frobenius_norm();
    let hundred = T::lit(100.0);
    let two = T::lit(2.0);

    let off_norm = |a: &[T]| -> T {
        let mut acc = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                acc = acc + a[i * n + j] * a[i * n + j];
            }
        }
        (two * acc).sqrt()
    };

    let mut sweeps = 0;
    while frob > T::zero() {
        let off = off_norm(&a);
        if off <= tol * frob {
            break;
        }
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence {
                sweeps,
                residual: off.to_f64_lossy(),
            });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let g = hundred * apq.abs();
                if app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = T::zero();
                    a[q * n + p] = T::zero();
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (two * apq);
                let t = if theta.abs() > T::lit(1e150) {
                    T::one() / (two * theta)
                } else {
                    let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let tau = s / (T::one() + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = akp - s * (akq + tau * akp);
                    let new_kq = akq + s * (akp - tau * akq);
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                let (head, tail) = v.split_at_mut(q * n);
                let vp = &mut head[p * n..(p + 1) * n];
                let vq = &mut tail[..n];
                for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = xp - s * (xq + tau * xp);
                    *y = xq + s * (xp - tau * xq);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let values = (0..n).map(|i| a[i * n + i]).collect();
    EigenDecomposition::from_parts(values, v)
}

/// `uᵀ M u`.
pub fn quadratic_form<T: Real>(m: &SymMatrix<T>, u: &[T]) -> Result<T> {
    let mu = m.mul_vec(u)?;
    Ok(dot(&mu, u))
}

/// Solves `M x = b` for symmetric positive definite `M` by Cholesky
/// factorization with one step of iterative refinement. Fails if a
/// nonpositive pivot appears or the final residual exceeds `tol * ‖b‖₂`.
pub fn solve_spd<T: Real>(m: &SymMatrix<T>, b: &[T], tol: T) -> Result<Vec<T>> {
    let n = m.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    // lower-triangular factor, row-major
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = m.get(i, j);
            for k in 0..j {
                acc = acc - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(acc > T::zero()) {
                    return Err(Error::NotPositiveDefinite {
                        pivot: i,
                        value: acc.to_f64_lossy(),
                    });
                }
                l[i * n + i] = acc.sqrt();
            } else {
                l[i * n + j] = acc / l[j * n + j];
            }
        }
    }
    let chol_solve = |rhs: &[T]| -> Vec<T> {
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut acc = y[i];
            for k in 0..i {
                acc = acc - l[i * n + k] * y[k];
            }
            y[i] = acc / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in (i + 1)..n {
                acc = acc - l[k * n + i] * y[k];
            }
            y[i] = acc / l[i * n + i];
        }
        y
    };
    let mut x = chol_solve(b);
    let residual = |x: &[T]| -> Result<Vec<T>> {
        let mx = m.mul_vec(x)?;
        Ok(b.iter().zip(&mx).map(|(bi, mi)| *bi - *mi).collect())
    };
    let r = residual(&x)?;
    let dx = chol_solve(&r);
    for (xi, di) in x.iter_mut().zip(&dx) {
        *xi = *xi + *di;
    }
    let r = residual(&x)?;
    let bound = tol * norm2(b);
    let rn = norm2(&r);
    if rn > bound {
        return Err(Error::SolverFailure {
            residual: rn.to_f64_lossy(),
            tolerance: bound.to_f64_lossy(),
        });
    }
    Ok(x)
}

/// Solves a symmetric tridiagonal system with diagonal `diag` and
/// off-diagonal `off` (length `diag.len() - 1`) by an LDLᵀ sweep. A
/// nonpositive pivot is reported as indefiniteness.
pub fn solve_spd_tridiagonal<T: Real>(diag: &[T], off: &[T], rhs: &[T]) -> Result<Vec<T>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            actual: off.len(),
        });
    }
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: rhs.len(),
        });
    }
    let mut d = vec![T::zero(); n];
    let mut l = vec![T::zero(); n];
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let (pivot, yi) = if i == 0 {
            (diag[0], rhs[0])
        } else {
            l[i] = off[i - 1] / d[i - 1];
            (diag[i] - l[i] * off[i - 1], rhs[i] - l[i] * y[i - 1])
        };
        if !(pivot > T::zero()) {
            return Err(Error::NotPositiveDefinite {
                pivot: i,
                value: pivot.to_f64_lossy(),
            });
        }
        d[i] = pivot;
        y[i] = yi;
    }
    let mut x = vec![T::zero(); n];
    x[n - 1] = y[n - 1] / d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = y[i] / d[i] - l[i + 1] * x[i + 1];
    }
    Ok(x)
}

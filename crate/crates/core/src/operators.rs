//! Discrete Dirichlet Laplacian and the two fractional operators built on it.
//!
//! * The *Navier* (spectral) operator on Ω is `A_Ω^s`, the matrix power of
//!   the five-point (three-point in 1D) Laplacian with zero exterior values.
//! * The *Dirichlet* (restricted) operator on Ω is `P B^s Pᵀ`, where `B` is
//!   the Laplacian of an enclosing box and `P` restricts box functions to Ω.
//!   As the box grows this converges to the restricted fractional Laplacian
//!   of functions supported in Ω.
//!
//! Because `t ↦ t^s` is operator concave for `0 < s < 1` and `A_Ω = P B Pᵀ`,
//! the difference `A_Ω^s − P B^s Pᵀ` is positive semidefinite exactly at
//! matrix level; the checks in this module measure by how much.
//!
//! All quadratic forms carry the quadrature weight `h^dim`, so they
//! approximate the continuous forms rather than bare `uᵀMu`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::domain::{BoxGrid, GridFunction, SubDomain};
use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, eigendecompose, EigenDecomposition, SymMatrix, DEFAULT_EIGEN_TOL};
use crate::scalar::Real;

/// A value counts as strictly positive above this (unit-normalized) level.
pub const STRICT_THRESHOLD: f64 = 1e-9;

/// Roundoff allowance for inequalities that hold exactly in exact arithmetic.
pub const NONNEG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Laplacian,
    Navier,
    Dirichlet,
    Difference,
}

/// An immutable symmetric operator on the nodes of a domain together with
/// its eigendecomposition, computed once at construction.
#[derive(Debug, Clone)]
pub struct SymOperator<T> {
    matrix: SymMatrix<T>,
    eigen: EigenDecomposition<T>,
    kind: OperatorKind,
    exponent: Option<T>,
    domain: SubDomain<T>,
}

impl<T: Real> SymOperator<T> {
    pub fn matrix(&self) -> &SymMatrix<T> {
        &self.matrix
    }

    pub fn eigen(&self) -> &EigenDecomposition<T> {
        &self.eigen
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn exponent(&self) -> Option<T> {
        self.exponent
    }

    pub fn domain(&self) -> &SubDomain<T> {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn spectrum(&self) -> &[T] {
        self.eigen.eigenvalues()
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigen.min_eigenvalue()
    }

    pub fn apply(&self, u: &[T]) -> Result<Vec<T>> {
        self.matrix.mul_vec(u)
    }

    /// `h^dim · uᵀ M u` for `u` given on the domain nodes.
    pub fn form(&self, u: &[T]) -> Result<T> {
        let mu = self.matrix.mul_vec(u)?;
        Ok(self.domain.grid().cell_volume() * dot(&mu, u))
    }

    /// The same form evaluated through the eigenbasis.
    pub fn spectral_form(&self, u: &[T]) -> Result<T> {
        let c = self.eigen.coefficients(u)?;
        let sum: T = self
            .eigen
            .eigenvalues()
            .iter()
            .zip(&c)
            .map(|(l, c)| *l * *c * *c)
            .sum();
        Ok(self.domain.grid().cell_volume() * sum)
    }
}

fn check_exponent<T: Real>(s: T) -> Result<()> {
    if !(s > T::zero() && s <= T::one()) {
        return Err(invalid(
            "s",
            format!("exponent must lie in (0, 1], got {s}"),
        ));
    }
    Ok(())
}

/// Eigenpairs of the full-box Laplacian from the discrete sine basis,
/// ascending. In 2D the basis is the tensor product of the 1D one.
pub fn box_laplacian_spectrum<T: Real>(grid: &BoxGrid<T>) -> Result<EigenDecomposition<T>> {
    let n = grid.nodes_per_axis();
    let h = grid.step();
    let np1 = (n + 1) as f64;
    let norm = T::lit((2.0 / np1).sqrt());
    let four_h2 = T::lit(4.0) / (h * h);
    let values_1d: Vec<T> = (1..=n)
        .map(|k| {
            let sn = T::lit((k as f64 * PI / (2.0 * np1)).sin());
            four_h2 * sn * sn
        })
        .collect();
    let vectors_1d: Vec<Vec<T>> = (1..=n)
        .map(|k| {
            (1..=n)
                .map(|i| norm * T::lit(((i * k) as f64 * PI / np1).sin()))
                .collect()
        })
        .collect();
    if grid.dim() == 1 {
        return EigenDecomposition::from_parts(values_1d, vectors_1d.concat());
    }
    let total = n * n;
    let mut values = Vec::with_capacity(total);
    let mut vectors = Vec::with_capacity(total * total);
    for ky in 0..n {
        for kx in 0..n {
            values.push(values_1d[kx] + values_1d[ky]);
            for iy in 0..n {
                for ix in 0..n {
                    vectors.push(vectors_1d[kx][ix] * vectors_1d[ky][iy]);
                }
            }
        }
    }
    EigenDecomposition::from_parts(values, vectors)
}

fn stencil_matrix<T: Real>(domain: &SubDomain<T>) -> Result<SymMatrix<T>> {
    let grid = domain.grid();
    let h2 = grid.step() * grid.step();
    let diag = T::from_usize_lossy(2 * grid.dim()) / h2;
    let off = -T::one() / h2;
    let n = grid.nodes_per_axis();
    let idx = domain.indices();
    SymMatrix::from_fn(idx.len(), |a, b| {
        if a == b {
            return diag;
        }
        let [ia, ja] = grid.axes(idx[a]);
        let [ib, jb] = grid.axes(idx[b]);
        let adjacent = (ia.abs_diff(ib) == 1 && ja == jb) || (ja.abs_diff(jb) == 1 && ia == ib);
        debug_assert!(ia < n && ib < n);
        if adjacent {
            off
        } else {
            T::zero()
        }
    })
}

/// Applies the stencil Laplacian of `domain` to values on its nodes without
/// forming the matrix.
pub fn apply_stencil<T: Real>(domain: &SubDomain<T>, v: &[T]) -> Result<Vec<T>> {
    let idx = domain.indices();
    if v.len() != idx.len() {
        return Err(Error::DimensionMismatch {
            expected: idx.len(),
            actual: v.len(),
        });
    }
    let grid = domain.grid();
    let n = grid.nodes_per_axis();
    let mut position = vec![usize::MAX; grid.node_count()];
    for (a, &i) in idx.iter().enumerate() {
        position[i] = a;
    }
    let h2 = grid.step() * grid.step();
    let diag = T::from_usize_lossy(2 * grid.dim());
    let out = idx
        .iter()
        .enumerate()
        .map(|(a, &node)| {
            let [i, j] = grid.axes(node);
            let mut acc = diag * v[a];
            let mut neighbor = |ii: usize, jj: usize| {
                let p = position[grid.flat_index([ii, jj])];
                if p != usize::MAX {
                    acc = acc - v[p];
                }
            };
            if i > 0 {
                neighbor(i - 1, j);
            }
            if i + 1 < n {
                neighbor(i + 1, j);
            }
            if grid.dim() == 2 {
                if j > 0 {
                    neighbor(i, j - 1);
                }
                if j + 1 < n {
                    neighbor(i, j + 1);
                }
            }
            acc / h2
        })
        .collect();
    Ok(out)
}

/// Second-order finite-difference Dirichlet Laplacian on the masked nodes;
/// nodes outside the mask act as zero boundary values.
pub fn assemble_laplacian<T: Real>(domain: &SubDomain<T>) -> Result<SymOperator<T>> {
    let matrix = stencil_matrix(domain)?;
    let eigen = if domain.is_full() {
        box_laplacian_spectrum(domain.grid())?
    } else {
        eigendecompose(&matrix, T::lit(DEFAULT_EIGEN_TOL))?
    };
    Ok(SymOperator {
        matrix,
        eigen,
        kind: OperatorKind::Laplacian,
        exponent: None,
        domain: domain.clone(),
    })
}

/// Spectral (Navier) fractional Laplacian `A_Ω^s`.
pub fn navier_operator<T: Real>(domain: &SubDomain<T>, s: T) -> Result<SymOperator<T>> {
    check_exponent(s)?;
    navier_from_laplacian(&assemble_laplacian(domain)?, s)
}

/// `A^s` from an already assembled Laplacian, reusing its eigenvectors.
pub fn navier_from_laplacian<T: Real>(laplacian: &SymOperator<T>, s: T) -> Result<SymOperator<T>> {
    check_exponent(s)?;
    if laplacian.kind != OperatorKind::Laplacian {
        return Err(invalid("laplacian", "expected a Laplacian operator"));
    }
    if s == T::one() {
        return Ok(SymOperator {
            kind: OperatorKind::Navier,
            exponent: Some(s),
            ..laplacian.clone()
        });
    }
    let matrix = laplacian.eigen.spectral_power(s)?;
    let values = laplacian
        .eigen
        .eigenvalues()
        .iter()
        .map(|l| l.powf(s))
        .collect();
    let n = laplacian.dim();
    let vectors = (0..n)
        .flat_map(|j| laplacian.eigen.eigenvector(j).iter().copied())
        .collect();
    Ok(SymOperator {
        matrix,
        eigen: EigenDecomposition::from_parts(values, vectors)?,
        kind: OperatorKind::Navier,
        exponent: Some(s),
        domain: laplacian.domain.clone(),
    })
}

fn embed_in_box<T: Real>(domain: &SubDomain<T>, bx: &BoxGrid<T>) -> Result<SubDomain<T>> {
    if domain.grid() == bx {
        return Ok(domain.clone());
    }
    domain
        .transfer_to(bx)
        .map_err(|e| Error::GridMismatch(format!("domain is not embedded in the box: {e}")))
}

/// `P B^s Pᵀ` on the box nodes in `domain`, from the box's sine spectrum.
fn restricted_power<T: Real>(
    domain: &SubDomain<T>,
    spectrum: &EigenDecomposition<T>,
    s: T,
) -> Result<SymMatrix<T>> {
    let idx = domain.indices();
    let m = idx.len();
    let k = spectrum.dim();
    let half = s / T::lit(2.0);
    // rows[a][j] = λ_j^{s/2} φ_j(idx[a])
    let mut rows = vec![T::zero(); m * k];
    for j in 0..k {
        let w = spectrum.eigenvalues()[j].powf(half);
        let q = spectrum.eigenvector(j);
        for (a, &i) in idx.iter().enumerate() {
            rows[a * k + j] = w * q[i];
        }
    }
    SymMatrix::from_fn(m, |a, b| {
        dot(&rows[a * k..(a + 1) * k], &rows[b * k..(b + 1) * k])
    })
}

/// Restricted (Dirichlet) fractional Laplacian `P B^s Pᵀ` of `domain`
/// embedded in `bx`. At `s = 1` this is exactly the stencil restricted to Ω.
pub fn dirichlet_operator<T: Real>(
    domain: &SubDomain<T>,
    bx: &BoxGrid<T>,
    s: T,
) -> Result<SymOperator<T>> {
    check_exponent(s)?;
    let domain = embed_in_box(domain, bx)?;
    let matrix = if s == T::one() {
        stencil_matrix(&domain)?
    } else {
        restricted_power(&domain, &box_laplacian_spectrum(bx)?, s)?
    };
    let eigen = eigendecompose(&matrix, T::lit(DEFAULT_EIGEN_TOL))?;
    Ok(SymOperator {
        matrix,
        eigen,
        kind: OperatorKind::Dirichlet,
        exponent: Some(s),
        domain,
    })
}

/// `h^dim Σ_j μ_j^s (φ_jᵀ Pᵀu)²` over the box spectrum, i.e. the Dirichlet
/// form without assembling or diagonalizing `P B^s Pᵀ`.
pub fn dirichlet_form<T: Real>(domain: &SubDomain<T>, bx: &BoxGrid<T>, s: T, u: &[T]) -> Result<T> {
    check_exponent(s)?;
    let domain = embed_in_box(domain, bx)?;
    let full = domain.extend_by_zero(u)?;
    let spectrum = box_laplacian_spectrum(bx)?;
    Ok(bx.cell_volume() * spectrum.spectral_form(s, full.values())?)
}

/// Fourier-multiplier form `Σ_k |ξ_k|^{2s} |û_k|²` on the periodic box.
///
/// `u` lives on the grid of `domain` and must vanish off its mask. It is
/// zero-padded into `bx` (an aligned grid containing the domain's grid), whose
/// period `2L` carries `N + 1` samples per axis with the boundary sample
/// zero. Frequencies are `ξ_k = πk/L`; the zero mode contributes nothing.
pub fn fourier_form<T: Real>(
    u: &GridFunction<T>,
    domain: &SubDomain<T>,
    bx: &BoxGrid<T>,
    s: T,
) -> Result<T> {
    check_exponent(s)?;
    if u.grid() != domain.grid() {
        return Err(Error::GridMismatch(
            "function and domain live on different grids".into(),
        ));
    }
    if let Some((index, value)) = u.support_violation(domain) {
        return Err(Error::SupportViolation {
            index,
            value: value.to_f64_lossy(),
        });
    }
    let padded = u.transfer_to(bx)?;
    let n = bx.nodes_per_axis();
    let period = n + 1;
    let dim = bx.dim();
    let total = period.pow(dim as u32);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); total];
    for (idx, &v) in padded.values().iter().enumerate() {
        let [i, j] = bx.axes(idx);
        let pos = if dim == 1 {
            i + 1
        } else {
            (i + 1) + period * (j + 1)
        };
        buf[pos] = Complex::new(v, T::zero());
    }

    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft_forward(period);
    // rows along x are contiguous
    fft.process(&mut buf);
    if dim == 2 {
        let mut column = vec![Complex::new(T::zero(), T::zero()); period];
        for x in 0..period {
            for y in 0..period {
                column[y] = buf[x + period * y];
            }
            fft.process(&mut column);
            for y in 0..period {
                buf[x + period * y] = column[y];
            }
        }
    }

    let freq = |k: usize| -> T {
        let signed = k.min(period - k);
        T::PI() * T::from_usize_lossy(signed) / bx.halfwidth()
    };
    let mut acc = T::zero();
    for (pos, c) in buf.iter().enumerate() {
        let (kx, ky) = (pos % period, pos / period);
        let xi2 = if dim == 1 {
            let f = freq(kx);
            f * f
        } else {
            let (fx, fy) = (freq(kx), freq(ky));
            fx * fx + fy * fy
        };
        if xi2 == T::zero() {
            continue;
        }
        acc = acc + xi2.powf(s) * c.norm_sqr();
    }
    let scale = bx.cell_volume() / T::from_usize_lossy(total);
    Ok(scale * acc)
}

/// `A_Ω^s − P B^s Pᵀ`.
pub fn difference_operator<T: Real>(
    domain: &SubDomain<T>,
    bx: &BoxGrid<T>,
    s: T,
) -> Result<SymOperator<T>> {
    let dirichlet = dirichlet_operator(domain, bx, s)?;
    let navier = navier_operator(dirichlet.domain(), s)?;
    difference_of(&navier, &dirichlet)
}

/// Difference of two already assembled operators on the same domain.
pub fn difference_of<T: Real>(
    navier: &SymOperator<T>,
    dirichlet: &SymOperator<T>,
) -> Result<SymOperator<T>> {
    if navier.domain != dirichlet.domain {
        return Err(Error::GridMismatch(
            "operators act on different domains".into(),
        ));
    }
    let matrix = navier.matrix.sub(&dirichlet.matrix)?;
    let eigen = eigendecompose(&matrix, T::lit(DEFAULT_EIGEN_TOL))?;
    Ok(SymOperator {
        matrix,
        eigen,
        kind: OperatorKind::Difference,
        exponent: navier.exponent,
        domain: navier.domain.clone(),
    })
}

/// Paired ascending spectra of the Navier and Dirichlet operators.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumComparison<T> {
    pub s: T,
    pub navier: Vec<T>,
    pub dirichlet: Vec<T>,
    pub margins: Vec<T>,
}

impl<T: Real> SpectrumComparison<T> {
    pub fn from_spectra(s: T, navier: Vec<T>, dirichlet: Vec<T>) -> Result<Self> {
        if navier.len() != dirichlet.len() {
            return Err(Error::DimensionMismatch {
                expected: navier.len(),
                actual: dirichlet.len(),
            });
        }
        let margins = navier
            .iter()
            .zip(&dirichlet)
            .map(|(n, d)| *n - *d)
            .collect();
        Ok(Self {
            s,
            navier,
            dirichlet,
            margins,
        })
    }

    pub fn len(&self) -> usize {
        self.margins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.margins.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.navier
            .iter()
            .copied()
            .zip(self.dirichlet.iter().copied())
    }

    pub fn min_margin(&self) -> T {
        self.margins.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_abs_margin(&self) -> T {
        self.margins.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Per-eigenvalue flag `λ^N_j − λ^D_j > threshold`.
    pub fn strict(&self, threshold: T) -> Vec<bool> {
        self.margins.iter().map(|m| *m > threshold).collect()
    }
}

pub fn compare_spectra<T: Real>(
    domain: &SubDomain<T>,
    bx: &BoxGrid<T>,
    s: T,
) -> Result<SpectrumComparison<T>> {
    let dirichlet = dirichlet_operator(domain, bx, s)?;
    let navier = navier_operator(dirichlet.domain(), s)?;
    SpectrumComparison::from_spectra(s, navier.spectrum().to_vec(), dirichlet.spectrum().to_vec())
}

/// Smallest entry of `(A_Ω^s − P B^s Pᵀ) u` and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityCheck<T> {
    pub min_entry: T,
    pub witness: usize,
}

pub fn positivity_check<T: Real>(
    domain: &SubDomain<T>,
    bx: &BoxGrid<T>,
    s: T,
    u: &[T],
) -> Result<PositivityCheck<T>> {
    check_nonnegative(u)?;
    positivity_check_with(&difference_operator(domain, bx, s)?, u)
}

/// [`positivity_check`] against a prebuilt difference operator.
pub fn positivity_check_with<T: Real>(
    difference: &SymOperator<T>,
    u: &[T],
) -> Result<PositivityCheck<T>> {
    check_nonnegative(u)?;
    let mu = difference.apply(u)?;
    let (witness, min_entry) =
        mu.iter()
            .copied()
            .enumerate()
            .fold(
                (0, T::infinity()),
                |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) },
            );
    Ok(PositivityCheck { min_entry, witness })
}

fn check_nonnegative<T: Real>(u: &[T]) -> Result<()> {
    if let Some((index, v)) = u.iter().enumerate().find(|(_, v)| **v < T::zero()) {
        return Err(Error::NegativeEntry {
            index,
            value: v.to_f64_lossy(),
        });
    }
    Ok(())
}

/// `(Q^D[u], Q^N[u; Ω'], Q^N[u; Ω])` for `Ω ⊂ Ω' ⊂ box`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneChain<T> {
    pub dirichlet: T,
    pub navier_outer: T,
    pub navier_inner: T,
}

impl<T: Real> MonotoneChain<T> {
    /// Largest violation of `dirichlet ≤ navier_outer ≤ navier_inner`
    /// (nonpositive when the chain holds).
    pub fn worst_violation(&self) -> T {
        (self.dirichlet - self.navier_outer).max(self.navier_outer - self.navier_inner)
    }

    pub fn holds(&self, tol: T) -> bool {
        self.worst_violation() <= tol
    }
}

/// Evaluates the three forms of the domain-monotonicity chain for `u` given
/// on the nodes of `inner`. Both masks must live on the box grid.
pub fn monotonicity_check<T: Real>(
    inner: &SubDomain<T>,
    outer: &SubDomain<T>,
    bx: &BoxGrid<T>,
    s: T,
    u: &[T],
) -> Result<MonotoneChain<T>> {
    check_exponent(s)?;
    if inner.grid() != bx || outer.grid() != bx {
        return Err(Error::GridMismatch(
            "nested domains must share the box grid".into(),
        ));
    }
    if !inner.is_subset_of(outer) {
        return Err(invalid(
            "domains",
            "inner domain is not contained in the outer one",
        ));
    }
    let inner_nav = navier_operator(inner, s)?;
    let navier_inner = inner_nav.form(u)?;
    let lifted = outer.restrict(&inner.extend_by_zero(u)?)?;
    let navier_outer = navier_operator(outer, s)?.form(&lifted)?;
    let dirichlet = dirichlet_form(inner, bx, s, u)?;
    Ok(MonotoneChain {
        dirichlet,
        navier_outer,
        navier_inner,
    })
}

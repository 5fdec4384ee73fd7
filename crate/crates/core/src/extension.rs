//! The weighted extension problem `−div(y^{1−2s} ∇w) = 0` on `Ω × (0, Y)`.
//!
//! The x-direction uses the same finite-difference Laplacian as
//! [`operators`](crate::operators); the y-direction uses piecewise-linear
//! elements on a graded mesh with the weight `y^{1−2s}` integrated exactly
//! over each cell and a lumped (diagonal) mass matrix. Lumping keeps the
//! assembled system an M-matrix, so the discrete maximum principle holds.
//!
//! Two lateral conditions are supported:
//!
//! * [`Variant::Navier`]: zero on the nodes outside Ω (the mask boundary);
//! * [`Variant::Dirichlet`]: zero only outside the enclosing box, with the
//!   datum extended by zero to the whole box.
//!
//! The x-operator is diagonalized once and each x-mode then reduces to an
//! independent tridiagonal system in y. The full coupled residual is checked
//! after synthesis.

use crate::analysis::extension_constant;
use crate::domain::SubDomain;
use crate::error::{invalid, Error, Result};
use crate::linalg::{norm2, solve_spd_tridiagonal, EigenDecomposition};
use crate::operators::{
    apply_stencil, assemble_laplacian, box_laplacian_spectrum, difference_operator, dirichlet_form,
    navier_operator,
};
use crate::scalar::Real;

/// Largest relative residual accepted from the coupled system.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Number of y-layers used by the trace fit.
pub const TRACE_FIT_LAYERS: usize = 4;

/// Graded y-mesh `y_k = Y (k/M)^γ`, `k = 0..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionMesh<T> {
    nodes: Vec<T>,
    gamma: T,
    height: T,
}

impl<T: Real> ExtensionMesh<T> {
    pub fn graded(height: T, layers: usize, gamma: T) -> Result<Self> {
        if !(height > T::zero()) || !height.is_finite() {
            return Err(invalid(
                "height",
                format!("truncation height must be positive, got {height}"),
            ));
        }
        if layers < 4 {
            return Err(invalid(
                "layers",
                format!("mesh too coarse: need at least 4 layers, got {layers}"),
            ));
        }
        if !(gamma >= T::one()) || !gamma.is_finite() {
            return Err(invalid(
                "gamma",
                format!("grading exponent must be ≥ 1, got {gamma}"),
            ));
        }
        let m = T::from_usize_lossy(layers);
        let nodes = (0..=layers)
            .map(|k| height * (T::from_usize_lossy(k) / m).powf(gamma))
            .collect();
        Ok(Self {
            nodes,
            gamma,
            height,
        })
    }

    /// `max(2, 1/(1 − s))`.
    pub fn default_gamma(s: T) -> T {
        T::lit(2.0).max(T::one() / (T::one() - s))
    }

    /// Eight domain diameters.
    pub fn default_height(diameter: T) -> T {
        T::lit(8.0) * diameter
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Number of cells `M`.
    pub fn layers(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn height(&self) -> T {
        self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Lateral zero on the boundary of Ω.
    Navier,
    /// Whole box, datum extended by zero.
    Dirichlet,
}

/// One-dimensional weighted P1 matrices on the y-mesh.
struct WeightedY<T> {
    /// `∫ y^{1−2s} dy / Δ²` per cell.
    stiffness: Vec<T>,
    /// Lumped mass `∫ y^{1−2s} φ_k dy` per node.
    mass: Vec<T>,
}

// ∫_a^b y^p dy for p > −1, written to avoid cancellation when b − a ≪ a.
fn power_integral<T: Real>(a: T, b: T, p: T) -> T {
    let q = p + T::one();
    if a == T::zero() {
        return b.powf(q) / q;
    }
    a.powf(q) * (q * ((b - a) / a).ln_1p()).exp_m1() / q
}

impl<T: Real> WeightedY<T> {
    fn new(mesh: &ExtensionMesh<T>, s: T) -> Self {
        let beta = T::one() - T::lit(2.0) * s;
        let y = mesh.nodes();
        let m = mesh.layers();
        let mut stiffness = Vec::with_capacity(m);
        let mut mass = vec![T::zero(); m + 1];
        for c in 0..m {
            let (a, b) = (y[c], y[c + 1]);
            let delta = b - a;
            let i0 = power_integral(a, b, beta);
            let i1 = power_integral(a, b, beta + T::one());
            let right = (i1 - a * i0) / delta;
            let left = i0 - right;
            stiffness.push(i0 / (delta * delta));
            mass[c] = mass[c] + left;
            mass[c + 1] = mass[c + 1] + right;
        }
        Self { stiffness, mass }
    }
}

/// Discrete extension of a boundary datum, stored layer by layer.
#[derive(Debug, Clone)]
pub struct ExtensionSolution<T> {
    variant: Variant,
    s: T,
    mesh: ExtensionMesh<T>,
    omega: SubDomain<T>,
    columns: SubDomain<T>,
    // values[k * ncols + c]
    values: Vec<T>,
    energy: T,
    residual: T,
}

impl<T: Real> ExtensionSolution<T> {
    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn s(&self) -> T {
        self.s
    }

    pub fn mesh(&self) -> &ExtensionMesh<T> {
        &self.mesh
    }

    /// The domain Ω of the datum.
    pub fn omega(&self) -> &SubDomain<T> {
        &self.omega
    }

    /// The x-nodes of the lattice: Ω for the Navier variant, the whole box
    /// for the Dirichlet variant.
    pub fn columns(&self) -> &SubDomain<T> {
        &self.columns
    }

    /// Values on x-layer `k` (`k = 0` is the datum, `k = M` the truncation).
    pub fn layer(&self, k: usize) -> &[T] {
        let n = self.columns.len();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Weighted energy `∫∫ y^{1−2s} |∇w|²` of the discrete solution.
    pub fn energy(&self) -> T {
        self.energy
    }

    /// `(C_s / 2s) · ℰ`, which approximates the corresponding quadratic form.
    pub fn scaled_energy(&self) -> T {
        extension_constant(self.s).expect("s validated at solve time") / (T::lit(2.0) * self.s)
            * self.energy
    }

    /// Relative residual of the coupled linear system.
    pub fn residual(&self) -> T {
        self.residual
    }

    /// Layer `k` restricted to the nodes of Ω.
    pub fn layer_on_omega(&self, k: usize) -> Vec<T> {
        let layer = self.layer(k);
        if self.columns == self.omega {
            return layer.to_vec();
        }
        // Dirichlet columns are the whole box, indexed by grid node
        self.omega.indices().iter().map(|&i| layer[i]).collect()
    }
}

/// Solves the extension problem for a datum `u` given on the nodes of Ω.
pub fn solve_extension<T: Real>(
    omega: &SubDomain<T>,
    u: &[T],
    variant: Variant,
    s: T,
    mesh: &ExtensionMesh<T>,
) -> Result<ExtensionSolution<T>> {
    check_open_exponent(s)?;
    if u.len() != omega.len() {
        return Err(Error::DimensionMismatch {
            expected: omega.len(),
            actual: u.len(),
        });
    }
    let (columns, trace, spectrum) = match variant {
        Variant::Navier => (
            omega.clone(),
            u.to_vec(),
            assemble_laplacian(omega)?.eigen().clone(),
        ),
        Variant::Dirichlet => {
            let full = SubDomain::full(*omega.grid());
            let trace = omega.extend_by_zero(u)?.into_values();
            (full, trace, box_laplacian_spectrum(omega.grid())?)
        }
    };
    solve_on_columns(omega, columns, &trace, &spectrum, variant, s, mesh)
}

fn check_open_exponent<T: Real>(s: T) -> Result<()> {
    if !(s > T::zero() && s < T::one()) {
        return Err(invalid("s", format!("extension needs 0 < s < 1, got {s}")));
    }
    Ok(())
}

fn solve_on_columns<T: Real>(
    omega: &SubDomain<T>,
    columns: SubDomain<T>,
    trace: &[T],
    spectrum: &EigenDecomposition<T>,
    variant: Variant,
    s: T,
    mesh: &ExtensionMesh<T>,
) -> Result<ExtensionSolution<T>> {
    let ncols = columns.len();
    let m = mesh.layers();
    let weights = WeightedY::new(mesh, s);
    let kappa = &weights.stiffness;
    let mass = &weights.mass;
    let coeffs = spectrum.coefficients(trace)?;

    let interior = m - 1;
    let mut values = vec![T::zero(); (m + 1) * ncols];
    values[..ncols].copy_from_slice(trace);
    let mut energy = T::zero();
    let mut diag = vec![T::zero(); interior];
    let off: Vec<T> = (1..interior).map(|k| -kappa[k]).collect();
    let mut rhs = vec![T::zero(); interior];
    for (j, &c) in coeffs.iter().enumerate() {
        if c == T::zero() {
            continue;
        }
        let mu = spectrum.eigenvalues()[j];
        for k in 1..m {
            diag[k - 1] = kappa[k - 1] + kappa[k] + mu * mass[k];
        }
        rhs.iter_mut().for_each(|r| *r = T::zero());
        rhs[0] = kappa[0] * c;
        let g = solve_spd_tridiagonal(&diag, &off, &rhs)?;

        let profile = |k: usize| -> T {
            match k {
                0 => c,
                k if k == m => T::zero(),
                k => g[k - 1],
            }
        };
        let mut e = T::zero();
        for (cell, &kc) in kappa.iter().enumerate().take(m) {
            let d = profile(cell + 1) - profile(cell);
            e = e + kc * d * d;
        }
        for (k, &mk) in mass.iter().enumerate().take(m) {
            let p = profile(k);
            e = e + mu * mk * p * p;
        }
        energy = energy + e;

        let q = spectrum.eigenvector(j);
        for k in 1..m {
            let gk = g[k - 1];
            let row = &mut values[k * ncols..(k + 1) * ncols];
            for (w, qi) in row.iter_mut().zip(q) {
                *w = *w + gk * *qi;
            }
        }
    }
    energy = energy * columns.grid().cell_volume();

    // coupled residual
    let mut r2 = T::zero();
    let mut t2 = T::zero();
    for k in 1..m {
        let prev = &values[(k - 1) * ncols..k * ncols];
        let cur = &values[k * ncols..(k + 1) * ncols];
        let next = &values[(k + 1) * ncols..(k + 2) * ncols];
        let lap = apply_stencil(&columns, cur)?;
        for i in 0..ncols {
            let terms = [
                -kappa[k - 1] * prev[i],
                (kappa[k - 1] + kappa[k]) * cur[i],
                -kappa[k] * next[i],
                mass[k] * lap[i],
            ];
            let r: T = terms.iter().copied().sum();
            let t: T = terms.iter().map(|x| x.abs()).sum();
            r2 = r2 + r * r;
            t2 = t2 + t * t;
        }
    }
    let residual = if t2 == T::zero() {
        T::zero()
    } else {
        (r2 / t2).sqrt()
    };
    if residual > T::lit(RESIDUAL_TOLERANCE) {
        return Err(Error::SolverFailure {
            residual: residual.to_f64_lossy(),
            tolerance: RESIDUAL_TOLERANCE,
        });
    }

    Ok(ExtensionSolution {
        variant,
        s,
        mesh: mesh.clone(),
        omega: omega.clone(),
        columns,
        values,
        energy,
        residual,
    })
}

/// Quadratic form next to the scaled extension energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyIdentity<T> {
    pub form: T,
    pub scaled_energy: T,
    pub relative_gap: T,
}

fn relative_gap<T: Real>(reference: T, value: T) -> T {
    let diff = (reference - value).abs();
    if diff == T::zero() {
        T::zero()
    } else {
        diff / reference.abs()
    }
}

/// Compares `Q_s[u]` of the matching operator with `(C_s/2s)·ℰ`.
pub fn energy_identity_check<T: Real>(
    omega: &SubDomain<T>,
    u: &[T],
    variant: Variant,
    s: T,
    mesh: &ExtensionMesh<T>,
) -> Result<EnergyIdentity<T>> {
    let sol = solve_extension(omega, u, variant, s, mesh)?;
    let form = match variant {
        Variant::Navier => navier_operator(omega, s)?.form(u)?,
        Variant::Dirichlet => dirichlet_form(omega, omega.grid(), s, u)?,
    };
    let scaled_energy = sol.scaled_energy();
    Ok(EnergyIdentity {
        form,
        scaled_energy,
        relative_gap: relative_gap(form, scaled_energy),
    })
}

// Least-squares slope of `f_k ≈ c · y_k^{2s}` over the first fit layers.
fn fit_layers<T: Real>(mesh: &ExtensionMesh<T>, s: T) -> Result<Vec<(usize, T)>> {
    let usable = TRACE_FIT_LAYERS.min(mesh.layers() - 1);
    if usable < 3 {
        return Err(Error::IllConditionedFit { available: usable });
    }
    let two_s = T::lit(2.0) * s;
    Ok((1..=usable)
        .map(|k| (k, mesh.nodes()[k].powf(two_s)))
        .collect())
}

fn fitted_coefficients<T: Real>(
    layers: &[(usize, T)],
    n: usize,
    increment: impl Fn(usize, usize) -> T,
) -> Vec<T> {
    let denom: T = layers.iter().map(|(_, p)| *p * *p).sum();
    (0..n)
        .map(|i| layers.iter().map(|&(k, p)| increment(k, i) * p).sum::<T>() / denom)
        .collect()
}

/// `−C_s · lim (w − u)/y^{2s}` on the nodes of Ω, from a least-squares fit
/// of `w(x, y_k) ≈ u(x) + c(x)·y_k^{2s}` over the first few layers.
pub fn trace_limit<T: Real>(sol: &ExtensionSolution<T>) -> Result<Vec<T>> {
    let layers = fit_layers(&sol.mesh, sol.s)?;
    let datum = sol.layer_on_omega(0);
    let on_omega: Vec<Vec<T>> = layers.iter().map(|&(k, _)| sol.layer_on_omega(k)).collect();
    let c = fitted_coefficients(&layers, datum.len(), |k, i| {
        let pos = layers
            .iter()
            .position(|(kk, _)| *kk == k)
            .expect("fit layer");
        on_omega[pos][i] - datum[i]
    });
    let cs = extension_constant(sol.s)?;
    Ok(c.into_iter().map(|c| -cs * c).collect())
}

/// Comparison of the Dirichlet and Navier extensions of a nonnegative datum.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingCheck<T> {
    /// `min W` over every lattice point of `Ω × [0, Y]`.
    pub min_difference: T,
    /// `min W` over `Ω × (0, Y)`.
    pub min_interior: T,
    /// `C_s · lim W / y^{2s}` fitted on the first layers.
    pub trace_difference: Vec<T>,
    /// `(A_Ω^s − P B^s Pᵀ) u` from the matrix operators.
    pub reference: Vec<T>,
    /// `‖trace_difference − reference‖₂ / ‖reference‖₂`.
    pub relative_l2_gap: T,
}

/// Solves both variants for `u ≥ 0` and measures `W = w^D − w^N` on `Ω × [0, Y]`.
pub fn extension_ordering_check<T: Real>(
    omega: &SubDomain<T>,
    u: &[T],
    s: T,
    mesh: &ExtensionMesh<T>,
) -> Result<OrderingCheck<T>> {
    if let Some((index, v)) = u.iter().enumerate().find(|(_, v)| **v < T::zero()) {
        return Err(Error::NegativeEntry {
            index,
            value: v.to_f64_lossy(),
        });
    }
    let dirichlet = solve_extension(omega, u, Variant::Dirichlet, s, mesh)?;
    let navier = solve_extension(omega, u, Variant::Navier, s, mesh)?;
    let m = mesh.layers();
    let diffs: Vec<Vec<T>> = (0..=m)
        .map(|k| {
            dirichlet
                .layer_on_omega(k)
                .iter()
                .zip(navier.layer(k))
                .map(|(d, n)| *d - *n)
                .collect()
        })
        .collect();
    let min_of = |range: std::ops::Range<usize>| {
        range
            .flat_map(|k| diffs[k].iter().copied())
            .fold(T::infinity(), T::min)
    };
    let min_difference = min_of(0..m + 1);
    let min_interior = min_of(1..m);

    let layers = fit_layers(mesh, s)?;
    let cs = extension_constant(s)?;
    let trace_difference: Vec<T> = fitted_coefficients(&layers, omega.len(), |k, i| diffs[k][i])
        .into_iter()
        .map(|c| cs * c)
        .collect();
    let reference = difference_operator(omega, omega.grid(), s)?.apply(u)?;
    let err: Vec<T> = trace_difference
        .iter()
        .zip(&reference)
        .map(|(a, b)| *a - *b)
        .collect();
    let scale = norm2(&reference);
    let relative_l2_gap = if scale == T::zero() {
        norm2(&err)
    } else {
        norm2(&err) / scale
    };
    Ok(OrderingCheck {
        min_difference,
        min_interior,
        trace_difference,
        reference,
        relative_l2_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BoxGrid, Shape};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    // (−1/2, 1/2) with N interior nodes: the shifted unit interval
    fn unit_interval(n: usize) -> SubDomain<f64> {
        SubDomain::full(BoxGrid::new(1, 0.5, n).unwrap())
    }

    fn cos_datum(d: &SubDomain<f64>) -> Vec<f64> {
        d.indices()
            .iter()
            .map(|&i| (PI * d.grid().point(i)[0]).cos())
            .collect()
    }

    #[test]
    fn mesh_validation_and_grading() {
        let m = ExtensionMesh::graded(8.0, 16, 2.0).unwrap();
        assert_eq!(m.nodes()[0], 0.0);
        assert_eq!(m.nodes()[16], 8.0);
        assert_abs_diff_eq!(m.nodes()[4], 0.5, epsilon = 1e-15);
        assert!(m.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(ExtensionMesh::graded(8.0, 3, 2.0).is_err());
        assert!(ExtensionMesh::graded(8.0, 8, 0.5).is_err());
        assert!(ExtensionMesh::graded(0.0, 8, 2.0).is_err());
        assert_eq!(ExtensionMesh::default_gamma(0.25), 2.0);
        assert_eq!(ExtensionMesh::default_gamma(0.75), 4.0);
    }

    #[test]
    fn weighted_cell_integrals_match_quadrature() {
        // a cell away from the origin: compare against composite Simpson
        let (a, b, p) = (0.3f64, 0.7f64, -0.5f64);
        let n = 20000;
        let h = (b - a) / n as f64;
        let f = |y: f64| y.powf(p);
        let mut simpson = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            simpson += w * f(a + i as f64 * h);
        }
        simpson *= h / 3.0;
        assert_abs_diff_eq!(power_integral(a, b, p), simpson, epsilon = 1e-12);
        assert_abs_diff_eq!(
            power_integral(0.0, 2.0, 0.5),
            2f64.powf(1.5) / 1.5,
            epsilon = 1e-14
        );
    }

    #[test]
    fn zero_datum_gives_zero_solution() {
        let d = unit_interval(15);
        let mesh = ExtensionMesh::graded(8.0, 16, 2.0).unwrap();
        let sol = solve_extension(&d, &[0.0; 15], Variant::Navier, 0.3, &mesh).unwrap();
        assert!(sol.values().iter().all(|v| *v == 0.0));
        assert_eq!(sol.energy(), 0.0);
        let tr = trace_limit(&sol).unwrap();
        assert!(tr.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn half_laplacian_separable_solution() {
        // w = cos(πx) e^{−πy} on (−1/2, 1/2) × (0, ∞)
        let d = unit_interval(63);
        let u = cos_datum(&d);
        let mesh = ExtensionMesh::graded(8.0, 128, 2.0).unwrap();
        let sol = solve_extension(&d, &u, Variant::Navier, 0.5, &mesh).unwrap();
        assert!(sol.residual() < 1e-10);
        let mut worst = 0.0f64;
        for k in 0..=128 {
            let y = mesh.nodes()[k];
            for (w, u0) in sol.layer(k).iter().zip(&u) {
                worst = worst.max((w - u0 * (-PI * y).exp()).abs());
            }
        }
        assert!(worst < 5e-3, "max deviation {worst}");
        assert!((sol.energy() - PI / 2.0).abs() / (PI / 2.0) < 5e-3);
        assert_eq!(sol.layer(0), &u[..]);
        assert!(sol.layer(128).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn half_laplacian_trace() {
        let d = unit_interval(63);
        let u = cos_datum(&d);
        let mesh = ExtensionMesh::graded(8.0, 128, 2.0).unwrap();
        let sol = solve_extension(&d, &u, Variant::Navier, 0.5, &mesh).unwrap();
        let tr = trace_limit(&sol).unwrap();
        for (t, u0) in tr.iter().zip(&u) {
            assert!((t - PI * u0).abs() < 0.03 * PI, "{t} vs {}", PI * u0);
        }
    }

    #[test]
    fn energy_identity_self_converges_at_quarter() {
        let d = unit_interval(31);
        let u = cos_datum(&d);
        let gap = |m: usize| {
            let mesh = ExtensionMesh::graded(8.0, m, 2.0).unwrap();
            energy_identity_check(&d, &u, Variant::Navier, 0.25, &mesh)
                .unwrap()
                .relative_gap
        };
        let (g64, g128) = (gap(64), gap(128));
        assert!(g64 <= 0.05, "gap at M=64: {g64}");
        assert!(g128 < g64, "{g128} !< {g64}");
    }

    #[test]
    fn dirichlet_trace_matches_matrix_operator() {
        let g = BoxGrid::new(1, 2.0, 63).unwrap();
        let omega = SubDomain::from_shape(g, Shape::Interval { a: -0.5, b: 0.5 }).unwrap();
        let u: Vec<f64> = omega
            .indices()
            .iter()
            .map(|&i| (PI * g.point(i)[0]).cos().powi(2))
            .collect();
        let mesh = ExtensionMesh::graded(16.0, 512, 2.0).unwrap();
        let sol = solve_extension(&omega, &u, Variant::Dirichlet, 0.5, &mesh).unwrap();
        let tr = trace_limit(&sol).unwrap();
        let reference = crate::operators::dirichlet_operator(&omega, &g, 0.5)
            .unwrap()
            .apply(&u)
            .unwrap();
        // interior nodes only
        for i in 2..u.len() - 2 {
            let rel = (tr[i] - reference[i]).abs() / reference[i].abs().max(1e-3);
            assert!(rel < 0.1, "node {i}: {} vs {}", tr[i], reference[i]);
        }
    }

    #[test]
    fn energy_of_navier_dominates_dirichlet() {
        let g = BoxGrid::new(1, 1.0, 31).unwrap();
        let omega = SubDomain::from_shape(g, Shape::Interval { a: -0.4, b: 0.4 }).unwrap();
        let u: Vec<f64> = (0..omega.len()).map(|i| 1.0 + (i % 3) as f64).collect();
        let mesh = ExtensionMesh::graded(6.4, 32, 2.0).unwrap();
        let n = solve_extension(&omega, &u, Variant::Navier, 0.4, &mesh).unwrap();
        let d = solve_extension(&omega, &u, Variant::Dirichlet, 0.4, &mesh).unwrap();
        assert!(n.energy() >= d.energy());
        assert!(n.values().iter().all(|v| *v >= -1e-12));
        assert!(d.values().iter().all(|v| *v >= -1e-12));
    }

    #[test]
    fn ordering_of_extensions() {
        let g = BoxGrid::new(1, 1.0, 47).unwrap();
        let omega = SubDomain::from_shape(g, Shape::Interval { a: -0.25, b: 0.25 }).unwrap();
        let ground: Vec<f64> = assemble_laplacian(&omega)
            .unwrap()
            .eigen()
            .eigenvector(0)
            .iter()
            .map(|x: &f64| x.abs())
            .collect();
        let mesh = ExtensionMesh::graded(4.0, 64, 2.0).unwrap();
        let check = extension_ordering_check(&omega, &ground, 0.5, &mesh).unwrap();
        assert!(check.min_difference >= -1e-8);
        assert!(check.min_interior > 0.0);

        let zero = extension_ordering_check(&omega, &vec![0.0; omega.len()], 0.5, &mesh).unwrap();
        assert_eq!(zero.min_difference, 0.0);
        assert!(extension_ordering_check(&omega, &vec![-1.0; omega.len()], 0.5, &mesh).is_err());
    }

    #[test]
    fn rejects_bad_exponent_and_sizes() {
        let d = unit_interval(7);
        let mesh = ExtensionMesh::graded(8.0, 8, 2.0).unwrap();
        assert!(solve_extension(&d, &[0.0; 7], Variant::Navier, 1.0, &mesh).is_err());
        assert!(solve_extension(&d, &[0.0; 6], Variant::Navier, 0.5, &mesh).is_err());
    }
}

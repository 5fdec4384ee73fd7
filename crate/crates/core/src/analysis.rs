//! Special functions and fractional Sobolev quotients.

use crate::domain::{BoxGrid, GridFunction, SubDomain};
use crate::error::{invalid, Error, Result};
use crate::operators::{assemble_laplacian, dirichlet_form, SymOperator};
use crate::scalar::Real;

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// The Gamma function for `x > 0`.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(invalid(
            "x",
            format!("gamma needs a positive finite argument, got {x}"),
        ));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        return T::PI() / ((T::PI() * x).sin() * gamma_unchecked(T::one() - x));
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(*c) / (x + T::from_usize_lossy(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    // split the power so large arguments do not overflow before e^{−t}
    let root = t.powf((x + half) / T::lit(2.0));
    (T::lit(2.0) * T::PI()).sqrt() * root * (-t).exp() * root * acc
}

/// `C_s = 4^s Γ(1+s) / Γ(1−s)` for `0 < s < 1`.
pub fn extension_constant<T: Real>(s: T) -> Result<T> {
    if !(s > T::zero() && s < T::one()) {
        return Err(invalid(
            "s",
            format!("extension constant needs 0 < s < 1, got {s}"),
        ));
    }
    Ok(T::lit(4.0).powf(s) * gamma_unchecked(T::one() + s) / gamma_unchecked(T::one() - s))
}

/// Dimension and exponent of a Sobolev embedding, with `n > 2s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevSetup<T> {
    n: usize,
    s: T,
    critical_exponent: T,
}

impl<T: Real> SobolevSetup<T> {
    pub fn new(n: usize, s: T) -> Result<Self> {
        if !(s > T::zero() && s <= T::one()) {
            return Err(invalid(
                "s",
                format!("exponent must lie in (0, 1], got {s}"),
            ));
        }
        let nf = T::from_usize_lossy(n);
        let two_s = T::lit(2.0) * s;
        if !(nf > two_s) {
            return Err(Error::Domain(format!(
                "embedding needs n > 2s, got n = {n}, s = {s}"
            )));
        }
        Ok(Self {
            n,
            s,
            critical_exponent: T::lit(2.0) * nf / (nf - two_s),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> T {
        self.s
    }

    /// `2n / (n − 2s)`.
    pub fn critical_exponent(&self) -> T {
        self.critical_exponent
    }

    /// Best constant of the whole-space embedding (see
    /// [`sobolev_constant_closed_form`]).
    pub fn closed_form_constant(&self) -> T {
        closed_form(self.n, self.s)
    }
}

fn closed_form<T: Real>(n: usize, s: T) -> T {
    let nf = T::from_usize_lossy(n);
    let two = T::lit(2.0);
    let lead = (T::lit(4.0) * T::PI()).powf(s) * gamma_unchecked((nf + two * s) / two)
        / gamma_unchecked((nf - two * s) / two);
    let tail = (gamma_unchecked(nf / two) / gamma_unchecked(nf)).powf(two * s / nf);
    lead * tail
}

/// `(4π)^s Γ((n+2s)/2) / Γ((n−2s)/2) · [Γ(n/2)/Γ(n)]^{2s/n}`, the sharp
/// constant of the embedding of the homogeneous `H^s(ℝⁿ)` into `L_{2n/(n−2s)}`.
pub fn sobolev_constant_closed_form<T: Real>(n: usize, s: T) -> Result<T> {
    Ok(SobolevSetup::new(n, s)?.closed_form_constant())
}

/// Samples `U(x) = (1 + |x|²)^{(2s−n)/2}` with `n` the grid dimension.
pub fn extremal_function<T: Real>(grid: &BoxGrid<T>, s: T) -> Result<GridFunction<T>> {
    let setup = SobolevSetup::new(grid.dim(), s)?;
    let exponent = (T::lit(2.0) * s - T::from_usize_lossy(setup.n())) / T::lit(2.0);
    let dim = grid.dim();
    GridFunction::from_fn(*grid, |p| {
        let r2 = if dim == 1 {
            p[0] * p[0]
        } else {
            p[0] * p[0] + p[1] * p[1]
        };
        (T::one() + r2).powf(exponent)
    })
}

/// `(cell_volume · Σ|u_i|^p)^{1/p}`.
pub fn lp_norm_weighted<T: Real>(values: &[T], p: T, cell_volume: T) -> Result<T> {
    if !(p >= T::one()) || !p.is_finite() {
        return Err(invalid("p", format!("need finite p ≥ 1, got {p}")));
    }
    let sum: T = values.iter().map(|v| v.abs().powf(p)).sum();
    Ok((cell_volume * sum).powf(T::one() / p))
}

/// Discrete `L_p` norm with the grid's quadrature weight.
pub fn lp_norm<T: Real>(u: &GridFunction<T>, p: T) -> Result<T> {
    lp_norm_weighted(u.values(), p, u.grid().cell_volume())
}

/// `Q / ‖u‖²_{L_p}`.
pub fn rayleigh_quotient<T: Real>(form_value: T, u: &GridFunction<T>, p: T) -> Result<T> {
    quotient_of(form_value, u.values(), p, u.grid().cell_volume())
}

fn quotient_of<T: Real>(form_value: T, values: &[T], p: T, cell_volume: T) -> Result<T> {
    let norm = lp_norm_weighted(values, p, cell_volume)?;
    if norm == T::zero() {
        return Err(Error::Domain(
            "Rayleigh quotient of the zero function".into(),
        ));
    }
    Ok(form_value / (norm * norm))
}

/// Outcome of [`minimize_quotient`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientResult<T> {
    pub value: T,
    /// Final iterate, zero outside the operator's domain, unit `L_p` norm.
    pub minimizer: GridFunction<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Quotient after every accepted step, starting with the seed.
    pub history: Vec<T>,
}

const MAX_STEP_HALVINGS: usize = 40;

/// Minimizes `h^d uᵀMu / ‖u‖²_{L_p}` over functions on the operator's domain.
///
/// Each step moves along the negative gradient preconditioned by `M⁻¹`
/// (applied through the stored eigenbasis): with `u` normalized,
/// `u ← u − τ (u − R·M⁻¹(|u|^{p−2}u))`. The full step `τ = 1` is the
/// classical inverse-iteration fixed point, and for `p = 2` the scheme is
/// exactly inverse power iteration. `τ` is halved until the quotient does not
/// increase, so the history is nonincreasing. Iteration stops once the
/// relative decrease falls below `tol`; hitting `max_iter` first is reported
/// through `converged = false`.
pub fn minimize_quotient<T: Real>(
    operator: &SymOperator<T>,
    p: T,
    seed: &[T],
    max_iter: usize,
    tol: T,
) -> Result<QuotientResult<T>> {
    if !(p >= T::lit(2.0)) || !p.is_finite() {
        return Err(invalid("p", format!("need finite p ≥ 2, got {p}")));
    }
    let domain = operator.domain();
    if seed.len() != domain.len() {
        return Err(Error::DimensionMismatch {
            expected: domain.len(),
            actual: seed.len(),
        });
    }
    let eigen = operator.eigen();
    if !(eigen.min_eigenvalue() > T::zero()) {
        return Err(Error::NotPositiveDefinite {
            pivot: 0,
            value: eigen.min_eigenvalue().to_f64_lossy(),
        });
    }
    let vol = domain.grid().cell_volume();
    let normalize = |u: Vec<T>| -> Result<Vec<T>> {
        let norm = lp_norm_weighted(&u, p, vol)?;
        if norm == T::zero() || !norm.is_finite() {
            return Err(Error::Domain("iterate vanished during minimization".into()));
        }
        Ok(u.into_iter().map(|v| v / norm).collect())
    };
    // u normalized, so the quotient is just the form
    let value_of = |u: &[T]| operator.form(u);

    let mut u = normalize(seed.to_vec())?;
    let mut value = value_of(&u)?;
    let mut history = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    let pm2 = p - T::lit(2.0);
    while iterations < max_iter {
        iterations += 1;
        let nonlinear: Vec<T> = u
            .iter()
            .map(|v| {
                if pm2 == T::zero() {
                    *v
                } else {
                    v.abs().powf(pm2) * *v
                }
            })
            .collect();
        let coeffs = eigen.coefficients(&nonlinear)?;
        let scaled: Vec<T> = coeffs
            .iter()
            .zip(eigen.eigenvalues())
            .map(|(c, l)| *c / *l)
            .collect();
        let inverse = eigen.synthesize(&scaled)?;
        let direction: Vec<T> = u
            .iter()
            .zip(&inverse)
            .map(|(a, b)| *a - value * *b)
            .collect();

        let mut tau = T::one();
        let mut accepted = None;
        for _ in 0..MAX_STEP_HALVINGS {
            let trial: Vec<T> = u
                .iter()
                .zip(&direction)
                .map(|(a, d)| *a - tau * *d)
                .collect();
            if let Ok(trial) = normalize(trial) {
                let v = value_of(&trial)?;
                if v <= value {
                    accepted = Some((trial, v));
                    break;
                }
            }
            tau = tau / T::lit(2.0);
        }
        let Some((next, next_value)) = accepted else {
            // no descent at any step size: stationary to working precision
            converged = true;
            break;
        };
        let decrease = (value - next_value) / value.abs();
        u = next;
        value = next_value;
        history.push(value);
        if decrease < tol {
            converged = true;
            break;
        }
    }
    log::debug!("minimize_quotient: {iterations} iterations, value {value}");
    Ok(QuotientResult {
        value,
        minimizer: domain.extend_by_zero(&u)?,
        iterations,
        converged,
        history,
    })
}

/// One row of a dilation sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    pub alpha: T,
    /// Navier form of `u` on `αΩ`.
    pub navier: T,
    /// Dirichlet form of `u` on the common outer box.
    pub dirichlet: T,
    pub ratio: T,
}

/// Navier forms of a fixed `u` on the dilated domains `αΩ` against its
/// Dirichlet form.
///
/// All `αΩ` share the step of Ω and contain it (the shape must be star-shaped
/// about the origin). The Dirichlet form is evaluated on one outer box whose
/// half-width is `box_factor` times that of the grid holding the largest
/// `αΩ`, so the Navier column is nonincreasing and every ratio is at least 1
/// up to roundoff.
pub fn dilation_sweep<T: Real>(
    u: &[T],
    omega: &SubDomain<T>,
    s: T,
    alphas: &[T],
    box_factor: T,
) -> Result<Vec<SweepRow<T>>> {
    if alphas.is_empty() {
        return Err(invalid("alpha", "empty dilation list"));
    }
    if alphas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid(
            "alpha",
            "dilation factors must be strictly increasing",
        ));
    }
    if !(box_factor >= T::one()) {
        return Err(invalid(
            "box_factor",
            format!("must be ≥ 1, got {box_factor}"),
        ));
    }
    if u.len() != omega.len() {
        return Err(Error::DimensionMismatch {
            expected: omega.len(),
            actual: u.len(),
        });
    }
    let base = omega.extend_by_zero(u)?;
    let dilated: Vec<SubDomain<T>> = alphas
        .iter()
        .map(|&a| omega.dilate(a))
        .collect::<Result<_>>()?;

    let largest = dilated.last().expect("nonempty").grid();
    let h = largest.step();
    let target = box_factor * largest.halfwidth();
    let extra = ((target - largest.halfwidth()) / h)
        .ceil()
        .max(T::zero())
        .to_usize()
        .unwrap_or(usize::MAX);
    let outer = largest.grown_by(extra);
    let dirichlet = dirichlet_form(omega, &outer, s, u)?;
    if !(dirichlet > T::zero()) {
        return Err(Error::Domain("Dirichlet form of u vanishes".into()));
    }

    let mut rows = Vec::with_capacity(alphas.len());
    for (&alpha, domain) in alphas.iter().zip(&dilated) {
        let lifted = base.transfer_to(domain.grid())?;
        if let Some((index, value)) = lifted.support_violation(domain) {
            return Err(Error::SupportViolation {
                index,
                value: value.to_f64_lossy(),
            });
        }
        let restricted = domain.restrict(&lifted)?;
        let navier = domain.grid().cell_volume()
            * assemble_laplacian(domain)?
                .eigen()
                .spectral_form(s, &restricted)?;
        rows.push(SweepRow {
            alpha,
            navier,
            dirichlet,
            ratio: navier / dirichlet,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Shape;
    use crate::operators::{fourier_form, navier_operator};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gamma_reference_values() {
        let cases = [
            (0.25, 3.625_609_908_221_908_3),
            (0.75, 1.225_416_702_465_177_6),
            (1.25, 0.906_402_477_055_477_1),
            (1.0 / 3.0, 2.678_938_534_707_747_6),
            (5.5, 52.342_777_784_553_52),
            (0.1, 9.513_507_698_668_732),
            (30.0, 8.841_761_993_739_702e30),
        ];
        for (x, want) in cases {
            assert_relative_eq!(gamma::<f64>(x).unwrap(), want, max_relative = 1e-12);
        }
        assert_relative_eq!(gamma::<f64>(1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma::<f64>(0.5).unwrap(), PI.sqrt(), max_relative = 1e-14);
        assert!(gamma::<f64>(0.0).is_err());
        assert!(gamma::<f64>(-1.5).is_err());
    }

    #[test]
    fn gamma_recurrence() {
        let mut x = 0.5;
        while x <= 20.0 {
            let lhs = gamma::<f64>(x + 1.0).unwrap();
            let rhs: f64 = x * gamma::<f64>(x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs(), "x = {x}");
            x += 0.0625;
        }
        // Γ(5.5) from Γ(0.5) by five steps
        let mut g = gamma::<f64>(0.5).unwrap();
        for k in 0..5 {
            g *= 0.5 + k as f64;
        }
        assert_relative_eq!(gamma::<f64>(5.5).unwrap(), g, max_relative = 1e-12);
    }

    #[test]
    fn extension_constant_values() {
        assert!((extension_constant::<f64>(0.5).unwrap() - 1.0).abs() < 1e-12);
        assert_relative_eq!(
            extension_constant::<f64>(0.25).unwrap(),
            1.046_049_620_053_101_6,
            max_relative = 1e-12
        );
        let e3 = (extension_constant::<f64>(0.501).unwrap() - 1.0).abs();
        let e4 = (extension_constant::<f64>(0.5001).unwrap() - 1.0).abs();
        assert!(e4 < e3 && e3 < 1e-2);
        assert!(extension_constant::<f64>(0.0).is_err());
        assert!(extension_constant::<f64>(1.0).is_err());
    }

    #[test]
    fn sobolev_closed_form_values() {
        let cases = [
            (1, 0.25, 0.847_213_084_793_979_1),
            (2, 0.5, 1.772_453_850_905_516),
            (1, 0.4, 0.488_686_177_723_572_6),
            (2, 0.75, 1.691_887_110_690_963_8),
        ];
        for (n, s, want) in cases {
            assert_relative_eq!(
                sobolev_constant_closed_form::<f64>(n, s).unwrap(),
                want,
                max_relative = 1e-12
            );
        }
        assert!(sobolev_constant_closed_form::<f64>(1, 0.5).is_err());
        let setup = SobolevSetup::new(1, 0.25).unwrap();
        assert_eq!(setup.critical_exponent(), 4.0);
    }

    #[test]
    fn extremal_samples() {
        let g = BoxGrid::new(1, 4.0, 7).unwrap();
        let u = extremal_function::<f64>(&g, 0.25).unwrap();
        // nodes at −3..=3
        assert_eq!(u.values()[3], 1.0);
        assert_relative_eq!(u.values()[6], 0.562_341_325_190_349_1, max_relative = 1e-14);
        assert_eq!(u.values()[0], u.values()[6]);
        let g2 = BoxGrid::new(2, 1.0, 5).unwrap();
        let u2 = extremal_function::<f64>(&g2, 0.5).unwrap();
        assert_eq!(u2.values()[12], 1.0);
        assert!(extremal_function::<f64>(&g, 0.5).is_err());
    }

    #[test]
    fn lp_norms() {
        let g = BoxGrid::new(1, 1.0, 7).unwrap();
        let ones = GridFunction::new(g, vec![1.0; 7]).unwrap();
        assert_relative_eq!(lp_norm::<f64>(&ones, 2.0).unwrap(), (7.0 * g.step()).sqrt());
        assert_eq!(lp_norm::<f64>(&GridFunction::zeros(g), 3.0).unwrap(), 0.0);
        assert!(lp_norm::<f64>(&ones, 0.5).is_err());

        let big = BoxGrid::new(1, 40.0, 2047).unwrap();
        let u = extremal_function::<f64>(&big, 0.25).unwrap();
        let n4 = lp_norm::<f64>(&u, 4.0).unwrap().powi(4);
        assert!((n4 - PI).abs() / PI < 0.02, "{n4}");
    }

    #[test]
    fn quotient_is_scale_invariant() {
        let g = BoxGrid::new(1, 1.0, 5).unwrap();
        let u = GridFunction::new(g, vec![1.0, 2.0, 0.5, -1.0, 3.0]).unwrap();
        let v = GridFunction::new(g, u.values().iter().map(|x| -2.5 * x).collect()).unwrap();
        let q = rayleigh_quotient(2.0, &u, 3.0).unwrap();
        let q2 = rayleigh_quotient(2.0 * 6.25, &v, 3.0).unwrap();
        assert_relative_eq!(q, q2, max_relative = 1e-14);
        assert!(rayleigh_quotient(1.0, &GridFunction::zeros(g), 2.0).is_err());
    }

    #[test]
    fn extremal_quotient_near_closed_form() {
        let s = 0.25;
        let exact = sobolev_constant_closed_form::<f64>(1, s).unwrap();
        let gap = |l: f64, n: usize| {
            let g = BoxGrid::new(1, l, n).unwrap();
            let omega = SubDomain::full(g);
            let bx = g.grown_by(n.div_ceil(2));
            let u = extremal_function::<f64>(&g, s).unwrap();
            let q = fourier_form(&u, &omega, &bx, s).unwrap();
            (rayleigh_quotient(q, &u, 4.0).unwrap() - exact).abs() / exact
        };
        let (g40, g80) = (gap(40.0, 2047), gap(80.0, 4095));
        assert!(g40 < 0.1, "{g40}");
        assert!(g80 < g40);
    }

    #[test]
    fn quadratic_exponent_recovers_lowest_eigenvalue() {
        let g = BoxGrid::new(1, 1.0, 15).unwrap();
        let omega = SubDomain::full(g);
        let op = navier_operator(&omega, 0.5).unwrap();
        let seed: Vec<f64> = (0..15).map(|i| 1.0 + 0.1 * i as f64).collect();
        let res = minimize_quotient(&op, 2.0, &seed, 500, 1e-14).unwrap();
        assert!(res.converged);
        // ‖u‖₂ includes h, as does the form
        assert_relative_eq!(res.value, op.min_eigenvalue(), max_relative = 1e-10);
        assert!(res.history.windows(2).all(|w| w[1] <= w[0]));

        let again = domain_values(&res.minimizer, &omega);
        let res2 = minimize_quotient(&op, 2.0, &again, 500, 1e-12).unwrap();
        assert!(res2.converged && res2.iterations <= 1);
    }

    fn domain_values(u: &GridFunction<f64>, d: &SubDomain<f64>) -> Vec<f64> {
        d.restrict(u).unwrap()
    }

    #[test]
    fn critical_exponent_minimization_decreases_with_dilation() {
        let s = 0.25;
        let g = BoxGrid::new(1, 1.0, 15).unwrap();
        let omega = SubDomain::from_shape(g, Shape::Interval { a: -1.0, b: 1.0 }).unwrap();
        let p = SobolevSetup::new(1, s).unwrap().critical_exponent();
        let mut prev = f64::INFINITY;
        for alpha in [1.0, 2.0, 4.0] {
            let d = omega.dilate(alpha).unwrap();
            let op = navier_operator(&d, s).unwrap();
            let res = minimize_quotient(&op, p, &vec![1.0; d.len()], 300, 1e-10).unwrap();
            assert!(res.converged);
            assert!(res.history.windows(2).all(|w| w[1] <= w[0]));
            assert!(res.value < prev);
            assert!(res.value > sobolev_constant_closed_form::<f64>(1, s).unwrap());
            prev = res.value;
        }
    }

    #[test]
    fn sweep_ratios() {
        let g = BoxGrid::new(1, 1.0, 15).unwrap();
        let omega = SubDomain::from_shape(g, Shape::Interval { a: -0.5, b: 0.5 }).unwrap();
        let ground: Vec<f64> = assemble_laplacian(&omega)
            .unwrap()
            .eigen()
            .eigenvector(0)
            .iter()
            .map(|v: &f64| v.abs())
            .collect();
        let rows = dilation_sweep(&ground, &omega, 0.5, &[1.0, 2.0, 4.0, 8.0, 16.0], 2.0).unwrap();
        assert!(rows.windows(2).all(|w| w[1].ratio < w[0].ratio));
        assert!(rows.iter().all(|r| r.ratio >= 1.0 - 1e-10));
        assert!(rows.last().unwrap().ratio <= 1.05, "{:?}", rows.last());

        let ones = dilation_sweep(&ground, &omega, 1.0, &[1.0, 2.0, 4.0], 2.0).unwrap();
        for r in ones {
            assert!((r.ratio - 1.0).abs() < 1e-10);
        }
        assert!(dilation_sweep(&ground, &omega, 0.5, &[2.0, 1.0], 2.0).is_err());
    }
}

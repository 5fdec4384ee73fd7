//! The six experiments behind the command-line subcommands.
//!
//! Random inputs are drawn up front from one ChaCha8 stream seeded by the
//! config, so parallel evaluation of the (s, sample, α) cells cannot change
//! the numbers; results are collected in cell order.

use std::time::Instant;

use fraclap::analysis::{
    dilation_sweep, extremal_function, lp_norm, minimize_quotient, rayleigh_quotient, SobolevSetup,
};
use fraclap::domain::{BoxGrid, SubDomain};
use fraclap::extension::{energy_identity_check, extension_ordering_check, ExtensionMesh, Variant};
use fraclap::operators::{
    assemble_laplacian, compare_spectra, difference_operator, fourier_form, monotonicity_check,
    navier_operator, positivity_check_with,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::report::{Assertion, Cell, ExperimentReport, Relation};

/// Largest operator the dense eigensolver is asked to handle.
pub const MAX_DENSE_NODES: usize = 1600;

/// Largest padded FFT grid, per axis, for the extremal quotient in 2D.
pub const MAX_FFT_NODES_2D: usize = 2048;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Library(#[from] fraclap::Error),
    #[error("resource limit: {0}")]
    Resource(String),
}

type Table = (Vec<String>, Vec<Vec<Cell>>, Vec<Assertion>);

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport, RunError> {
    let start = Instant::now();
    let (columns, rows, assertions) = match config.experiment {
        ExperimentKind::Spectra => spectra(config)?,
        ExperimentKind::Positivity => positivity(config)?,
        ExperimentKind::Monotonicity => monotonicity(config)?,
        ExperimentKind::Extension => extension(config)?,
        ExperimentKind::Sobolev => sobolev(config)?,
        ExperimentKind::Sweep => sweep(config)?,
    };
    let passed = assertions.iter().all(|a| a.passed);
    Ok(ExperimentReport {
        experiment: config.experiment,
        version: format!("fraclap {}", env!("CARGO_PKG_VERSION")),
        config: config.entries(),
        columns,
        rows,
        assertions,
        passed,
        wall_time: start.elapsed(),
    })
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn check_dense(what: &str, nodes: usize) -> Result<(), RunError> {
    if nodes > MAX_DENSE_NODES {
        return Err(RunError::Resource(format!(
            "{what} has {nodes} nodes, above the dense-eigensolver limit of {MAX_DENSE_NODES}; \
             reduce box.nodes, shrink the shape or lower the dilation factors"
        )));
    }
    Ok(())
}

/// `|φ₀|` of the domain's Laplacian, scaled to unit maximum.
fn ground_state(omega: &SubDomain<f64>) -> Result<Vec<f64>, RunError> {
    check_dense("the domain", omega.len())?;
    let lap = assemble_laplacian(omega)?;
    let v: Vec<f64> = lap.eigen().eigenvector(0).iter().map(|x| x.abs()).collect();
    let max = v.iter().copied().fold(0.0, f64::max);
    Ok(v.into_iter().map(|x| x / max).collect())
}

fn random_mask(
    rng: &mut ChaCha8Rng,
    grid: &BoxGrid<f64>,
    density: f64,
) -> Result<SubDomain<f64>, RunError> {
    let n = grid.node_count();
    let mut mask: Vec<bool> = (0..n).map(|_| rng.gen_bool(density)).collect();
    if !mask.iter().any(|b| *b) {
        mask[rng.gen_range(0..n)] = true;
    }
    Ok(SubDomain::from_mask(*grid, mask)?)
}

/// Nonnegative values with roughly a third of them exactly zero.
fn random_nonnegative(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut u: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(0.0..1.0)
            }
        })
        .collect();
    if u.iter().all(|x| *x == 0.0) {
        u[rng.gen_range(0..n)] = 1.0;
    }
    u
}

fn label(s: f64) -> String {
    format!("s={s}")
}

fn spectra(c: &ExperimentConfig) -> Result<Table, RunError> {
    let omega = c.domain();
    let grid = c.grid();
    check_dense("the domain", omega.len())?;
    let comparisons =
        c.s.par_iter()
            .map(|&s| compare_spectra(&omega, &grid, s))
            .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut assertions = Vec::new();
    for cmp in &comparisons {
        for (j, ((n, d), m)) in cmp.pairs().zip(&cmp.margins).enumerate() {
            rows.push(vec![
                cmp.s.into(),
                j.into(),
                n.into(),
                d.into(),
                (*m).into(),
            ]);
        }
        if cmp.s < 1.0 {
            assertions.push(Assertion::new(
                format!("{}: min margin", label(cmp.s)),
                cmp.min_margin(),
                Relation::Greater,
                c.tolerance.strict,
            ));
        } else {
            assertions.push(Assertion::new(
                format!("{}: max |margin|", label(cmp.s)),
                cmp.max_abs_margin(),
                Relation::AtMost,
                c.tolerance.zero,
            ));
        }
    }
    Ok((
        columns(&["s", "j", "lambda_N", "lambda_D", "margin"]),
        rows,
        assertions,
    ))
}

fn positivity(c: &ExperimentConfig) -> Result<Table, RunError> {
    let grid = c.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let fixed = c.domain();
    let mut cases = Vec::with_capacity(c.samples);
    for _ in 0..c.samples {
        let omega = match c.mask_density {
            Some(d) => random_mask(&mut rng, &grid, d)?,
            None => fixed.clone(),
        };
        check_dense("a sampled domain", omega.len())?;
        let u = random_nonnegative(&mut rng, omega.len());
        cases.push((omega, u));
    }

    let cells: Vec<(usize, usize)> = (0..c.s.len())
        .flat_map(|i| (0..c.samples).map(move |k| (i, k)))
        .collect();
    let results = if c.mask_density.is_none() {
        // one operator per exponent serves every sample
        let ops =
            c.s.par_iter()
                .map(|&s| difference_operator(&fixed, &grid, s))
                .collect::<Result<Vec<_>, _>>()?;
        cells
            .par_iter()
            .map(|&(i, k)| {
                let op = &ops[i];
                Ok((op.min_eigenvalue(), positivity_check_with(op, &cases[k].1)?))
            })
            .collect::<Result<Vec<_>, fraclap::Error>>()?
    } else {
        cells
            .par_iter()
            .map(|&(i, k)| {
                let op = difference_operator(&cases[k].0, &grid, c.s[i])?;
                Ok((
                    op.min_eigenvalue(),
                    positivity_check_with(&op, &cases[k].1)?,
                ))
            })
            .collect::<Result<Vec<_>, fraclap::Error>>()?
    };

    let mut rows = Vec::new();
    let mut worst = vec![(f64::INFINITY, f64::INFINITY); c.s.len()];
    for (&(i, k), (min_eig, check)) in cells.iter().zip(&results) {
        let omega = &cases[k].0;
        rows.push(vec![
            c.s[i].into(),
            k.into(),
            omega.len().into(),
            (omega.len() < grid.node_count()).into(),
            (*min_eig).into(),
            check.min_entry.into(),
            check.witness.into(),
        ]);
        worst[i].0 = worst[i].0.min(*min_eig);
        worst[i].1 = worst[i].1.min(check.min_entry);
    }
    let mut assertions = Vec::new();
    for (&s, &(eig, entry)) in c.s.iter().zip(&worst) {
        assertions.push(Assertion::new(
            format!("{}: min eigenvalue of difference", label(s)),
            eig,
            Relation::AtLeast,
            -c.tolerance.zero,
        ));
        assertions.push(Assertion::new(
            format!("{}: min entry of difference applied to u >= 0", label(s)),
            entry,
            Relation::AtLeast,
            -c.tolerance.positivity,
        ));
    }
    Ok((
        columns(&[
            "s",
            "sample",
            "nodes",
            "proper",
            "min_eigenvalue",
            "min_entry",
            "witness",
        ]),
        rows,
        assertions,
    ))
}

fn monotonicity(c: &ExperimentConfig) -> Result<Table, RunError> {
    let grid = c.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let fixed = c.domain();
    let mut cases = Vec::with_capacity(c.samples);
    for _ in 0..c.samples {
        let outer = match c.mask_density {
            Some(d) => random_mask(&mut rng, &grid, d)?,
            None => fixed.clone(),
        };
        check_dense("a sampled domain", outer.len())?;
        let mut mask = vec![false; grid.node_count()];
        for &i in outer.indices() {
            mask[i] = rng.gen_bool(0.6);
        }
        if !mask.iter().any(|b| *b) {
            mask[outer.indices()[rng.gen_range(0..outer.len())]] = true;
        }
        let inner = SubDomain::from_mask(grid, mask)?;
        let u: Vec<f64> = (0..inner.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        cases.push((inner, outer, u));
    }
    let cells: Vec<(usize, usize)> = (0..c.samples)
        .flat_map(|k| (0..c.s.len()).map(move |i| (k, i)))
        .collect();
    let chains = cells
        .par_iter()
        .map(|&(k, i)| {
            let (inner, outer, u) = &cases[k];
            monotonicity_check(inner, outer, &grid, c.s[i], u)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut worst = vec![f64::NEG_INFINITY; c.s.len()];
    for (&(k, i), chain) in cells.iter().zip(&chains) {
        let (inner, outer, _) = &cases[k];
        let relative = chain.worst_violation() / chain.navier_inner.abs().max(f64::MIN_POSITIVE);
        worst[i] = worst[i].max(relative);
        rows.push(vec![
            k.into(),
            c.s[i].into(),
            inner.len().into(),
            outer.len().into(),
            chain.dirichlet.into(),
            chain.navier_outer.into(),
            chain.navier_inner.into(),
            relative.into(),
        ]);
    }
    let assertions =
        c.s.iter()
            .zip(&worst)
            .map(|(&s, &w)| {
                Assertion::new(
                    format!("{}: worst relative chain violation", label(s)),
                    w,
                    Relation::AtMost,
                    c.tolerance.monotone,
                )
            })
            .collect();
    Ok((
        columns(&[
            "sample",
            "s",
            "inner_nodes",
            "outer_nodes",
            "Q_D",
            "Q_N_outer",
            "Q_N_inner",
            "relative_violation",
        ]),
        rows,
        assertions,
    ))
}

fn extension(c: &ExperimentConfig) -> Result<Table, RunError> {
    let omega = c.domain();
    check_dense("the domain", omega.len())?;
    let u = ground_state(&omega)?;
    let diameter = 2.0 * c.shape().extent();
    let results =
        c.s.par_iter()
            .map(|&s| -> Result<_, RunError> {
                let height = c
                    .extension
                    .height
                    .unwrap_or_else(|| ExtensionMesh::default_height(diameter));
                let gamma = c
                    .extension
                    .gamma
                    .unwrap_or_else(|| ExtensionMesh::default_gamma(s));
                let mesh = ExtensionMesh::graded(height, c.extension.layers, gamma)?;
                let navier = energy_identity_check(&omega, &u, Variant::Navier, s, &mesh)?;
                let dirichlet = energy_identity_check(&omega, &u, Variant::Dirichlet, s, &mesh)?;
                let ordering = extension_ordering_check(&omega, &u, s, &mesh)?;
                Ok((s, height, gamma, navier, dirichlet, ordering))
            })
            .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut assertions = Vec::new();
    let t = &c.tolerance;
    for (s, height, gamma, n, d, o) in results {
        rows.push(vec![
            s.into(),
            c.extension.layers.into(),
            height.into(),
            gamma.into(),
            n.form.into(),
            n.scaled_energy.into(),
            n.relative_gap.into(),
            d.form.into(),
            d.scaled_energy.into(),
            d.relative_gap.into(),
            o.min_difference.into(),
            o.min_interior.into(),
            o.relative_l2_gap.into(),
        ]);
        let l = label(s);
        assertions.push(Assertion::new(
            format!("{l}: Navier energy gap"),
            n.relative_gap,
            Relation::AtMost,
            t.energy,
        ));
        assertions.push(Assertion::new(
            format!("{l}: Dirichlet energy gap"),
            d.relative_gap,
            Relation::AtMost,
            t.energy,
        ));
        assertions.push(Assertion::new(
            format!("{l}: min W"),
            o.min_difference,
            Relation::AtLeast,
            -t.ordering,
        ));
        assertions.push(Assertion::new(
            format!("{l}: min interior W"),
            o.min_interior,
            Relation::Greater,
            0.0,
        ));
        assertions.push(Assertion::new(
            format!("{l}: difference trace gap"),
            o.relative_l2_gap,
            Relation::AtMost,
            t.trace,
        ));
    }
    Ok((
        columns(&[
            "s",
            "layers",
            "height",
            "gamma",
            "Q_N",
            "scaled_energy_N",
            "gap_N",
            "Q_D",
            "scaled_energy_D",
            "gap_D",
            "min_W",
            "min_W_interior",
            "trace_gap",
        ]),
        rows,
        assertions,
    ))
}

fn sobolev(c: &ExperimentConfig) -> Result<Table, RunError> {
    let omega = c.domain();
    let mut rows = Vec::new();
    let mut assertions = Vec::new();
    let t = &c.tolerance;
    for &s in &c.s {
        let setup = SobolevSetup::new(c.dim, s)?;
        let p = setup.critical_exponent();
        let exact = setup.closed_form_constant();
        let l = label(s);

        let grid = BoxGrid::new(c.dim, c.sobolev.halfwidth, c.sobolev.nodes)?;
        let h = grid.step();
        let extra = (((c.box_factor - 1.0) * grid.halfwidth()) / h).ceil() as usize;
        let padded = grid.grown_by(extra);
        if c.dim == 2 && padded.nodes_per_axis() > MAX_FFT_NODES_2D {
            return Err(RunError::Resource(format!(
                "padded 2D grid needs {} nodes per axis, above {MAX_FFT_NODES_2D}; \
                 lower sobolev.nodes or box.factor",
                padded.nodes_per_axis()
            )));
        }
        let u = extremal_function(&grid, s)?;
        let form = fourier_form(&u, &SubDomain::full(grid), &padded, s)?;
        let q = rayleigh_quotient(form, &u, p)?;
        let gap = (q - exact).abs() / exact;
        log::info!("{l}: extremal quotient {q} (L_p norm {})", lp_norm(&u, p)?);
        rows.push(vec![
            s.into(),
            "extremal".into(),
            Cell::Empty,
            q.into(),
            exact.into(),
            gap.into(),
            Cell::Empty,
            Cell::Empty,
        ]);
        assertions.push(Assertion::new(
            format!("{l}: extremal quotient gap"),
            gap,
            Relation::AtMost,
            t.sobolev,
        ));

        let domains = c
            .alpha
            .iter()
            .map(|&a| {
                let d = omega.dilate(a)?;
                check_dense("a dilated domain", d.len())?;
                Ok(d)
            })
            .collect::<Result<Vec<_>, RunError>>()?;
        let minima = domains
            .par_iter()
            .map(|d| {
                let op = navier_operator(d, s)?;
                minimize_quotient(
                    &op,
                    p,
                    &vec![1.0; d.len()],
                    c.minimize.max_iter,
                    c.minimize.tol,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (&a, m) in c.alpha.iter().zip(&minima) {
            rows.push(vec![
                s.into(),
                "minimized".into(),
                a.into(),
                m.value.into(),
                exact.into(),
                ((m.value - exact).abs() / exact).into(),
                m.iterations.into(),
                m.converged.into(),
            ]);
        }
        let rise = minima
            .windows(2)
            .map(|w| w[1].value - w[0].value)
            .fold(f64::NEG_INFINITY, f64::max);
        if minima.len() > 1 {
            assertions.push(Assertion::new(
                format!("{l}: largest increase of minimum along dilations"),
                rise,
                Relation::AtMost,
                t.zero * minima[0].value,
            ));
        }
        let last = minima.last().expect("alpha list is nonempty");
        assertions.push(Assertion::new(
            format!("{l}: largest-dilation minimum gap"),
            (last.value - exact).abs() / exact,
            Relation::AtMost,
            t.navier_constant,
        ));
    }
    Ok((
        columns(&[
            "s",
            "method",
            "alpha",
            "value",
            "closed_form",
            "relative_gap",
            "iterations",
            "converged",
        ]),
        rows,
        assertions,
    ))
}

fn sweep(c: &ExperimentConfig) -> Result<Table, RunError> {
    let omega = c.domain();
    let u = ground_state(&omega)?;
    let largest = omega.dilate(*c.alpha.last().expect("alpha list is nonempty"))?;
    check_dense("the largest dilated domain", largest.len())?;
    let sweeps =
        c.s.par_iter()
            .map(|&s| dilation_sweep(&u, &omega, s, &c.alpha, c.box_factor))
            .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut assertions = Vec::new();
    let t = &c.tolerance;
    for (&s, table) in c.s.iter().zip(&sweeps) {
        for r in table {
            rows.push(vec![
                s.into(),
                r.alpha.into(),
                r.navier.into(),
                r.dirichlet.into(),
                r.ratio.into(),
            ]);
        }
        let l = label(s);
        let ratios: Vec<f64> = table.iter().map(|r| r.ratio).collect();
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let last = *ratios.last().expect("nonempty sweep");
        if s < 1.0 {
            assertions.push(Assertion::new(
                format!("{l}: min ratio"),
                min,
                Relation::AtLeast,
                1.0 - t.zero,
            ));
            if ratios.len() > 1 {
                let rise = ratios
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(f64::NEG_INFINITY, f64::max);
                assertions.push(Assertion::new(
                    format!("{l}: largest ratio step"),
                    rise,
                    Relation::Less,
                    0.0,
                ));
            }
            assertions.push(Assertion::new(
                format!("{l}: final ratio"),
                last,
                Relation::AtMost,
                t.ratio,
            ));
        } else {
            let dev = ratios.iter().fold(0.0f64, |m, r| m.max((r - 1.0).abs()));
            assertions.push(Assertion::new(
                format!("{l}: max |ratio - 1|"),
                dev,
                Relation::AtMost,
                t.zero,
            ));
        }
    }
    Ok((
        columns(&["s", "alpha", "Q_N", "Q_D", "ratio"]),
        rows,
        assertions,
    ))
}

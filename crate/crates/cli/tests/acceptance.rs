//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! shown.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fraclap::analysis::{
    dilation_sweep, extension_constant, extremal_function, gamma, minimize_quotient,
    rayleigh_quotient, sobolev_constant_closed_form, SobolevSetup,
};
use fraclap::domain::{BoxGrid, Shape, SubDomain};
use fraclap::extension::{energy_identity_check, extension_ordering_check, ExtensionMesh, Variant};
use fraclap::operators::{
    assemble_laplacian, compare_spectra, difference_operator, fourier_form, monotonicity_check,
    navier_operator, positivity_check_with,
};
use fraclap_cli::{parse_config, run, write_report, Format};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: fraclap::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Interior run of `inner` nodes centered in a box of `nodes` per axis
/// (half-width 1).
fn centered_block(dim: usize, nodes: usize, inner: usize) -> (BoxGrid<f64>, SubDomain<f64>) {
    let grid = BoxGrid::new(dim, 1.0, nodes).unwrap();
    let start = (nodes - inner) / 2;
    let inside = |i: usize| i >= start && i < start + inner;
    let mask = (0..grid.node_count())
        .map(|idx| {
            let [i, j] = grid.axes(idx);
            inside(i) && (dim == 1 || inside(j))
        })
        .collect();
    (grid, SubDomain::from_mask(grid, mask).unwrap())
}

fn ground_state(omega: &SubDomain<f64>) -> Vec<f64> {
    let lap = assemble_laplacian(omega).unwrap();
    lap.eigen().eigenvector(0).iter().map(|x| x.abs()).collect()
}

// Largest connected component of a mask, as a node count.
fn largest_component(grid: &BoxGrid<f64>, mask: &[bool]) -> usize {
    let n = grid.nodes_per_axis();
    let mut seen = vec![false; mask.len()];
    let mut best = 0;
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut size = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(idx) = queue.pop_front() {
            size += 1;
            let [i, j] = grid.axes(idx);
            let mut nbrs = Vec::new();
            if i > 0 {
                nbrs.push([i - 1, j]);
            }
            if i + 1 < n {
                nbrs.push([i + 1, j]);
            }
            if grid.dim() == 2 {
                if j > 0 {
                    nbrs.push([i, j - 1]);
                }
                if j + 1 < n {
                    nbrs.push([i, j + 1]);
                }
            }
            for a in nbrs {
                let k = grid.flat_index(a);
                if mask[k] && !seen[k] {
                    seen[k] = true;
                    queue.push_back(k);
                }
            }
        }
        best = best.max(size);
    }
    best
}

fn random_mask(rng: &mut ChaCha8Rng, grid: &BoxGrid<f64>, p: f64) -> Vec<bool> {
    loop {
        let m: Vec<bool> = (0..grid.node_count()).map(|_| rng.gen_bool(p)).collect();
        if m.iter().any(|b| *b) && !m.iter().all(|b| *b) {
            return m;
        }
    }
}

const S_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const QUARTERS: [f64; 3] = [0.25, 0.5, 0.75];

fn eigenvalue_domination() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut worst_one = 0.0f64;
    for (dim, nodes, inner) in [(1, 128, 16), (2, 32, 8)] {
        let (grid, omega) = centered_block(dim, nodes, inner);
        for s in S_GRID {
            let cmp = lib(compare_spectra(&omega, &grid, s))?;
            ensure(cmp.len() == omega.len(), || "spectrum length".into())?;
            let m = cmp.min_margin();
            ensure(m > 1e-9, || format!("dim {dim}, s = {s}: min margin {m:e}"))?;
            worst = worst.min(m);
        }
        let one = lib(compare_spectra(&omega, &grid, 1.0))?.max_abs_margin();
        ensure(one <= 1e-10, || {
            format!("dim {dim}, s = 1: max |margin| {one:e}")
        })?;
        worst_one = worst_one.max(one);
    }
    Ok(format!(
        "min margin {worst:.3e} for s < 1; max |margin| {worst_one:.1e} at s = 1"
    ))
}

fn form_domination() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut worst = f64::INFINITY;
    let mut weakest_strict = f64::INFINITY;
    let mut checked = 0;
    for (dim, nodes) in [(1usize, 64usize), (2, 12)] {
        let grid = BoxGrid::new(dim, 1.0, nodes).unwrap();
        // unrestricted masks: semidefiniteness up to roundoff
        for _ in 0..50 {
            let p = rng.gen_range(0.3..0.9);
            let d = lib(SubDomain::from_mask(grid, random_mask(&mut rng, &grid, p)))?;
            for s in QUARTERS {
                let e = lib(difference_operator(&d, &grid, s))?.min_eigenvalue();
                ensure(e >= -1e-10, || {
                    format!("dim {dim}, s = {s}, {} nodes: {e:e}", d.len())
                })?;
                worst = worst.min(e);
                checked += 1;
            }
        }
        // proper masks whose components stay small enough for the
        // smallest eigenvalue to sit above roundoff
        let mut accepted = 0;
        while accepted < 50 {
            let p = rng.gen_range(0.1..0.3);
            let mask = random_mask(&mut rng, &grid, p);
            if largest_component(&grid, &mask) > 6 {
                continue;
            }
            accepted += 1;
            let d = lib(SubDomain::from_mask(grid, mask))?;
            for s in QUARTERS {
                let e = lib(difference_operator(&d, &grid, s))?.min_eigenvalue();
                ensure(e > 1e-9, || {
                    format!("proper mask, dim {dim}, s = {s}: {e:e}")
                })?;
                weakest_strict = weakest_strict.min(e);
                checked += 1;
            }
        }
    }
    Ok(format!(
        "{checked} operators; min eigenvalue {worst:.2e} overall, {weakest_strict:.2e} on small-component masks"
    ))
}

fn positivity_preservation() -> Outcome {
    let (grid, omega) = centered_block(1, 128, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut worst = f64::INFINITY;
    let mut findings = Vec::new();
    for s in QUARTERS {
        let diff = lib(difference_operator(&omega, &grid, s))?;
        let mut inputs: Vec<Vec<f64>> = (0..100)
            .map(|_| {
                (0..omega.len())
                    .map(|_| {
                        if rng.gen_bool(0.3) {
                            0.0
                        } else {
                            rng.gen_range(0.0..1.0)
                        }
                    })
                    .collect()
            })
            .collect();
        // unit vectors make the check entrywise on the matrix itself
        for i in 0..omega.len() {
            let mut e = vec![0.0; omega.len()];
            e[i] = 1.0;
            inputs.push(e);
        }
        for u in &inputs {
            let c = lib(positivity_check_with(&diff, u))?;
            if c.min_entry < 0.0 {
                findings.push(format!(
                    "s = {s}: entry {:e} at node {}",
                    c.min_entry, c.witness
                ));
            }
            worst = worst.min(c.min_entry);
        }
    }
    for f in &findings {
        println!("  finding: negative entry {f}");
    }
    ensure(worst >= -1e-8, || format!("min entry {worst:e}"))?;
    Ok(format!(
        "min entry {worst:.3e} over 3×(100 random + 16 unit) inputs, {} negative",
        findings.len()
    ))
}

fn monotonicity_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut worst = f64::NEG_INFINITY;
    let mut pairs = 0;
    for (dim, nodes) in [(1usize, 48usize), (2, 10)] {
        let grid = BoxGrid::new(dim, 1.0, nodes).unwrap();
        for _ in 0..50 {
            let density = rng.gen_range(0.4..0.9);
            let outer_mask = random_mask(&mut rng, &grid, density);
            let mut inner_mask: Vec<bool> =
                outer_mask.iter().map(|&b| b && rng.gen_bool(0.6)).collect();
            if !inner_mask.iter().any(|b| *b) {
                let first = outer_mask.iter().position(|b| *b).unwrap();
                inner_mask[first] = true;
            }
            let outer = lib(SubDomain::from_mask(grid, outer_mask))?;
            let inner = lib(SubDomain::from_mask(grid, inner_mask))?;
            let u: Vec<f64> = (0..inner.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s = QUARTERS[rng.gen_range(0..3)];
            let chain = lib(monotonicity_check(&inner, &outer, &grid, s, &u))?;
            let v = chain.worst_violation();
            ensure(v <= 1e-10, || {
                format!("dim {dim}, s = {s}: violation {v:e} in {chain:?}")
            })?;
            worst = worst.max(v);
            pairs += 1;
        }
    }
    Ok(format!(
        "{pairs} nested pairs; largest violation {worst:.3e}"
    ))
}

fn dilation_limit() -> Outcome {
    // nine nodes at step 1/16
    let grid = BoxGrid::new(1, 1.0, 31).unwrap();
    let omega = lib(SubDomain::from_shape(
        grid,
        Shape::Interval {
            a: -0.28125,
            b: 0.28125,
        },
    ))?;
    let u = ground_state(&omega);
    let rows = lib(dilation_sweep(
        &u,
        &omega,
        0.5,
        &[1.0, 2.0, 4.0, 8.0, 16.0],
        2.0,
    ))?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    ensure(ratios.windows(2).all(|w| w[1] < w[0]), || {
        format!("not strictly decreasing: {ratios:?}")
    })?;
    let last = *ratios.last().unwrap();
    ensure(last <= 1.05, || format!("final ratio {last}"))?;
    ensure(ratios.iter().all(|r| *r >= 1.0 - 1e-10), || {
        format!("ratio below 1: {ratios:?}")
    })?;
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    Ok(format!("ratios {}", shown.join(" > ")))
}

fn energy_identity() -> Outcome {
    // (−1/2, 1/2) with 127 nodes; cos(πx) is the centered sin(πx)
    let grid = BoxGrid::new(1, 0.5, 127).unwrap();
    let omega = SubDomain::full(grid);
    let u: Vec<f64> = (0..127).map(|i| (PI * grid.point(i)[0]).cos()).collect();
    let target = PI / 2.0;
    let check = |m: usize| {
        let mesh = ExtensionMesh::graded(8.0, m, 2.0).unwrap();
        energy_identity_check(&omega, &u, Variant::Navier, 0.5, &mesh)
    };
    let fine = lib(check(128))?;
    let coarse = lib(check(32))?;
    let q_err = (fine.form - target).abs() / target;
    let e_err = (fine.scaled_energy - target).abs() / target;
    ensure(q_err <= 0.03, || {
        format!("form {} off π/2 by {q_err:.3e}", fine.form)
    })?;
    ensure(e_err <= 0.03, || {
        format!(
            "scaled energy {} off π/2 by {e_err:.3e}",
            fine.scaled_energy
        )
    })?;
    let factor = coarse.relative_gap / fine.relative_gap;
    ensure(factor >= 1.5, || {
        format!(
            "gap {:.3e} at M=32 vs {:.3e} at M=128",
            coarse.relative_gap, fine.relative_gap
        )
    })?;
    Ok(format!(
        "Q = {:.6}, (C_s/2s)E = {:.6}; gap {:.2e} (M=32) -> {:.2e} (M=128), factor {factor:.1}",
        fine.form, fine.scaled_energy, coarse.relative_gap, fine.relative_gap
    ))
}

fn extension_ordering() -> Outcome {
    let grid = BoxGrid::new(1, 1.0, 47).unwrap();
    let omega = lib(SubDomain::from_shape(
        grid,
        Shape::Interval { a: -0.5, b: 0.5 },
    ))?;
    let u = ground_state(&omega);
    let mut detail = Vec::new();
    for s in QUARTERS {
        let mesh = lib(ExtensionMesh::graded(
            8.0,
            64,
            ExtensionMesh::default_gamma(s),
        ))?;
        let o = lib(extension_ordering_check(&omega, &u, s, &mesh))?;
        ensure(o.min_difference >= -1e-8, || {
            format!("s = {s}: min W {:e}", o.min_difference)
        })?;
        ensure(o.min_interior > 0.0, || {
            format!("s = {s}: interior min W {:e}", o.min_interior)
        })?;
        detail.push(format!("s={s}: min interior W {:.2e}", o.min_interior));
    }
    Ok(detail.join(", "))
}

fn sobolev_constant() -> Outcome {
    let s = 0.25;
    let exact = lib::<f64>(sobolev_constant_closed_form(1, s))?;
    ensure((exact - 0.847_213_084_793_979).abs() < 1e-12, || {
        format!("closed form {exact}")
    })?;
    let p = lib(SobolevSetup::new(1, s))?.critical_exponent();
    let gap = |l: f64, n: usize| -> Result<(f64, f64), String> {
        let g = BoxGrid::new(1, l, n).unwrap();
        let padded = g.grown_by(n.div_ceil(2));
        let u = lib(extremal_function(&g, s))?;
        let q = lib(fourier_form(&u, &SubDomain::full(g), &padded, s))?;
        let r = lib(rayleigh_quotient(q, &u, p))?;
        Ok((r, (r - exact).abs() / exact))
    };
    let (q40, g40) = gap(40.0, 2047)?;
    let (_, g80) = gap(80.0, 4095)?;
    ensure(g40 <= 0.10, || format!("quotient {q40} off by {g40:.3e}"))?;
    ensure(g80 < g40, || {
        format!("gap did not shrink: {g40:.3e} -> {g80:.3e}")
    })?;
    Ok(format!(
        "S = {exact:.6}; quotient of U {q40:.5}, gap {g40:.2e} (L=40) -> {g80:.2e} (L=80)"
    ))
}

fn navier_constant() -> Outcome {
    let s = 0.25;
    let exact = lib::<f64>(sobolev_constant_closed_form(1, s))?;
    let p = lib(SobolevSetup::new(1, s))?.critical_exponent();
    let grid = BoxGrid::new(1, 1.0, 31).unwrap();
    let omega = lib(SubDomain::from_shape(
        grid,
        Shape::Interval { a: -1.0, b: 1.0 },
    ))?;
    let mut values = Vec::new();
    for alpha in [1.0, 2.0, 4.0, 8.0] {
        let d = lib(omega.dilate(alpha))?;
        let op = lib(navier_operator(&d, s))?;
        let r = lib(minimize_quotient(&op, p, &vec![1.0; d.len()], 500, 1e-10))?;
        ensure(r.history.windows(2).all(|w| w[1] <= w[0]), || {
            format!("α = {alpha}: history increased")
        })?;
        values.push(r.value);
    }
    ensure(values.windows(2).all(|w| w[1] <= w[0]), || {
        format!("not nonincreasing: {values:?}")
    })?;
    let gap = (values[3] - exact).abs() / exact;
    ensure(gap <= 0.15, || {
        format!("final value {} off by {gap:.3e}", values[3])
    })?;
    let shown: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
    Ok(format!(
        "minima {} vs S = {exact:.4} (gap {gap:.2e})",
        shown.join(" ≥ ")
    ))
}

fn infrastructure() -> Outcome {
    let mut x: f64 = 0.5;
    let mut worst = 0.0f64;
    while x <= 20.0 {
        let g: f64 = lib(gamma(x))?;
        let rel = (lib(gamma(x + 1.0))? - x * g).abs() / (x * g);
        worst = worst.max(rel);
        x += 1.0 / 64.0;
    }
    ensure(worst <= 1e-12, || {
        format!("gamma recurrence error {worst:e}")
    })?;
    let c = lib::<f64>(extension_constant(0.5))?;
    ensure((c - 1.0).abs() <= 1e-12, || format!("C_1/2 = {c}"))?;

    let config = parse_config(
        "experiment = \"positivity\"\nseed = 2024\nmask.density = 0.3\nbox.nodes = 48\nsamples = 10\n",
    )
    .map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let report = run(&config).map_err(|e| e.to_string())?;
        let mut bytes = Vec::new();
        for f in [Format::Csv, Format::Json] {
            let path = write_report(&report, dir.path(), f).map_err(|e| e.to_string())?;
            bytes.push(fs::read(path).map_err(|e| e.to_string())?);
        }
        files.push(bytes);
    }
    ensure(files[0] == files[1], || {
        "reports differ between identical runs".into()
    })?;
    Ok(format!(
        "gamma recurrence {worst:.1e}; |C_1/2 − 1| = {:.1e}; reruns byte-identical ({} + {} bytes)",
        (c - 1.0).abs(),
        files[0][0].len(),
        files[0][1].len()
    ))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "eigenvalue domination",
            Duration::from_secs(120),
            eigenvalue_domination,
        ),
        ("form domination", Duration::from_secs(300), form_domination),
        (
            "positivity preservation",
            Duration::from_secs(300),
            positivity_preservation,
        ),
        (
            "domain monotonicity chain",
            Duration::from_secs(300),
            monotonicity_chain,
        ),
        ("dilation limit", Duration::from_secs(300), dilation_limit),
        (
            "extension energy identity",
            Duration::from_secs(60),
            energy_identity,
        ),
        (
            "extension ordering",
            Duration::from_secs(300),
            extension_ordering,
        ),
        (
            "Sobolev constant",
            Duration::from_secs(180),
            sobolev_constant,
        ),
        (
            "Navier constant decrease",
            Duration::from_secs(300),
            navier_constant,
        ),
        ("infrastructure", Duration::from_secs(300), infrastructure),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *limit => {
                Err(format!("{detail}; took {elapsed:.1?}, limit {limit:?}"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

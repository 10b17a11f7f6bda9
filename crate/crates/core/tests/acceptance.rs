//! Acceptance criteria, one PASS/FAIL line each. Oracles are closed forms
//! written out here, not the library's own reports.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use cusplab::geometry::FuchsianSurface;
use cusplab::indicial::fiber::{
    perturbed_inverse_residual, sphere_fibered_inverse_check, CircleGrid,
};
use cusplab::indicial::{index_jump, indicial_family, residue_rank, ContourConfig, OperatorSpec};
use cusplab::lp::{
    band_limited_family, interaction_report, max_block, norm_equivalence_report, DyadicMultiplier,
    Profile,
};
use cusplab::mode0::{
    bump, cross_root_correction, fit_tail_rates, invert_on_line, line_residual, ModeZeroField,
    RGrid,
};
use cusplab::quad::composite_gauss;
use cusplab::spectral::angular_frequencies;
use cusplab::tensor::{
    dirichlet_sym_derivative, divergence, project_unchecked, solenoidal_project, sym_derivative,
    sym_laplacian, Boundary, SymTensorField, TensorGrid,
};
use cusplab::xray::{potential_annihilation_suite, xray_classes, BumpOneForm, GridOneForm, Metric};
use cusplab::{Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Least-squares slope of log err against log h.
fn slope(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = h.iter().zip(e).map(|(h, e)| (h.ln(), e.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { ok, detail })
}

fn c1() -> Result<Outcome> {
    let mut err: f64 = 0.0;
    let mut shape = true;
    for d in 1..=3usize {
        let df = d as f64;
        let roots = indicial_family(&OperatorSpec::sym_derivative(d))?.root_multiset()?;
        shape &= roots.len() == 1 && roots[0].multiplicity == d;
        err = err.max((roots[0].value - re(-1.0)).norm());
        let half = df / 2.0;
        let s = (df + df * df / 4.0).sqrt();
        let mut want = vec![-1.0, df + 1.0, half - s, half + s];
        want.sort_by(f64::total_cmp);
        let roots = indicial_family(&OperatorSpec::sym_laplacian(d))?.root_multiset()?;
        shape &= roots.len() == want.len();
        for (r, w) in roots.iter().zip(&want) {
            err = err.max((r.value - re(*w)).norm());
        }
    }
    for modes in [2, 3, 5] {
        let roots = indicial_family(&OperatorSpec::sasaki_gradient(modes))?.root_multiset()?;
        shape &= roots.len() == 1;
        err = err.max(roots[0].value.norm());
    }
    outcome(
        shape && err <= 1e-10,
        format!("max |root − target| = {err:.2e}"),
    )
}

fn c2() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for d in 1..=3usize {
        let dd = indicial_family(&OperatorSpec::sym_derivative(d))?;
        let div = indicial_family(&OperatorSpec::divergence(d))?;
        let lap = indicial_family(&OperatorSpec::sym_laplacian(d))?;
        for _ in 0..100 {
            let z = loop {
                let z = C64::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
                if z.norm() <= 10.0 {
                    break z;
                }
            };
            let l = lap.eval(z);
            let prod = div.eval(z) * dd.eval(z);
            worst = worst.max((prod - &l).norm() / l.norm());
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max ‖I(D*)I(D) − I(Δ)‖/‖I(Δ)‖ = {worst:.2e} over 300 λ"),
    )
}

fn c3() -> Result<Outcome> {
    let mut err: f64 = 0.0;
    let mut sum_err: f64 = 0.0;
    let mut shape = true;
    for d in 1..=3usize {
        let df = d as f64;
        let lap = indicial_family(&OperatorSpec::sym_laplacian(d))?;
        let roots = lap.root_multiset()?;
        let adj = lap.adjoint().root_multiset()?;
        shape &= roots.len() == adj.len();
        for r in &roots {
            let m = adj
                .iter()
                .find(|a| (a.value - (re(df) - r.value)).norm() < 1e-6);
            match m {
                Some(a) => {
                    shape &= a.multiplicity == r.multiplicity;
                    err = err.max((a.value - (re(df) - r.value)).norm());
                }
                None => shape = false,
            }
        }
        let s = (df + df * df / 4.0).sqrt();
        let find = |t: f64| {
            roots
                .iter()
                .map(|r| r.value)
                .min_by(|a, b| (a - re(t)).norm().total_cmp(&(b - re(t)).norm()))
                .unwrap()
        };
        sum_err = sum_err.max((find(df / 2.0 + s) + find(df / 2.0 - s) - re(df)).norm());
    }
    outcome(
        shape && err <= 1e-12 && sum_err <= 1e-12,
        format!("mirror error {err:.2e}, |λ⁺ + λ⁻ − d| = {sum_err:.2e}"),
    )
}

fn c4() -> Result<Outcome> {
    let grid = RGrid::new(-12.0, 12.0, 4096)?;
    let fam = indicial_family(&OperatorSpec::sym_laplacian(1))?;
    let f = ModeZeroField::from_fn(grid, 0.0, 2, |r| vec![re(bump(r, 0.0, 2.0)), re(0.0)])?;
    let u = invert_on_line(&fam, &f, 0.0)?;
    let res = line_residual(&fam, &f, &u)?;
    let (left, right) = fit_tail_rates(&u)?;
    let (plus, minus) = ((1.0 + 5f64.sqrt()) / 2.0, (1.0 - 5f64.sqrt()) / 2.0);
    // ρ = 0 and ρ = 0.6 both lie in (λ⁻, λ⁺)
    let other = invert_on_line(&fam, &f, 0.6)?;
    let gap = (0..grid.points)
        .map(|j| {
            other
                .value(j)
                .iter()
                .zip(u.value(j))
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    outcome(
        res <= 1e-8 && (left - plus).abs() <= 2e-2 && (right - minus).abs() <= 2e-2 && gap <= 1e-10,
        format!("residual {res:.2e}; left tail {left:.4} (λ⁺ {plus:.4}); right tail {right:.4} (λ⁻ {minus:.4}); ρ-gap {gap:.2e}"),
    )
}

fn c5() -> Result<Outcome> {
    // I(Δ) for d = 1 is diagonal with (0,0) entry λ² − λ − 1; crossing λ⁺ alone
    // adds e^{λ⁺ r} f̂₀(λ⁺) / (2λ⁺ − 1) to the first component.
    let grid = RGrid::default();
    let fam = indicial_family(&OperatorSpec::sym_laplacian(1))?;
    let (c, w) = (0.4, 1.7);
    let f = ModeZeroField::from_fn(grid, 0.0, 2, |r| vec![re(bump(r, c, w)), re(0.0)])?;
    let to = 1.8;
    let lp = (1.0 + 5f64.sqrt()) / 2.0;
    let fhat = composite_gauss(
        |s| (-lp * s).exp() * bump(s, c, w),
        c - w,
        c + w,
        8,
        8,
        1e-15,
        1 << 14,
    )
    .value;
    let amp = fhat / (2.0 * lp - 1.0);
    let direct = invert_on_line(&fam, &f, to)?.sub(&invert_on_line(&fam, &f, 0.0)?)?;
    let (corr, _) = cross_root_correction(&fam, &f, 0.0, to)?;
    let scale = grid
        .interior()
        .map(|j| amp * ((lp - to) * grid.r(j)).exp())
        .fold(0.0, f64::max);
    let mut gap_oracle: f64 = 0.0;
    let mut gap_residue: f64 = 0.0;
    for j in grid.interior() {
        let r = grid.r(j);
        let damp = (-to * r).exp();
        let d = direct.value(j);
        let want = [amp * (lp * r).exp() * damp, 0.0];
        let k = corr.value(j);
        for i in 0..2 {
            gap_oracle = gap_oracle.max((d[i] * damp - re(want[i])).norm() / scale);
            gap_residue = gap_residue.max(((d[i] - k[i]) * damp).norm() / scale);
        }
    }
    outcome(
        gap_oracle <= 1e-8 && gap_residue <= 1e-8,
        format!("vs closed-form residue {gap_oracle:.2e}; vs library residue {gap_residue:.2e}"),
    )
}

fn c6() -> Result<Outcome> {
    let cfg = ContourConfig::default();
    let mut ok = true;
    let mut parts = vec![];
    // (operator, weight window for Re λ, symbolic root count inside)
    for (spec, lo, hi, symbolic) in [
        (OperatorSpec::sym_laplacian(1), -0.9, 2.5, 3i64),
        (OperatorSpec::sym_laplacian(1), -3.0, 3.0, 4),
        (OperatorSpec::sym_derivative(1), -1.5, 0.5, 1),
    ] {
        let fam = indicial_family(&spec)?;
        let jump = index_jump(&spec, lo - 0.5, hi - 0.5)?;
        let ranks: i64 = fam
            .root_multiset()?
            .iter()
            .filter(|r| r.value.re > lo && r.value.re < hi)
            .map(|r| residue_rank(&fam, r.value, &cfg).map(|x| x.0 as i64))
            .sum::<Result<i64>>()?;
        ok &= jump == ranks && ranks == symbolic;
        parts.push(format!(
            "{} ({lo}, {hi}): jump {jump}, ranks {ranks}",
            spec.name
        ));
    }
    outcome(ok, parts.join("; "))
}

fn c7() -> Result<Outcome> {
    let l = -0.4;
    let (mut hs, mut ed, mut el) = (vec![], vec![], vec![]);
    for nr in [81, 161, 321] {
        let g = TensorGrid::new(0.0, 3.0, nr, 4, 1.0)?;
        // u = y^λ (2 dy/y + 3 dθ/y): frame components (2e, 3e), e = e^{λr}
        let u =
            SymTensorField::from_fn(1, g, |r, _| vec![2.0 * (l * r).exp(), 3.0 * (l * r).exp()])?;
        let du = SymTensorField::from_fn(2, g, |r, _| {
            let e = (l * r).exp();
            vec![2.0 * l * e, -2.0 * e, 1.5 * (l + 1.0) * e]
        })?;
        let lu = SymTensorField::from_fn(1, g, |r, _| {
            let e = (l * r).exp();
            vec![2.0 * (l * l - l - 1.0) * e, 1.5 * (l + 1.0) * (l - 2.0) * e]
        })?;
        let rows = g.interior_rows();
        hs.push(g.hr());
        ed.push(sym_derivative(&u)?.sub(&du)?.sup_on(rows.clone()));
        el.push(sym_laplacian(&u)?.sub(&lu)?.sup_on(rows));
    }
    let (od, ol) = (slope(&hs, &ed), slope(&hs, &el));
    outcome(
        od >= 1.9 && ol >= 1.9,
        format!("observed order D {od:.3}, Δ {ol:.3}"),
    )
}

fn c8() -> Result<Outcome> {
    let field = |g: TensorGrid| {
        SymTensorField::from_fn(2, g, |r, t| {
            let b = bump(r, 1.5, 0.9);
            let (s, c) = (2.0 * PI * t).sin_cos();
            vec![b * (1.0 + s), b * c * r, b * (0.5 - (4.0 * PI * t).cos())]
        })
    };
    let (mut hs, mut divs) = (vec![], vec![]);
    let mut last = None;
    for nr in [128, 256, 512] {
        let g = TensorGrid::new(0.0, 20f64.ln(), nr, 256, 1.0)?;
        let f = field(g)?;
        let t = Instant::now();
        let dec = solenoidal_project(&f, Boundary::Dirichlet)?;
        let secs = t.elapsed().as_secs_f64();
        let rows = g.interior_rows();
        let fnorm = f.norm();
        hs.push(g.hr());
        divs.push(divergence(&dec.solenoidal)?.norm_on(rows) / fnorm);
        last = Some((f, dec, secs));
    }
    let (f, dec, secs) = last.unwrap();
    let du = dirichlet_sym_derivative(&dec.potential)?;
    let residual = f.sub(&dec.solenoidal)?.sub(&du)?.norm() / f.norm();
    let again = project_unchecked(&dec.solenoidal, Boundary::Dirichlet)?;
    let idem = again.solenoidal.sub(&dec.solenoidal)?.norm() / dec.solenoidal.norm();
    let order = slope(&hs, &divs);
    outcome(
        residual <= 1e-8 && order >= 1.9 && idem <= 1e-6 && secs < 60.0,
        format!(
            "‖f − f_s − Du‖/‖f‖ = {residual:.2e}, ‖D*f_s‖ order {order:.3}, idempotence {idem:.2e}, 512×256 in {secs:.1}s"
        ),
    )
}

fn c9() -> Result<Outcome> {
    let s = FuchsianSurface::punctured_torus();
    let classes = s.enumerate_hyperbolic_classes(6)?;
    let grid = TensorGrid::for_cusp(1.0, 512, 256, s.cusp_width())?;
    let (mut grid_worst, mut sym_worst): (f64, f64) = (0.0, 0.0);
    for seed in 100..110 {
        let p = BumpOneForm::random(&s, 1.0, 0.85, 3, seed)?;
        let field = p.to_field(grid)?;
        let sup = field.sup();
        let g =
            potential_annihilation_suite(GridOneForm::new(&s, &field)?, sup, &classes, 1e-7 * sup)?;
        let k = potential_annihilation_suite(p, sup, &classes, 1e-11)?;
        grid_worst = grid_worst.max(g.relative);
        sym_worst = sym_worst.max(k.relative);
    }
    outcome(
        classes.len() >= 50 && grid_worst <= 1e-6 && sym_worst <= 1e-8,
        format!(
            "{} classes; grid path {grid_worst:.2e}·‖p‖; symbolic path {sym_worst:.2e}·‖p‖",
            classes.len()
        ),
    )
}

fn c10() -> Result<Outcome> {
    let s = FuchsianSurface::punctured_torus();
    let classes = s.enumerate_hyperbolic_classes(6)?;
    let worst = xray_classes(&Metric, &classes, 1e-12)?
        .iter()
        .map(|r| (r.value - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-10,
        format!("{} classes; max |I₂g − 1| = {worst:.2e}", classes.len()),
    )
}

fn c11() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = CircleGrid {
        points: 48,
        base_height: 2.3,
    };
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let k = rng.gen_range(0..6) as f64;
        let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let f: Vec<C64> = grid
            .angles()
            .iter()
            .map(|p| re(a * (k * p).cos() + b * (k * p).sin() + 0.3))
            .collect();
        let lambda = C64::from_polar(rng.gen_range(0.5..8.0), rng.gen_range(-PI..PI));
        worst = worst.max(sphere_fibered_inverse_check(lambda, &grid, &f)?);
    }
    let f: Vec<C64> = grid.angles().iter().map(|p| re((2.0 * p).sin())).collect();
    let ls: Vec<f64> = (0..6).map(|k| 0.4 * 0.5f64.powi(k)).collect();
    let res: Vec<f64> = ls
        .iter()
        .map(|&l| perturbed_inverse_residual(re(l), &grid, &f, 1e-7))
        .collect::<Result<_>>()?;
    let growth = slope(&ls, &res);
    outcome(
        worst <= 1e-10 && (growth + 1.0).abs() <= 0.05,
        format!("max ‖W I f − f‖ = {worst:.2e}; residual ∝ |λ|^{growth:.3}"),
    )
}

fn c12() -> Result<Outcome> {
    let grid = RGrid::default();
    let top = max_block(&grid);
    let mut partition: f64 = 0.0;
    for profile in [Profile::Quintic, Profile::Smooth] {
        for xi in angular_frequencies(grid.points, grid.step()) {
            let s: f64 = (0..=top)
                .map(|j| DyadicMultiplier::new(j, profile).eval(xi))
                .sum();
            partition = partition.max((s - 1.0).abs());
        }
    }
    let mut exponent = f64::INFINITY;
    let mut pairs = 0;
    for u in band_limited_family(grid, 4, 32, 300.0, 5)? {
        let rep = interaction_report(&u, Profile::Quintic)?;
        pairs += rep.pairs.len();
        exponent = exponent.min(rep.exponent.unwrap_or(f64::INFINITY));
    }
    let fam = band_limited_family(grid, 100, 32, 40.0, 7)?;
    let half = norm_equivalence_report(&fam[..50], 0.5)?;
    let full = norm_equivalence_report(&fam, 0.5)?;
    let (dlo, dhi) = (
        (full.min_ratio / half.min_ratio - 1.0).abs(),
        (full.max_ratio / half.max_ratio - 1.0).abs(),
    );
    outcome(
        partition <= 1e-12 && pairs > 0 && exponent >= 4.0 && dlo <= 0.1 && dhi <= 0.1,
        format!(
            "partition {partition:.2e}; interaction N ≥ {exponent:.2} over {pairs} pairs; \
             ratio interval [{:.3}, {:.3}] → [{:.3}, {:.3}] ({:.1}%, {:.1}%)",
            half.min_ratio,
            half.max_ratio,
            full.min_ratio,
            full.max_ratio,
            100.0 * dlo,
            100.0 * dhi
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, f64, fn() -> Result<Outcome>); 12] = [
        ("indicial roots of D, Δ, ∇_S", 1.0, c1),
        ("indicial homomorphism", 1.0, c2),
        ("adjoint root symmetry", 1.0, c3),
        ("mode-zero inversion", 10.0, c4),
        ("cross-root correction", 10.0, c5),
        ("index jump vs residue rank", 5.0, c6),
        ("tensor model exactness", 30.0, c7),
        ("solenoidal decomposition", 60.0, c8),
        ("X-ray annihilation of potentials", 300.0, c9),
        ("X-ray normalization", 30.0, c10),
        ("∇_S fiber inverse", 5.0, c11),
        ("Littlewood-Paley structure", 60.0, c12),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let res = run();
        let secs = t.elapsed().as_secs_f64();
        let (ok, detail) = match res {
            Ok(o) => (o.ok && secs < limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!(
            "{} {:>2} {name}: {detail} [{secs:.2}s / {limit}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

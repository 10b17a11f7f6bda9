//! The acceptance checks as a runnable table, used by `cusplab suite`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::FuchsianSurface;
use crate::indicial::fiber::{
    perturbed_inverse_residual, sphere_fibered_inverse_check, CircleGrid,
};
use crate::indicial::{
    index_jump, indicial_family, residue_rank, ContourConfig, IndicialFamily, OperatorSpec,
};
use crate::lp::{
    band_limited_family, interaction_report, max_block, norm_equivalence_report, DyadicMultiplier,
    Profile,
};
use crate::mode0::{
    bump, cross_root_correction, fit_tail_rates, invert_on_line, line_residual, ModeZeroField,
    RGrid,
};
use crate::spectral::angular_frequencies;
use crate::tensor::{
    observed_order, project_unchecked, solenoidal_project, sym_derivative, sym_laplacian, Boundary,
    SymTensorField, TensorGrid,
};
use crate::xray::{potential_annihilation_suite, xray_classes, BumpOneForm, GridOneForm, Metric};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    /// Human-readable measured quantities.
    pub measured: String,
    pub seconds: f64,
    pub time_limit: f64,
}

struct Check {
    ok: bool,
    measured: String,
}

type CheckFn = fn(u64) -> Result<Check>;

const CRITERIA: [(u8, &str, f64, CheckFn); 12] = [
    (1, "indicial roots", 1.0, indicial_roots),
    (2, "homomorphism", 1.0, homomorphism),
    (3, "adjoint symmetry", 1.0, adjoint_symmetry),
    (4, "mode-zero inversion", 10.0, mode_zero_inversion),
    (5, "cross-root correction", 10.0, cross_root),
    (6, "index jump", 5.0, index_jump_consistency),
    (7, "model exactness", 30.0, model_exactness),
    (8, "solenoidal decomposition", 60.0, solenoidal),
    (9, "potential annihilation", 300.0, annihilation),
    (10, "x-ray normalization", 30.0, normalization),
    (11, "nabla_S fiber inverse", 5.0, fiber_inverse),
    (12, "littlewood-paley", 60.0, littlewood_paley),
];

/// Ids of all criteria in order.
pub fn criterion_ids() -> Vec<u8> {
    CRITERIA.iter().map(|c| c.0).collect()
}

/// Runs one criterion. Errors count as failures; so does exceeding the time limit.
pub fn run_criterion(id: u8, seed: u64) -> Option<CriterionOutcome> {
    let &(id, name, time_limit, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let res = check(seed);
    let seconds = start.elapsed().as_secs_f64();
    let (ok, measured) = match res {
        Ok(c) => (c.ok, c.measured),
        Err(e) => (false, format!("error: {e}")),
    };
    Some(CriterionOutcome {
        id,
        name: name.into(),
        passed: ok && seconds < time_limit,
        measured,
        seconds,
        time_limit,
    })
}

pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    criterion_ids()
        .into_iter()
        .filter_map(|id| run_criterion(id, seed))
        .collect()
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn sorted_roots(fam: &IndicialFamily) -> Result<Vec<(C64, usize)>> {
    Ok(fam
        .root_multiset()?
        .into_iter()
        .map(|r| (r.value, r.multiplicity))
        .collect())
}

fn indicial_roots(_: u64) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for d in 1..=3 {
        let df = d as f64;
        let dr = sorted_roots(&indicial_family(&OperatorSpec::sym_derivative(d))?)?;
        ok &= dr.len() == 1 && dr[0].1 == d;
        worst = worst.max((dr[0].0 - real(-1.0)).norm());

        let disc = (df + df * df / 4.0).sqrt();
        let mut want = [-1.0, df + 1.0, df / 2.0 - disc, df / 2.0 + disc];
        want.sort_by(f64::total_cmp);
        let lr = sorted_roots(&indicial_family(&OperatorSpec::sym_laplacian(d))?)?;
        ok &= lr.len() == 4;
        for ((z, _), w) in lr.iter().zip(want) {
            worst = worst.max((z - real(w)).norm());
        }
    }
    let gr = sorted_roots(&indicial_family(&OperatorSpec::sasaki_gradient(3))?)?;
    ok &= gr.len() == 1 && gr[0].1 == 1;
    worst = worst.max(gr[0].0.norm());
    Ok(Check {
        ok: ok && worst <= 1e-10,
        measured: format!("max root error {worst:.2e}"),
    })
}

fn homomorphism(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for d in 1..=3 {
        let comp = indicial_family(&OperatorSpec::divergence(d))?
            .compose(&indicial_family(&OperatorSpec::sym_derivative(d))?)?;
        let lap = indicial_family(&OperatorSpec::sym_laplacian(d))?;
        for _ in 0..100 {
            let z = C64::from_polar(10.0 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI));
            let l = lap.eval(z);
            worst = worst.max((comp.eval(z) - &l).norm() / l.norm());
        }
    }
    Ok(Check {
        ok: worst <= 1e-12,
        measured: format!("max relative defect {worst:.2e}"),
    })
}

fn adjoint_symmetry(_: u64) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for d in 1..=3 {
        let df = d as f64;
        let lap = indicial_family(&OperatorSpec::sym_laplacian(d))?;
        let roots = sorted_roots(&lap)?;
        let mut mirrored: Vec<(C64, usize)> =
            roots.iter().map(|(z, m)| (real(df) - z, *m)).collect();
        mirrored.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
        let adj = sorted_roots(&lap.adjoint())?;
        ok &= adj.len() == mirrored.len();
        for (a, m) in adj.iter().zip(&mirrored) {
            ok &= a.1 == m.1;
            worst = worst.max((a.0 - m.0).norm());
        }
        let (lo, hi) = (roots[0].0, roots[roots.len() - 1].0);
        worst = worst.max((lo + hi - real(df)).norm());
    }
    Ok(Check {
        ok: ok && worst <= 1e-12,
        measured: format!("max mirror error {worst:.2e}"),
    })
}

fn laplacian_d1() -> Result<IndicialFamily> {
    indicial_family(&OperatorSpec::sym_laplacian(1))
}

fn mode_zero_inversion(_: u64) -> Result<Check> {
    let grid = RGrid::default();
    let fam = laplacian_d1()?;
    let f = ModeZeroField::from_fn(grid, 0.0, 2, |r| vec![real(bump(r, 0.0, 2.0)), real(0.0)])?;
    let u = invert_on_line(&fam, &f, 0.0)?;
    let residual = line_residual(&fam, &f, &u)?;
    let (left, right) = fit_tail_rates(&u)?;
    let s = 1.25f64.sqrt();
    let (plus, minus) = (0.5 + s, 0.5 - s);
    let diff = invert_on_line(&fam, &f, 0.5)?
        .sub(&u)?
        .reweighted(0.0)
        .max_norm();
    let ok = residual <= 1e-8
        && (left - plus).abs() <= 2e-2
        && (right - minus).abs() <= 2e-2
        && diff <= 1e-10;
    Ok(Check {
        ok,
        measured: format!(
            "residual {residual:.2e}, tails {left:.4}/{right:.4}, contour shift {diff:.2e}"
        ),
    })
}

fn cross_root(_: u64) -> Result<Check> {
    let grid = RGrid::default();
    let fam = laplacian_d1()?;
    let f = ModeZeroField::from_fn(grid, 0.0, 2, |r| {
        vec![real(bump(r, 0.0, 2.0)), real(0.5 * bump(r, 0.3, 2.0))]
    })?;
    let to = 1.8;
    let (corr, els) = cross_root_correction(&fam, &f, 0.0, to)?;
    let direct = invert_on_line(&fam, &f, to)?.sub(&invert_on_line(&fam, &f, 0.0)?)?;
    let scale = corr.max_norm();
    let err = grid
        .interior()
        .map(|j| {
            direct
                .weighted(j)
                .iter()
                .zip(corr.weighted(j))
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
        / scale;
    Ok(Check {
        ok: els.len() == 1 && err <= 1e-8,
        measured: format!("relative pointwise gap {err:.2e}"),
    })
}

fn index_jump_consistency(_: u64) -> Result<Check> {
    let cfg = ContourConfig::default();
    let mut ok = true;
    let mut lines = Vec::new();
    for (spec, window) in [
        (OperatorSpec::sym_laplacian(1), (-2.4, 2.9)),
        (OperatorSpec::sym_derivative(1), (-2.0, 0.0)),
    ] {
        let fam = indicial_family(&spec)?;
        let (lo, hi) = window;
        let jump = index_jump(&spec, lo - 0.5, hi - 0.5)?;
        let mut ranks = 0i64;
        let mut mult = 0i64;
        for r in fam
            .root_multiset()?
            .iter()
            .filter(|r| r.value.re > lo && r.value.re < hi)
        {
            ranks += residue_rank(&fam, r.value, &cfg)?.0 as i64;
            mult += r.multiplicity as i64;
        }
        ok &= jump == ranks && ranks == mult && jump > 0;
        lines.push(format!("{}: jump {jump}, ranks {ranks}", spec.name));
    }
    Ok(Check {
        ok,
        measured: lines.join("; "),
    })
}

fn model_grid(nr: usize) -> Result<TensorGrid> {
    TensorGrid::new(0.0, 20f64.ln(), nr, 8, 1.0)
}

fn model_exactness(_: u64) -> Result<Check> {
    let lambda = 0.7;
    let (mut hs, mut ed, mut el) = (vec![], vec![], vec![]);
    for nr in [65, 129, 257] {
        let g = model_grid(nr)?;
        let u = SymTensorField::from_fn(1, g, |r, _| {
            let e = (lambda * r).exp();
            vec![e, -0.5 * e]
        })?;
        let d_exact = SymTensorField::from_fn(2, g, |r, _| {
            let e = (lambda * r).exp();
            vec![lambda * e, -e, -0.25 * (lambda + 1.0) * e]
        })?;
        let l_exact = SymTensorField::from_fn(1, g, |r, _| {
            let e = (lambda * r).exp();
            vec![
                (lambda * lambda - lambda - 1.0) * e,
                -0.25 * (lambda + 1.0) * (lambda - 2.0) * e,
            ]
        })?;
        let rows = g.interior_rows();
        hs.push(g.hr());
        ed.push(sym_derivative(&u)?.sub(&d_exact)?.sup_on(rows.clone()));
        el.push(sym_laplacian(&u)?.sub(&l_exact)?.sup_on(rows));
    }
    let (od, ol) = (observed_order(&hs, &ed), observed_order(&hs, &el));
    Ok(Check {
        ok: od >= 1.9 && ol >= 1.9,
        measured: format!("order D {od:.3}, order Δ {ol:.3}"),
    })
}

fn solenoidal_field(g: TensorGrid) -> Result<SymTensorField> {
    SymTensorField::from_fn(2, g, |r, t| {
        let b = bump(r, 1.6, 0.8);
        vec![
            b * (2.0 * PI * t).sin(),
            b * r,
            b * (1.0 + (2.0 * PI * t).cos()),
        ]
    })
}

fn solenoidal(_: u64) -> Result<Check> {
    let (mut hs, mut errs) = (vec![], vec![]);
    for nr in [128, 256] {
        let g = TensorGrid::new(0.0, 20f64.ln(), nr, 256, 1.0)?;
        let dec = solenoidal_project(&solenoidal_field(g)?, Boundary::Dirichlet)?;
        hs.push(g.hr());
        errs.push(dec.report.divergence_residual);
    }
    let g = TensorGrid::default();
    let dec = solenoidal_project(&solenoidal_field(g)?, Boundary::Dirichlet)?;
    hs.push(g.hr());
    errs.push(dec.report.divergence_residual);
    let order = observed_order(&hs, &errs);
    let again = project_unchecked(&dec.solenoidal, Boundary::Dirichlet)?;
    let idem = again.solenoidal.sub(&dec.solenoidal)?.norm() / dec.solenoidal.norm();
    let res = dec.report.decomposition_residual;
    Ok(Check {
        ok: res <= 1e-8 && order >= 1.9 && idem <= 1e-6,
        measured: format!(
            "decomposition {res:.2e}, divergence order {order:.3}, idempotence {idem:.2e}"
        ),
    })
}

fn annihilation(seed: u64) -> Result<Check> {
    let s = FuchsianSurface::punctured_torus();
    let classes = s.enumerate_hyperbolic_classes(6)?;
    let grid = TensorGrid::for_cusp(1.0, 512, 256, s.cusp_width())?;
    let (mut grid_worst, mut sym_worst): (f64, f64) = (0.0, 0.0);
    for k in 0..10 {
        let p = BumpOneForm::random(&s, 0.9, 0.8, 3, seed.wrapping_add(k))?;
        let field = p.to_field(grid)?;
        let sup = field.sup();
        let g =
            potential_annihilation_suite(GridOneForm::new(&s, &field)?, sup, &classes, 1e-7 * sup)?;
        let sym = potential_annihilation_suite(p, sup, &classes, 1e-11)?;
        grid_worst = grid_worst.max(g.relative);
        sym_worst = sym_worst.max(sym.relative);
    }
    Ok(Check {
        ok: classes.len() >= 50 && grid_worst <= 1e-6 && sym_worst <= 1e-8,
        measured: format!(
            "{} classes, grid {grid_worst:.2e}, symbolic {sym_worst:.2e}",
            classes.len()
        ),
    })
}

fn normalization(_: u64) -> Result<Check> {
    let s = FuchsianSurface::punctured_torus();
    let classes = s.enumerate_hyperbolic_classes(6)?;
    let worst = xray_classes(&Metric, &classes, 1e-12)?
        .iter()
        .map(|r| (r.value - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(Check {
        ok: worst <= 1e-10,
        measured: format!("{} classes, max |I_2 g − 1| {worst:.2e}", classes.len()),
    })
}

fn fiber_inverse(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = CircleGrid::default();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let coeffs: Vec<(f64, f64)> = (0..5)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let f: Vec<C64> = grid
            .angles()
            .iter()
            .map(|&p| {
                real(
                    coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, (a, b))| a * (k as f64 * p).cos() + b * (k as f64 * p).sin())
                        .sum(),
                )
            })
            .collect();
        let lambda = C64::from_polar(rng.gen_range(0.5..10.0), rng.gen_range(0.0..2.0 * PI));
        worst = worst.max(sphere_fibered_inverse_check(lambda, &grid, &f)?);
    }
    let f: Vec<C64> = grid.angles().iter().map(|p| real(p.cos())).collect();
    let lambdas: Vec<f64> = (1..=6).map(|k| 0.5f64.powi(k)).collect();
    let res: Vec<f64> = lambdas
        .iter()
        .map(|&l| perturbed_inverse_residual(real(l), &grid, &f, 1e-6))
        .collect::<Result<_>>()?;
    let slope = observed_order(&lambdas, &res);
    Ok(Check {
        ok: worst <= 1e-10 && (slope + 1.0).abs() <= 0.05,
        measured: format!("max residual {worst:.2e}, growth exponent {slope:.3}"),
    })
}

fn littlewood_paley(seed: u64) -> Result<Check> {
    let grid = RGrid::default();
    let top = max_block(&grid);
    let partition = angular_frequencies(grid.points, grid.step())
        .into_iter()
        .map(|xi| {
            ((0..=top)
                .map(|j| DyadicMultiplier::new(j, Profile::Quintic).eval(xi))
                .sum::<f64>()
                - 1.0)
                .abs()
        })
        .fold(0.0, f64::max);
    let mut exponent = f64::INFINITY;
    for u in band_limited_family(grid, 3, 32, 200.0, seed)? {
        exponent = exponent.min(
            interaction_report(&u, Profile::Quintic)?
                .exponent
                .unwrap_or(f64::INFINITY),
        );
    }
    let fam = band_limited_family(grid, 100, 32, 40.0, 7)?;
    let half = norm_equivalence_report(&fam[..50], 0.5)?;
    let full = norm_equivalence_report(&fam, 0.5)?;
    let shift = (full.min_ratio / half.min_ratio - 1.0)
        .abs()
        .max((full.max_ratio / half.max_ratio - 1.0).abs());
    Ok(Check {
        ok: partition <= 1e-12 && exponent >= 4.0 && shift <= 0.1,
        measured: format!(
            "partition {partition:.2e}, interaction exponent {exponent:.2}, ratio interval [{:.3}, {:.3}] shift {:.1}%",
            full.min_ratio,
            full.max_ratio,
            100.0 * shift
        ),
    })
}

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{vec_norm, ModeZeroField, RGrid};
use crate::error::{invalid, Error, Result};
use crate::indicial::IndicialFamily;
use crate::spectral::{angular_frequencies, tail_energy_fraction, Transform};

/// Spectral energy above 3/4 of the Nyquist band that triggers a resolution error.
pub const ALIASING_TOL: f64 = 1e-10;
/// Weights closer than this to a root line get a conditioning warning.
pub const NEAR_ROOT: f64 = 1e-3;
/// Tails of the weighted solution are padded until they fall below `e^{-TAIL_DECADES}`.
const TAIL_DECADES: f64 = 40.0;
const MAX_POINTS: usize = 1 << 22;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct InversionReport {
    pub rho: f64,
    /// Largest `‖I‖·‖I^{-1}‖` (Frobenius) over the frequency nodes.
    pub max_condition: f64,
    /// Distance from `rho` to the nearest root real part.
    pub root_distance: f64,
    /// Length of the padded periodic grid the line inverse was computed on.
    pub padded_points: usize,
    pub warnings: Vec<String>,
}

fn spectra(u: &ModeZeroField, t: &Transform, offset: usize) -> Vec<Vec<C64>> {
    (0..u.components())
        .map(|c| {
            let mut buf = vec![C64::new(0.0, 0.0); t.len()];
            for (j, z) in u.component(c).into_iter().enumerate() {
                buf[offset + j] = z;
            }
            t.forward(&mut buf);
            buf
        })
        .collect()
}

fn synthesize(
    out: Vec<Vec<C64>>,
    t: &Transform,
    offset: usize,
    grid: RGrid,
    rho: f64,
) -> Result<ModeZeroField> {
    let comps: Vec<Vec<C64>> = out
        .into_iter()
        .map(|mut buf| {
            t.inverse(&mut buf);
            buf
        })
        .collect();
    let samples = (0..grid.points)
        .map(|j| comps.iter().map(|c| c[offset + j]).collect())
        .collect();
    ModeZeroField::new(grid, rho, samples)
}

/// Applies the convolution operator with symbol `fam` on the line `Re λ = ρ`,
/// `ρ` being the weight `u` is stored with.
pub fn apply_indicial(fam: &IndicialFamily, u: &ModeZeroField) -> Result<ModeZeroField> {
    if fam.cols() != u.components() {
        return invalid(format!(
            "family acts on {}-vectors, field has {} components",
            fam.cols(),
            u.components()
        ));
    }
    let grid = *u.grid();
    let n = grid.points;
    let t = Transform::new(n);
    let hat = spectra(u, &t, 0);
    let (tail, total): (f64, f64) = hat
        .iter()
        .map(|s| {
            let e: f64 = s.iter().map(C64::norm_sqr).sum();
            (tail_energy_fraction(s, 0.75) * e, e)
        })
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    if total > 0.0 && tail / total > ALIASING_TOL {
        return Err(Error::Resolution(format!(
            "spectral tail holds {:.2e} of the energy; refine the grid or window the data",
            tail / total
        )));
    }
    let xi = angular_frequencies(n, grid.step());
    let rho = u.weight();
    let cols: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let m = fam.eval(C64::new(rho, xi[k]));
            let x = DVector::from_iterator(fam.cols(), hat.iter().map(|s| s[k]));
            (m * x).iter().copied().collect()
        })
        .collect();
    let out = (0..fam.rows())
        .map(|r| cols.iter().map(|c| c[r]).collect())
        .collect();
    synthesize(out, &t, 0, grid, rho)
}

/// Left inverse of `m`: exact for square, least squares for tall.
fn solve_node(m: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    if m.is_square() {
        m.clone().try_inverse()
    } else {
        let ma = m.adjoint();
        (&ma * m).try_inverse().map(|g| g * ma)
    }
}

/// Line inverse `∫_{Re λ=ρ} e^{λr} I(A,λ)^{-1} f̂(λ) dλ`.
pub fn invert_on_line(fam: &IndicialFamily, f: &ModeZeroField, rho: f64) -> Result<ModeZeroField> {
    invert_with_report(fam, f, rho).map(|(u, _)| u)
}

pub fn invert_with_report(
    fam: &IndicialFamily,
    f: &ModeZeroField,
    rho: f64,
) -> Result<(ModeZeroField, InversionReport)> {
    if fam.rows() < fam.cols() {
        return Err(Error::DegenerateOperator(format!(
            "{} is never injective",
            fam.name
        )));
    }
    if fam.rows() != f.components() {
        return invalid(format!(
            "family has {} output components, data has {}",
            fam.rows(),
            f.components()
        ));
    }
    if !rho.is_finite() {
        return Err(Error::InvalidWeight(format!("weight {rho}")));
    }
    let roots = fam.root_multiset()?;
    let mut report = InversionReport {
        rho,
        root_distance: f64::INFINITY,
        ..Default::default()
    };
    let (mut below, mut above) = (f64::INFINITY, f64::INFINITY);
    for r in &roots {
        let d = r.value.re - rho;
        if d.abs() <= 1e-9 * rho.abs().max(1.0) {
            return Err(Error::InvalidWeight(format!(
                "Re λ = {rho} passes through the indicial root {}",
                r.value
            )));
        }
        if d > 0.0 {
            above = above.min(d);
        } else {
            below = below.min(-d);
        }
    }
    report.root_distance = below.min(above);
    if report.root_distance < NEAR_ROOT {
        report.warnings.push(format!(
            "weight {rho} is {:.1e} from a root line",
            report.root_distance
        ));
    }

    let grid = *f.grid();
    let g = f.reweighted(rho);
    let scale = g.max_norm();
    let edge = (grid.points / 100).max(1);
    let edge_max = (0..edge)
        .chain(grid.points - edge..grid.points)
        .map(|j| vec_norm(g.weighted(j)))
        .fold(0.0, f64::max);
    if edge_max > 1e-12 * scale {
        return invalid("data must vanish near both ends of the grid (compact support)");
    }
    if scale == 0.0 {
        return Ok((ModeZeroField::zeros(grid, rho, fam.cols())?, report));
    }

    // the weighted solution decays like e^{-below·r} to the right and
    // e^{above·r} to the left; pad so that the periodic copies are negligible
    let h = grid.step();
    let length = grid.r_max - grid.r_min;
    let pad = |rate: f64| {
        if rate.is_finite() {
            TAIL_DECADES / rate
        } else {
            0.25 * length
        }
    };
    let (mut left, mut right) = (
        (pad(above) / h).ceil() as usize,
        (pad(below) / h).ceil() as usize,
    );
    let budget = MAX_POINTS - grid.points;
    if left + right > budget {
        let shrink = budget as f64 / (left + right) as f64;
        left = (left as f64 * shrink) as usize;
        right = (right as f64 * shrink) as usize;
        let wrap = (-(above * left as f64 * h).min(below * right as f64 * h)).exp();
        report.warnings.push(format!("padding capped at {MAX_POINTS} points; periodic copies of the tails remain at ~{wrap:.1e}"));
    }
    let total = left + grid.points + right;
    report.padded_points = total;

    let t = Transform::new(total);
    let hat = spectra(&g, &t, left);
    let xi = angular_frequencies(total, h);
    let solved: Vec<Option<(Vec<C64>, f64)>> = (0..total)
        .into_par_iter()
        .map(|k| {
            let m = fam.eval(C64::new(rho, xi[k]));
            let inv = solve_node(&m)?;
            let cond = m.norm() * inv.norm();
            let x = DVector::from_iterator(fam.rows(), hat.iter().map(|s| s[k]));
            Some(((inv * x).iter().copied().collect(), cond))
        })
        .collect();
    let mut cols = Vec::with_capacity(total);
    for (k, s) in solved.into_iter().enumerate() {
        let (c, cond) = s.ok_or_else(|| Error::NumericFailure {
            message: format!("I(A, {rho} + {}i) is singular", xi[k]),
            residual: 0.0,
        })?;
        report.max_condition = report.max_condition.max(cond);
        cols.push(c);
    }
    let out = (0..fam.cols())
        .map(|r| cols.iter().map(|c| c[r]).collect())
        .collect();
    let u = synthesize(out, &t, left, grid, rho)?;
    Ok((u, report))
}

/// `max |A(χu) − f| / max |f|` over the cells where the window `χ` is 1,
/// measured at the weight `u` is stored with.
pub fn line_residual(fam: &IndicialFamily, f: &ModeZeroField, u: &ModeZeroField) -> Result<f64> {
    let au = apply_indicial(fam, &u.windowed())?;
    let g = f.reweighted(u.weight());
    let scale = g.max_norm();
    let err = u
        .grid()
        .interior()
        .map(|j| {
            let d: Vec<C64> = au
                .weighted(j)
                .iter()
                .zip(g.weighted(j))
                .map(|(a, b)| a - b)
                .collect();
            vec_norm(&d)
        })
        .fold(0.0, f64::max);
    Ok(if scale == 0.0 { err } else { err / scale })
}

/// Least-squares slopes of `log‖u(r)‖` over the first and last quarter of
/// the grid: `(left, right)`. For a solution behaving like `e^{λr}` at an
/// end, the slope there is `Re λ`.
pub fn fit_tail_rates(u: &ModeZeroField) -> Result<(f64, f64)> {
    let n = u.len();
    let q = n / 4;
    let fit = |range: std::ops::Range<usize>| -> Result<f64> {
        let pts: Vec<(f64, f64)> = range
            .filter_map(|j| {
                let v = vec_norm(u.weighted(j));
                let r = u.grid().r(j);
                (v > 0.0).then(|| (r, v.ln() + u.weight() * r))
            })
            .collect();
        if pts.len() < 2 {
            return Err(Error::NumericFailure {
                message: "tail vanishes identically".into(),
                residual: 0.0,
            });
        }
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / m, sy / m);
        let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| {
            (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2))
        });
        Ok(sxy / sxx)
    };
    Ok((fit(0..q)?, fit(n - q..n)?))
}

/// Relative gap between the `L²(dr)` norm of the weighted representative and
/// its discrete Plancherel counterpart.
pub fn plancherel_defect(u: &ModeZeroField) -> f64 {
    let n = u.len();
    let t = Transform::new(n);
    let spectral: f64 = spectra(u, &t, 0)
        .iter()
        .flatten()
        .map(C64::norm_sqr)
        .sum::<f64>()
        * u.grid().step()
        / n as f64;
    let direct = u.l2_norm();
    if direct == 0.0 {
        return spectral.sqrt();
    }
    (direct - spectral.sqrt()).abs() / direct
}

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::banded::BandMatrix;
use super::field::SymTensorField;
use super::ops::{
    d_mode, dirichlet_sym_derivative, div_adjoint_mode, divergence, from_modes, to_modes, ModeCtx,
    Modes,
};
use crate::error::{invalid, Error, Result};

/// Minimum number of empty `r`-rows between the data and each truncation boundary.
pub const SUPPORT_MARGIN: usize = 5;
/// Half-bandwidth (in interleaved unknowns) used when probing `D_h^* W D_h`.
const BAND: usize = 7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// `u = 0` on both truncation boundaries.
    #[default]
    Dirichlet,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolenoidalReport {
    /// Worst relative residual of the banded solves.
    pub solver_residual: f64,
    /// `‖f − f_s − Du‖ / ‖f‖`.
    pub decomposition_residual: f64,
    /// `‖D* f_s‖ / ‖f‖` with the consistent divergence on interior rows.
    pub divergence_residual: f64,
    /// `|⟨f_s, Du⟩| / (‖f_s‖ ‖Du‖)`.
    pub orthogonality: f64,
}

#[derive(Clone, Debug)]
pub struct SolenoidalDecomposition {
    pub solenoidal: SymTensorField,
    pub potential: SymTensorField,
    pub report: SolenoidalReport,
}

fn interleave(p: &[C64], q: &[C64]) -> Vec<C64> {
    let n = p.len();
    (1..n - 1).flat_map(|i| [p[i], q[i]]).collect()
}

fn deinterleave(x: &[C64], nr: usize) -> (Vec<C64>, Vec<C64>) {
    let mut p = vec![C64::new(0.0, 0.0); nr];
    let mut q = vec![C64::new(0.0, 0.0); nr];
    for i in 1..nr - 1 {
        p[i] = x[2 * (i - 1)];
        q[i] = x[2 * (i - 1) + 1];
    }
    (p, q)
}

fn rel_residual(m: &BandMatrix, x: &[C64], b: &[C64]) -> (Vec<C64>, f64) {
    let r: Vec<C64> = b.iter().zip(m.matvec(x)).map(|(b, ax)| b - ax).collect();
    let nb = b.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
    let nr = r.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
    (r, if nb == 0.0 { nr } else { nr / nb })
}

/// Decomposes `f = f_s + D u` with `u = 0` on the truncation boundaries and
/// `f_s` orthogonal to every discrete potential `D_h v` for the discrete
/// hyperbolic pairing. `u` solves the normal equations `D_h^* W D_h u = D_h^* W f`
/// mode by mode in `θ` with banded solves in `r`.
///
/// `f` must vanish on the [`SUPPORT_MARGIN`] outermost rows at each end; see
/// [`project_unchecked`] for fields (such as a previous `f_s`) that do not.
/// The potential part is `D u` with the Dirichlet closure
/// ([`dirichlet_sym_derivative`](super::dirichlet_sym_derivative)).
pub fn solenoidal_project(
    f: &SymTensorField,
    boundary: Boundary,
) -> Result<SolenoidalDecomposition> {
    if f.order() == 2
        && f.grid().nr >= 2 * SUPPORT_MARGIN + 3
        && f.boundary_sup(SUPPORT_MARGIN) > 1e-12 * f.sup()
    {
        return invalid(format!(
            "f must vanish on the {SUPPORT_MARGIN} outermost r-rows at each end"
        ));
    }
    project_unchecked(f, boundary)
}

/// [`solenoidal_project`] without the support-margin precondition.
pub fn project_unchecked(
    f: &SymTensorField,
    boundary: Boundary,
) -> Result<SolenoidalDecomposition> {
    let Boundary::Dirichlet = boundary;
    if f.order() != 2 {
        return invalid("solenoidal projection acts on symmetric 2-tensors");
    }
    let g = *f.grid();
    if g.nr < 2 * SUPPORT_MARGIN + 3 {
        return invalid("too few r-rows for the support margin");
    }
    let fm = to_modes(f);
    let unknowns = 2 * (g.nr - 2);
    let solved: Vec<Result<(Vec<C64>, Vec<C64>, f64)>> = (0..g.ntheta)
        .into_par_iter()
        .map(|n| {
            let ctx = ModeCtx::new(&g, n).with_dirichlet();
            let row_scale = |v: Vec<Vec<C64>>| -> Vec<C64> {
                let p: Vec<C64> = v[0].iter().zip(&ctx.mu).map(|(x, m)| -x * m).collect();
                let q: Vec<C64> = v[1].iter().zip(&ctx.mu).map(|(x, m)| -x * m).collect();
                interleave(&p, &q)
            };
            let normal = |x: &[C64]| -> Vec<C64> {
                let (p, q) = deinterleave(x, g.nr);
                row_scale(div_adjoint_mode(2, &d_mode(1, &[p, q], &ctx), &ctx))
            };
            let input: Vec<Vec<C64>> = fm.data.iter().map(|c| c[n].clone()).collect();
            let b = row_scale(div_adjoint_mode(2, &input, &ctx));
            let m = BandMatrix::probe(unknowns, BAND, normal);
            let lu = m.clone().factor()?;
            let mut x = lu.solve(&b);
            let (mut r, mut res) = rel_residual(&m, &x, &b);
            for _ in 0..3 {
                if res <= 1e-13 {
                    break;
                }
                let dx = lu.solve(&r);
                x.iter_mut().zip(dx).for_each(|(a, d)| *a += d);
                (r, res) = rel_residual(&m, &x, &b);
            }
            if res > 1e-8 {
                return Err(Error::NumericFailure {
                    message: format!("θ-mode {n} solve did not converge"),
                    residual: res,
                });
            }
            let (p, q) = deinterleave(&x, g.nr);
            Ok((p, q, res))
        })
        .collect();
    let mut data = vec![Vec::with_capacity(g.ntheta), Vec::with_capacity(g.ntheta)];
    let mut solver_residual: f64 = 0.0;
    for s in solved {
        let (p, q, res) = s?;
        data[0].push(p);
        data[1].push(q);
        solver_residual = solver_residual.max(res);
    }
    let potential = from_modes(&Modes {
        order: 1,
        grid: g,
        data,
    })?;
    let du = dirichlet_sym_derivative(&potential)?;
    let solenoidal = f.sub(&du)?;

    let fnorm = f.norm();
    let rel = |x: f64| if fnorm == 0.0 { x } else { x / fnorm };
    let decomposition_residual = rel(f.sub(&solenoidal)?.sub(&du)?.norm());
    let divergence_residual = rel(divergence(&solenoidal)?.norm_on(g.interior_rows()));
    let denom = solenoidal.norm() * du.norm();
    let orthogonality = if denom == 0.0 {
        0.0
    } else {
        solenoidal.inner(&du)?.abs() / denom
    };
    Ok(SolenoidalDecomposition {
        solenoidal,
        potential,
        report: SolenoidalReport {
            solver_residual,
            decomposition_residual,
            divergence_residual,
            orthogonality,
        },
    })
}

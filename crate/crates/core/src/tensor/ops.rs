//! `D`, `D*` and `Δ = D*D` on the cusp chart: Fourier in `θ`, second-order
//! finite differences in `r`. In the orthonormal coframe the operators are
//!
//! ```text
//! D u  = (∂_r u, y∂_θ u)
//! D p  = (∂_r P,  y∂_θ Q − P,  ½(∂_r Q + y∂_θ P + Q))
//! D*p  = ∂_r P − P + y∂_θ Q
//! D*f  = (∂_r A − A + C + y∂_θ B,  ∂_r B − 2B + y∂_θ C)
//! ```
//!
//! with `y = e^r`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::field::{SymTensorField, TensorGrid};
use crate::error::{invalid, Result};
use crate::spectral::{signed_index, Transform};

/// Per-θ-mode data: `data[c][n][i]` for component `c`, mode `n`, row `i`.
#[derive(Clone, Debug)]
pub(crate) struct Modes {
    pub order: usize,
    pub grid: TensorGrid,
    pub data: Vec<Vec<Vec<C64>>>,
}

pub(crate) fn to_modes(f: &SymTensorField) -> Modes {
    let g = *f.grid();
    let t = Transform::new(g.ntheta);
    let data = f
        .components()
        .iter()
        .map(|comp| {
            let mut modes = vec![vec![C64::new(0.0, 0.0); g.nr]; g.ntheta];
            let mut row = vec![C64::new(0.0, 0.0); g.ntheta];
            for i in 0..g.nr {
                for k in 0..g.ntheta {
                    row[k] = C64::new(comp[g.index(i, k)], 0.0);
                }
                t.forward(&mut row);
                for (n, m) in modes.iter_mut().enumerate() {
                    m[i] = row[n];
                }
            }
            modes
        })
        .collect();
    Modes {
        order: f.order(),
        grid: g,
        data,
    }
}

pub(crate) fn from_modes(m: &Modes) -> Result<SymTensorField> {
    let g = m.grid;
    let t = Transform::new(g.ntheta);
    let comps = m
        .data
        .iter()
        .map(|modes| {
            let mut out = vec![0.0; g.len()];
            let mut row = vec![C64::new(0.0, 0.0); g.ntheta];
            for i in 0..g.nr {
                for (n, r) in row.iter_mut().enumerate() {
                    *r = modes[n][i];
                }
                t.inverse(&mut row);
                for k in 0..g.ntheta {
                    out[g.index(i, k)] = row[k].re;
                }
            }
            out
        })
        .collect();
    SymTensorField::new(m.order, g, comps)
}

/// `∂_θ` symbol of mode `n`; the Nyquist mode of an even grid is dropped.
pub(crate) fn kappa(g: &TensorGrid, n: usize) -> f64 {
    if g.ntheta.is_multiple_of(2) && n == g.ntheta / 2 {
        return 0.0;
    }
    2.0 * std::f64::consts::PI * signed_index(n, g.ntheta) as f64 / g.theta_period
}

/// Centered differences inside, one-sided second order at both ends.
pub(crate) fn fd(v: &[C64], h: f64) -> Vec<C64> {
    let n = v.len();
    let s = 0.5 / h;
    let mut out = vec![C64::new(0.0, 0.0); n];
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) * s;
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - v[i - 1]) * s;
    }
    out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) * s;
    out
}

/// Centered differences with odd reflection about both end values: the
/// closure for data pinned by Dirichlet conditions. Unlike the one-sided
/// closure it treats the even and odd sublattices alike.
pub(crate) fn fd_reflect(v: &[C64], h: f64) -> Vec<C64> {
    let n = v.len();
    let s = 0.5 / h;
    let mut out = vec![C64::new(0.0, 0.0); n];
    out[0] = (v[1] - v[0]) * (2.0 * s);
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - v[i - 1]) * s;
    }
    out[n - 1] = (v[n - 1] - v[n - 2]) * (2.0 * s);
    out
}

/// Transpose of [`fd`] or, with `reflect`, of [`fd_reflect`].
pub(crate) fn fd_transpose(g: &[C64], h: f64, reflect: bool) -> Vec<C64> {
    let n = g.len();
    let s = 0.5 / h;
    let mut out = vec![C64::new(0.0, 0.0); n];
    if reflect {
        out[0] -= 2.0 * s * g[0];
        out[1] += 2.0 * s * g[0];
    } else {
        out[0] += -3.0 * s * g[0];
        out[1] += 4.0 * s * g[0];
        out[2] += -s * g[0];
    }
    for i in 1..n - 1 {
        out[i + 1] += s * g[i];
        out[i - 1] -= s * g[i];
    }
    if reflect {
        out[n - 1] += 2.0 * s * g[n - 1];
        out[n - 2] -= 2.0 * s * g[n - 1];
    } else {
        out[n - 1] += 3.0 * s * g[n - 1];
        out[n - 2] += -4.0 * s * g[n - 1];
        out[n - 3] += s * g[n - 1];
    }
    out
}

/// Row data shared by the mode operators.
#[derive(Clone)]
pub(crate) struct ModeCtx {
    pub h: f64,
    /// `i κ e^{r_i}`.
    pub ike: Vec<C64>,
    /// Trapezoid weight times `e^{-r_i}`.
    pub mu: Vec<f64>,
    /// Use the Dirichlet (reflection) closure in `r`.
    pub dirichlet: bool,
}

impl ModeCtx {
    pub fn new(g: &TensorGrid, n: usize) -> Self {
        let k = kappa(g, n);
        Self {
            h: g.hr(),
            ike: (0..g.nr).map(|i| C64::new(0.0, k * g.r(i).exp())).collect(),
            mu: (0..g.nr).map(|i| g.measure(i) / g.htheta()).collect(),
            dirichlet: false,
        }
    }

    pub fn with_dirichlet(mut self) -> Self {
        self.dirichlet = true;
        self
    }

    fn dr(&self, v: &[C64]) -> Vec<C64> {
        if self.dirichlet {
            fd_reflect(v, self.h)
        } else {
            fd(v, self.h)
        }
    }

    fn weighted_fd_transpose(&self, v: &[C64]) -> Vec<C64> {
        let w: Vec<C64> = v.iter().zip(&self.mu).map(|(x, m)| x * m).collect();
        fd_transpose(&w, self.h, self.dirichlet)
            .into_iter()
            .zip(&self.mu)
            .map(|(x, m)| -x / m)
            .collect()
    }
}

pub(crate) fn d_mode(order: usize, u: &[Vec<C64>], c: &ModeCtx) -> Vec<Vec<C64>> {
    match order {
        0 => {
            let du = c.dr(&u[0]);
            let dt = u[0].iter().zip(&c.ike).map(|(x, k)| x * k).collect();
            vec![du, dt]
        }
        _ => {
            let (p, q) = (&u[0], &u[1]);
            let (dp, dq) = (c.dr(p), c.dr(q));
            let n = p.len();
            let a = dp;
            let cc = (0..n).map(|i| c.ike[i] * q[i] - p[i]).collect();
            let b = (0..n)
                .map(|i| 0.5 * (dq[i] + c.ike[i] * p[i] + q[i]))
                .collect();
            vec![a, cc, b]
        }
    }
}

pub(crate) fn div_mode(order: usize, f: &[Vec<C64>], c: &ModeCtx) -> Vec<Vec<C64>> {
    match order {
        1 => {
            let (p, q) = (&f[0], &f[1]);
            let dp = fd(p, c.h);
            vec![(0..p.len())
                .map(|i| dp[i] - p[i] + c.ike[i] * q[i])
                .collect()]
        }
        _ => {
            let (a, cc, b) = (&f[0], &f[1], &f[2]);
            let (da, db) = (fd(a, c.h), fd(b, c.h));
            let n = a.len();
            vec![
                (0..n)
                    .map(|i| da[i] - a[i] + cc[i] + c.ike[i] * b[i])
                    .collect(),
                (0..n)
                    .map(|i| db[i] - 2.0 * b[i] + c.ike[i] * cc[i])
                    .collect(),
            ]
        }
    }
}

/// `−W^{-1} D_h^* W`: minus the adjoint of the discrete `D` for the discrete
/// hyperbolic pairing.
pub(crate) fn div_adjoint_mode(order: usize, f: &[Vec<C64>], c: &ModeCtx) -> Vec<Vec<C64>> {
    match order {
        1 => {
            let (p, q) = (&f[0], &f[1]);
            let tp = c.weighted_fd_transpose(p);
            vec![(0..p.len()).map(|i| tp[i] + c.ike[i] * q[i]).collect()]
        }
        _ => {
            let (a, cc, b) = (&f[0], &f[1], &f[2]);
            let (ta, tb) = (c.weighted_fd_transpose(a), c.weighted_fd_transpose(b));
            let n = a.len();
            vec![
                (0..n).map(|i| ta[i] + cc[i] + c.ike[i] * b[i]).collect(),
                (0..n).map(|i| tb[i] - b[i] + c.ike[i] * cc[i]).collect(),
            ]
        }
    }
}

fn map_modes<F>(f: &SymTensorField, out_order: usize, op: F) -> Result<SymTensorField>
where
    F: Fn(&[Vec<C64>], &ModeCtx) -> Vec<Vec<C64>> + Sync,
{
    let m = to_modes(f);
    let g = m.grid;
    let per_mode: Vec<Vec<Vec<C64>>> = (0..g.ntheta)
        .into_par_iter()
        .map(|n| {
            let input: Vec<Vec<C64>> = m.data.iter().map(|c| c[n].clone()).collect();
            op(&input, &ModeCtx::new(&g, n))
        })
        .collect();
    let data = (0..=out_order)
        .map(|c| per_mode.iter().map(|pm| pm[c].clone()).collect())
        .collect();
    from_modes(&Modes {
        order: out_order,
        grid: g,
        data,
    })
}

/// `D` for a 1-form vanishing on both truncation boundaries, with the
/// reflection closure used by [`solenoidal_project`](super::solenoidal_project).
pub fn dirichlet_sym_derivative(p: &SymTensorField) -> Result<SymTensorField> {
    if p.order() > 1 {
        return invalid("D is implemented for functions and 1-forms");
    }
    if p.boundary_sup(1) != 0.0 {
        return invalid("Dirichlet derivative needs a field vanishing on the boundary rows");
    }
    let order = p.order();
    map_modes(p, order + 1, |u, c| {
        d_mode(
            order,
            u,
            &ModeCtx {
                dirichlet: true,
                ..c.clone()
            },
        )
    })
}

/// Symmetric derivative `D = 𝒮∇` of a function or 1-form.
pub fn sym_derivative(p: &SymTensorField) -> Result<SymTensorField> {
    if p.order() > 1 {
        return invalid("D is implemented for functions and 1-forms");
    }
    let order = p.order();
    map_modes(p, order + 1, |u, c| d_mode(order, u, c))
}

/// Divergence `D* = tr ∇` with consistent second-order stencils.
pub fn divergence(f: &SymTensorField) -> Result<SymTensorField> {
    if f.order() == 0 {
        return invalid("divergence of a function is undefined");
    }
    let order = f.order();
    map_modes(f, order - 1, |u, c| div_mode(order, u, c))
}

/// Divergence defined as minus the exact adjoint of the discrete `D` under
/// the discrete hyperbolic pairing. Equals [`divergence`] up to `O(h²)` away
/// from the two boundary rows on each side.
pub fn adjoint_divergence(f: &SymTensorField) -> Result<SymTensorField> {
    if f.order() == 0 {
        return invalid("divergence of a function is undefined");
    }
    let order = f.order();
    map_modes(f, order - 1, |u, c| div_adjoint_mode(order, u, c))
}

/// `Δ = D*D` on 1-forms.
pub fn sym_laplacian(u: &SymTensorField) -> Result<SymTensorField> {
    if u.order() != 1 {
        return invalid("Δ acts on 1-forms");
    }
    divergence(&sym_derivative(u)?)
}

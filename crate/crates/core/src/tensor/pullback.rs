use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::field::{SymTensorField, TensorGrid};
use super::ops::to_modes;
use crate::error::{invalid, Result};
use crate::spectral::signed_index;

/// A point `(r, θ)` of the chart and a unit tangent given by its components
/// `(v_y, v_θ)` on the orthonormal frame `(y∂_y, y∂_θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentSample {
    pub r: f64,
    pub theta: f64,
    pub v: [f64; 2],
}

/// Band-limited interpolant of a field: trigonometric in `θ`, six-point
/// Lagrange in `r`.
#[derive(Clone, Debug)]
pub struct FieldInterpolator {
    order: usize,
    grid: TensorGrid,
    /// `modes[c][i][n] / ntheta`.
    modes: Vec<Vec<Vec<C64>>>,
    /// Modes carrying any energy, with their signed indices.
    active: Vec<(usize, i64)>,
}

impl FieldInterpolator {
    pub fn new(f: &SymTensorField) -> Self {
        let m = to_modes(f);
        let g = m.grid;
        let modes = m
            .data
            .iter()
            .map(|c| {
                (0..g.nr)
                    .map(|i| (0..g.ntheta).map(|n| c[n][i] / g.ntheta as f64).collect())
                    .collect()
            })
            .collect::<Vec<Vec<Vec<C64>>>>();
        let size = |n: usize| {
            modes
                .iter()
                .flat_map(|c| c.iter().map(move |row| row[n].norm()))
                .fold(0.0, f64::max)
        };
        let peak = (0..g.ntheta).map(size).fold(0.0, f64::max);
        let active = (0..g.ntheta)
            .filter(|&n| size(n) > 1e-14 * peak)
            .map(|n| (n, signed_index(n, g.ntheta)))
            .collect();
        Self {
            order: f.order(),
            grid: g,
            modes,
            active,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    /// Frame components at `(r, θ)`; `r` must lie in the grid range.
    pub fn eval(&self, r: f64, theta: f64) -> Result<Vec<f64>> {
        Ok(self.jet(r, theta)?.value)
    }

    /// Components with their `∂_r` and `∂_θ` derivatives (those of the interpolant).
    pub fn jet(&self, r: f64, theta: f64) -> Result<Jet> {
        let g = &self.grid;
        if !(r >= g.r_min - 1e-12 && r <= g.r_max + 1e-12) {
            return invalid(format!("r = {r} outside [{}, {}]", g.r_min, g.r_max));
        }
        let h = g.hr();
        let npts = 6.min(g.nr);
        let x = (r - g.r_min) / h;
        let first =
            ((x.floor() as i64) - (npts as i64 / 2 - 1)).clamp(0, (g.nr - npts) as i64) as usize;
        let node = |a: usize| (first + a) as f64;
        let weights: Vec<f64> = (0..npts)
            .map(|a| {
                (0..npts)
                    .filter(|&b| b != a)
                    .map(|b| (x - node(b)) / (node(a) - node(b)))
                    .product()
            })
            .collect();
        // derivative of the Lagrange basis, per unit of r
        let dweights: Vec<f64> = (0..npts)
            .map(|a| {
                let denom: f64 = (0..npts)
                    .filter(|&b| b != a)
                    .map(|b| node(a) - node(b))
                    .product();
                let num: f64 = (0..npts)
                    .filter(|&m| m != a)
                    .map(|m| {
                        (0..npts)
                            .filter(|&b| b != a && b != m)
                            .map(|b| x - node(b))
                            .product::<f64>()
                    })
                    .sum();
                num / denom / h
            })
            .collect();
        let nt = g.ntheta;
        let base = 2.0 * std::f64::consts::PI / g.theta_period;
        let unit = C64::from_polar(1.0, base * theta);
        let (phase, dphase): (Vec<C64>, Vec<C64>) = self
            .active
            .iter()
            .map(|&(n, k)| {
                let p = if k >= 0 {
                    unit.powi(k as i32)
                } else {
                    unit.conj().powi(-k as i32)
                };
                let nyquist = nt.is_multiple_of(2) && n == nt / 2;
                (
                    p,
                    if nyquist {
                        C64::new(0.0, 0.0)
                    } else {
                        p * C64::new(0.0, base * k as f64)
                    },
                )
            })
            .unzip();
        let mut jet = Jet::default();
        for c in &self.modes {
            let (mut v, mut dr, mut dt) =
                (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for a in 0..npts {
                let row = &c[first + a];
                let (mut s, mut sd) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for (j, &(n, _)) in self.active.iter().enumerate() {
                    s += row[n] * phase[j];
                    sd += row[n] * dphase[j];
                }
                v += s * weights[a];
                dr += s * dweights[a];
                dt += sd * weights[a];
            }
            jet.value.push(v.re);
            jet.dr.push(dr.re);
            jet.dtheta.push(dt.re);
        }
        Ok(jet)
    }
}

/// Frame components of a field at a point with their first derivatives.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Jet {
    pub value: Vec<f64>,
    pub dr: Vec<f64>,
    pub dtheta: Vec<f64>,
}

/// `D p = (A, C, B)` at a point of height `y = e^r` from the 1-jet of `p = (P, Q)`.
pub fn sym_derivative_at(y: f64, jet: &Jet) -> [f64; 3] {
    let (p, q) = (jet.value[0], jet.value[1]);
    [
        jet.dr[0],
        y * jet.dtheta[1] - p,
        0.5 * (jet.dr[1] + y * jet.dtheta[0] + q),
    ]
}

/// `h_x(v, …, v)` from frame components.
pub fn contract(order: usize, comps: &[f64], v: [f64; 2]) -> f64 {
    match order {
        0 => comps[0],
        1 => comps[0] * v[0] + comps[1] * v[1],
        _ => comps[0] * v[0] * v[0] + comps[1] * v[1] * v[1] + 2.0 * comps[2] * v[0] * v[1],
    }
}

/// `π_m^* h` at each sample.
pub fn pullback_pi_m(f: &SymTensorField, samples: &[TangentSample]) -> Result<Vec<f64>> {
    let interp = FieldInterpolator::new(f);
    samples
        .iter()
        .map(|s| {
            let n2 = s.v[0] * s.v[0] + s.v[1] * s.v[1];
            if (n2 - 1.0).abs() > 1e-10 {
                return invalid(format!("direction {:?} is not unit length", s.v));
            }
            Ok(contract(f.order(), &interp.eval(s.r, s.theta)?, s.v))
        })
        .collect()
}

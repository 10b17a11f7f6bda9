//! Pointwise check of the left indicial inverse of the Sasaki gradient on the
//! unit tangent bundle of a hyperbolic surface cusp.
//!
//! Coordinates on `TZ` are `(y, θ, v_y, v_θ)`. The Sasaki metric is built from
//! the Christoffel symbols of `(dy² + dθ²)/y²`, so nothing below assumes the
//! frame is orthonormal; the normalizations are measured, not imposed.
//!
//! Normalization used for the horizontal fields (both have unit Sasaki norm):
//! `U = y∂_y + v_y∂_{v_y} + v_θ∂_{v_θ}`, `V = y∂_θ + v_y∂_{v_θ} − v_θ∂_{v_y}`.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Sample grid on the unit circle of `T_xZ` at height `base_height`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CircleGrid {
    pub points: usize,
    pub base_height: f64,
}

impl Default for CircleGrid {
    fn default() -> Self {
        Self {
            points: 64,
            base_height: 1.7,
        }
    }
}

/// Recorded normalization constants of the horizontal fields.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FrameNormalization {
    pub u_norm: f64,
    pub v_norm: f64,
    pub u_dot_v: f64,
}

impl CircleGrid {
    fn validate(&self) -> Result<()> {
        if self.points < 4 || !(self.base_height > 0.0) {
            return invalid("circle grid needs at least 4 points and a positive base height");
        }
        Ok(())
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.points)
            .map(|j| 2.0 * PI * j as f64 / self.points as f64)
            .collect()
    }

    /// Unit tangent (coordinate components) at fiber angle `phi`.
    fn velocity(&self, phi: f64) -> (f64, f64) {
        (self.base_height * phi.cos(), self.base_height * phi.sin())
    }
}

/// Christoffel contraction `(Γv)^k_j = Γ^k_{ij} v^i` for the hyperbolic metric.
fn gamma_v(y: f64, vy: f64, vt: f64) -> nalgebra::Matrix2<f64> {
    // Γ^y_yy = -1/y, Γ^y_θθ = 1/y, Γ^θ_yθ = Γ^θ_θy = -1/y
    nalgebra::Matrix2::new(-vy / y, vt / y, -vt / y, -vy / y)
}

/// Sasaki metric at `(y, ·, v)` in the coordinate basis.
fn sasaki_metric(y: f64, vy: f64, vt: f64) -> Matrix4<f64> {
    let g = nalgebra::Matrix2::identity() / (y * y);
    let gv = gamma_v(y, vy, vt);
    let mut s = Matrix4::zeros();
    s.fixed_view_mut::<2, 2>(0, 0)
        .copy_from(&(g + gv.transpose() * g * gv));
    s.fixed_view_mut::<2, 2>(0, 2)
        .copy_from(&(gv.transpose() * g));
    s.fixed_view_mut::<2, 2>(2, 0).copy_from(&(g * gv));
    s.fixed_view_mut::<2, 2>(2, 2).copy_from(&g);
    s
}

fn u_field(y: f64, vy: f64, vt: f64) -> Vector4<f64> {
    Vector4::new(y, 0.0, vy, vt)
}

fn v_field(y: f64, vy: f64, vt: f64) -> Vector4<f64> {
    Vector4::new(0.0, y, -vt, vy)
}

pub fn frame_normalization(grid: &CircleGrid, phi: f64) -> FrameNormalization {
    let y = grid.base_height;
    let (vy, vt) = grid.velocity(phi);
    let s = sasaki_metric(y, vy, vt);
    let (u, v) = (u_field(y, vy, vt), v_field(y, vy, vt));
    FrameNormalization {
        u_norm: (u.transpose() * s * u)[0].sqrt(),
        v_norm: (v.transpose() * s * v)[0].sqrt(),
        u_dot_v: (u.transpose() * s * v)[0],
    }
}

fn spectral_derivative(f: &[C64]) -> Vec<C64> {
    let n = f.len();
    let mut planner = FftPlanner::new();
    let mut buf = f.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let freq = if k <= n / 2 {
            k as f64
        } else {
            k as f64 - n as f64
        };
        // Nyquist mode has no well-defined derivative on an even grid
        let freq = if n.is_multiple_of(2) && k == n / 2 {
            0.0
        } else {
            freq
        };
        *c *= C64::new(0.0, freq) / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf
}

/// `y^{-λ} ∇_S(y^λ f̃)` at each fiber sample, as coordinate vectors; `f̃` is
/// the 0-homogeneous extension of the fiber function `f`.
pub fn apply_sasaki_indicial(lambda: C64, grid: &CircleGrid, f: &[C64]) -> Result<Vec<[C64; 4]>> {
    grid.validate()?;
    if f.len() != grid.points {
        return invalid("sample count does not match the circle grid");
    }
    let df = spectral_derivative(f);
    let y = grid.base_height;
    Ok(grid
        .angles()
        .iter()
        .enumerate()
        .map(|(j, &phi)| {
            let (vy, vt) = grid.velocity(phi);
            let s_inv = sasaki_metric(y, vy, vt)
                .try_inverse()
                .expect("Sasaki metric is positive definite");
            // differential of y^{-λ}·y^λ f̃: (λ f̃ / y, 0, ∇_v f̃)
            let vnorm = y; // Euclidean length of a g-unit vector at height y
            let dv = [-phi.sin() / vnorm, phi.cos() / vnorm];
            let d = [
                lambda * f[j] / y,
                C64::new(0.0, 0.0),
                df[j] * dv[0],
                df[j] * dv[1],
            ];
            let mut w = [C64::new(0.0, 0.0); 4];
            for (a, wa) in w.iter_mut().enumerate() {
                for (b, db) in d.iter().enumerate() {
                    *wa += *db * s_inv[(a, b)];
                }
            }
            w
        })
        .collect())
}

/// `W(λ)(w) = λ^{-1} g_S(w, U)` at each fiber sample.
pub fn apply_left_inverse(lambda: C64, grid: &CircleGrid, w: &[[C64; 4]]) -> Result<Vec<C64>> {
    grid.validate()?;
    if lambda.norm() == 0.0 {
        return invalid("λ = 0 is the indicial root of ∇_S");
    }
    let y = grid.base_height;
    Ok(grid
        .angles()
        .iter()
        .zip(w)
        .map(|(&phi, wj)| {
            let (vy, vt) = grid.velocity(phi);
            let su = sasaki_metric(y, vy, vt) * u_field(y, vy, vt);
            let g: C64 = (0..4).map(|a| wj[a] * su[a]).sum();
            g / lambda
        })
        .collect())
}

/// Max residual of `W(λ) I(∇_S, λ) f − f` over the grid.
pub fn sphere_fibered_inverse_check(lambda: C64, grid: &CircleGrid, f: &[C64]) -> Result<f64> {
    perturbed_inverse_residual(lambda, grid, f, 0.0)
}

/// Same as [`sphere_fibered_inverse_check`] after adding `delta·U` to the
/// gradient; the residual is `|δ|·|λ|^{-1}`, exposing the `λ^{-1}` blow-up.
pub fn perturbed_inverse_residual(
    lambda: C64,
    grid: &CircleGrid,
    f: &[C64],
    delta: f64,
) -> Result<f64> {
    if lambda.norm() == 0.0 {
        return invalid("λ = 0 is the indicial root of ∇_S");
    }
    let mut w = apply_sasaki_indicial(lambda, grid, f)?;
    if delta != 0.0 {
        let y = grid.base_height;
        for (wj, phi) in w.iter_mut().zip(grid.angles()) {
            let (vy, vt) = grid.velocity(phi);
            let u = u_field(y, vy, vt);
            for a in 0..4 {
                wj[a] += C64::new(delta * u[a], 0.0);
            }
        }
    }
    let back = apply_left_inverse(lambda, grid, &w)?;
    Ok(back
        .iter()
        .zip(f)
        .map(|(b, f)| (b - f).norm())
        .fold(0.0, f64::max))
}

/// Components of `I(∇_S,λ)f` on the orthonormal frame `(vertical, U, V)`.
pub fn frame_components(lambda: C64, grid: &CircleGrid, f: &[C64]) -> Result<Vec<[C64; 3]>> {
    let w = apply_sasaki_indicial(lambda, grid, f)?;
    let y = grid.base_height;
    Ok(grid
        .angles()
        .iter()
        .zip(&w)
        .map(|(&phi, wj)| {
            let (vy, vt) = grid.velocity(phi);
            let s = sasaki_metric(y, vy, vt);
            let vert = Vector4::new(0.0, 0.0, -vt, vy);
            let frame = [vert, u_field(y, vy, vt), v_field(y, vy, vt)];
            frame.map(|e| {
                let se = s * e;
                (0..4).map(|a| wj[a] * se[a]).sum::<C64>()
            })
        })
        .collect())
}

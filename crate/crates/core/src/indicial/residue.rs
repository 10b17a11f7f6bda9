//! Laurent expansion of `I(A,λ)^{-1}` around a root by contour quadrature,
//! residue ranks and Fredholm index jumps across weight lines.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::family::{indicial_family, IndicialFamily};
use super::spec::OperatorSpec;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ContourConfig {
    pub radius: f64,
    pub nodes: usize,
    /// Relative singular-value threshold for numerical rank.
    pub rank_tol: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self {
            radius: 1e-2,
            nodes: 64,
            rank_tol: 1e-8,
        }
    }
}

/// Principal part `Σ_{k=1}^{p} a_{-k} (λ − centre)^{-k}` of a (left) inverse.
#[derive(Clone, Debug)]
pub struct PrincipalPart {
    pub centre: C64,
    pub radius: f64,
    /// `a_{-1}, a_{-2}, …, a_{-p}`.
    pub coefficients: Vec<DMatrix<C64>>,
}

impl PrincipalPart {
    pub fn pole_order(&self) -> usize {
        self.coefficients.len()
    }
}

/// `I(A,λ)^{-1}` for square families, `(R I(A,λ))^{-1} R` for tall ones.
pub fn left_inverse(fam: &IndicialFamily, lambda: C64) -> Option<DMatrix<C64>> {
    let m = fam.eval(lambda);
    if fam.rows() == fam.cols() {
        m.try_inverse()
    } else {
        let r = fam.projection(1);
        (&r * m).try_inverse().map(|inv| inv * r)
    }
}

fn smallest_singular_ratio(m: &DMatrix<C64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    min / max.max(1.0)
}

pub fn principal_part(
    fam: &IndicialFamily,
    root: C64,
    cfg: &ContourConfig,
) -> Result<PrincipalPart> {
    if smallest_singular_ratio(&fam.eval(root)) > 1e-7 {
        return invalid(format!("{root} is not a root of {}", fam.name));
    }
    let char_roots = fam.characteristic_polynomial(1)?.roots()?;
    let here = 1e-6 * root.norm().max(1.0);
    let multiplicity: usize = char_roots
        .iter()
        .filter(|r| (r.value - root).norm() <= here)
        .map(|r| r.multiplicity)
        .sum();
    let nearest = char_roots
        .iter()
        .map(|r| (r.value - root).norm())
        .filter(|&d| d > here)
        .fold(f64::INFINITY, f64::min);
    let radius = cfg.radius.min(nearest / 3.0);
    let n = cfg.nodes;
    let kmax = (multiplicity.max(1) + 1).min(n / 2);

    let mut sums = vec![DMatrix::<C64>::zeros(fam.cols(), fam.rows()); kmax];
    for j in 0..n {
        let offset = C64::from_polar(radius, 2.0 * PI * j as f64 / n as f64);
        let inv = left_inverse(fam, root + offset).ok_or_else(|| Error::NumericFailure {
            message: format!("family singular on the contour around {root}"),
            residual: radius,
        })?;
        let mut power = offset;
        for s in sums.iter_mut() {
            *s += &inv * power;
            power *= offset;
        }
    }
    let coeffs: Vec<DMatrix<C64>> = sums.into_iter().map(|s| s.unscale(n as f64)).collect();
    // a_{-k} r^{-k} is the size of the k-th principal term on the contour
    let scaled: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(k, a)| a.norm() * radius.powi(-(k as i32 + 1)))
        .collect();
    let top = scaled.iter().cloned().fold(0.0, f64::max);
    let order = scaled
        .iter()
        .rposition(|&s| s > cfg.rank_tol * top)
        .map_or(0, |k| k + 1);
    Ok(PrincipalPart {
        centre: root,
        radius,
        coefficients: coeffs.into_iter().take(order).collect(),
    })
}

/// `(rank Π_λ, pole order)` at a root. The rank is the rank of the block
/// Hankel matrix of principal-part coefficients, which equals the dimension
/// of the space of asymptotic solutions `e^{λr} Σ r^k f_k`.
pub fn residue_rank(
    fam: &IndicialFamily,
    root: C64,
    cfg: &ContourConfig,
) -> Result<(usize, usize)> {
    let pp = principal_part(fam, root, cfg)?;
    let p = pp.pole_order();
    if p == 0 {
        return Ok((0, 0));
    }
    let (br, bc) = (fam.cols(), fam.rows());
    let mut h = DMatrix::<C64>::zeros(p * br, p * bc);
    for i in 0..p {
        for j in 0..p - i {
            let k = i + j;
            let block = &pp.coefficients[k] * C64::new(pp.radius.powi(-(k as i32 + 1)), 0.0);
            h.view_mut((i * br, j * bc), (br, bc)).copy_from(&block);
        }
    }
    let sv = h.svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > cfg.rank_tol * top).count();
    Ok((rank, p))
}

/// Change of Fredholm index when the weight moves from `rho_from` to
/// `rho_to` (weights in the `y^ρ` convention; the lines crossed are
/// `Re λ = d/2 + ρ`). Swapping the endpoints flips the sign.
pub fn index_jump(spec: &OperatorSpec, rho_from: f64, rho_to: f64) -> Result<i64> {
    let fam = indicial_family(spec)?;
    let shift = spec.dim_d as f64 / 2.0;
    let (lo, hi) = (shift + rho_from.min(rho_to), shift + rho_from.max(rho_to));
    let roots = fam.root_multiset()?;
    for r in &roots {
        for line in [lo, hi] {
            if (r.value.re - line).abs() < 1e-9 {
                return invalid(format!(
                    "weight line Re λ = {line} passes through the root {}",
                    r.value
                ));
            }
        }
    }
    let mut total = 0i64;
    for r in roots.iter().filter(|r| r.value.re > lo && r.value.re < hi) {
        let (rank, _) = residue_rank(&fam, r.value, &ContourConfig::default())?;
        total += rank as i64;
    }
    Ok(if rho_to >= rho_from { total } else { -total })
}

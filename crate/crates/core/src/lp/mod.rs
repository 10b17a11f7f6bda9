//! Littlewood-Paley blocks on the zero mode. In `r = log y` the operators
//! `Op(φ_j)` are Fourier multipliers with `φ_0 = ψ(⟨ξ⟩)` and
//! `φ_j = ψ(2^{-j}⟨ξ⟩) − ψ(2^{1-j}⟨ξ⟩)`, `⟨ξ⟩ = (1 + ξ²)^{1/2}`.
//!
//! All norms act on the stored (weighted) representative of the field.

use std::io::Write;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mode0::{ModeZeroField, RGrid};
use crate::spectral::{angular_frequencies, smooth_step, Transform};

#[cfg(test)]
mod tests;

/// Radial cutoff: 1 on `[0, 1]`, 0 beyond 2.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Degree-5 smoothstep (`C²`).
    #[default]
    Quintic,
    /// `C^∞` transition built from `e^{-1/t}`.
    Smooth,
}

impl Profile {
    pub fn psi(self, t: f64) -> f64 {
        let t = t.abs();
        if t <= 1.0 {
            return 1.0;
        }
        if t >= 2.0 {
            return 0.0;
        }
        let x = t - 1.0;
        match self {
            Profile::Quintic => 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x),
            Profile::Smooth => 1.0 - smooth_step(x),
        }
    }
}

pub fn bracket(xi: f64) -> f64 {
    (1.0 + xi * xi).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicMultiplier {
    pub j: usize,
    pub profile: Profile,
}

impl DyadicMultiplier {
    pub fn new(j: usize, profile: Profile) -> Self {
        Self { j, profile }
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let b = bracket(xi);
        let outer = self.profile.psi(b / 2f64.powi(self.j as i32));
        if self.j == 0 {
            outer
        } else {
            outer - self.profile.psi(b / 2f64.powi(self.j as i32 - 1))
        }
    }
}

/// Index of the last block the grid resolves: `2^J ≥ ⟨ξ_Nyquist⟩`, so blocks
/// `0..=J` sum to the identity.
pub fn max_block(grid: &RGrid) -> usize {
    let nyquist = std::f64::consts::PI / grid.step();
    bracket(nyquist).log2().ceil().max(0.0) as usize
}

fn check_input(u: &ModeZeroField) -> Result<()> {
    let scale = u.max_norm();
    let ends =
        crate::mode0::vec_norm(u.weighted(0)).max(crate::mode0::vec_norm(u.weighted(u.len() - 1)));
    if ends > 1e-12 * scale {
        return invalid("field must be windowed (vanish at both grid ends)");
    }
    Ok(())
}

struct Spectrum {
    transform: Transform,
    hat: Vec<Vec<C64>>,
    xi: Vec<f64>,
}

impl Spectrum {
    fn new(u: &ModeZeroField) -> Self {
        let n = u.len();
        let transform = Transform::new(n);
        let hat = (0..u.components())
            .map(|c| {
                let mut buf = u.component(c);
                transform.forward(&mut buf);
                buf
            })
            .collect();
        Self {
            transform,
            hat,
            xi: angular_frequencies(n, u.grid().step()),
        }
    }

    fn apply(&self, u: &ModeZeroField, m: DyadicMultiplier) -> Result<ModeZeroField> {
        let symbol: Vec<f64> = self.xi.iter().map(|&x| m.eval(x)).collect();
        let comps: Vec<Vec<C64>> = self
            .hat
            .iter()
            .map(|h| {
                let mut buf: Vec<C64> = h.iter().zip(&symbol).map(|(z, s)| z * s).collect();
                self.transform.inverse(&mut buf);
                buf
            })
            .collect();
        let samples = (0..u.len())
            .map(|j| comps.iter().map(|c| c[j]).collect())
            .collect();
        ModeZeroField::new(*u.grid(), u.weight(), samples)
    }
}

/// `Op(φ_j) u` with the default profile.
pub fn lp_block(u: &ModeZeroField, j: usize) -> Result<ModeZeroField> {
    lp_block_with(u, j, Profile::Quintic)
}

pub fn lp_block_with(u: &ModeZeroField, j: usize, profile: Profile) -> Result<ModeZeroField> {
    check_input(u)?;
    let top = max_block(u.grid());
    if j > top {
        return Err(Error::Resolution(format!(
            "block {j} lies beyond the Nyquist frequency (last block {top})"
        )));
    }
    Spectrum::new(u).apply(u, DyadicMultiplier::new(j, profile))
}

/// Blocks `0..=max_block`, which sum to `u`.
pub fn lp_blocks(u: &ModeZeroField, profile: Profile) -> Result<Vec<ModeZeroField>> {
    check_input(u)?;
    let spec = Spectrum::new(u);
    (0..=max_block(u.grid()))
        .into_par_iter()
        .map(|j| spec.apply(u, DyadicMultiplier::new(j, profile)))
        .collect()
}

/// `sup_j ‖Op(φ_j)u‖_∞` for every resolved block.
pub fn block_norms(u: &ModeZeroField, profile: Profile) -> Result<Vec<f64>> {
    Ok(lp_blocks(u, profile)?
        .iter()
        .map(ModeZeroField::max_norm)
        .collect())
}

fn zygmund_from_blocks(norms: &[f64], s: f64) -> f64 {
    norms
        .iter()
        .enumerate()
        .map(|(j, n)| 2f64.powf(j as f64 * s) * n)
        .fold(0.0, f64::max)
}

/// `sup_j 2^{js} ‖Op(φ_j)u‖_∞` over the resolved blocks.
pub fn zygmund_norm(u: &ModeZeroField, s: f64) -> Result<f64> {
    zygmund_norm_with(u, s, Profile::Quintic)
}

pub fn zygmund_norm_with(u: &ModeZeroField, s: f64, profile: Profile) -> Result<f64> {
    Ok(zygmund_from_blocks(&block_norms(u, profile)?, s))
}

/// Pairs are compared up to this distance in `r` by [`holder_norm`].
pub const HOLDER_CAP: f64 = 1.0;

/// `sup|u| + sup |u(r) − u(r')| / |r − r'|^s` over grid pairs with `|r − r'| ≤ HOLDER_CAP`.
pub fn holder_norm(u: &ModeZeroField, s: f64) -> Result<f64> {
    holder_norm_capped(u, s, HOLDER_CAP)
}

pub fn holder_norm_capped(u: &ModeZeroField, s: f64, cap: f64) -> Result<f64> {
    Ok(u.max_norm() + holder_seminorm(u, s, cap)?)
}

pub fn holder_seminorm(u: &ModeZeroField, s: f64, cap: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return invalid(format!("Hölder exponent must lie in (0, 1), got {s}"));
    }
    if !(cap > 0.0) {
        return invalid(format!("distance cap must be positive, got {cap}"));
    }
    let h = u.grid().step();
    let n = u.len();
    let reach = ((cap / h).floor() as usize).clamp(1, n - 1);
    let denom: Vec<f64> = (1..=reach).map(|k| (k as f64 * h).powf(s)).collect();
    Ok((0..n - 1)
        .into_par_iter()
        .map(|a| {
            let va = u.weighted(a);
            let mut best: f64 = 0.0;
            for k in 1..=reach.min(n - 1 - a) {
                let d: f64 = va
                    .iter()
                    .zip(u.weighted(a + k))
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                best = best.max(d / denom[k - 1]);
            }
            best
        })
        .reduce(|| 0.0, f64::max))
}

/// Least-squares slope of `log₂ ‖Op(φ_j)u‖_∞` against `j`, negated; blocks
/// at or below `floor` are dropped.
pub fn decay_exponent(
    norms: &[f64],
    js: std::ops::RangeInclusive<usize>,
    floor: f64,
) -> Option<f64> {
    let pts: Vec<(f64, f64)> = js
        .filter(|&j| j < norms.len() && norms[j] > floor)
        .map(|j| (j as f64, norms[j].log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / m,
        pts.iter().map(|p| p.1).sum::<f64>() / m,
    );
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| {
        (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2))
    });
    Some(-sxy / sxx)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Interaction {
    pub j: usize,
    pub k: usize,
    /// `‖Op(φ_k) Op(φ_j) u‖_∞ / ‖u‖_∞`.
    pub relative: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InteractionReport {
    pub pairs: Vec<Interaction>,
    /// Largest `N` with `‖Op(φ_k)Op(φ_j)u‖ ≤ 2^{-N max(j,k)} ‖u‖` for every
    /// pair with `|j − k| ≥ 3`; `None` when every such interaction is exactly 0.
    pub exponent: Option<f64>,
}

/// Interactions `‖Op(φ_k)Op(φ_j)u‖_∞` over all resolved pairs with `|j − k| ≥ 3`.
pub fn interaction_report(u: &ModeZeroField, profile: Profile) -> Result<InteractionReport> {
    let blocks = lp_blocks(u, profile)?;
    let top = blocks.len() - 1;
    let scale = u.max_norm();
    if scale == 0.0 {
        return Ok(InteractionReport {
            pairs: vec![],
            exponent: None,
        });
    }
    let pairs: Vec<Interaction> = (0..=top)
        .flat_map(|j| {
            (0..=top)
                .filter(move |&k| j.abs_diff(k) >= 3)
                .map(move |k| (j, k))
        })
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(j, k)| {
            let spec = Spectrum::new(&blocks[j]);
            let b = spec.apply(&blocks[j], DyadicMultiplier::new(k, profile))?;
            Ok(Interaction {
                j,
                k,
                relative: b.max_norm() / scale,
            })
        })
        .collect::<Result<_>>()?;
    let exponent = pairs
        .iter()
        .filter(|p| p.relative > 0.0)
        .map(|p| -p.relative.log2() / p.j.max(p.k) as f64)
        .reduce(f64::min);
    Ok(InteractionReport { pairs, exponent })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub s: f64,
    pub profile: Profile,
    pub zygmund: Vec<f64>,
    pub holder: Vec<f64>,
    /// `zygmund / holder` per field.
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Smallest `C` with every ratio in `[1/C, C]`.
    pub constant: f64,
    pub warnings: Vec<String>,
}

/// Ratios `‖u‖_{C^s_*} / ‖u‖_{C^s}` across a family.
pub fn norm_equivalence_report(family: &[ModeZeroField], s: f64) -> Result<EquivalenceReport> {
    norm_equivalence_report_with(family, s, Profile::Quintic)
}

pub fn norm_equivalence_report_with(
    family: &[ModeZeroField],
    s: f64,
    profile: Profile,
) -> Result<EquivalenceReport> {
    if family.is_empty() {
        return invalid("test family is empty");
    }
    let pairs: Vec<(f64, f64)> = family
        .par_iter()
        .map(|u| Ok((zygmund_norm_with(u, s, profile)?, holder_norm(u, s)?)))
        .collect::<Result<_>>()?;
    let (zygmund, holder): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let ratios: Vec<f64> = zygmund.iter().zip(&holder).map(|(z, h)| z / h).collect();
    if ratios.iter().any(|r| !r.is_finite()) {
        return Err(Error::NumericFailure {
            message: "a field has zero Hölder norm".into(),
            residual: 0.0,
        });
    }
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if !(0.05..=0.95).contains(&s) {
        warnings.push(format!(
            "s = {s} is close to an integer; the equivalence constant degenerates there"
        ));
    }
    Ok(EquivalenceReport {
        s,
        profile,
        zygmund,
        holder,
        ratios,
        min_ratio,
        max_ratio,
        constant: max_ratio.max(1.0 / min_ratio),
        warnings,
    })
}

/// Real fields `χ(r) Σ_k a_k cos(ω_k r + φ_k)` with `modes` terms, `|ω_k| ≤ max_freq`
/// and `χ` the grid window. The first `n` fields do not depend on `count ≥ n`.
pub fn band_limited_family(
    grid: RGrid,
    count: usize,
    modes: usize,
    max_freq: f64,
    seed: u64,
) -> Result<Vec<ModeZeroField>> {
    grid.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let terms: Vec<(f64, f64, f64)> = (0..modes)
                .map(|_| {
                    (
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(0.0..max_freq),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect();
            ModeZeroField::from_fn(grid, 0.0, 1, |r| {
                let v: f64 = terms.iter().map(|(a, w, p)| a * (w * r + p).cos()).sum();
                vec![C64::new(grid.window(r) * v, 0.0)]
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LpReport {
    pub s: f64,
    pub profile: Profile,
    pub block_norms: Vec<f64>,
    pub zygmund_norm: f64,
    pub holder_norm: f64,
    /// Fitted `N` in `‖Op(φ_j)u‖ ∼ 2^{-Nj}` over blocks above rounding level.
    pub decay_exponent: Option<f64>,
}

pub fn lp_report(u: &ModeZeroField, s: f64, profile: Profile) -> Result<LpReport> {
    let norms = block_norms(u, profile)?;
    let floor = 1e-13 * u.max_norm();
    Ok(LpReport {
        s,
        profile,
        zygmund_norm: zygmund_from_blocks(&norms, s),
        holder_norm: holder_norm(u, s)?,
        decay_exponent: decay_exponent(&norms, 1..=norms.len() - 1, floor),
        block_norms: norms,
    })
}

/// CSV with columns `r, b{j}_re{c}, b{j}_im{c}` for every block and component.
pub fn write_blocks_csv<W: Write>(blocks: &[ModeZeroField], out: W) -> Result<()> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::InvalidInput("no blocks".into()))?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["r".to_string()];
    for j in 0..blocks.len() {
        for c in 0..first.components() {
            header.push(format!("b{j}_re{c}"));
            header.push(format!("b{j}_im{c}"));
        }
    }
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(&header).map_err(fmt)?;
    for i in 0..first.len() {
        let mut rec = vec![format!("{:e}", first.grid().r(i))];
        for b in blocks {
            for z in b.weighted(i) {
                rec.push(format!("{:e}", z.re));
                rec.push(format!("{:e}", z.im));
            }
        }
        w.write_record(&rec).map_err(fmt)?;
    }
    w.flush()?;
    Ok(())
}

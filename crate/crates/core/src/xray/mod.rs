//! Normalized X-ray transform `I_m h(c) = ℓ⁻¹ ∫_0^ℓ π_m^* h(γ(t), γ̇(t)) dt`
//! over closed geodesics of a cusped surface.
//!
//! Tensors are described on the cusp chart `{y ≥ a} / (z ↦ z + w)` in the
//! frame `(y∂_y, y∂_x)`; points of a geodesic are carried into the chart by
//! [`FuchsianSurface::lift_to_cusp`] and the tangent by the derivative of
//! the deck transformation.

use std::cell::RefCell;
use std::io::Write;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{tangent_norm, ClosedGeodesic, FuchsianSurface};
use crate::quad::{composite_gauss, fixed_gauss};
use crate::tensor::{
    contract, solenoidal_project, sym_derivative_at, Boundary, FieldInterpolator, Jet,
    SymTensorField, TensorGrid,
};

#[cfg(test)]
mod tests;

/// Gauss-Legendre order of each panel.
pub const GAUSS_ORDER: usize = 8;
const MAX_PANELS: usize = 1 << 16;
/// The truncated projection jumps at the chart edge, so the probe stops early.
const PROBE_MAX_PANELS: usize = 1 << 10;
/// Initial panel length in arc length.
const PANEL_LENGTH: f64 = 0.5;

/// A point of the cusp chart with a tangent in frame components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint {
    pub r: f64,
    pub theta: f64,
    pub v: [f64; 2],
}

/// Carries `(z, v)` to the cusp representative of maximal height.
pub fn to_chart(surface: &FuchsianSurface, z: C64, v: C64) -> Result<ChartPoint> {
    let (w, g) = surface.lift_to_cusp(z)?;
    let dw = g.derivative(z) * v;
    Ok(ChartPoint {
        r: w.im.ln(),
        theta: w.re,
        v: [dw.im / w.im, dw.re / w.im],
    })
}

/// A symmetric tensor on the surface, observed through `π_m^*`.
pub trait TensorSource: Sync {
    fn order(&self) -> usize;
    /// `h(v, …, v)` at `z` in the upper half-plane for a unit tangent `v`.
    fn pullback(&self, z: C64, v: C64) -> Result<f64>;
}

/// The hyperbolic metric; `π_2^* g ≡ 1` on unit vectors.
pub struct Metric;

impl TensorSource for Metric {
    fn order(&self) -> usize {
        2
    }

    fn pullback(&self, z: C64, v: C64) -> Result<f64> {
        Ok(tangent_norm(z, v).powi(2))
    }
}

/// What a chart field does at points that lift outside its grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exterior {
    /// Zero, provided the field vanishes on the boundary row it exits through;
    /// otherwise a coverage error.
    Strict,
    /// Zero regardless.
    Truncate,
}

/// A grid field on the cusp chart, extended by zero to the rest of the surface.
pub struct ChartField {
    surface: FuchsianSurface,
    interp: FieldInterpolator,
    exterior: Exterior,
    live_below: bool,
    live_above: bool,
}

impl ChartField {
    pub fn new(
        surface: &FuchsianSurface,
        field: &SymTensorField,
        exterior: Exterior,
    ) -> Result<Self> {
        let g = field.grid();
        check_chart(surface, g)?;
        let floor = 1e-12 * field.sup();
        Ok(Self {
            surface: surface.clone(),
            interp: FieldInterpolator::new(field),
            exterior,
            live_below: field.sup_on(0..1) > floor,
            live_above: field.sup_on(g.nr - 1..g.nr) > floor,
        })
    }

    fn locate(&self, z: C64, v: C64) -> Result<Option<ChartPoint>> {
        let p = to_chart(&self.surface, z, v)?;
        let g = self.interp.grid();
        if p.r < g.r_min || p.r > g.r_max {
            let live = if p.r < g.r_min {
                self.live_below
            } else {
                self.live_above
            };
            if live && self.exterior == Exterior::Strict {
                return Err(Error::Coverage(format!(
                    "geodesic leaves the chart at height {:.4} where the field does not vanish",
                    p.r.exp()
                )));
            }
            return Ok(None);
        }
        Ok(Some(p))
    }
}

fn check_chart(surface: &FuchsianSurface, g: &TensorGrid) -> Result<()> {
    if (g.theta_period - surface.cusp_width()).abs() > 1e-12 * surface.cusp_width() {
        return invalid(format!(
            "chart θ-period {} differs from the cusp width {}",
            g.theta_period,
            surface.cusp_width()
        ));
    }
    Ok(())
}

impl TensorSource for ChartField {
    fn order(&self) -> usize {
        self.interp.order()
    }

    fn pullback(&self, z: C64, v: C64) -> Result<f64> {
        match self.locate(z, v)? {
            Some(p) => Ok(contract(
                self.order(),
                &self.interp.eval(p.r, p.theta)?,
                p.v,
            )),
            None => Ok(0.0),
        }
    }
}

/// A 1-form on the chart known through its 1-jet.
pub trait OneFormJet: Sync {
    fn surface(&self) -> &FuchsianSurface;
    /// Jet at a chart point, `None` where the form vanishes identically.
    fn jet(&self, r: f64, theta: f64) -> Result<Option<Jet>>;
}

/// Grid 1-form: jets come from the interpolant, so `Dp` carries only
/// interpolation error.
pub struct GridOneForm {
    field: ChartField,
}

impl GridOneForm {
    pub fn new(surface: &FuchsianSurface, p: &SymTensorField) -> Result<Self> {
        if p.order() != 1 {
            return invalid("expected a 1-form");
        }
        Ok(Self {
            field: ChartField::new(surface, p, Exterior::Strict)?,
        })
    }
}

impl OneFormJet for GridOneForm {
    fn surface(&self) -> &FuchsianSurface {
        &self.field.surface
    }

    fn jet(&self, r: f64, theta: f64) -> Result<Option<Jet>> {
        let g = self.field.interp.grid();
        if r < g.r_min || r > g.r_max {
            let live = if r < g.r_min {
                self.field.live_below
            } else {
                self.field.live_above
            };
            if live {
                return Err(Error::Coverage(format!(
                    "1-form does not vanish where the geodesic leaves the chart (r = {r:.4})"
                )));
            }
            return Ok(None);
        }
        self.field.interp.jet(r, theta).map(Some)
    }
}

/// `p = b(r) (Σ_k α_k cos + β_k sin, Σ_k γ_k cos + δ_k sin)(2πkθ/w)` with the
/// bump `b(r) = exp(1 − 1/(1 − s²))`, `s = (r − c)/h`; closed-form jets.
#[derive(Clone, Debug)]
pub struct BumpOneForm {
    surface: FuchsianSurface,
    pub centre: f64,
    pub half_width: f64,
    /// `[α_k, β_k, γ_k, δ_k]` for `k = 0, 1, …`.
    pub coefficients: Vec<[f64; 4]>,
}

impl BumpOneForm {
    pub fn new(
        surface: &FuchsianSurface,
        centre: f64,
        half_width: f64,
        coefficients: Vec<[f64; 4]>,
    ) -> Result<Self> {
        if !(half_width > 0.0) || coefficients.is_empty() {
            return invalid("bump 1-form needs a positive width and at least one mode");
        }
        Ok(Self {
            surface: surface.clone(),
            centre,
            half_width,
            coefficients,
        })
    }

    /// Coefficients uniform in `(−1, 1)` for `modes` Fourier modes.
    pub fn random(
        surface: &FuchsianSurface,
        centre: f64,
        half_width: f64,
        modes: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients = (0..modes.max(1))
            .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
            .collect();
        Self::new(surface, centre, half_width, coefficients)
    }

    fn profile(&self, r: f64) -> Option<(f64, f64)> {
        let s = (r - self.centre) / self.half_width;
        if s.abs() >= 1.0 {
            return None;
        }
        let q = 1.0 - s * s;
        let b = (1.0 - 1.0 / q).exp();
        Some((b, b * (-2.0 * s / (q * q)) / self.half_width))
    }

    fn trig(&self, theta: f64) -> ([f64; 2], [f64; 2]) {
        let w = 2.0 * std::f64::consts::PI / self.surface.cusp_width();
        let (mut val, mut der) = ([0.0; 2], [0.0; 2]);
        for (k, [a, b, c, d]) in self.coefficients.iter().enumerate() {
            let kw = k as f64 * w;
            let (sn, cs) = (kw * theta).sin_cos();
            val[0] += a * cs + b * sn;
            val[1] += c * cs + d * sn;
            der[0] += kw * (b * cs - a * sn);
            der[1] += kw * (d * cs - c * sn);
        }
        (val, der)
    }

    /// Samples the form on a chart grid.
    pub fn to_field(&self, grid: TensorGrid) -> Result<SymTensorField> {
        SymTensorField::from_fn(1, grid, |r, t| match self.profile(r) {
            Some((b, _)) => {
                let (v, _) = self.trig(t);
                vec![b * v[0], b * v[1]]
            }
            None => vec![0.0, 0.0],
        })
    }
}

impl OneFormJet for BumpOneForm {
    fn surface(&self) -> &FuchsianSurface {
        &self.surface
    }

    fn jet(&self, r: f64, theta: f64) -> Result<Option<Jet>> {
        let Some((b, db)) = self.profile(r) else {
            return Ok(None);
        };
        let (v, dv) = self.trig(theta);
        Ok(Some(Jet {
            value: vec![b * v[0], b * v[1]],
            dr: vec![db * v[0], db * v[1]],
            dtheta: vec![b * dv[0], b * dv[1]],
        }))
    }
}

/// The 1-form itself as an order-1 source.
pub struct OneForm<J>(pub J);

impl<J: OneFormJet> TensorSource for OneForm<J> {
    fn order(&self) -> usize {
        1
    }

    fn pullback(&self, z: C64, v: C64) -> Result<f64> {
        let p = to_chart(self.0.surface(), z, v)?;
        Ok(self
            .0
            .jet(p.r, p.theta)?
            .map_or(0.0, |j| contract(1, &j.value, p.v)))
    }
}

/// `D p` of a 1-form, evaluated pointwise from its jet.
pub struct Potential<J>(pub J);

impl<J: OneFormJet> TensorSource for Potential<J> {
    fn order(&self) -> usize {
        2
    }

    fn pullback(&self, z: C64, v: C64) -> Result<f64> {
        let p = to_chart(self.0.surface(), z, v)?;
        Ok(self
            .0
            .jet(p.r, p.theta)?
            .map_or(0.0, |j| contract(2, &sym_derivative_at(p.r.exp(), &j), p.v)))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XRayResult {
    pub class_word: String,
    pub length: f64,
    pub value: f64,
    pub quadrature_error_estimate: f64,
    pub panels: usize,
}

fn integrate<S: TensorSource + ?Sized>(
    source: &S,
    geodesic: &ClosedGeodesic,
    tol: f64,
    max_panels: usize,
) -> Result<XRayResult> {
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let len = geodesic.length;
    let failure = RefCell::new(None);
    let integrand = |t: f64| {
        if failure.borrow().is_some() {
            return 0.0;
        }
        let (z, v) = geodesic.point_at(t);
        source.pullback(z, v).unwrap_or_else(|e| {
            *failure.borrow_mut() = Some(e);
            0.0
        })
    };
    let initial = (len / PANEL_LENGTH).ceil() as usize;
    let q = composite_gauss(
        integrand,
        0.0,
        len,
        GAUSS_ORDER,
        initial,
        tol * len,
        max_panels,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(XRayResult {
        class_word: geodesic.word.to_string(),
        length: len,
        value: q.value / len,
        quadrature_error_estimate: q.error_estimate / len,
        panels: q.panels,
    })
}

/// `I_m h(c)` by adaptive composite Gauss-Legendre quadrature over one
/// period; the error estimate is the change under the last panel doubling.
pub fn xray_eval<S: TensorSource + ?Sized>(
    source: &S,
    geodesic: &ClosedGeodesic,
    tol: f64,
) -> Result<XRayResult> {
    let res = integrate(source, geodesic, tol, MAX_PANELS)?;
    if !(res.value.is_finite() && res.quadrature_error_estimate <= tol) {
        return Err(Error::NumericFailure {
            message: format!(
                "X-ray of class {} did not reach tolerance {tol:e}",
                res.class_word
            ),
            residual: res.quadrature_error_estimate,
        });
    }
    Ok(res)
}

/// `I_m h(c)` with a fixed rule of `panels` Gauss-Legendre panels, so that
/// evaluations of different tensors share their nodes.
pub fn xray_fixed<S: TensorSource + ?Sized>(
    source: &S,
    geodesic: &ClosedGeodesic,
    panels: usize,
) -> Result<f64> {
    let failure = RefCell::new(None);
    let integrand = |t: f64| {
        let (z, v) = geodesic.point_at(t);
        source.pullback(z, v).unwrap_or_else(|e| {
            failure.borrow_mut().get_or_insert(e);
            0.0
        })
    };
    let value = fixed_gauss(integrand, 0.0, geodesic.length, GAUSS_ORDER, panels) / geodesic.length;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// [`xray_eval`] over many classes in parallel, in input order.
pub fn xray_classes<S: TensorSource + ?Sized>(
    source: &S,
    classes: &[ClosedGeodesic],
    tol: f64,
) -> Result<Vec<XRayResult>> {
    classes
        .par_iter()
        .map(|c| xray_eval(source, c, tol))
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnihilationReport {
    pub classes: usize,
    pub p_sup: f64,
    pub max_abs: f64,
    /// `max_abs / p_sup`.
    pub relative: f64,
    pub results: Vec<XRayResult>,
}

/// `max_c |I_2(Dp)(c)|` with `Dp` evaluated from the jet of `p`.
pub fn potential_annihilation_suite<J: OneFormJet>(
    p: J,
    p_sup: f64,
    classes: &[ClosedGeodesic],
    tol: f64,
) -> Result<AnnihilationReport> {
    let results = xray_classes(&Potential(p), classes, tol)?;
    let max_abs = results.iter().map(|r| r.value.abs()).fold(0.0, f64::max);
    Ok(AnnihilationReport {
        classes: classes.len(),
        p_sup,
        max_abs,
        relative: if p_sup > 0.0 {
            max_abs / p_sup
        } else {
            max_abs
        },
        results,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeVerdict {
    /// The solenoidal part vanishes: `f` is a potential tensor.
    Potential,
    /// Some class sees `f_s` well above its quadrature error.
    Detected,
    /// Every value is at the noise floor; no conclusion.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeReport {
    pub verdict: ProbeVerdict,
    /// `‖f_s‖ / ‖f‖`.
    pub solenoidal_fraction: f64,
    /// Largest `|I_2 f_s(c)| / max(error, floor)`.
    pub detection_ratio: f64,
    pub best_class: Option<String>,
    /// `sup` of `f_s` on the chart boundary rows relative to `sup f`;
    /// the X-ray treats `f_s` as zero beyond the chart.
    pub boundary_leak: f64,
    pub results: Vec<XRayResult>,
}

/// Detection threshold on `|value| / max(error, floor)`.
pub const DETECTION_FACTOR: f64 = 10.0;

/// Projects `f` to its solenoidal part and evaluates `I_2 f_s` on every class.
pub fn solenoidal_probe(
    surface: &FuchsianSurface,
    f: &SymTensorField,
    classes: &[ClosedGeodesic],
    tol: f64,
) -> Result<ProbeReport> {
    if f.order() != 2 {
        return invalid("the probe acts on symmetric 2-tensors");
    }
    let dec = solenoidal_project(f, Boundary::Dirichlet)?;
    let fs = dec.solenoidal;
    let (fnorm, fsup) = (f.norm(), f.sup());
    let solenoidal_fraction = if fnorm == 0.0 { 0.0 } else { fs.norm() / fnorm };
    let boundary_leak = if fsup == 0.0 {
        0.0
    } else {
        fs.boundary_sup(1) / fsup
    };
    let source = ChartField::new(surface, &fs, Exterior::Truncate)?;
    let results: Vec<XRayResult> = classes
        .par_iter()
        .map(|c| integrate(&source, c, tol, PROBE_MAX_PANELS))
        .collect::<Result<_>>()?;
    let floor = tol.max(1e-12 * fsup);
    let (detection_ratio, best) = results
        .iter()
        .map(|r| {
            (
                r.value.abs() / r.quadrature_error_estimate.max(floor),
                &r.class_word,
            )
        })
        .fold((0.0, None), |acc, (x, w)| {
            if x > acc.0 {
                (x, Some(w.clone()))
            } else {
                acc
            }
        });
    let verdict = if solenoidal_fraction <= 1e-8 {
        ProbeVerdict::Potential
    } else if detection_ratio > DETECTION_FACTOR {
        ProbeVerdict::Detected
    } else {
        ProbeVerdict::Inconclusive
    };
    Ok(ProbeReport {
        verdict,
        solenoidal_fraction,
        detection_ratio,
        best_class: best,
        boundary_leak,
        results,
    })
}

/// CSV with columns `word, length, value, error`.
pub fn write_results_csv<W: Write>(results: &[XRayResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["word", "length", "value", "error"])
        .map_err(fmt)?;
    for r in results {
        w.write_record([
            r.class_word.clone(),
            format!("{:e}", r.length),
            format!("{:e}", r.value),
            format!("{:e}", r.quadrature_error_estimate),
        ])
        .map_err(fmt)?;
    }
    w.flush()?;
    Ok(())
}

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Uniform `(r, θ)` grid on the truncated cusp `[r_min, r_max] × [0, L)`,
/// inclusive in `r` and periodic in `θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub nr: usize,
    pub ntheta: usize,
    pub theta_period: f64,
}

impl Default for TensorGrid {
    /// `a = 1`, `R_max = log(20a)`, 512 × 256 nodes, unit period.
    fn default() -> Self {
        Self {
            r_min: 0.0,
            r_max: 20f64.ln(),
            nr: 512,
            ntheta: 256,
            theta_period: 1.0,
        }
    }
}

impl TensorGrid {
    pub fn new(
        r_min: f64,
        r_max: f64,
        nr: usize,
        ntheta: usize,
        theta_period: f64,
    ) -> Result<Self> {
        let g = Self {
            r_min,
            r_max,
            nr,
            ntheta,
            theta_period,
        };
        g.validate()?;
        Ok(g)
    }

    /// Truncated cusp `y ∈ [a, 20a]`.
    pub fn for_cusp(a: f64, nr: usize, ntheta: usize, theta_period: f64) -> Result<Self> {
        if !(a > 0.0) {
            return invalid("cusp height must be positive");
        }
        Self::new(a.ln(), (20.0 * a).ln(), nr, ntheta, theta_period)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nr < 3 || self.ntheta < 3 {
            return invalid(format!(
                "grid {}x{} is too coarse: need at least 3 points per axis",
                self.nr, self.ntheta
            ));
        }
        if !(self.r_min.is_finite() && self.r_max.is_finite() && self.r_min < self.r_max) {
            return invalid(format!("bad r-range [{}, {}]", self.r_min, self.r_max));
        }
        if !(self.theta_period > 0.0 && self.theta_period.is_finite()) {
            return invalid("θ period must be positive");
        }
        Ok(())
    }

    pub fn hr(&self) -> f64 {
        (self.r_max - self.r_min) / (self.nr - 1) as f64
    }

    pub fn htheta(&self) -> f64 {
        self.theta_period / self.ntheta as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.hr()
    }

    pub fn theta(&self, k: usize) -> f64 {
        k as f64 * self.htheta()
    }

    pub fn len(&self) -> usize {
        self.nr * self.ntheta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, k: usize) -> usize {
        i * self.ntheta + k
    }

    /// Rows at least 1/16 of the `r`-range away from both truncation boundaries.
    pub fn interior_rows(&self) -> std::ops::Range<usize> {
        let m = self.nr.div_ceil(16).max(3);
        m..self.nr.saturating_sub(m).max(m)
    }

    /// Trapezoid weight in `r` times the hyperbolic density `e^{-r}` and the
    /// `θ` cell: the discrete measure `dy dθ / y²`.
    pub fn measure(&self, i: usize) -> f64 {
        let t = if i == 0 || i == self.nr - 1 { 0.5 } else { 1.0 };
        t * self.hr() * self.htheta() * (-self.r(i)).exp()
    }
}

/// Symmetric tensor of order 0, 1 or 2 sampled on a [`TensorGrid`] in the
/// orthonormal coframe `e_y = dy/y`, `e_θ = dθ/y`. Components:
/// order 0 `[u]`; order 1 `[P, Q]` for `P e_y + Q e_θ`; order 2 `[A, C, B]`
/// for `A e_y² + C e_θ² + B (e_y⊗e_θ + e_θ⊗e_y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymTensorField {
    order: usize,
    grid: TensorGrid,
    components: Vec<Vec<f64>>,
}

impl SymTensorField {
    pub fn new(order: usize, grid: TensorGrid, components: Vec<Vec<f64>>) -> Result<Self> {
        grid.validate()?;
        if order > 2 {
            return invalid(format!("order {order} tensors are not supported"));
        }
        if components.len() != order + 1 {
            return invalid(format!(
                "order {order} needs {} components, got {}",
                order + 1,
                components.len()
            ));
        }
        if components.iter().any(|c| c.len() != grid.len()) {
            return invalid("component size does not match the grid");
        }
        Ok(Self {
            order,
            grid,
            components,
        })
    }

    pub fn zeros(order: usize, grid: TensorGrid) -> Result<Self> {
        Self::new(order, grid, vec![vec![0.0; grid.len()]; order + 1])
    }

    /// Samples `f(r, θ)`, which returns the `order + 1` frame components.
    pub fn from_fn(
        order: usize,
        grid: TensorGrid,
        f: impl Fn(f64, f64) -> Vec<f64>,
    ) -> Result<Self> {
        let mut comps = vec![vec![0.0; grid.len()]; order + 1];
        for i in 0..grid.nr {
            for k in 0..grid.ntheta {
                let v = f(grid.r(i), grid.theta(k));
                if v.len() != order + 1 {
                    return invalid("sampling function returned the wrong number of components");
                }
                for (c, x) in comps.iter_mut().zip(v) {
                    c[grid.index(i, k)] = x;
                }
            }
        }
        Self::new(order, grid, comps)
    }

    /// The hyperbolic metric `e_y² + e_θ²`.
    pub fn metric(grid: TensorGrid) -> Result<Self> {
        Self::from_fn(2, grid, |_, _| vec![1.0, 1.0, 0.0])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.components[c]
    }

    pub fn at(&self, i: usize, k: usize) -> Vec<f64> {
        let j = self.grid.index(i, k);
        self.components.iter().map(|c| c[j]).collect()
    }

    /// Frame weights of the pointwise inner product (off-diagonal counted twice).
    pub fn frame_weights(order: usize) -> &'static [f64] {
        match order {
            0 => &[1.0],
            1 => &[1.0, 1.0],
            _ => &[1.0, 1.0, 2.0],
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.order != other.order || self.grid != other.grid {
            return invalid("fields differ in order or grid");
        }
        Ok(())
    }

    /// Discrete hyperbolic pairing `∫ ⟨f, g⟩_x dy dθ / y²` restricted to `rows`.
    pub fn inner_on(&self, other: &Self, rows: std::ops::Range<usize>) -> Result<f64> {
        self.check_same(other)?;
        let w = Self::frame_weights(self.order);
        let mut s = 0.0;
        for i in rows {
            let m = self.grid.measure(i);
            for k in 0..self.grid.ntheta {
                let j = self.grid.index(i, k);
                for (c, wc) in w.iter().enumerate() {
                    s += m * wc * self.components[c][j] * other.components[c][j];
                }
            }
        }
        Ok(s)
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.inner_on(other, 0..self.grid.nr)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).unwrap_or(0.0).max(0.0).sqrt()
    }

    pub fn norm_on(&self, rows: std::ops::Range<usize>) -> f64 {
        self.inner_on(self, rows).unwrap_or(0.0).max(0.0).sqrt()
    }

    /// Largest pointwise frame norm over `rows`.
    pub fn sup_on(&self, rows: std::ops::Range<usize>) -> f64 {
        let w = Self::frame_weights(self.order);
        let mut best: f64 = 0.0;
        for i in rows {
            for k in 0..self.grid.ntheta {
                let j = self.grid.index(i, k);
                let s: f64 = w
                    .iter()
                    .enumerate()
                    .map(|(c, wc)| wc * self.components[c][j].powi(2))
                    .sum();
                best = best.max(s.sqrt());
            }
        }
        best
    }

    pub fn sup(&self) -> f64 {
        self.sup_on(0..self.grid.nr)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
            .collect();
        Ok(Self {
            order: self.order,
            grid: self.grid,
            components,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, s: f64) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| c.iter().map(|x| x * s).collect())
            .collect();
        Self {
            order: self.order,
            grid: self.grid,
            components,
        }
    }

    /// Largest `|f|` on the `margin` outermost `r`-rows at each end.
    pub fn boundary_sup(&self, margin: usize) -> f64 {
        let n = self.grid.nr;
        let m = margin.min(n);
        let a = self.sup_on(0..m);
        let b = self.sup_on(n - m..n);
        a.max(b)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        Self::new(f.order, f.grid, f.components)
    }

    /// One JSON header line (order, grid, frame convention) followed by a CSV
    /// grid dump `r, theta, c0, …`.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        let header = serde_json::json!({
            "order": self.order,
            "grid": self.grid,
            "frame": "orthonormal coframe dy/y, dtheta/y; order 2 components A=yy, C=thth, B=yth",
        });
        writeln!(out, "{header}")?;
        let mut w = csv::Writer::from_writer(out);
        let mut head = vec!["r".to_string(), "theta".to_string()];
        head.extend((0..=self.order).map(|c| format!("c{c}")));
        w.write_record(&head)
            .map_err(|e| Error::Format(e.to_string()))?;
        for i in 0..self.grid.nr {
            for k in 0..self.grid.ntheta {
                let mut rec = vec![
                    format!("{:e}", self.grid.r(i)),
                    format!("{:e}", self.grid.theta(k)),
                ];
                rec.extend(self.at(i, k).iter().map(|x| format!("{x:e}")));
                w.write_record(&rec)
                    .map_err(|e| Error::Format(e.to_string()))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Weighted `L²` norm `‖y^{-ρ} f‖` (only `s = 0` is computed).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorm {
    pub s: f64,
    pub rho: f64,
}

impl WeightedNorm {
    pub fn norm(&self, f: &SymTensorField) -> Result<f64> {
        if !(self.s.is_finite() && self.rho.is_finite()) {
            return invalid("weighted norm parameters must be finite");
        }
        if self.s != 0.0 {
            return invalid("only the L² norm (s = 0) is implemented");
        }
        let g = *f.grid();
        let w = SymTensorField::frame_weights(f.order());
        let mut total = 0.0;
        for i in 0..g.nr {
            let m = g.measure(i) * (-2.0 * self.rho * g.r(i)).exp();
            for k in 0..g.ntheta {
                let j = g.index(i, k);
                total += m * w
                    .iter()
                    .enumerate()
                    .map(|(c, wc)| wc * f.component(c)[j].powi(2))
                    .sum::<f64>();
            }
        }
        Ok(total.sqrt())
    }
}

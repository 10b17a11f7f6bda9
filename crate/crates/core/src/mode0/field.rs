use std::io::{Read, Write};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::smooth_step;

/// Uniform grid `r_min = r_0 < … < r_{N-1} = r_max` in `r = log y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for RGrid {
    fn default() -> Self {
        Self {
            r_min: -12.0,
            r_max: 12.0,
            points: 4096,
        }
    }
}

/// Fraction of the grid length, at each end, over which [`RGrid::window`] drops to 0.
pub const WINDOW_FRACTION: f64 = 0.1;

impl RGrid {
    pub fn new(r_min: f64, r_max: f64, points: usize) -> Result<Self> {
        let g = Self {
            r_min,
            r_max,
            points,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 64 {
            return invalid(format!(
                "r-grid needs at least 64 points, got {}",
                self.points
            ));
        }
        if !(self.r_min.is_finite() && self.r_max.is_finite() && self.r_min < self.r_max) {
            return invalid(format!("bad r-range [{}, {}]", self.r_min, self.r_max));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.r_max - self.r_min) / (self.points - 1) as f64
    }

    pub fn r(&self, j: usize) -> f64 {
        self.r_min + j as f64 * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.r(j)).collect()
    }

    /// Smooth cutoff equal to 1 except in the outer 10% at each end.
    pub fn window(&self, r: f64) -> f64 {
        let band = WINDOW_FRACTION * (self.r_max - self.r_min);
        smooth_step((r - self.r_min) / band) * smooth_step((self.r_max - r) / band)
    }

    /// Indices where the window is identically 1.
    pub fn interior(&self) -> std::ops::Range<usize> {
        let band = WINDOW_FRACTION * (self.r_max - self.r_min);
        let h = self.step();
        let lo = (band / h).ceil() as usize;
        let hi = self.points - lo;
        lo..hi
    }
}

/// A section on the zero Fourier mode, stored through its weighted
/// representative `v(r) = u(r) e^{-ρr}` on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeZeroField {
    grid: RGrid,
    weight_rho: f64,
    /// `samples[j][c]`: component `c` of `v(r_j)`.
    samples: Vec<Vec<C64>>,
}

impl ModeZeroField {
    pub fn new(grid: RGrid, weight_rho: f64, samples: Vec<Vec<C64>>) -> Result<Self> {
        grid.validate()?;
        if samples.len() != grid.points {
            return invalid(format!(
                "{} samples for a {}-point grid",
                samples.len(),
                grid.points
            ));
        }
        let n = samples.first().map_or(0, Vec::len);
        if n == 0 || samples.iter().any(|s| s.len() != n) {
            return invalid("samples must be non-empty vectors of equal length");
        }
        if !weight_rho.is_finite()
            || samples
                .iter()
                .flatten()
                .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return invalid("non-finite sample or weight");
        }
        Ok(Self {
            grid,
            weight_rho,
            samples,
        })
    }

    /// Samples `u` (unweighted) and stores `u e^{-ρr}`.
    pub fn from_fn(
        grid: RGrid,
        weight_rho: f64,
        components: usize,
        u: impl Fn(f64) -> Vec<C64>,
    ) -> Result<Self> {
        let samples = grid
            .nodes()
            .into_iter()
            .map(|r| {
                let mut v = u(r);
                v.resize(components, C64::new(0.0, 0.0));
                let s = (-weight_rho * r).exp();
                v.iter_mut().for_each(|z| *z *= s);
                v
            })
            .collect();
        Self::new(grid, weight_rho, samples)
    }

    pub fn zeros(grid: RGrid, weight_rho: f64, components: usize) -> Result<Self> {
        Self::new(
            grid,
            weight_rho,
            vec![vec![C64::new(0.0, 0.0); components]; grid.points],
        )
    }

    pub fn grid(&self) -> &RGrid {
        &self.grid
    }

    pub fn weight(&self) -> f64 {
        self.weight_rho
    }

    pub fn components(&self) -> usize {
        self.samples[0].len()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Weighted representative at node `j`.
    pub fn weighted(&self, j: usize) -> &[C64] {
        &self.samples[j]
    }

    pub fn weighted_samples(&self) -> &[Vec<C64>] {
        &self.samples
    }

    /// `u(r_j)` itself.
    pub fn value(&self, j: usize) -> Vec<C64> {
        let s = (self.weight_rho * self.grid.r(j)).exp();
        self.samples[j].iter().map(|z| z * s).collect()
    }

    /// Component `c` of the weighted representative along the grid.
    pub fn component(&self, c: usize) -> Vec<C64> {
        self.samples.iter().map(|s| s[c]).collect()
    }

    /// Same section, represented with weight `rho`.
    pub fn reweighted(&self, rho: f64) -> Self {
        let d = self.weight_rho - rho;
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let f = (d * self.grid.r(j)).exp();
                s.iter().map(|z| z * f).collect()
            })
            .collect();
        Self {
            grid: self.grid,
            weight_rho: rho,
            samples,
        }
    }

    /// Multiplies by the grid window.
    pub fn windowed(&self) -> Self {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let w = self.grid.window(self.grid.r(j));
                s.iter().map(|z| z * w).collect()
            })
            .collect();
        Self {
            grid: self.grid,
            weight_rho: self.weight_rho,
            samples,
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.samples.iter().map(|s| vec_norm(s)).fold(0.0, f64::max)
    }

    /// `(Σ_j h |v_j|²)^{1/2}`, the `L²(dr)` norm of the weighted representative.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.step()
            * self
                .samples
                .iter()
                .flatten()
                .map(C64::norm_sqr)
                .sum::<f64>())
        .sqrt()
    }

    /// Pointwise difference; both fields are compared at `self`'s weight.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid || self.components() != other.components() {
            return invalid("fields live on different grids");
        }
        let o = other.reweighted(self.weight_rho);
        let samples = self
            .samples
            .iter()
            .zip(&o.samples)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        Ok(Self {
            grid: self.grid,
            weight_rho: self.weight_rho,
            samples,
        })
    }

    /// CSV with columns `r, rho, re0, im0, re1, im1, …` (weighted representative).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["r".to_string(), "rho".to_string()];
        for c in 0..self.components() {
            header.push(format!("re{c}"));
            header.push(format!("im{c}"));
        }
        w.write_record(&header).map_err(csv_err)?;
        for (j, s) in self.samples.iter().enumerate() {
            let mut rec = vec![
                format!("{:e}", self.grid.r(j)),
                format!("{:e}", self.weight_rho),
            ];
            for z in s {
                rec.push(format!("{:e}", z.re));
                rec.push(format!("{:e}", z.im));
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let mut rs = Vec::new();
        let mut rho = None;
        let mut samples = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Format(format!("bad number {s:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            if vals.len() < 4 || !vals.len().is_multiple_of(2) {
                return Err(Error::Format("expected r, rho and re/im pairs".into()));
            }
            if *rho.get_or_insert(vals[1]) != vals[1] {
                return Err(Error::Format("weight column must be constant".into()));
            }
            rs.push(vals[0]);
            samples.push(vals[2..].chunks(2).map(|p| C64::new(p[0], p[1])).collect());
        }
        let n = rs.len();
        if n < 2 {
            return Err(Error::Format("too few rows".into()));
        }
        let grid = RGrid::new(rs[0], rs[n - 1], n)?;
        let h = grid.step();
        if rs
            .iter()
            .enumerate()
            .any(|(j, r)| (r - grid.r(j)).abs() > 1e-9 * h.max(r.abs() * 1e-3))
        {
            return Err(Error::Format("r column is not uniform".into()));
        }
        Self::new(grid, rho.unwrap_or(0.0), samples)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

pub(crate) fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
}

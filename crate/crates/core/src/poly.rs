//! Dense univariate polynomials with complex coefficients and matrices of them.
//!
//! Coefficients are stored in ascending order. Matrices are small (a handful of
//! rows, degree at most a few), so everything is dense and allocation-happy.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl Poly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    pub fn real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    /// The monic linear factor `λ - root`.
    pub fn linear(root: C64) -> Self {
        Self::new(vec![-root, ONE])
    }

    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == ZERO) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exact degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Drop leading coefficients below `rel_tol` times the largest one.
    pub fn trimmed(&self, rel_tol: f64) -> Self {
        let scale = self.max_abs_coeff();
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= rel_tol * scale) {
            coeffs.pop();
        }
        Self::new(coeffs)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// `q(λ) = conj(p(d - conj(λ)))`, again a polynomial in `λ`.
    pub fn reflect(&self, d: f64) -> Self {
        // (d - λ)^k expanded incrementally
        let base = Poly::new(vec![C64::new(d, 0.0), -ONE]);
        let mut power = Poly::one();
        let mut out = Poly::zero();
        for &c in &self.coeffs {
            out = &out + &power.scale(c.conj());
            power = &power * &base;
        }
        out
    }

    /// Euclidean division, returning `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        let Some(dd) = divisor.degree() else {
            return invalid("polynomial division by zero");
        };
        let lead = divisor.coeffs[dd];
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![ZERO; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * dc;
            }
            rem[k + dd] = ZERO;
        }
        rem.truncate(dd);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// Roots grouped by multiplicity. Companion-matrix eigenvalues are
    /// clustered and each cluster is polished by Newton iteration on the
    /// derivative of order `multiplicity - 1`.
    pub fn roots(&self) -> Result<Vec<RootCluster>> {
        let p = self.trimmed(1e-13);
        let Some(deg) = p.degree() else {
            return Err(Error::DegenerateOperator(
                "polynomial vanishes identically".into(),
            ));
        };
        if deg == 0 {
            return Ok(Vec::new());
        }
        let raw = companion_eigenvalues(&p)?;
        let clusters = cluster_roots(&raw, &p);
        Ok(clusters)
    }
}

/// A root together with its algebraic multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootCluster {
    pub value: C64,
    pub multiplicity: usize,
}

fn companion_eigenvalues(p: &Poly) -> Result<Vec<C64>> {
    let c = p.coeffs();
    let n = c.len() - 1;
    let lead = c[n];
    if n == 1 {
        return Ok(vec![-c[0] / lead]);
    }
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = ONE;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    let schur = m.schur();
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

fn newton_polish(p: &Poly, mut z: C64) -> C64 {
    let dp = p.derivative();
    for _ in 0..60 {
        let d = dp.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        let step = p.eval(z) / d;
        let next = z - step;
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        let done = step.norm() <= 1e-16 * z.norm().max(1.0);
        // accept only steps that do not increase the residual
        if p.eval(next).norm() > p.eval(z).norm() && step.norm() > 1e-10 * z.norm().max(1.0) {
            break;
        }
        z = next;
        if done {
            break;
        }
    }
    z
}

/// Radius within which coefficient rounding scatters an `m`-fold root at `c`.
fn scatter_radius(p: &Poly, c: C64, m: usize) -> f64 {
    let r = c.norm();
    let size: f64 = p
        .coeffs()
        .iter()
        .rev()
        .fold(0.0, |acc, a| acc * r + a.norm());
    let mut fact = 1.0;
    for k in 2..=m {
        fact *= k as f64;
    }
    let lead = p.nth_derivative(m).eval(c).norm() / fact;
    if lead == 0.0 {
        return f64::INFINITY;
    }
    (1e-12 * size / lead).powf(1.0 / m as f64)
}

fn cluster_roots(raw: &[C64], p: &Poly) -> Vec<RootCluster> {
    let mut groups: Vec<Vec<C64>> = raw.iter().map(|z| vec![*z]).collect();
    let centroid = |g: &[C64]| g.iter().sum::<C64>() / g.len() as f64;
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let merged: Vec<C64> = groups[i].iter().chain(&groups[j]).copied().collect();
                let c = centroid(&merged);
                let spread = merged.iter().map(|z| (z - c).norm()).fold(0.0, f64::max);
                let floor = 1e-9 * c.norm().max(1.0);
                if spread <= floor.max(10.0 * scatter_radius(p, c, merged.len()))
                    && best.is_none_or(|(s, _, _)| spread < s)
                {
                    best = Some((spread, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        let g = groups.remove(j);
        groups[i].extend(g);
    }
    let mut out = Vec::new();
    for members in groups {
        let m = members.len();
        let centre = centroid(&members);
        let tol = 1e-4 * centre.norm().max(1.0);
        let polished = newton_polish(&p.nth_derivative(m - 1), centre);
        let value = if (polished - centre).norm() <= tol {
            polished
        } else {
            centre
        };
        out.push(RootCluster {
            value,
            multiplicity: m,
        });
    }
    out.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    out
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(ZERO)
                        + rhs.coeffs.get(k).copied().unwrap_or(ZERO)
                })
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-ONE)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            match k {
                0 => {}
                1 => write!(f, "·λ")?,
                _ => write!(f, "·λ^{k}")?,
            }
        }
        Ok(())
    }
}

/// Row-major matrix of polynomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Poly::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Poly::one();
        }
        m
    }

    /// `Σ_k λ^k · coefficient_k`.
    pub fn from_coefficients(coefficients: &[DMatrix<C64>]) -> Result<Self> {
        let Some(first) = coefficients.first() else {
            return invalid("empty coefficient list");
        };
        let (rows, cols) = first.shape();
        let mut m = Self::zeros(rows, cols);
        for (k, c) in coefficients.iter().enumerate() {
            if c.shape() != (rows, cols) {
                return invalid("coefficient matrices of mismatched shape");
            }
            for i in 0..rows {
                for j in 0..cols {
                    let mut coeffs = m[(i, j)].coeffs().to_vec();
                    coeffs.resize(coeffs.len().max(k + 1), ZERO);
                    coeffs[k] += c[(i, j)];
                    m[(i, j)] = Poly::new(coeffs);
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn max_degree(&self) -> usize {
        self.entries
            .iter()
            .filter_map(Poly::degree)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: C64) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].eval(x))
    }

    /// Coefficient matrix of `λ^k`.
    pub fn coefficient(&self, k: usize) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].coeffs().get(k).copied().unwrap_or(ZERO)
        })
    }

    pub fn derivative(&self) -> Self {
        self.map(Poly::derivative)
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn mul(&self, rhs: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols != rhs.rows {
            return invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = Poly::zero();
                for k in 0..self.cols {
                    acc = &acc + &(&self[(i, k)] * &rhs[(k, j)]);
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }

    /// Left multiplication by a constant matrix.
    pub fn left_mul_const(&self, m: &DMatrix<C64>) -> Result<PolyMatrix> {
        let lifted = Self::from_coefficients(std::slice::from_ref(m))?;
        lifted.mul(self)
    }

    /// Transpose with entrywise `λ ↦ conj(p(d - conj λ))`.
    pub fn reflected_adjoint(&self, d: f64) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].reflect(d);
            }
        }
        out
    }

    /// Determinant by interpolation at roots of unity.
    pub fn determinant(&self) -> Result<Poly> {
        if !self.is_square() {
            return invalid("determinant of a non-square polynomial matrix");
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Poly::one());
        }
        // degree bound: smaller of the row-wise and column-wise degree sums
        let deg = |i: usize, j: usize| self[(i, j)].degree().unwrap_or(0);
        let by_rows: usize = (0..n)
            .map(|i| (0..n).map(|j| deg(i, j)).max().unwrap_or(0))
            .sum();
        let by_cols: usize = (0..n)
            .map(|j| (0..n).map(|i| deg(i, j)).max().unwrap_or(0))
            .sum();
        let m = by_rows.min(by_cols) + 1;
        // sample on the unit circle and invert the DFT
        let samples: Vec<C64> = (0..m)
            .map(|k| {
                self.eval(C64::from_polar(
                    1.0,
                    2.0 * std::f64::consts::PI * k as f64 / m as f64,
                ))
                .determinant()
            })
            .collect();
        let coeffs = (0..m)
            .map(|j| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        v * C64::from_polar(
                            1.0,
                            -2.0 * std::f64::consts::PI * (j * k % m) as f64 / m as f64,
                        )
                    })
                    .sum::<C64>()
                    / m as f64
            })
            .collect();
        Ok(Poly::new(coeffs))
    }
}

impl std::ops::Index<(usize, usize)> for PolyMatrix {
    type Output = Poly;
    fn index(&self, (i, j): (usize, usize)) -> &Poly {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for PolyMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Poly {
        &mut self.entries[i * self.cols + j]
    }
}

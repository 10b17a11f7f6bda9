use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Square complex band matrix with `w` sub- and super-diagonals, factored in
/// place by Gaussian elimination without pivoting (intended for Hermitian
/// positive definite systems).
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    w: usize,
    data: Vec<C64>,
    factored: bool,
}

impl BandMatrix {
    pub fn zeros(n: usize, w: usize) -> Self {
        Self {
            n,
            w,
            data: vec![C64::new(0.0, 0.0); n * (2 * w + 1)],
            factored: false,
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        (i.abs_diff(j) <= self.w).then(|| i * (2 * self.w + 1) + (j + self.w - i))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.slot(i, j).map_or(C64::new(0.0, 0.0), |s| self.data[s])
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let s = self.slot(i, j).expect("entry outside the band");
        self.data[s] = v;
    }

    /// Recovers the band of a linear map by applying it to combs of unit
    /// vectors spaced `2w + 1` apart.
    pub fn probe(n: usize, w: usize, apply: impl Fn(&[C64]) -> Vec<C64>) -> Self {
        let mut m = Self::zeros(n, w);
        let period = 2 * w + 1;
        for start in 0..period.min(n) {
            let mut x = vec![C64::new(0.0, 0.0); n];
            for j in (start..n).step_by(period) {
                x[j] = C64::new(1.0, 0.0);
            }
            let y = apply(&x);
            for j in (start..n).step_by(period) {
                for i in j.saturating_sub(w)..(j + w + 1).min(n) {
                    m.set(i, j, y[i]);
                }
            }
        }
        m
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert!(!self.factored, "matvec on a factored matrix");
        (0..self.n)
            .map(|i| {
                (i.saturating_sub(self.w)..(i + self.w + 1).min(self.n))
                    .map(|j| self.get(i, j) * x[j])
                    .sum()
            })
            .collect()
    }

    pub fn factor(mut self) -> Result<Self> {
        let n = self.n;
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for k in 0..n {
            let p = self.get(k, k);
            if p.norm() <= 1e-300 || p.norm() <= 1e-15 * scale {
                return Err(Error::NumericFailure {
                    message: format!("zero pivot at row {k}"),
                    residual: p.norm(),
                });
            }
            for i in k + 1..(k + self.w + 1).min(n) {
                let l = self.get(i, k) / p;
                self.set(i, k, l);
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..(k + self.w + 1).min(n) {
                    let v = self.get(i, j) - l * self.get(k, j);
                    self.set(i, j, v);
                }
            }
        }
        self.factored = true;
        Ok(self)
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        assert!(self.factored, "solve needs a factored matrix");
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let s: C64 = (i.saturating_sub(self.w)..i)
                .map(|j| self.get(i, j) * x[j])
                .sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: C64 = (i + 1..(i + self.w + 1).min(n))
                .map(|j| self.get(i, j) * x[j])
                .sum();
            x[i] = (x[i] - s) / self.get(i, i);
        }
        x
    }
}

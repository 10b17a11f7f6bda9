use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::field::ModeZeroField;
use crate::error::{Error, Result};
use crate::indicial::{principal_part, ContourConfig, IndicialFamily, IndicialRoot};

/// `e^{λr} (r^k c_k + Σ_{j<k} r^j c_j)` with `c_k = coefficient_vector`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticElement {
    pub lambda: C64,
    pub k: usize,
    pub coefficient_vector: Vec<C64>,
    /// `c_0, …, c_{k-1}`.
    pub lower_terms: Vec<Vec<C64>>,
}

impl AsymptoticElement {
    fn from_coefficients(lambda: C64, mut coeffs: Vec<Vec<C64>>, tol: f64) -> Option<Self> {
        while coeffs
            .last()
            .is_some_and(|c| c.iter().all(|z| z.norm() <= tol))
        {
            coeffs.pop();
        }
        let lead = coeffs.pop()?;
        Some(Self {
            lambda,
            k: coeffs.len(),
            coefficient_vector: lead,
            lower_terms: coeffs,
        })
    }

    /// `e^{-ρr}` times the profile at `r`.
    pub fn weighted_at(&self, r: f64, rho: f64) -> Vec<C64> {
        let e = ((self.lambda - rho) * r).exp();
        let mut acc = self.coefficient_vector.clone();
        for c in self.lower_terms.iter().rev() {
            for (a, x) in acc.iter_mut().zip(c) {
                *a = *a * r + x;
            }
        }
        acc.into_iter().map(|z| z * e).collect()
    }

    pub fn at(&self, r: f64) -> Vec<C64> {
        self.weighted_at(r, 0.0)
    }

    /// The profile sampled on `like`'s grid, stored with weight `rho`.
    pub fn to_field(&self, like: &ModeZeroField, rho: f64) -> Result<ModeZeroField> {
        let grid = *like.grid();
        ModeZeroField::new(
            grid,
            rho,
            grid.nodes()
                .into_iter()
                .map(|r| self.weighted_at(r, rho))
                .collect(),
        )
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Basis of the polynomial-times-exponential solutions `e^{λ₀r}p(r)` of
/// `I(A, ∂_r) u = 0` at an indicial root, in echelon form by degree.
pub fn kernel_elements(
    fam: &IndicialFamily,
    root: &IndicialRoot,
) -> Result<Vec<AsymptoticElement>> {
    if root.residue_rank == 0 {
        return Ok(Vec::new());
    }
    let (m, n) = (fam.rows(), fam.cols());
    let kmax = root.pole_order.max(1) - 1;
    let lambda = root.lambda;
    // D_j = F^{(j)}(λ₀)/j!
    let mut derivs = Vec::with_capacity(kmax + 1);
    let mut p = fam.matrix().clone();
    let mut fact = 1.0;
    for j in 0..=kmax {
        if j > 0 {
            p = p.derivative();
            fact *= j as f64;
        }
        derivs.push(p.eval(lambda).unscale(fact));
    }
    // coefficient of r^l in Σ_j D_j p^{(j)}: Σ_j C(l+j, j) D_j c_{l+j}
    let mut sys = DMatrix::<C64>::zeros((kmax + 1) * m, (kmax + 1) * n);
    for l in 0..=kmax {
        for j in 0..=kmax - l {
            let block = &derivs[j] * C64::new(binomial(l + j, j), 0.0);
            sys.view_mut((l * m, (l + j) * n), (m, n)).copy_from(&block);
        }
    }
    // unknown blocks reordered so that the highest degree comes first
    let width = (kmax + 1) * n;
    let perm = |col: usize| {
        let (block, idx) = (col / n, col % n);
        (kmax - block) * n + idx
    };
    let mut reordered = DMatrix::<C64>::zeros(sys.nrows().max(width), width);
    for col in 0..width {
        reordered
            .view_mut((0, perm(col)), (sys.nrows(), 1))
            .copy_from(&sys.column(col));
    }
    let svd = reordered.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::NumericFailure {
        message: "SVD failed".into(),
        residual: 0.0,
    })?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let rank = root.residue_rank.min(width);
    let mut basis = DMatrix::<C64>::zeros(rank, width);
    for (row, &i) in order.iter().take(rank).enumerate() {
        for c in 0..width {
            basis[(row, c)] = v_t[(i, c)];
        }
    }
    rref(&mut basis, 1e-10);

    let mut out = Vec::new();
    for row in 0..rank {
        let coeffs: Vec<Vec<C64>> = (0..=kmax)
            .map(|deg| (0..n).map(|i| basis[(row, (kmax - deg) * n + i)]).collect())
            .collect();
        if let Some(e) = AsymptoticElement::from_coefficients(lambda, coeffs, 1e-10) {
            out.push(e);
        }
    }
    Ok(out)
}

fn rref(a: &mut DMatrix<C64>, tol: f64) {
    let (rows, cols) = a.shape();
    let mut lead = 0;
    for c in 0..cols {
        if lead == rows {
            break;
        }
        let (pivot, size) = (lead..rows)
            .map(|r| (r, a[(r, c)].norm()))
            .fold((lead, 0.0), |b, x| if x.1 > b.1 { x } else { b });
        if size <= tol {
            continue;
        }
        a.swap_rows(lead, pivot);
        let p = a[(lead, c)];
        for j in 0..cols {
            a[(lead, j)] /= p;
        }
        for r in 0..rows {
            if r != lead {
                let f = a[(r, c)];
                if f != C64::new(0.0, 0.0) {
                    for j in 0..cols {
                        let v = a[(lead, j)];
                        a[(r, j)] -= f * v;
                    }
                }
            }
        }
        lead += 1;
    }
    a.iter_mut()
        .filter(|z| z.norm() <= tol)
        .for_each(|z| *z = C64::new(0.0, 0.0));
}

/// Difference of the line inverses at `rho_to` and `rho_from`, predicted by
/// the residues of `e^{λr} I(A,λ)^{-1} f̂(λ)` at the roots in between, with
/// `f̂(λ) = ∫ e^{-λs} f(s) ds`. Returns the summed correction (stored with
/// weight `rho_to`) and one element per crossed root.
pub fn cross_root_correction(
    fam: &IndicialFamily,
    f: &ModeZeroField,
    rho_from: f64,
    rho_to: f64,
) -> Result<(ModeZeroField, Vec<AsymptoticElement>)> {
    if fam.rows() != fam.cols() {
        return Err(Error::DegenerateOperator(
            "contour shifts need a square family".into(),
        ));
    }
    let roots = fam.root_multiset()?;
    for rho in [rho_from, rho_to] {
        if let Some(r) = roots
            .iter()
            .find(|r| (r.value.re - rho).abs() <= 1e-9 * rho.abs().max(1.0))
        {
            return Err(Error::InvalidWeight(format!(
                "Re λ = {rho} passes through the indicial root {}",
                r.value
            )));
        }
    }
    let (lo, hi) = (rho_from.min(rho_to), rho_from.max(rho_to));
    let sign = if rho_to > rho_from { 1.0 } else { -1.0 };
    let grid = *f.grid();
    let h = grid.step();
    let n = fam.cols();
    let mut elements = Vec::new();
    for root in roots.iter().filter(|r| r.value.re > lo && r.value.re < hi) {
        let lambda = root.value;
        let pp = principal_part(fam, lambda, &ContourConfig::default())?;
        let p = pp.pole_order();
        // μ_i = ∫ (-s)^i / i! e^{-λ₀ s} f(s) ds
        let moments: Vec<Vec<C64>> = (0..p)
            .map(|i| {
                let fact: f64 = (1..=i).map(|x| x as f64).product();
                let mut acc = vec![C64::new(0.0, 0.0); n];
                for j in 0..grid.points {
                    let s = grid.r(j);
                    let w = ((f.weight() - lambda) * s).exp() * (-s).powi(i as i32) / fact * h;
                    for (a, v) in acc.iter_mut().zip(f.weighted(j)) {
                        *a += v * w;
                    }
                }
                acc
            })
            .collect();
        // q_m = (1/m!) Σ_{k>m} a_{-k} μ_{k-1-m}
        let mut coeffs = Vec::with_capacity(p);
        for m in 0..p {
            let fact: f64 = (1..=m).map(|x| x as f64).product();
            let mut q = nalgebra::DVector::<C64>::zeros(n);
            for k in m + 1..=p {
                q += &pp.coefficients[k - 1]
                    * nalgebra::DVector::from_column_slice(&moments[k - 1 - m]);
            }
            coeffs.push(q.iter().map(|z| z * (sign / fact)).collect::<Vec<C64>>());
        }
        let scale = coeffs
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if let Some(e) = AsymptoticElement::from_coefficients(lambda, coeffs, 1e-14 * scale) {
            elements.push(e);
        }
    }
    let samples = grid
        .nodes()
        .into_iter()
        .map(|r| {
            let mut acc = vec![C64::new(0.0, 0.0); n];
            for e in &elements {
                for (a, v) in acc.iter_mut().zip(e.weighted_at(r, rho_to)) {
                    *a += v;
                }
            }
            acc
        })
        .collect();
    Ok((ModeZeroField::new(grid, rho_to, samples)?, elements))
}

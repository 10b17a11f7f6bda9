use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// One term `M · (y∂_y)^power` of an operator acting on the zero Fourier mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorTerm {
    pub power: u32,
    /// Row-major coefficient matrix.
    pub matrix: Vec<Vec<f64>>,
}

/// An admissible differential operator on the zero mode of a cusp, given as a
/// polynomial in `y∂_y` with constant matrix coefficients.
///
/// Coordinates on 1-forms are `(a, b_1, …, b_d)` in the coframe
/// `dy/y, dθ_i/y`. On symmetric 2-tensors they are the orthonormal-frame
/// components `(f_yy, f_θ1θ1, …, f_θdθd, f_yθ1, …, f_yθd)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub name: String,
    pub dim_d: usize,
    pub terms: Vec<OperatorTerm>,
}

impl OperatorSpec {
    pub fn new(name: impl Into<String>, dim_d: usize, terms: Vec<OperatorTerm>) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            dim_d,
            terms,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim_d == 0 {
            return invalid("dimension d must be positive");
        }
        let Some(first) = self.terms.first() else {
            return invalid(format!("operator {:?} has no terms", self.name));
        };
        let rows = first.matrix.len();
        let cols = first.matrix.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return invalid("empty coefficient matrix");
        }
        for t in &self.terms {
            if t.matrix.len() != rows || t.matrix.iter().any(|r| r.len() != cols) {
                return invalid(format!(
                    "operator {:?}: coefficient matrices must all be {rows}x{cols}",
                    self.name
                ));
            }
            if t.matrix.iter().flatten().any(|x| !x.is_finite()) {
                return invalid("non-finite coefficient");
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize) {
        let m = &self.terms[0].matrix;
        (m.len(), m[0].len())
    }

    pub fn max_power(&self) -> u32 {
        self.terms.iter().map(|t| t.power).max().unwrap_or(0)
    }

    /// Coefficient matrices indexed by power (missing powers are zero).
    pub fn coefficient_matrices(&self) -> Vec<DMatrix<C64>> {
        let (rows, cols) = self.shape();
        let mut out = vec![DMatrix::zeros(rows, cols); self.max_power() as usize + 1];
        for t in &self.terms {
            let m = &mut out[t.power as usize];
            for i in 0..rows {
                for j in 0..cols {
                    m[(i, j)] += C64::new(t.matrix[i][j], 0.0);
                }
            }
        }
        out
    }

    /// Symbolic composition `self ∘ other`; constant coefficients commute
    /// with `y∂_y`, so powers add and matrices multiply.
    pub fn compose(&self, other: &OperatorSpec) -> Result<OperatorSpec> {
        let (_, cols) = self.shape();
        let (rows, _) = other.shape();
        if cols != rows || self.dim_d != other.dim_d {
            return invalid(format!(
                "cannot compose {:?} with {:?}",
                self.name, other.name
            ));
        }
        let mut terms = Vec::new();
        for p in &self.terms {
            for q in &other.terms {
                let a = to_dmatrix(&p.matrix);
                let b = to_dmatrix(&q.matrix);
                terms.push(OperatorTerm {
                    power: p.power + q.power,
                    matrix: from_dmatrix(&(a * b)),
                });
            }
        }
        OperatorSpec::new(format!("{}∘{}", self.name, other.name), self.dim_d, terms)
    }

    pub fn identity(n: usize, dim_d: usize) -> Self {
        let m = DMatrix::<f64>::identity(n, n);
        Self::new(
            "identity",
            dim_d,
            vec![OperatorTerm {
                power: 0,
                matrix: from_dmatrix(&m),
            }],
        )
        .expect("identity is valid")
    }

    /// Symmetric derivative `D` from 1-forms to symmetric 2-tensors,
    /// `D(y^λ a dy/y) = y^λ a (λ e_y² − Σ e_θi²)` and
    /// `D(y^λ b dθ_i/y) = y^λ ½(λ+1) b (e_y e_θi + e_θi e_y)`.
    pub fn sym_derivative(d: usize) -> Self {
        let (rows, cols) = (2 * d + 1, d + 1);
        let mut m0 = vec![vec![0.0; cols]; rows];
        let mut m1 = vec![vec![0.0; cols]; rows];
        m1[0][0] = 1.0;
        for i in 0..d {
            m0[1 + i][0] = -1.0;
            m0[1 + d + i][1 + i] = 0.5;
            m1[1 + d + i][1 + i] = 0.5;
        }
        Self::new(
            "D",
            d,
            vec![
                OperatorTerm {
                    power: 0,
                    matrix: m0,
                },
                OperatorTerm {
                    power: 1,
                    matrix: m1,
                },
            ],
        )
        .expect("D is valid")
    }

    /// Divergence `D* = tr ∇` from symmetric 2-tensors to 1-forms; it is minus
    /// the formal adjoint of `D`.
    pub fn divergence(d: usize) -> Self {
        let (rows, cols) = (d + 1, 2 * d + 1);
        let mut m0 = vec![vec![0.0; cols]; rows];
        let mut m1 = vec![vec![0.0; cols]; rows];
        m0[0][0] = -(d as f64);
        m1[0][0] = 1.0;
        for i in 0..d {
            m0[0][1 + i] = 1.0;
            m0[1 + i][1 + d + i] = -(d as f64) - 1.0;
            m1[1 + i][1 + d + i] = 1.0;
        }
        Self::new(
            "D*",
            d,
            vec![
                OperatorTerm {
                    power: 0,
                    matrix: m0,
                },
                OperatorTerm {
                    power: 1,
                    matrix: m1,
                },
            ],
        )
        .expect("D* is valid")
    }

    /// Symmetric Laplacian `Δ = D*D` on 1-forms: diagonal with entries
    /// `λ² − dλ − d` and `½(λ+1)(λ−d−1)`.
    pub fn sym_laplacian(d: usize) -> Self {
        let n = d + 1;
        let diag = |first: f64, rest: f64| {
            let mut m = vec![vec![0.0; n]; n];
            m[0][0] = first;
            for i in 1..n {
                m[i][i] = rest;
            }
            m
        };
        let df = d as f64;
        Self::new(
            "Δ",
            d,
            vec![
                OperatorTerm {
                    power: 0,
                    matrix: diag(-df, -0.5 * (df + 1.0)),
                },
                OperatorTerm {
                    power: 1,
                    matrix: diag(-df, -0.5 * df),
                },
                OperatorTerm {
                    power: 2,
                    matrix: diag(1.0, 0.5),
                },
            ],
        )
        .expect("Δ is valid")
    }

    /// Indicial operator of the Sasaki gradient on a surface, acting on
    /// trigonometric polynomials of degree `≤ modes` in the fiber angle φ
    /// (basis `1, cos φ, sin φ, cos 2φ, …`). Output blocks are the components
    /// along the unit vertical vector, `U` and `V`:
    /// `I(∇_S, λ) f = (∂_φ f, λ f, ∂_φ f)`.
    pub fn sasaki_gradient(modes: usize) -> Self {
        let n = 2 * modes + 1;
        let mut dphi = vec![vec![0.0; n]; n];
        for k in 1..=modes {
            let (c, s) = (2 * k - 1, 2 * k);
            // ∂φ cos kφ = −k sin kφ, ∂φ sin kφ = k cos kφ
            dphi[s][c] = -(k as f64);
            dphi[c][s] = k as f64;
        }
        let mut m0 = vec![vec![0.0; n]; 3 * n];
        let mut m1 = vec![vec![0.0; n]; 3 * n];
        for i in 0..n {
            for j in 0..n {
                m0[i][j] = dphi[i][j];
                m0[2 * n + i][j] = dphi[i][j];
            }
            m1[n + i][i] = 1.0;
        }
        Self::new(
            "∇_S",
            1,
            vec![
                OperatorTerm {
                    power: 0,
                    matrix: m0,
                },
                OperatorTerm {
                    power: 1,
                    matrix: m1,
                },
            ],
        )
        .expect("∇_S is valid")
    }
}

pub(crate) fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let (r, c) = (rows.len(), rows.first().map_or(0, Vec::len));
    DMatrix::from_fn(r, c, |i, j| rows[i][j])
}

pub(crate) fn from_dmatrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(OperatorSpec::new("empty", 1, vec![]).is_err());
        let ragged = vec![
            OperatorTerm {
                power: 0,
                matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            },
            OperatorTerm {
                power: 1,
                matrix: vec![vec![1.0]],
            },
        ];
        assert!(OperatorSpec::new("ragged", 1, ragged).is_err());
        assert!(OperatorSpec::sym_derivative(2).validate().is_ok());
    }

    #[test]
    fn shapes() {
        assert_eq!(OperatorSpec::sym_derivative(3).shape(), (7, 4));
        assert_eq!(OperatorSpec::divergence(3).shape(), (4, 7));
        assert_eq!(OperatorSpec::sym_laplacian(2).shape(), (3, 3));
        assert_eq!(OperatorSpec::sasaki_gradient(2).shape(), (15, 5));
    }

    #[test]
    fn compose_rejects_mismatch() {
        let d = OperatorSpec::sym_derivative(1);
        assert!(d.compose(&d).is_err());
        assert!(OperatorSpec::divergence(1).compose(&d).is_ok());
    }
}

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::residue::{residue_rank, ContourConfig};
use super::spec::OperatorSpec;
use crate::error::{invalid, Error, Result};
use crate::poly::{Poly, PolyMatrix, RootCluster};

/// Relative distance under which two computed roots are the same root.
const ROOT_MATCH_TOL: f64 = 1e-6;

/// `I(A, λ)`: the matrix of polynomials obtained by substituting `λ` for `y∂_y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicialFamily {
    pub name: String,
    pub dim_d: usize,
    matrix: PolyMatrix,
}

/// A value of `λ` where the family fails to be injective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicialRoot {
    pub lambda: C64,
    /// Vanishing order of the characteristic polynomial.
    pub multiplicity: usize,
    /// Rank of the residue operator `Π_λ` (dimension of its range).
    pub residue_rank: usize,
    pub pole_order: usize,
}

pub fn indicial_family(spec: &OperatorSpec) -> Result<IndicialFamily> {
    spec.validate()?;
    let matrix = PolyMatrix::from_coefficients(&spec.coefficient_matrices())?;
    Ok(IndicialFamily {
        name: spec.name.clone(),
        dim_d: spec.dim_d,
        matrix,
    })
}

impl IndicialFamily {
    pub fn from_matrix(name: impl Into<String>, dim_d: usize, matrix: PolyMatrix) -> Self {
        Self {
            name: name.into(),
            dim_d,
            matrix,
        }
    }

    pub fn matrix(&self) -> &PolyMatrix {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn eval(&self, lambda: C64) -> DMatrix<C64> {
        self.matrix.eval(lambda)
    }

    /// `I(PQ, λ) = I(P, λ) · I(Q, λ)`.
    pub fn compose(&self, rhs: &IndicialFamily) -> Result<IndicialFamily> {
        if self.dim_d != rhs.dim_d {
            return invalid("families over cusps of different dimension");
        }
        Ok(Self {
            name: format!("{}∘{}", self.name, rhs.name),
            dim_d: self.dim_d,
            matrix: self.matrix.mul(&rhs.matrix)?,
        })
    }

    /// `I(P*, λ) = I(P, d − λ̄)^*`.
    pub fn adjoint(&self) -> IndicialFamily {
        Self {
            name: format!("{}^*", self.name),
            dim_d: self.dim_d,
            matrix: self.matrix.reflected_adjoint(self.dim_d as f64),
        }
    }

    /// Fixed pseudo-random projections used to turn a tall family into square
    /// ones; their determinants share exactly the roots of the family.
    pub(crate) fn projection(&self, seed: u64) -> DMatrix<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(self.cols(), self.rows(), |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), 0.0)
        })
    }

    /// Polynomial whose roots (with multiplicity) contain those of the family.
    /// Square families give `det I(A,λ)`; tall ones `det(R I(A,λ))` for a
    /// fixed projection `R`.
    pub fn characteristic_polynomial(&self, seed: u64) -> Result<Poly> {
        if self.rows() < self.cols() {
            return Err(Error::DegenerateOperator(format!(
                "{} is {}x{}: never injective",
                self.name,
                self.rows(),
                self.cols()
            )));
        }
        let det = if self.matrix.is_square() {
            self.matrix.determinant()?
        } else {
            self.matrix
                .left_mul_const(&self.projection(seed))?
                .determinant()?
        };
        if det.trimmed(1e-13).is_zero() {
            return Err(Error::DegenerateOperator(format!(
                "determinant of {} vanishes identically",
                self.name
            )));
        }
        Ok(det)
    }

    /// Every root with its algebraic multiplicity. For tall families these
    /// are the common roots of two independent projections, with the smaller
    /// multiplicity (the gcd of all maximal minors, generically).
    pub fn root_multiset(&self) -> Result<Vec<RootCluster>> {
        let first: Vec<RootCluster> = self
            .characteristic_polynomial(1)?
            .roots()?
            .into_iter()
            .map(|r| self.polish(r))
            .collect();
        if self.matrix.is_square() {
            return Ok(first);
        }
        let second = self.characteristic_polynomial(2)?.roots()?;
        Ok(first
            .into_iter()
            .filter_map(|r| {
                let tol = ROOT_MATCH_TOL * r.value.norm().max(1.0);
                second
                    .iter()
                    .find(|s| (s.value - r.value).norm() <= tol)
                    .map(|s| RootCluster {
                        value: r.value,
                        multiplicity: r.multiplicity.min(s.multiplicity),
                    })
            })
            .collect())
    }

    /// Multiplicity-aware Newton on `det M(λ)` evaluated directly from the
    /// matrix, with `M = I(A,λ)` or its projection. The step is
    /// `m / tr(M^{-1} M')` (Jacobi's formula).
    fn polish(&self, root: RootCluster) -> RootCluster {
        let deriv = self.matrix.derivative();
        let square = |m: DMatrix<C64>| {
            if self.matrix.is_square() {
                m
            } else {
                self.projection(1) * m
            }
        };
        let scale = root.value.norm().max(1.0);
        let mut z = root.value;
        for _ in 0..50 {
            let Some(inv) = square(self.eval(z)).try_inverse() else {
                break;
            };
            let tr = (inv * square(deriv.eval(z))).trace();
            if tr.norm() == 0.0 || !tr.re.is_finite() || !tr.im.is_finite() {
                break;
            }
            let step = C64::new(root.multiplicity as f64, 0.0) / tr;
            z -= step;
            if step.norm() <= 1e-15 * scale {
                break;
            }
        }
        if (z - root.value).norm() <= 1e-4 * scale && z.re.is_finite() && z.im.is_finite() {
            RootCluster {
                value: z,
                multiplicity: root.multiplicity,
            }
        } else {
            root
        }
    }

    /// Roots with real part in `window`, each with residue rank and pole order.
    pub fn roots(&self, window: (f64, f64)) -> Result<Vec<IndicialRoot>> {
        let (lo, hi) = window;
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return invalid(format!("bad window [{lo}, {hi}]"));
        }
        self.root_multiset()?
            .into_iter()
            .filter(|r| (lo..=hi).contains(&r.value.re))
            .map(|r| {
                let (rank, order) = residue_rank(self, r.value, &ContourConfig::default())?;
                Ok(IndicialRoot {
                    lambda: r.value,
                    multiplicity: r.multiplicity,
                    residue_rank: rank,
                    pole_order: order,
                })
            })
            .collect()
    }
}

/// `S(A)`: the sorted distinct real parts of the roots.
pub fn indicial_set(roots: &[IndicialRoot]) -> Vec<f64> {
    let mut s: Vec<f64> = Vec::new();
    let mut re: Vec<f64> = roots.iter().map(|r| r.lambda.re).collect();
    re.sort_by(f64::total_cmp);
    for x in re {
        if s.last()
            .is_none_or(|&l| (x - l).abs() > 1e-9 * x.abs().max(1.0))
        {
            s.push(x);
        }
    }
    s
}

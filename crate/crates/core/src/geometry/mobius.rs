use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Half-width of the band around `|trace| = 2` classified as parabolic.
pub const PARABOLIC_TOL: f64 = 1e-9;
/// Accepted deviation of an input determinant from one before renormalization.
pub const DETERMINANT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::Identity => "identity",
            Classification::Elliptic => "elliptic",
            Classification::Parabolic => "parabolic",
            Classification::Hyperbolic => "hyperbolic",
        };
        f.write_str(s)
    }
}

/// A unit-determinant real 2×2 matrix acting by `z ↦ (az+b)/(cz+d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MobiusMap {
    /// Validates the determinant and rescales it to one.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !det.is_finite() || (det - 1.0).abs() > DETERMINANT_TOL {
            return invalid(format!("determinant {det} is not 1"));
        }
        let s = det.sqrt().recip();
        Ok(Self {
            a: a * s,
            b: b * s,
            c: c * s,
            d: d * s,
        })
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub const fn identity() -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    pub const fn translation(w: f64) -> Self {
        Self {
            a: 1.0,
            b: w,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn compose(&self, rhs: &MobiusMap) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn apply(&self, z: C64) -> C64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    /// Complex derivative `1/(cz+d)^2`; pushes tangent vectors forward.
    pub fn derivative(&self, z: C64) -> C64 {
        let q = z * self.c + self.d;
        (q * q).inv()
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let close = |s: f64| {
            (self.a - s).abs() <= tol
                && (self.d - s).abs() <= tol
                && self.b.abs() <= tol
                && self.c.abs() <= tol
        };
        close(1.0) || close(-1.0)
    }

    pub fn classify(&self) -> Result<Classification> {
        let det = self.determinant();
        if (det - 1.0).abs() > DETERMINANT_TOL {
            return invalid(format!("determinant {det} is not 1"));
        }
        let t = self.trace().abs();
        Ok(if self.is_identity(PARABOLIC_TOL) {
            Classification::Identity
        } else if (t - 2.0).abs() < PARABOLIC_TOL {
            Classification::Parabolic
        } else if t > 2.0 {
            Classification::Hyperbolic
        } else {
            Classification::Elliptic
        })
    }

    /// Real fixed points `(repelling, attracting)` of a hyperbolic map with `c ≠ 0`.
    pub fn axis_endpoints(&self) -> Result<(f64, f64)> {
        if self.classify()? != Classification::Hyperbolic {
            return invalid("axis requested for a non-hyperbolic map");
        }
        if self.c.abs() < 1e-14 {
            return invalid("hyperbolic map fixing infinity has no finite axis");
        }
        let disc = (self.trace() * self.trace() - 4.0).sqrt();
        let x1 = (self.a - self.d + disc) / (2.0 * self.c);
        let x2 = (self.a - self.d - disc) / (2.0 * self.c);
        // attracting point: |cz + d| > 1
        if (self.c * x1 + self.d).abs() > 1.0 {
            Ok((x2, x1))
        } else {
            Ok((x1, x2))
        }
    }
}

/// Hyperbolic distance in the upper half-plane.
pub fn distance(z: C64, w: C64) -> f64 {
    let arg = 1.0 + (z - w).norm_sqr() / (2.0 * z.im * w.im);
    arg.max(1.0).acosh()
}

/// `cosh` of the hyperbolic distance; monotone in the distance and cheaper.
pub fn cosh_distance(z: C64, w: C64) -> f64 {
    1.0 + (z - w).norm_sqr() / (2.0 * z.im * w.im)
}

/// Hyperbolic norm of a tangent vector (as a complex number) at `z`.
pub fn tangent_norm(z: C64, v: C64) -> f64 {
    v.norm() / z.im
}

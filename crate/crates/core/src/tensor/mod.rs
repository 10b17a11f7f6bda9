//! Symmetric tensor fields on a truncated surface cusp, the operators
//! `D`, `D*`, `Δ = D*D`, pullback to the unit tangent bundle and the
//! solenoidal decomposition.

mod banded;
mod field;
mod ops;
mod pullback;
mod solenoidal;

pub use banded::BandMatrix;
pub use field::{SymTensorField, TensorGrid, WeightedNorm};
pub use ops::{
    adjoint_divergence, dirichlet_sym_derivative, divergence, sym_derivative, sym_laplacian,
};
pub use pullback::{
    contract, pullback_pi_m, sym_derivative_at, FieldInterpolator, Jet, TangentSample,
};
pub use solenoidal::{
    project_unchecked, solenoidal_project, Boundary, SolenoidalDecomposition, SolenoidalReport,
    SUPPORT_MARGIN,
};

/// Least-squares slope of `log err` against `log h`.
pub fn observed_order(h: &[f64], err: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = h.iter().zip(err).map(|(h, e)| (h.ln(), e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests;

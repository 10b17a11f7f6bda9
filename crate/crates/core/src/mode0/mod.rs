//! Zero-mode solver: indicial operators act on `r = log y` as constant
//! coefficient differential operators, diagonalized by the Fourier-Laplace
//! transform on a weighted line `Re λ = ρ`.

mod asymptotics;
mod field;
mod solver;

pub use asymptotics::{cross_root_correction, kernel_elements, AsymptoticElement};
pub(crate) use field::vec_norm;
pub use field::{ModeZeroField, RGrid, WINDOW_FRACTION};
pub use solver::{
    apply_indicial, fit_tail_rates, invert_on_line, invert_with_report, line_residual,
    plancherel_defect, InversionReport, ALIASING_TOL, NEAR_ROOT,
};

/// Smooth bump `exp(1 − 1/(1 − ((r−c)/w)²))` supported in `|r − c| < w`.
pub fn bump(r: f64, centre: f64, half_width: f64) -> f64 {
    let t = (r - centre) / half_width;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

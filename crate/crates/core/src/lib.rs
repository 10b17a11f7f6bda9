//! Numerical laboratory for analysis on hyperbolic cusps.

pub mod error;
pub mod geometry;
pub mod indicial;
pub mod lp;
pub mod mode0;
pub mod poly;
pub mod quad;
pub mod spectral;
pub mod suite;
pub mod tensor;
pub mod xray;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

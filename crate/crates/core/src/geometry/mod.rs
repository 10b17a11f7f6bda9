//! Upper half-plane geometry: Möbius maps, free-group words, Fuchsian
//! surfaces with a cusp at infinity, and their closed geodesics.

mod geodesic;
mod mobius;
mod surface;
mod word;

pub use geodesic::{write_geodesics_csv, ClosedGeodesic};
pub use mobius::{cosh_distance, distance, tangent_norm, Classification, MobiusMap, PARABOLIC_TOL};
pub use surface::{FuchsianSurface, DIRICHLET_CENTRE, REDUCTION_CAP};
pub use word::{Letter, Word};

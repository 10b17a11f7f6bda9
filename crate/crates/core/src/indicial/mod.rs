//! Indicial families of admissible operators on the zero Fourier mode of a
//! cusp: construction, roots, composition and adjoint laws, residue ranks,
//! index jumps, and the fiber check for the Sasaki gradient.

mod family;
pub mod fiber;
mod residue;
mod spec;

pub use family::{indicial_family, indicial_set, IndicialFamily, IndicialRoot};
pub use residue::{
    index_jump, left_inverse, principal_part, residue_rank, ContourConfig, PrincipalPart,
};
pub use spec::{OperatorSpec, OperatorTerm};

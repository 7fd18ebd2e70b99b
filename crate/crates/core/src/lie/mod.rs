//! Lie-algebra data, reductive splittings and torus subalgebras.

mod algebra;
mod space;
mod torus;

pub use algebra::{LieAlgebraData, ValidationReport, VALIDATION_TOL};
pub use space::{reductive_split, HomogeneousSpaceData, KERNEL_TOL, SUBALGEBRA_TOL};
pub use torus::{verify_torus, Period, TorusCertificate, MAX_DENOMINATOR, TORUS_TOL};

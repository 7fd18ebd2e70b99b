//! Ricci flow of invariant metrics on compact homogeneous spaces.
//!
//! An invariant metric on `G/H` is a positive-definite, `Ad(H)`-invariant
//! symmetric matrix on the reductive complement `m`, and the Ricci flow
//! `dg/dt = -2 Ric(g)` becomes an ODE on those matrices. On top of the flow the
//! crate provides blow-down sequences, detection of collapsing torus
//! directions, torus averaging, geometric models in normal coordinates, and
//! checks of the limiting shrinking soliton.

pub mod blowdown;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod lie;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod pipeline;
pub mod presets;
pub mod report;
pub mod scenario;
pub mod soliton;

pub use error::{Error, Result};

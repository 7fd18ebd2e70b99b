//! Blow-down sequences of ancient flows, the collapsing torus, averaging over
//! it, and the limiting base metric.

mod average;
mod detect;
mod limit;
mod sequence;

pub use average::{averaging_defect, symmetrize, AVERAGING_NODES};
pub use detect::{
    detect_collapsing_torus, CollapseDetection, DRIFT_TOL, MAX_EXPONENT, REL_EIGEN_TOL,
};
pub use limit::{limit_triple, limit_triple_with, LimitRecord, LimitStatus, LimitTolerances};
pub use sequence::{blowdown_metrics, BlowdownSequence};

//! Invariant metrics on `m` and their algebraic curvature.

mod connection;
mod curvature;
mod functional;
mod metric;
mod submersion;

pub use connection::{connection_map, ConnectionData};
pub use curvature::{
    curvature_package, curvature_summary, ricci, CurvaturePackage, CurvatureSummary, SecEstimate,
    SEC_STARTS,
};
pub use functional::{diameter_bound, f_derivative, f_functional};
pub use metric::{InvariantMetric, INVARIANCE_TOL};
pub use submersion::{
    ad_t_invariance_defect, base_metric, metric_triple, oneill_data, MetricTriple, OneillData,
    ONEILL_C, T_INVARIANCE_TOL,
};

//! Geometric models in normal coordinates and the defects of the projection
//! onto a torus quotient.

mod build;
mod bvp;
mod chart;
mod compare;
mod defects;
mod systems;

pub use build::{
    build_model, normalization_factor, product_model, GeometricModel, GridSpec, ModelDump,
    DIRECTION_SEED, MODEL_RADIUS,
};
pub use bvp::{chart_point_of, Shooter, BVP_TOL};
pub use chart::{
    chart_metric, chart_metric_within, chart_ricci_at_origin, dexp_left, CHART_RADIUS,
};
pub use compare::{compare_models, compare_models_detailed, Comparison, COMPARE_RADIUS};
pub use defects::{submersion_defects, SubmersionDefects, MAX_DROP_RATE};
pub use systems::{chart_velocity, FrameData, JacobiSystem, TrackedGeodesic, TrackedOneParameter};

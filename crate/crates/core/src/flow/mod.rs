//! Ricci flow `dg/dt = -2 Ric(g)` on invariant metrics and its monitors.
//!
//! The reduction to invariant metrics is a finite-dimensional ODE, so backward
//! runs are ordinary backward ODE integration; the backward ill-posedness of the
//! Ricci flow PDE does not arise here.

mod asymptotics;
mod monitors;
mod system;
mod trajectory;

pub use asymptotics::{
    classify_asymptotics, AsymptoticClass, Asymptotics, COLLAPSE_FACTOR, CONVERGED_PER_DECADE,
};
pub use monitors::{monitors, MonitorReport};
pub use system::{pack_sym, ricci_rhs, unpack_sym, RicciFlowSystem};
pub use trajectory::{
    integrate_flow, integrate_flow_with, FlowControls, FlowStatus, FlowTrajectory, MonitorRecord,
};

use serde::Serialize;

use crate::error::{Error, Result};

use super::trajectory::FlowTrajectory;

/// Monotonicity slack on discrete `dF/dt`.
const MONO_SLACK: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct MonitorReport {
    pub typei_min: f64,
    pub typei_max: f64,
    pub f_series: Vec<(f64, f64)>,
    /// Discrete `dF/dt` between consecutive stored times.
    pub df_dt: Vec<f64>,
    pub min_df_dt: f64,
    pub f_monotone: bool,
    pub max_diam_over_sqrt_t: f64,
    pub scal_positive: bool,
}

pub fn monitors(traj: &FlowTrajectory) -> Result<MonitorReport> {
    let (lo, _) = traj.coverage();
    if !(lo <= -1.0) {
        return Err(Error::Domain(format!(
            "trajectory must reach t <= -1 (earliest time {lo})"
        )));
    }
    let mut tmin = f64::INFINITY;
    let mut tmax = f64::NEG_INFINITY;
    let mut dmax = f64::NEG_INFINITY;
    let mut scal_pos = true;
    for r in traj.monitors.iter().filter(|r| r.t <= -1.0) {
        tmin = tmin.min(r.typei_ratio);
        tmax = tmax.max(r.typei_ratio);
        if r.diam_over_sqrt_t.is_finite() {
            dmax = dmax.max(r.diam_over_sqrt_t);
        }
        scal_pos &= r.scal > 0.0;
    }
    let f_series: Vec<(f64, f64)> = traj.monitors.iter().map(|r| (r.t, r.f)).collect();
    let mut df = Vec::with_capacity(f_series.len().saturating_sub(1));
    let mut mono = true;
    for w in f_series.windows(2) {
        let d = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        mono &= d >= -MONO_SLACK * (1.0 + w[0].1.abs().max(w[1].1.abs()));
        df.push(d);
    }
    let min_df = df.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(MonitorReport {
        typei_min: tmin,
        typei_max: tmax,
        f_series,
        df_dt: df,
        min_df_dt: min_df,
        f_monotone: mono,
        max_diam_over_sqrt_t: if dmax.is_finite() { dmax } else { f64::NAN },
        scal_positive: scal_pos,
    })
}

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowTrajectory;
use crate::geometry::InvariantMetric;

/// `g_n = g(tau_n t_eval) / tau_n` for increasing `tau_n`.
#[derive(Clone, Debug)]
pub struct BlowdownSequence {
    pub taus: Vec<f64>,
    pub t_eval: f64,
    pub metrics: Vec<InvariantMetric>,
    /// Interval covered by the source trajectory.
    pub source_coverage: (f64, f64),
    pub source_method: String,
}

#[derive(Serialize)]
struct Row {
    tau: f64,
    metric: Vec<Vec<f64>>,
}

impl BlowdownSequence {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn rows(&self) -> serde_json::Value {
        let rows: Vec<Row> = self
            .taus
            .iter()
            .zip(&self.metrics)
            .map(|(&tau, g)| Row {
                tau,
                metric: g
                    .g
                    .row_iter()
                    .map(|r| r.iter().cloned().collect())
                    .collect(),
            })
            .collect();
        serde_json::to_value(rows).unwrap_or(serde_json::Value::Null)
    }
}

pub fn blowdown_metrics(
    traj: &FlowTrajectory,
    taus: &[f64],
    t_eval: f64,
) -> Result<BlowdownSequence> {
    if !(t_eval < 0.0) {
        return Err(Error::Config(format!(
            "t_eval must be negative, got {t_eval}"
        )));
    }
    if taus.is_empty() || taus.iter().any(|&t| !(t > 0.0)) || taus.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::Config(
            "taus must be positive and strictly increasing".into(),
        ));
    }
    let need = (taus[taus.len() - 1] * t_eval).min(t_eval);
    let hi = (taus[0] * t_eval).max(t_eval);
    let (lo_cov, hi_cov) = traj.coverage();
    if !(traj.covers(need) && traj.covers(hi)) {
        return Err(Error::Domain(format!(
            "blow-down needs the trajectory on [{need:e}, {hi:e}] but it covers [{lo_cov:e}, {hi_cov:e}]"
        )));
    }
    let metrics = taus
        .iter()
        .map(|&tau| {
            let g = traj.metric_at(tau * t_eval).ok_or_else(|| {
                Error::Domain(format!("no dense output at t = {:e}", tau * t_eval))
            })?;
            InvariantMetric::new(g.g / tau, traj.space.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlowdownSequence {
        taus: taus.to_vec(),
        t_eval,
        metrics,
        source_coverage: (lo_cov, hi_cov),
        source_method: traj.method.clone(),
    })
}

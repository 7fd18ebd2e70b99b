use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{curvature_summary, diameter_bound, InvariantMetric};
use crate::lie::HomogeneousSpaceData;
use crate::linalg::{max_eig, min_eig, Mat};
use crate::ode::{
    DenseSegment, Integrator, IntegratorRegistry, SolveOptions, SolveStatus, StepControl,
};

use super::system::{pack_sym, unpack_sym, RicciFlowSystem};

#[derive(Clone, Debug)]
pub struct FlowControls {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Stop once `|Rm|` exceeds this.
    pub kappa_max: f64,
    /// Stop once the smallest eigenvalue of `G` drops below this.
    pub min_eig: f64,
    /// Times at which metrics and monitors are stored; when empty every
    /// accepted step is stored.
    pub sample_times: Vec<f64>,
    pub method: String,
    pub max_steps: usize,
}

impl Default for FlowControls {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
            kappa_max: 1e8,
            min_eig: 1e-10,
            sample_times: Vec::new(),
            method: "dopri5".into(),
            max_steps: 2_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FlowStatus {
    Completed,
    HitSingularity { t_star: f64 },
    StepFailure { t: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct MonitorRecord {
    pub t: f64,
    pub scal: f64,
    pub rm_norm: f64,
    pub f: f64,
    pub typei_ratio: f64,
    /// `NaN` when `diam_Q` is unknown or `t = 0`.
    pub diam_over_sqrt_t: f64,
    pub min_eig: f64,
}

impl MonitorRecord {
    pub fn of(t: f64, g: &InvariantMetric) -> Result<Self> {
        let c = curvature_summary(g)?;
        let m = g.dim() as f64;
        let vol = g.g.determinant().sqrt();
        let diam = match diameter_bound(g) {
            Ok(d) if t != 0.0 => d / t.abs().sqrt(),
            _ => f64::NAN,
        };
        Ok(Self {
            t,
            scal: c.scal,
            rm_norm: c.rm_norm,
            f: vol.powf(2.0 / m) * c.scal,
            typei_ratio: c.rm_norm * t.abs(),
            diam_over_sqrt_t: diam,
            min_eig: g.min_eig(),
        })
    }
}

/// Solution of the flow: stored samples in increasing time plus the dense
/// output of every accepted step.
#[derive(Clone, Debug)]
pub struct FlowTrajectory {
    pub space: Arc<HomogeneousSpaceData>,
    pub t0: f64,
    pub t1: f64,
    pub times: Vec<f64>,
    pub metrics: Vec<InvariantMetric>,
    pub monitors: Vec<MonitorRecord>,
    pub status: FlowStatus,
    pub method: String,
    pub steps: usize,
    pub rejected: usize,
    segments: Vec<DenseSegment>,
}

impl FlowTrajectory {
    pub fn is_backward(&self) -> bool {
        self.t1 < self.t0
    }

    /// Interval actually covered by the integration.
    pub fn coverage(&self) -> (f64, f64) {
        let mut lo = self.t0;
        let mut hi = self.t0;
        for s in &self.segments {
            let (a, b) = s.span();
            lo = lo.min(a);
            hi = hi.max(b);
        }
        (lo, hi)
    }

    pub fn covers(&self, t: f64) -> bool {
        let (lo, hi) = self.coverage();
        t >= lo && t <= hi
    }

    /// Dense-output metric at `t`.
    pub fn metric_at(&self, t: f64) -> Option<InvariantMetric> {
        if t == self.t0 {
            return self
                .metrics
                .iter()
                .zip(&self.times)
                .find(|(_, &s)| s == t)
                .map(|(g, _)| g.clone());
        }
        // segments are sorted by lower end
        let idx = self.segments.partition_point(|s| s.span().1 < t);
        let seg = self.segments.get(idx).filter(|s| s.contains(t))?;
        let m = self.space.mdim();
        Some(InvariantMetric::new_unchecked(
            unpack_sym(&seg.eval(t), m),
            self.space.clone(),
        ))
    }

    pub fn segments(&self) -> &[DenseSegment] {
        &self.segments
    }

    pub fn last_metric(&self) -> Option<&InvariantMetric> {
        if self.is_backward() {
            self.metrics.first()
        } else {
            self.metrics.last()
        }
    }
}

pub fn integrate_flow(
    g0: &InvariantMetric,
    t0: f64,
    t1: f64,
    controls: &FlowControls,
) -> Result<FlowTrajectory> {
    let reg = IntegratorRegistry::builtin();
    integrate_flow_with(reg.get(&controls.method)?, g0, t0, t1, controls)
}

pub fn integrate_flow_with(
    integ: &dyn Integrator,
    g0: &InvariantMetric,
    t0: f64,
    t1: f64,
    controls: &FlowControls,
) -> Result<FlowTrajectory> {
    if t0 == t1 {
        return Err(Error::Domain("flow interval is empty (t0 = t1)".into()));
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::Domain("flow endpoints must be finite".into()));
    }
    let sys = RicciFlowSystem::new(g0.space.clone());
    let m = g0.dim();
    let mut y0 = vec![0.0; m * (m + 1) / 2];
    pack_sym(&g0.g, &mut y0);
    let dir = if t1 > t0 { 1.0 } else { -1.0 };

    // sample times strictly inside the run, in integration order
    let mut pending: Vec<f64> = controls
        .sample_times
        .iter()
        .cloned()
        .filter(|&s| (s - t0) * dir > 0.0 && (t1 - s) * dir >= 0.0)
        .collect();
    pending.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
    pending.dedup();
    let mut next = 0;
    let store_all = controls.sample_times.is_empty();

    let mut samples: Vec<(f64, Mat)> = vec![(t0, g0.g.clone())];
    let mut segments: Vec<DenseSegment> = Vec::new();
    let mut status = FlowStatus::Completed;
    let mut last_rm = 0.0_f64;

    let opts = SolveOptions {
        rtol: controls.rtol,
        atol: controls.atol,
        max_step: controls.max_step,
        h0: None,
        max_steps: controls.max_steps,
    };
    let summary = integ.solve(&sys, t0, &y0, t1, &opts, &mut |st| {
        while next < pending.len() && (st.t - pending[next]) * dir >= 0.0 {
            let s = pending[next];
            samples.push((s, unpack_sym(&st.dense.eval(s), m)));
            next += 1;
        }
        segments.push(st.dense.clone());
        let g = unpack_sym(st.y, m);
        if store_all && samples.last().map(|x| x.0) != Some(st.t) {
            samples.push((st.t, g.clone()));
        }
        let me = min_eig(&g);
        let rm = curvature_summary(&sys.metric(st.y))
            .map(|c| c.rm_norm)
            .unwrap_or(f64::INFINITY);
        last_rm = rm;
        if me < controls.min_eig || rm > controls.kappa_max {
            status = FlowStatus::HitSingularity { t_star: st.t };
            return StepControl::Stop;
        }
        StepControl::Continue
    })?;

    let end_g = unpack_sym(&summary.y, m);
    match summary.status {
        SolveStatus::Finished | SolveStatus::Stopped => {}
        SolveStatus::StepTooSmall | SolveStatus::MaxSteps => {
            let cond = max_eig(&end_g) / min_eig(&end_g).max(f64::MIN_POSITIVE);
            let blowing_up =
                last_rm > 1e-4 * controls.kappa_max || cond > 1e8 || min_eig(&end_g) < 1e-6;
            status = if summary.status == SolveStatus::StepTooSmall && blowing_up {
                FlowStatus::HitSingularity { t_star: summary.t }
            } else {
                FlowStatus::StepFailure { t: summary.t }
            };
        }
    }
    if samples.last().map(|x| x.0) != Some(summary.t) {
        samples.push((summary.t, end_g));
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    segments.sort_by(|a, b| a.span().0.total_cmp(&b.span().0));

    let mut times = Vec::with_capacity(samples.len());
    let mut metrics = Vec::with_capacity(samples.len());
    let mut monitors = Vec::with_capacity(samples.len());
    for (t, g) in samples {
        let met = InvariantMetric::new_unchecked(g, g0.space.clone());
        monitors.push(MonitorRecord::of(t, &met)?);
        times.push(t);
        metrics.push(met);
    }
    Ok(FlowTrajectory {
        space: g0.space.clone(),
        t0,
        t1,
        times,
        metrics,
        monitors,
        status,
        method: integ.name().to_string(),
        steps: summary.steps,
        rejected: summary.rejected,
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{reductive_split, LieAlgebraData};
    use nalgebra::DVector;

    fn su2_space() -> Arc<HomogeneousSpaceData> {
        Arc::new(
            reductive_split(
                &LieAlgebraData::su2(),
                &Mat::zeros(3, 0),
                Some(2.0 * std::f64::consts::PI),
            )
            .unwrap(),
        )
    }

    fn diag(d: &[f64]) -> Mat {
        Mat::from_diagonal(&DVector::from_column_slice(d))
    }

    #[test]
    fn round_sphere_extinction() {
        let g0 = InvariantMetric::new(Mat::identity(3, 3), su2_space()).unwrap();
        let tr = integrate_flow(&g0, 0.0, 2.0, &FlowControls::default()).unwrap();
        match tr.status {
            FlowStatus::HitSingularity { t_star } => {
                assert!((t_star - 1.0).abs() < 1e-6, "{t_star}")
            }
            ref s => panic!("unexpected {s:?}"),
        }
        for (t, g) in tr.times.iter().zip(&tr.metrics) {
            assert!((&g.g - Mat::identity(3, 3) * (1.0 - t)).norm() < 1e-9);
        }
    }

    #[test]
    fn product_extinction() {
        let a = LieAlgebraData::su2_plus_u1();
        let s = Arc::new(
            reductive_split(
                &a,
                &Mat::from_column_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]),
                None,
            )
            .unwrap(),
        );
        let g0 = InvariantMetric::new(diag(&[2.0, 2.0, 1.0]), s).unwrap();
        let c = FlowControls {
            sample_times: vec![-0.5, -0.25],
            ..Default::default()
        };
        let tr = integrate_flow(&g0, -1.0, 1.0, &c).unwrap();
        match tr.status {
            FlowStatus::HitSingularity { t_star } => assert!(t_star.abs() < 1e-6),
            ref s => panic!("unexpected {s:?}"),
        }
        let g = tr.metric_at(-0.5).unwrap();
        assert!((g.g - diag(&[1.0, 1.0, 1.0])).norm() < 1e-10);
    }

    #[test]
    fn backward_dense_matches_samples() {
        let g0 = InvariantMetric::new(diag(&[0.9, 1.0, 1.0]), su2_space()).unwrap();
        let c = FlowControls {
            sample_times: vec![-2.0, -10.0, -50.0],
            ..Default::default()
        };
        let tr = integrate_flow(&g0, -1.0, -100.0, &c).unwrap();
        assert_eq!(tr.status, FlowStatus::Completed);
        assert_eq!(tr.times.first(), Some(&-100.0));
        assert_eq!(tr.times.last(), Some(&-1.0));
        for (t, g) in tr.times.iter().zip(&tr.metrics) {
            let d = tr.metric_at(*t).unwrap();
            assert!((&d.g - &g.g).norm() <= 1e-9 * g.g.norm());
        }
    }
}

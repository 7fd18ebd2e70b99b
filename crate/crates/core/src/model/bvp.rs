//! Two-point geodesic distances from the origin inside the canonical chart.

use crate::error::Result;
use crate::geometry::InvariantMetric;
use crate::linalg::{Mat, Vec_};
use crate::ode::{solve_to_end, EmbeddedRk, SolveOptions, SolveStatus};

use super::systems::{FrameData, TrackedGeodesic, TrackedOneParameter};

pub const BVP_TOL: f64 = 1e-6;
const NEWTON_ITERS: usize = 30;

fn opts() -> SolveOptions {
    SolveOptions {
        rtol: 1e-11,
        atol: 1e-13,
        ..Default::default()
    }
}

/// Chart coordinates of `exp(Y) exp(Z) o`, both in m-coordinates.
pub fn chart_point_of(g: &InvariantMetric, y: &Vec_, z: &Vec_) -> Result<Vec_> {
    let sp = g.space.clone();
    let (m, n) = (sp.mdim(), sp.n());
    if z.norm() == 0.0 {
        return Ok(y.clone());
    }
    let sys = TrackedOneParameter {
        z_adapted: sp.m_to_adapted(z),
        space: sp,
    };
    let mut y0 = vec![0.0; m + n * n];
    y0[..m].copy_from_slice(y.as_slice());
    for i in 0..n {
        y0[m + i * n + i] = 1.0;
    }
    let sum = solve_to_end(&EmbeddedRk::dopri5(), &sys, 0.0, &y0, 1.0, &opts())?;
    if sum.status != SolveStatus::Finished {
        return Err(crate::Error::Numeric("chart tracking stalled".into()));
    }
    Ok(Vec_::from_column_slice(&sum.y[..m]))
}

pub struct Shooter {
    sys: TrackedGeodesic,
    g: Mat,
}

impl Shooter {
    pub fn new(g: &InvariantMetric) -> Result<Self> {
        Ok(Self {
            sys: TrackedGeodesic {
                frame: FrameData::new(g)?,
            },
            g: g.g.clone(),
        })
    }

    /// Chart endpoint at time 1 of the geodesic with initial velocity `v`.
    pub fn endpoint(&self, v: &Vec_) -> Result<Vec_> {
        let y0 = self.sys.initial_state(v);
        let sum = solve_to_end(&EmbeddedRk::dopri5(), &self.sys, 0.0, &y0, 1.0, &opts())?;
        if sum.status != SolveStatus::Finished {
            return Err(crate::Error::Numeric("geodesic integration stalled".into()));
        }
        Ok(self.sys.chart_point(&sum.y))
    }

    /// Newton on the initial velocity from one guess; returns the length.
    pub fn solve_from(&self, target: &Vec_, guess: &Vec_) -> Option<f64> {
        let m = target.len();
        let mut v = guess.clone();
        let mut res = self.endpoint(&v).ok()? - target;
        for _ in 0..NEWTON_ITERS {
            if res.norm() < BVP_TOL {
                return Some((v.transpose() * &self.g * &v)[0].max(0.0).sqrt());
            }
            let mut jac = Mat::zeros(m, m);
            let base = &res + target;
            for k in 0..m {
                let hk = 1e-6 * v.norm().max(1.0);
                let mut vp = v.clone();
                vp[k] += hk;
                let col = (self.endpoint(&vp).ok()? - &base) / hk;
                jac.set_column(k, &col);
            }
            let step = jac.lu().solve(&(-&res))?;
            let mut lam = 1.0;
            let mut accepted = false;
            for _ in 0..12 {
                let vn = &v + &step * lam;
                if let Ok(e) = self.endpoint(&vn) {
                    let rn = e - target;
                    if rn.norm() < res.norm() {
                        v = vn;
                        res = rn;
                        accepted = true;
                        break;
                    }
                }
                lam *= 0.5;
            }
            if !accepted {
                return None;
            }
        }
        (res.norm() < BVP_TOL).then(|| (v.transpose() * &self.g * &v)[0].max(0.0).sqrt())
    }

    /// Shortest converged solution over several guesses.
    pub fn distance(&self, target: &Vec_, guesses: &[Vec_]) -> Option<f64> {
        guesses
            .iter()
            .filter_map(|gs| self.solve_from(target, gs))
            .min_by(f64::total_cmp)
    }
}

//! The limit `(0, b_inf, g_check_inf)` of a collapsing blow-down sequence and
//! the Einstein test on the base.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{
    base_metric, curvature_summary, metric_triple, oneill_data, InvariantMetric,
};
use crate::linalg::{frob, max_eig, Mat};
use crate::model::{submersion_defects, SubmersionDefects};

use super::average::{averaging_defect, symmetrize};
use super::detect::CollapseDetection;
use super::sequence::BlowdownSequence;

#[derive(Clone, Debug, Serialize)]
pub struct LimitTolerances {
    /// Largest sine of the principal angle between the last two horizontal spaces.
    pub b_angle: f64,
    /// Relative change of the base metric between the last two entries.
    pub cauchy: f64,
    pub einstein: f64,
    /// Distance pairs per entry for the measured defects; 0 skips them.
    pub defect_samples: usize,
}

impl Default for LimitTolerances {
    fn default() -> Self {
        Self {
            b_angle: 1e-4,
            cauchy: 2e-2,
            einstein: 1e-2,
            defect_samples: 24,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitStatus {
    Pass,
    Inconclusive,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitRecord {
    pub s: usize,
    pub taus: Vec<f64>,
    /// Columns in m-coordinates.
    pub b_infty: Vec<Vec<f64>>,
    /// Base metric in the quotient's complement coordinates.
    pub g_check_infty: Vec<Vec<f64>>,
    pub g_hat_decay: Vec<f64>,
    pub a_norm_sq_seq: Vec<f64>,
    pub da_norm_seq: Vec<f64>,
    pub delta0_seq: Vec<f64>,
    pub pull_defect_seq: Vec<f64>,
    pub epsilon_seq: Vec<Option<SubmersionDefects>>,
    pub b_angle_tail: f64,
    pub cauchy_tail: f64,
    pub bn_defect: f64,
    pub einstein_lambda: f64,
    pub einstein_residual: f64,
    pub scal_base: f64,
    pub lambda_seq: Vec<f64>,
    pub residual_seq: Vec<f64>,
    pub tolerances: LimitTolerances,
    pub status: LimitStatus,
    pub reasons: Vec<String>,
    #[serde(skip)]
    pub base: Option<InvariantMetric>,
}

struct Entry {
    b: Mat,
    g_check: Mat,
    g_hat_max: f64,
    a_sq: f64,
    da: f64,
    delta0: f64,
    pull: f64,
    eps: Option<SubmersionDefects>,
    lambda: f64,
    residual: f64,
    scal: f64,
    bn: f64,
    base: InvariantMetric,
}

fn to_rows(a: &Mat) -> Vec<Vec<f64>> {
    a.row_iter().map(|r| r.iter().cloned().collect()).collect()
}

fn entry(g: &InvariantMetric, det: &CollapseDetection, tol: &LimitTolerances) -> Result<Entry> {
    let torus = &det.torus;
    let s = det.s;
    let (gt, delta0, pull) = if s > 0 {
        let (d0, pull) = averaging_defect(g, torus)?;
        (symmetrize(g, torus)?, d0, pull)
    } else {
        (g.clone(), 0.0, 0.0)
    };
    let tri = metric_triple(&gt, torus)?;
    let (base, _) = base_metric(&gt, torus)?;
    let (a_sq, da) = if s > 0 {
        let od = oneill_data(&gt, torus)?;
        (od.a_norm_sq, od.da_norm)
    } else {
        (0.0, 0.0)
    };
    let eps = if s > 0 && tol.defect_samples > 0 {
        Some(submersion_defects(g, torus, tol.defect_samples)?)
    } else {
        None
    };
    let summ = curvature_summary(&base)?;
    let nb = base.dim();
    let lambda = summ.scal / nb as f64;
    let residual = frob(&(&summ.ric - &base.g * lambda)) / frob(&base.g);
    // horizontal space as Euclidean-orthonormal columns for angle comparisons
    let b = tri.b_basis.clone().qr().q();
    Ok(Entry {
        b,
        g_check: base.g.clone(),
        g_hat_max: if s > 0 { max_eig(&tri.g_hat) } else { 0.0 },
        a_sq,
        da,
        delta0,
        pull,
        eps,
        lambda,
        residual,
        scal: summ.scal,
        bn: tri.bn_defect,
        base,
    })
}

impl LimitRecord {
    /// Record for a given base metric without a sequence behind it.
    pub fn for_base(base: InvariantMetric, s: usize) -> Result<Self> {
        let tol = LimitTolerances::default();
        let summ = curvature_summary(&base)?;
        let lambda = summ.scal / base.dim() as f64;
        let residual = frob(&(&summ.ric - &base.g * lambda)) / frob(&base.g);
        let mut reasons = Vec::new();
        if !(summ.scal > 0.0) {
            reasons.push(format!(
                "base scalar curvature {} is not positive",
                summ.scal
            ));
        }
        if !(residual <= tol.einstein) {
            reasons.push(format!("base is not Einstein (residual {residual:e})"));
        }
        let status = if reasons.is_empty() {
            LimitStatus::Pass
        } else {
            LimitStatus::Fail
        };
        Ok(Self {
            s,
            taus: Vec::new(),
            b_infty: Vec::new(),
            g_check_infty: to_rows(&base.g),
            g_hat_decay: Vec::new(),
            a_norm_sq_seq: Vec::new(),
            da_norm_seq: Vec::new(),
            delta0_seq: Vec::new(),
            pull_defect_seq: Vec::new(),
            epsilon_seq: Vec::new(),
            b_angle_tail: 0.0,
            cauchy_tail: 0.0,
            bn_defect: 0.0,
            einstein_lambda: lambda,
            einstein_residual: residual,
            scal_base: summ.scal,
            lambda_seq: vec![lambda],
            residual_seq: vec![residual],
            tolerances: tol,
            status,
            reasons,
            base: Some(base),
        })
    }
}

pub fn limit_triple(seq: &BlowdownSequence, det: &CollapseDetection) -> Result<LimitRecord> {
    limit_triple_with(seq, det, &LimitTolerances::default())
}

pub fn limit_triple_with(
    seq: &BlowdownSequence,
    det: &CollapseDetection,
    tol: &LimitTolerances,
) -> Result<LimitRecord> {
    let entries: Vec<Entry> = seq
        .metrics
        .par_iter()
        .map(|g| entry(g, det, tol))
        .collect::<Result<_>>()?;
    let n = entries.len();
    let last = &entries[n - 1];
    let (angle, cauchy) = if n >= 2 {
        let prev = &entries[n - 2];
        (
            crate::linalg::subspace_sin_angle(&last.b, &prev.b),
            frob(&(&last.g_check - &prev.g_check)) / frob(&last.g_check),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    let mut reasons = Vec::new();
    let mut status = LimitStatus::Pass;
    if !(angle < tol.b_angle) {
        reasons.push(format!(
            "horizontal space still moves at the tail (sin angle {angle:e})"
        ));
        status = LimitStatus::Inconclusive;
    }
    if !(cauchy <= tol.cauchy) {
        reasons.push(format!(
            "base metric not settled at the tail (relative change {cauchy:e})"
        ));
        status = LimitStatus::Inconclusive;
    }
    if status == LimitStatus::Pass {
        if !(last.scal > 0.0) {
            reasons.push(format!(
                "base scalar curvature {} is not positive",
                last.scal
            ));
            status = LimitStatus::Fail;
        }
        if !(last.residual <= tol.einstein) {
            reasons.push(format!(
                "base is not Einstein (residual {:e})",
                last.residual
            ));
            status = LimitStatus::Fail;
        }
    }
    Ok(LimitRecord {
        s: det.s,
        taus: seq.taus.clone(),
        b_infty: to_rows(&last.b.transpose()),
        g_check_infty: to_rows(&last.g_check),
        g_hat_decay: entries.iter().map(|e| e.g_hat_max).collect(),
        a_norm_sq_seq: entries.iter().map(|e| e.a_sq).collect(),
        da_norm_seq: entries.iter().map(|e| e.da).collect(),
        delta0_seq: entries.iter().map(|e| e.delta0).collect(),
        pull_defect_seq: entries.iter().map(|e| e.pull).collect(),
        epsilon_seq: entries.iter().map(|e| e.eps.clone()).collect(),
        b_angle_tail: angle,
        cauchy_tail: cauchy,
        bn_defect: last.bn,
        einstein_lambda: last.lambda,
        einstein_residual: last.residual,
        scal_base: last.scal,
        lambda_seq: entries.iter().map(|e| e.lambda).collect(),
        residual_seq: entries.iter().map(|e| e.residual).collect(),
        tolerances: tol.clone(),
        status,
        reasons,
        base: Some(last.base.clone()),
    })
}

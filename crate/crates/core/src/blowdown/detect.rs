//! Which directions of m0 shrink to zero along a blow-down sequence.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{verify_torus, TorusCertificate};
use crate::linalg::{
    canonical_basis, subspace_sin_angle, sym, sym_eigen, sym_eigenvalues, Mat, Vec_,
};

use super::sequence::BlowdownSequence;

/// Collapsing eigenvalues are below this fraction of the median eigenvalue at
/// the largest tau.
pub const REL_EIGEN_TOL: f64 = 1e-3;
/// Fitted log-log decay exponent must be at most this.
pub const MAX_EXPONENT: f64 = -0.5;
/// Largest principal-angle drift of the collapsing span between the last two
/// entries.
pub const DRIFT_TOL: f64 = 1e-3;
const BRACKET_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct CollapseDetection {
    /// Columns in m-coordinates, Q-orthonormal.
    #[serde(skip)]
    pub t_basis: Mat,
    /// Eigenvalues of `G_n` restricted to m0, ascending, one row per tau.
    pub eigen_decay: Vec<Vec<f64>>,
    /// Fitted exponents `d log lambda / d log tau` per m0 eigenvalue.
    pub rates: Vec<f64>,
    /// Exponents of the collapsing eigenvalues.
    pub collapse_rates: Vec<f64>,
    pub s: usize,
    pub drift: f64,
    /// Smallest m0 eigenvalue strictly decreasing after the first third.
    pub tail_monotone: bool,
    #[serde(skip)]
    pub torus: TorusCertificate,
}

fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

pub fn detect_collapsing_torus(seq: &BlowdownSequence) -> Result<CollapseDetection> {
    let n = seq.len();
    if n < 3 {
        return Err(Error::Precondition(format!(
            "collapse detection needs at least 3 blow-downs, got {n}"
        )));
    }
    let decades = (seq.taus[n - 1] / seq.taus[0]).log10();
    if decades < 2.0 - 1e-12 {
        return Err(Error::Precondition(format!(
            "taus span {decades:.2} decades, at least 2 are needed"
        )));
    }
    let space = seq.metrics[0].space.clone();
    let b0 = space.m0_basis.clone();
    let k = b0.ncols();
    let restricted: Vec<Mat> = seq
        .metrics
        .iter()
        .map(|g| sym(&(b0.transpose() * &g.g * &b0)))
        .collect();
    let eigen_decay: Vec<Vec<f64>> = restricted
        .iter()
        .map(|r| sym_eigenvalues(r).iter().cloned().collect())
        .collect();
    let logt: Vec<f64> = seq.taus.iter().map(|t| t.ln()).collect();
    let rates: Vec<f64> = (0..k)
        .map(|i| {
            let ly: Vec<f64> = eigen_decay.iter().map(|e| e[i].ln()).collect();
            fit_slope(&logt, &ly)
        })
        .collect();
    let start = n / 3;
    let tail_monotone = k == 0 || eigen_decay[start..].windows(2).all(|w| w[1][0] < w[0][0]);

    let last_full = sym_eigenvalues(&seq.metrics[n - 1].g);
    let med = median(last_full.as_slice());
    let collapsing: Vec<usize> = (0..k)
        .filter(|&i| eigen_decay[n - 1][i] < REL_EIGEN_TOL * med && rates[i] <= MAX_EXPONENT)
        .collect();
    let s0 = collapsing.len();

    let span_at = |idx: usize| -> Mat {
        let (_, v) = sym_eigen(&restricted[idx]);
        let cols: Vec<Vec_> = (0..s0).map(|i| &b0 * v.column(i)).collect();
        if cols.is_empty() {
            Mat::zeros(space.mdim(), 0)
        } else {
            Mat::from_columns(&cols)
        }
    };
    // collapsing eigenvalues are the smallest ones, so they fill the leading columns
    if collapsing.iter().enumerate().any(|(a, &b)| a != b) {
        return Err(Error::Numeric(
            "collapsing eigenvalues are not the smallest ones".into(),
        ));
    }
    let last = span_at(n - 1);
    let prev = span_at(n - 2);
    let drift = subspace_sin_angle(&last, &prev).asin();
    if drift > DRIFT_TOL {
        return Err(Error::Numeric(format!(
            "collapsing span still turns by {drift:e} rad at the tail"
        )));
    }

    // greedy abelian pruning in order of fastest collapse
    let mut chosen: Vec<Vec_> = Vec::new();
    for i in 0..s0 {
        let v: Vec_ = last.column(i).into_owned();
        let ok = chosen.iter().all(|c| {
            let (bh, bm) = space.bracket_m(c, &v);
            (bh.norm_squared() + bm.norm_squared()).sqrt() <= BRACKET_TOL
        });
        if ok {
            chosen.push(v);
        }
    }
    let t_basis = if chosen.is_empty() {
        Mat::zeros(space.mdim(), 0)
    } else {
        canonical_basis(&crate::linalg::gram_schmidt(
            &Mat::from_columns(&chosen),
            &Mat::identity(space.mdim(), space.mdim()),
        )?)
    };
    let torus = verify_torus(&space, &t_basis)?;
    if !torus.passes() {
        return Err(Error::Numeric(format!(
            "detected span fails the torus check (bracket {:e}, containment {:e})",
            torus.pairwise_bracket_norm, torus.containment_defect
        )));
    }
    Ok(CollapseDetection {
        s: t_basis.ncols(),
        collapse_rates: collapsing
            .iter()
            .take(t_basis.ncols())
            .map(|&i| rates[i])
            .collect(),
        t_basis,
        eigen_decay,
        rates,
        drift,
        tail_monotone,
        torus,
    })
}

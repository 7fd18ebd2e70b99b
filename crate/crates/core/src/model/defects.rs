//! How far the projection onto the torus quotient is from a Riemannian
//! submersion and from a distance-preserving map.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{
    ad_t_invariance_defect, base_metric, metric_triple, oneill_data, InvariantMetric,
    T_INVARIANCE_TOL,
};
use crate::lie::{Period, TorusCertificate};
use crate::linalg::{op_norm, spd_inv_sqrt, Mat, Vec_};

use super::bvp::{chart_point_of, Shooter};

pub const DEFECT_SEED: u64 = 0x5EED_0001;
/// Pairs whose boundary-value solve fails are dropped; above this rate the
/// distance defect is not trusted.
pub const MAX_DROP_RATE: f64 = 0.2;
const HORIZONTAL_RADIUS: f64 = std::f64::consts::FRAC_PI_2;
const FIBER_FRACTION: f64 = 0.95;

#[derive(Clone, Debug, Serialize)]
pub struct SubmersionDefects {
    /// Lower estimate of the distance distortion.
    pub gh_eps: f64,
    pub sub_eps: f64,
    pub c2_eps: f64,
    pub pairs: usize,
    pub dropped: usize,
    pub drop_rate: f64,
    pub valid: bool,
    /// The metric was averaged over the torus first.
    pub averaged: bool,
}

/// Half the closing time of each torus direction, in units of the given column.
fn half_periods(torus: &TorusCertificate) -> Vec<f64> {
    torus
        .periods
        .iter()
        .map(|p| match p {
            Period::Closed { period } => 0.5 * period,
            // circles of the centre are taken with period 2 pi
            _ => std::f64::consts::PI,
        })
        .collect()
}

pub fn submersion_defects(
    g: &InvariantMetric,
    torus: &TorusCertificate,
    samples: usize,
) -> Result<SubmersionDefects> {
    let averaged = ad_t_invariance_defect(g, &torus.t_basis) > T_INVARIANCE_TOL;
    let g = if averaged {
        crate::blowdown::symmetrize(g, torus)?
    } else {
        g.clone()
    };
    let tri = metric_triple(&g, torus)?;
    let (gb, emb) = base_metric(&g, torus)?;
    let s = torus.dim();
    let m = g.dim();
    let nb = m - s;
    let mut rng = ChaCha8Rng::seed_from_u64(DEFECT_SEED);

    // horizontal lengths
    let bo = &tri.b_basis * spd_inv_sqrt(&tri.g_check)?;
    let mut sub_eps = 0.0_f64;
    let mut c2_eps = 0.0_f64;
    let oneill = if s > 0 {
        Some(oneill_data(&g, torus)?)
    } else {
        None
    };
    for _ in 0..samples.max(1) {
        let c = Vec_::from_fn(nb, |_, _| StandardNormal.sample(&mut rng)).normalize();
        let v = &bo * &c;
        let dv = emb.transpose() * &v;
        sub_eps = sub_eps.max((1.0 - gb.inner(&dv, &dv).sqrt()).abs());
        if let Some(od) = &oneill {
            // |A_X| as a map from vertical to horizontal vectors
            let mut ax = Mat::zeros(nb, s);
            for a in 0..nb {
                for b in 0..nb {
                    for i in 0..s {
                        ax[(b, i)] += c[a] * od.a_components[(a * nb + b) * s + i];
                    }
                }
            }
            c2_eps = c2_eps.max(op_norm(&ax));
        }
    }

    // distance pairs (o, exp(Y) exp(Z) o); equivariance reduces all pairs to these
    let halves = half_periods(torus);
    let mut points: Vec<(Vec_, Vec_)> = Vec::new();
    for i in 0..s {
        let t: Vec_ = torus.t_basis.column(i).into_owned();
        for sgn in [1.0, -1.0] {
            points.push((Vec_::zeros(nb), &t * (sgn * FIBER_FRACTION * halves[i])));
        }
    }
    let total = samples.max(points.len() + 1);
    while points.len() < total {
        let dir = Vec_::from_fn(nb, |_, _| StandardNormal.sample(&mut rng)).normalize();
        let y = dir * (HORIZONTAL_RADIUS * rng.random::<f64>());
        let mut z = Vec_::zeros(m);
        for i in 0..s {
            let t: Vec_ = torus.t_basis.column(i).into_owned();
            z += t * (FIBER_FRACTION * halves[i] * (2.0 * rng.random::<f64>() - 1.0));
        }
        points.push((y, z));
    }

    let top = Shooter::new(&g)?;
    let bottom = Shooter::new(&gb)?;
    let results: Vec<Option<f64>> = points
        .par_iter()
        .map(|(y, z)| {
            let ym = &emb * y;
            let target = chart_point_of(&g, &ym, z).ok()?;
            let guesses = [target.clone(), &ym + z, target.clone() * 0.5];
            let d_top = top.distance(&target, &guesses)?;
            let d_bottom = if y.norm() == 0.0 {
                0.0
            } else {
                bottom.distance(y, &[y.clone(), y * 0.5])?
            };
            Some((d_top - d_bottom).abs())
        })
        .collect();
    let dropped = results.iter().filter(|r| r.is_none()).count();
    let gh_eps = results.iter().flatten().cloned().fold(0.0, f64::max);
    let drop_rate = dropped as f64 / points.len() as f64;
    Ok(SubmersionDefects {
        gh_eps,
        sub_eps,
        c2_eps,
        pairs: points.len(),
        dropped,
        drop_rate,
        valid: drop_rate <= MAX_DROP_RATE,
        averaged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{reductive_split, verify_torus, LieAlgebraData};
    use std::sync::Arc;

    fn product(d: f64) -> (InvariantMetric, TorusCertificate) {
        let h = Mat::from_column_slice(4, 1, &[0.0, 0.0, 1.0, 0.0]);
        let sp = Arc::new(reductive_split(&LieAlgebraData::su2_plus_u1(), &h, None).unwrap());
        let t = Vec_::from_fn(3, |i, _| sp.m_basis[(3, i)]);
        let cert = verify_torus(&sp, &Mat::from_columns(&[t])).unwrap();
        (
            InvariantMetric::new(Mat::from_diagonal(&Vec_::from_vec(vec![2.0, 2.0, d])), sp)
                .unwrap(),
            cert,
        )
    }

    #[test]
    fn product_fiber_length() {
        for d in [1.0, 0.01] {
            let (g, cert) = product(d);
            let r = submersion_defects(&g, &cert, 12).unwrap();
            assert!(r.valid);
            assert!(r.sub_eps < 1e-12 && r.c2_eps < 1e-12);
            let expect = FIBER_FRACTION * std::f64::consts::PI * d.sqrt();
            assert!(
                (r.gh_eps - expect).abs() < 1e-5 * expect.max(1.0),
                "{d}: {r:?}"
            );
        }
    }
}

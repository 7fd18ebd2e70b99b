//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use hrf_core::geometry::InvariantMetric;
use hrf_core::lie::{reductive_split, HomogeneousSpaceData, LieAlgebraData};
use hrf_core::linalg::{Mat, Vec_};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TWO_PI: f64 = std::f64::consts::TAU;

pub fn su2_space() -> Arc<HomogeneousSpaceData> {
    Arc::new(reductive_split(&LieAlgebraData::su2(), &Mat::zeros(3, 0), Some(TWO_PI)).unwrap())
}

/// `(SU(2) x U(1)) / U(1)` with the circle inside `SU(2)`; m-coordinates `e1, e2, e4`.
pub fn s2xs1_space() -> Arc<HomogeneousSpaceData> {
    let h = Mat::from_column_slice(4, 1, &[0.0, 0.0, 1.0, 0.0]);
    Arc::new(reductive_split(&LieAlgebraData::su2_plus_u1(), &h, None).unwrap())
}

pub fn diag(d: &[f64]) -> Mat {
    Mat::from_diagonal(&Vec_::from_column_slice(d))
}

pub fn metric(space: &Arc<HomogeneousSpaceData>, g: Mat) -> InvariantMetric {
    InvariantMetric::new(g, space.clone()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random SPD matrix with eigenvalues in `[lo, hi]`.
pub fn random_spd(r: &mut ChaCha8Rng, m: usize, lo: f64, hi: f64) -> Mat {
    let a = Mat::from_fn(m, m, |_, _| r.random_range(-1.0..1.0));
    let q = a.qr().q();
    let d = Vec_::from_fn(m, |_, _| r.random_range(lo..hi));
    let g = &q * Mat::from_diagonal(&d) * q.transpose();
    (&g + g.transpose()) * 0.5
}

/// Ricci of `diag(x1, x2, x3)` on su(2) with `[e_i, e_j] = e_k` cyclic, from
/// the Milnor frame `f_i = e_i / sqrt(x_i)`: `[f_j, f_k] = l_i f_i` with
/// `l_i = sqrt(x_i / (x_j x_k))`, and `Ric(f_i, f_i) = 2 mu_j mu_k` where
/// `mu_i = (l_1 + l_2 + l_3) / 2 - l_i`.
pub fn milnor_ricci(x: [f64; 3]) -> [f64; 3] {
    let l = [
        (x[0] / (x[1] * x[2])).sqrt(),
        (x[1] / (x[2] * x[0])).sqrt(),
        (x[2] / (x[0] * x[1])).sqrt(),
    ];
    let h = 0.5 * (l[0] + l[1] + l[2]);
    let mu = [h - l[0], h - l[1], h - l[2]];
    [
        2.0 * mu[1] * mu[2] * x[0],
        2.0 * mu[2] * mu[0] * x[1],
        2.0 * mu[0] * mu[1] * x[2],
    ]
}

/// Backward flow of a diagonal su(2) metric from `t = -1` to `t = -t_abs`
/// with classical RK4 in `s = ln|t|`, where `dx/ds = 2 |t| Ric(x)`.
pub fn milnor_backward(x0: [f64; 3], t_abs: f64, steps_per_unit: usize) -> [f64; 3] {
    let s_end = t_abs.ln();
    let n = ((s_end * steps_per_unit as f64).ceil() as usize).max(1);
    let h = s_end / n as f64;
    let rhs = |s: f64, x: [f64; 3]| {
        let r = milnor_ricci(x);
        let e = 2.0 * s.exp();
        [e * r[0], e * r[1], e * r[2]]
    };
    let mut x = x0;
    for k in 0..n {
        let s = k as f64 * h;
        let add =
            |x: [f64; 3], d: [f64; 3], c: f64| [x[0] + c * d[0], x[1] + c * d[1], x[2] + c * d[2]];
        let k1 = rhs(s, x);
        let k2 = rhs(s + h / 2.0, add(x, k1, h / 2.0));
        let k3 = rhs(s + h / 2.0, add(x, k2, h / 2.0));
        let k4 = rhs(s + h, add(x, k3, h));
        for i in 0..3 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

/// Metric of the unit sphere in normal coordinates at `y`.
pub fn sphere_normal(y: &Vec_) -> Mat {
    let k = y.len();
    let r = y.norm();
    if r == 0.0 {
        return Mat::identity(k, k);
    }
    let u = y / r;
    let p = &u * u.transpose();
    let f = (r.sin() / r).powi(2);
    &p + (Mat::identity(k, k) - &p) * f
}

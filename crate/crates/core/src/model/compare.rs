//! Distances between geometric models up to an orthogonal change of frame.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{expm, sym, sym_eigen, sym_eigenvalues, Mat, Vec_};

use super::build::GeometricModel;

/// Comparisons only use nodes with `r <= COMPARE_RADIUS`.
pub const COMPARE_RADIUS: f64 = std::f64::consts::PI - 0.1;
const GAUGE_ITERS: usize = 50;
const GAUGE_TOL: f64 = 1e-10;
const BLEND_NEIGHBOURS: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub value: f64,
    pub order: usize,
    /// Distance with the identity gauge.
    pub identity_value: f64,
    /// Innermost-shell disagreement after the Procrustes start.
    pub initial_value: f64,
    /// Refinement ended more than ten times above `initial_value`.
    pub flagged: bool,
    #[serde(skip)]
    pub gauge: Mat,
}

pub fn compare_models(a: &GeometricModel, b: &GeometricModel, order: usize) -> Result<f64> {
    Ok(compare_models_detailed(a, b, order)?.value)
}

/// Smaller of the two one-sided distances, so the result is symmetric.
pub fn compare_models_detailed(
    a: &GeometricModel,
    b: &GeometricModel,
    order: usize,
) -> Result<Comparison> {
    if a.dim != b.dim {
        return Err(Error::Shape(format!(
            "models have dimensions {} and {}",
            a.dim, b.dim
        )));
    }
    if order > 2 {
        return Err(Error::Config(format!(
            "comparison order {order} is above 2"
        )));
    }
    let ab = one_sided(a, b, order);
    let ba = one_sided(b, a, order);
    Ok(if ba.value < ab.value { ba } else { ab })
}

fn sym_norm(x: &Mat) -> f64 {
    sym_eigenvalues(&sym(x)).amax()
}

/// Cubic Lagrange interpolation of `f` sampled at increasing `xs`.
fn lagrange(xs: &[f64], f: &dyn Fn(usize) -> Mat, x: f64) -> Mat {
    let n = xs.len();
    if n == 1 {
        return f(0);
    }
    let k = n.min(4);
    let pos = xs.partition_point(|&v| v < x);
    let start = pos.saturating_sub(k / 2).min(n - k);
    let mut out: Option<Mat> = None;
    for i in start..start + k {
        let mut w = 1.0;
        for j in start..start + k {
            if j != i {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        let term = f(i) * w;
        out = Some(match out {
            None => term,
            Some(o) => o + term,
        });
    }
    out.unwrap()
}

/// Blend weights of the nearest directions of `b` to the unit vector `v`.
fn neighbours(b: &GeometricModel, v: &Vec_) -> Vec<(usize, f64)> {
    let mut near: Vec<(f64, usize)> = b
        .directions
        .iter()
        .enumerate()
        .map(|(d, u)| (u.dot(v).clamp(-1.0, 1.0).acos(), d))
        .collect();
    near.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    if near[0].0 < 1e-12 {
        return vec![(near[0].1, 1.0)];
    }
    let take = &near[..near.len().min(BLEND_NEIGHBOURS)];
    let wsum: f64 = take.iter().map(|x| 1.0 / (x.0 * x.0)).sum();
    take.iter()
        .map(|&(ang, d)| (d, 1.0 / (ang * ang) / wsum))
        .collect()
}

/// Metric of `b` at radius `r` along blended directions, radial cubics.
/// `node` short-cuts the radial step when `r` is one of `b`'s radii.
fn sample(b: &GeometricModel, near: &[(usize, f64)], r: f64, node: Option<usize>) -> Mat {
    let mut acc = Mat::zeros(b.dim, b.dim);
    for &(d, w) in near {
        match node {
            Some(j) => acc += b.at(d, j) * w,
            None => acc += lagrange(&b.radii, &|j| b.at(d, j).clone(), r) * w,
        }
    }
    acc
}

fn usable_radii(a: &GeometricModel, b: &GeometricModel) -> usize {
    let lim = COMPARE_RADIUS.min(a.reach).min(b.reach);
    a.radii.iter().take_while(|&&r| r <= lim).count()
}

/// `C^k` grid norm of `a - R^T b(R x) R`; derivatives are radial finite differences.
fn distance(
    a: &GeometricModel,
    b: &GeometricModel,
    rot: &Mat,
    order: usize,
    identity: bool,
) -> f64 {
    let nr = usable_radii(a, b);
    let rs = &a.radii[..nr];
    let same_radii = a.radii == b.radii;
    let exact = identity && same_radii && a.directions == b.directions;
    let mut worst = 0.0_f64;
    for (d, u) in a.directions.iter().enumerate() {
        let near = if exact {
            Vec::new()
        } else {
            neighbours(b, &(rot * u))
        };
        let diffs: Vec<Mat> = (0..nr)
            .map(|j| {
                let bm = if exact {
                    b.at(d, j).clone()
                } else {
                    sample(b, &near, rs[j], same_radii.then_some(j))
                };
                a.at(d, j) - rot.transpose() * bm * rot
            })
            .collect();
        for x in &diffs {
            worst = worst.max(sym_norm(x));
        }
        if order >= 1 && nr >= 3 {
            let d1 = radial_derivative(rs, &diffs);
            for x in &d1 {
                worst = worst.max(sym_norm(x));
            }
            if order >= 2 {
                for x in radial_derivative(rs, &d1) {
                    worst = worst.max(sym_norm(&x));
                }
            }
        }
    }
    worst
}

/// Second-order finite differences on a nonuniform grid.
fn radial_derivative(rs: &[f64], f: &[Mat]) -> Vec<Mat> {
    let n = rs.len();
    (0..n)
        .map(|i| {
            let (l, c, r) = if i == 0 {
                (0, 1, 2)
            } else if i == n - 1 {
                (n - 3, n - 2, n - 1)
            } else {
                (i - 1, i, i + 1)
            };
            let x = rs[i];
            let (x0, x1, x2) = (rs[l], rs[c], rs[r]);
            // derivative of the quadratic through the three points
            let w0 = (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2));
            let w1 = (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2));
            let w2 = (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
            &f[l] * w0 + &f[c] * w1 + &f[r] * w2
        })
        .collect()
}

/// Mean of `(g - I) / r^2` over the innermost shell.
fn inner_shell(a: &GeometricModel) -> Mat {
    let r = a.radii[0];
    let mut acc = Mat::zeros(a.dim, a.dim);
    for d in 0..a.directions.len() {
        acc += (a.at(d, 0) - Mat::identity(a.dim, a.dim)) / (r * r);
    }
    sym(&(acc / a.directions.len() as f64))
}

fn one_sided(a: &GeometricModel, b: &GeometricModel, order: usize) -> Comparison {
    let m = a.dim;
    let id = Mat::identity(m, m);
    let identity_value = distance(a, b, &id, order, true);
    let ma = inner_shell(a);
    let mb = inner_shell(b);
    let (_, va) = sym_eigen(&ma);
    let (_, vb) = sym_eigen(&mb);

    let mut best = (identity_value, id.clone(), true);
    let mut initial_value = (ma.clone() - &mb).amax();
    if m <= 4 {
        for mask in 0..(1u32 << m) {
            let s = Mat::from_diagonal(&Vec_::from_fn(m, |i, _| {
                if mask >> i & 1 == 1 {
                    -1.0
                } else {
                    1.0
                }
            }));
            let rot = &vb * s * va.transpose();
            let val = distance(a, b, &rot, order, false);
            if val < best.0 {
                initial_value = (rot.transpose() * &mb * &rot - &ma).amax();
                best = (val, rot, false);
            }
        }
    }

    // pattern search over skew generators
    let gens: Vec<Mat> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .map(|(i, j)| {
            let mut e = Mat::zeros(m, m);
            e[(i, j)] = 1.0;
            e[(j, i)] = -1.0;
            e
        })
        .collect();
    let mut step = 0.05;
    for _ in 0..GAUGE_ITERS {
        if step < GAUGE_TOL || best.0 == 0.0 {
            break;
        }
        let mut improved: Option<(f64, Mat)> = None;
        for e in &gens {
            for sgn in [1.0, -1.0] {
                let rot = &best.1 * expm(&(e * (sgn * step)));
                let val = distance(a, b, &rot, order, false);
                if val < improved.as_ref().map_or(best.0, |x| x.0) {
                    improved = Some((val, rot));
                }
            }
        }
        match improved {
            Some((v, r)) => best = (v, r, false),
            None => step *= 0.5,
        }
    }
    let flagged = best.0 > 10.0 * initial_value && best.0 > 1e-8;
    Comparison {
        value: best.0,
        order,
        identity_value,
        initial_value,
        flagged,
        gauge: best.1,
    }
}

#[cfg(test)]
mod tests {
    use super::super::build::{build_model, product_model, GridSpec};
    use super::*;
    use crate::geometry::InvariantMetric;
    use crate::lie::{reductive_split, LieAlgebraData};
    use std::sync::Arc;

    fn su2(g: Mat) -> InvariantMetric {
        let s = Arc::new(reductive_split(&LieAlgebraData::su2(), &Mat::zeros(3, 0), None).unwrap());
        InvariantMetric::new(g, s).unwrap()
    }

    fn grid() -> GridSpec {
        GridSpec {
            radial_points: 10,
            directions: Some(20),
            ..Default::default()
        }
    }

    #[test]
    fn self_distance_is_zero() {
        let m = build_model(
            &su2(Mat::from_diagonal(&Vec_::from_vec(vec![1.0, 1.5, 2.0]))),
            &grid(),
        )
        .unwrap();
        for k in 0..=2 {
            assert_eq!(compare_models(&m, &m, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn scale_is_normalized_away() {
        let a = build_model(&su2(Mat::identity(3, 3)), &grid()).unwrap();
        let b = build_model(&su2(Mat::identity(3, 3) * 7.5), &grid()).unwrap();
        assert!(compare_models(&a, &b, 2).unwrap() < 1e-6);
    }

    #[test]
    fn symmetric_and_separates() {
        let a = build_model(&su2(Mat::identity(3, 3)), &grid()).unwrap();
        let flat = Mat::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let b = product_model(3, &flat, &grid()).unwrap();
        let ab = compare_models(&a, &b, 0).unwrap();
        let ba = compare_models(&b, &a, 0).unwrap();
        assert!((ab - ba).abs() < 1e-10);
        assert!(ab > 0.1);
    }

    #[test]
    fn rotated_frame_is_recovered() {
        let grid = GridSpec {
            radial_points: 10,
            directions: Some(200),
            ..Default::default()
        };
        let f1 = Mat::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let f2 = Mat::from_column_slice(3, 1, &[0.0, 0.6, 0.8]);
        let a = product_model(3, &f1, &grid).unwrap();
        let b = product_model(3, &f2, &grid).unwrap();
        let c = compare_models_detailed(&a, &b, 0).unwrap();
        assert!(c.identity_value > 0.3);
        assert!(c.value < 0.1 * c.identity_value, "{c:?}");
    }
}

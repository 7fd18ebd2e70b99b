//! The canonical chart `X -> exp(X) o` on m.

use crate::error::{Error, Result};
use crate::geometry::InvariantMetric;
use crate::lie::HomogeneousSpaceData;
use crate::linalg::{spd_inv, Mat, Vec_};

/// Default chart radius in the Q-norm, below the first conjugate radius of
/// `exp` on su(2) with the unit Killing-scaled product.
pub const CHART_RADIUS: f64 = 2.0 * std::f64::consts::PI;
const SERIES_TOL: f64 = 1e-14;
const SERIES_MAX_TERMS: usize = 400;

/// Left-trivialized differential of `exp` at `X` on the whole algebra,
/// `sum_k (-ad X)^k / (k+1)!`, in adapted coordinates.
pub fn dexp_left(space: &HomogeneousSpaceData, x: &Vec_) -> Result<Mat> {
    let n = space.n();
    let a = -space.ad_adapted(&space.m_to_adapted(x));
    let mut term = Mat::identity(n, n);
    let mut sum = term.clone();
    for k in 1..SERIES_MAX_TERMS {
        term = &term * &a / (k as f64 + 1.0);
        sum += &term;
        if term.norm() < SERIES_TOL {
            return Ok(sum);
        }
    }
    Err(Error::Domain(format!(
        "exp series did not converge at |X| = {:.3}",
        x.norm()
    )))
}

/// Pullback of `g` under the canonical chart at `X` (m-coordinates).
pub fn chart_metric(g: &InvariantMetric, x: &Vec_) -> Result<Mat> {
    chart_metric_within(g, x, CHART_RADIUS)
}

pub fn chart_metric_within(g: &InvariantMetric, x: &Vec_, radius: f64) -> Result<Mat> {
    if x.norm() >= radius {
        return Err(Error::Domain(format!(
            "|X|_Q = {:.4} is outside the chart radius {radius:.4}",
            x.norm()
        )));
    }
    let sp = &g.space;
    let (h, m) = (sp.hdim(), sp.mdim());
    let psi = dexp_left(sp, x)?;
    let p = psi.view((h, h), (m, m)).into_owned();
    Ok(crate::linalg::sym(&(p.transpose() * &g.g * p)))
}

fn deriv4(f: &dyn Fn(f64) -> Result<Mat>, h: f64) -> Result<Mat> {
    Ok((f(-2.0 * h)? - f(2.0 * h)? + (f(h)? - f(-h)?) * 8.0) / (12.0 * h))
}

/// First derivatives of a matrix field at `x` along each coordinate, fourth
/// order with one Richardson step.
fn grad(field: &dyn Fn(&Vec_) -> Result<Mat>, x: &Vec_, m: usize, h: f64) -> Result<Vec<Mat>> {
    (0..m)
        .map(|i| {
            let f = |s: f64| {
                let mut y = x.clone();
                y[i] += s;
                field(&y)
            };
            let d1 = deriv4(&f, h)?;
            let d2 = deriv4(&f, h / 2.0)?;
            Ok((d2 * 16.0 - d1) / 15.0)
        })
        .collect()
}

/// Christoffel symbols of the chart metric at `x`, `gamma[i][(j, k)]`.
fn christoffel(g: &InvariantMetric, x: &Vec_, h: f64) -> Result<Vec<Mat>> {
    let m = g.dim();
    let gx = chart_metric(g, x)?;
    let ginv = spd_inv(&gx)?;
    let dg = grad(&|y: &Vec_| chart_metric(g, y), x, m, h)?;
    let mut out = vec![Mat::zeros(m, m); m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let mut s = 0.0;
                for l in 0..m {
                    s += ginv[(i, l)] * (dg[j][(l, k)] + dg[k][(l, j)] - dg[l][(j, k)]);
                }
                out[i][(j, k)] = 0.5 * s;
            }
        }
    }
    Ok(out)
}

/// Ricci tensor at the origin from finite differences of the chart metric.
/// Used as an independent check of the algebraic curvature.
pub fn chart_ricci_at_origin(g: &InvariantMetric, h: f64) -> Result<Mat> {
    let m = g.dim();
    let zero = Vec_::zeros(m);
    let gam = christoffel(g, &zero, h)?;
    // dgam[l][i] = d_l Gamma^i as a matrix in (j, k)
    let mut dgam: Vec<Vec<Mat>> = Vec::with_capacity(m);
    for l in 0..m {
        let f = |s: f64| -> Result<Vec<Mat>> {
            let mut y = zero.clone();
            y[l] = s;
            christoffel(g, &y, h)
        };
        let stencil = |hh: f64| -> Result<Vec<Mat>> {
            let (a, b, c, d) = (f(-2.0 * hh)?, f(-hh)?, f(hh)?, f(2.0 * hh)?);
            Ok((0..m)
                .map(|i| (&a[i] - &d[i] + (&c[i] - &b[i]) * 8.0) / (12.0 * hh))
                .collect())
        };
        let d1 = stencil(h)?;
        let d2 = stencil(h / 2.0)?;
        dgam.push((0..m).map(|i| (&d2[i] * 16.0 - &d1[i]) / 15.0).collect());
    }
    let mut ric = Mat::zeros(m, m);
    for j in 0..m {
        for k in 0..m {
            let mut s = 0.0;
            for i in 0..m {
                s += dgam[i][i][(j, k)] - dgam[k][i][(i, j)];
                for p in 0..m {
                    s += gam[i][(i, p)] * gam[p][(j, k)] - gam[i][(k, p)] * gam[p][(i, j)];
                }
            }
            ric[(j, k)] = s;
        }
    }
    Ok(crate::linalg::sym(&ric))
}

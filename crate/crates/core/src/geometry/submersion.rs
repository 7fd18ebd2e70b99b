use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{HomogeneousSpaceData, TorusCertificate};
use crate::linalg::{max_abs, orthogonal_complement, spd_inv, spd_inv_sqrt, sym, Mat, Vec_};

use super::metric::InvariantMetric;

/// Relative `Ad(t)`-invariance defect accepted before O'Neill data is computed.
pub const T_INVARIANCE_TOL: f64 = 1e-8;

/// `|DA| <= ONEILL_C |A|^2` holds for every dimension, from the two component
/// formulas of `DA` and Cauchy-Schwarz.
pub const ONEILL_C: f64 = 4.242_640_687_119_285;

/// `(g_hat, b, g_check)` description of a T-invariant metric.
#[derive(Clone, Debug)]
pub struct MetricTriple {
    pub t_basis: Mat,
    pub g_hat: Mat,
    /// Columns in m-coordinates, g-orthogonal to the torus.
    pub b_basis: Mat,
    pub g_check: Mat,
    /// `[h + t, b]` leaking out of `b`, relative to the g-length.
    pub bn_defect: f64,
    pub t_invariance_defect: f64,
}

impl MetricTriple {
    /// `G` rebuilt from the blocks in the basis `[t | b]`, mapped back to m.
    pub fn reconstruct(&self) -> Mat {
        let s = self.t_basis.ncols();
        let m = self.t_basis.nrows();
        let mut basis = Mat::zeros(m, m);
        basis.view_mut((0, 0), (m, s)).copy_from(&self.t_basis);
        basis.view_mut((0, s), (m, m - s)).copy_from(&self.b_basis);
        let mut blocks = Mat::zeros(m, m);
        blocks.view_mut((0, 0), (s, s)).copy_from(&self.g_hat);
        blocks
            .view_mut((s, s), (m - s, m - s))
            .copy_from(&self.g_check);
        let inv = basis.try_inverse().expect("[t | b] is a basis");
        sym(&(inv.transpose() * blocks * inv))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OneillData {
    pub a_norm_sq: f64,
    /// Vertical components of `A(e_a) e_b` on g-orthonormal bases, indexed
    /// `(a * nb + b) * s + i`.
    pub a_components: Vec<f64>,
    pub da_norm: f64,
    pub c_bound: f64,
}

/// `max_i |G ad(V_i) + ad(V_i)^T G| / max(1, |G|)` with unit `V_i`.
pub fn ad_t_invariance_defect(metric: &InvariantMetric, t_basis: &Mat) -> f64 {
    let sp = &metric.space;
    let scale = max_abs(&metric.g).max(1.0);
    (0..t_basis.ncols())
        .map(|i| {
            let v: Vec_ = t_basis.column(i).normalize();
            let a = sp.ad_m(&v);
            max_abs(&(&metric.g * &a + a.transpose() * &metric.g)) / scale
        })
        .fold(0.0, f64::max)
}

fn check_torus(torus: &TorusCertificate) -> Result<()> {
    if torus.containment_defect > crate::lie::TORUS_TOL {
        return Err(Error::Domain(format!(
            "torus directions are not inside m0 (defect {:e})",
            torus.containment_defect
        )));
    }
    if !torus.passes() {
        return Err(Error::Precondition(format!(
            "torus is not abelian (bracket norm {:e})",
            torus.pairwise_bracket_norm
        )));
    }
    Ok(())
}

/// g-orthogonal projector onto span(T) in m-coordinates.
fn vertical_projector(g: &Mat, t: &Mat) -> Result<Mat> {
    let gt = t.transpose() * g * t;
    Ok(t * spd_inv(&gt)? * t.transpose() * g)
}

pub fn metric_triple(metric: &InvariantMetric, torus: &TorusCertificate) -> Result<MetricTriple> {
    check_torus(torus)?;
    let g = &metric.g;
    let m = metric.dim();
    let t = torus.t_basis.clone();
    let g_hat = sym(&(t.transpose() * g * &t));
    let pt = vertical_projector(g, &t)?;
    let e = orthogonal_complement(&t, m);
    let b = (Mat::identity(m, m) - &pt) * e;
    let g_check = sym(&(b.transpose() * g * &b));

    let sp = &metric.space;
    let mut gens: Vec<Mat> = sp.isotropy_maps.clone();
    for i in 0..t.ncols() {
        gens.push(sp.ad_m(&t.column(i).into_owned()));
    }
    let mut bn = 0.0_f64;
    for z in &gens {
        for j in 0..b.ncols() {
            let bj: Vec_ = b.column(j).into_owned();
            let w = z * &bj;
            let leak = &pt * &w;
            let nb = metric.inner(&bj, &bj).sqrt();
            bn = bn.max(metric.inner(&leak, &leak).max(0.0).sqrt() / nb);
        }
    }
    let tinv = ad_t_invariance_defect(metric, &t);
    Ok(MetricTriple {
        t_basis: t,
        g_hat,
        b_basis: b,
        g_check,
        bn_defect: bn,
        t_invariance_defect: tinv,
    })
}

/// Base metric on the quotient by the torus (isotropy `h + t`), together with
/// the embedding of the quotient's complement into the m-coordinates.
pub fn base_metric(
    metric: &InvariantMetric,
    torus: &TorusCertificate,
) -> Result<(InvariantMetric, Mat)> {
    check_torus(torus)?;
    let (q, emb) = metric.space.quotient(&torus.t_basis)?;
    let g = &metric.g;
    let m = metric.dim();
    let pt = vertical_projector(g, &torus.t_basis)?;
    let horiz = (Mat::identity(m, m) - pt) * &emb;
    let gb = sym(&(horiz.transpose() * g * &horiz));
    let qs: Arc<HomogeneousSpaceData> = Arc::new(q);
    Ok((InvariantMetric::new(gb, qs)?, emb))
}

pub fn oneill_data(metric: &InvariantMetric, torus: &TorusCertificate) -> Result<OneillData> {
    check_torus(torus)?;
    let tinv = ad_t_invariance_defect(metric, &torus.t_basis);
    if tinv > T_INVARIANCE_TOL {
        return Err(Error::Precondition(format!(
            "metric is not Ad(T)-invariant (defect {tinv:e}); symmetrize over the torus first"
        )));
    }
    let g = &metric.g;
    let sp = &metric.space;
    let tri = metric_triple(metric, torus)?;
    let s = tri.t_basis.ncols();
    let nb = tri.b_basis.ncols();
    let m = s + nb;
    let to = &tri.t_basis * spd_inv_sqrt(&tri.g_hat)?;
    let bo = &tri.b_basis * spd_inv_sqrt(&tri.g_check)?;
    let pt = vertical_projector(g, &tri.t_basis)?;

    // c[a][b][i] = g(A(e_a) e_b, U_i)
    let mut comps = vec![0.0; nb * nb * s];
    let mut a_sq = 0.0;
    for a in 0..nb {
        for b in 0..nb {
            let (_, br) = sp.bracket_m(&bo.column(a).into_owned(), &bo.column(b).into_owned());
            let v = &pt * br * 0.5;
            for i in 0..s {
                let c = (to.column(i).transpose() * g * &v)[0];
                comps[(a * nb + b) * s + i] = c;
                a_sq += c * c;
            }
        }
    }

    // operators A_{e_a} on the orthonormal frame [U | e]
    let ops: Vec<Mat> = (0..nb)
        .map(|a| {
            let mut op = Mat::zeros(m, m);
            for b in 0..nb {
                for i in 0..s {
                    let c = comps[(a * nb + b) * s + i];
                    op[(i, s + b)] = c;
                    op[(s + b, i)] = -c;
                }
            }
            op
        })
        .collect();
    let mut da_sq = 0.0;
    for a in 0..nb {
        for i in 0..s {
            // A_{A_{e_a} U_i}
            let mut op = Mat::zeros(m, m);
            for b in 0..nb {
                op -= &ops[b] * comps[(a * nb + b) * s + i];
            }
            da_sq += op.norm_squared();
        }
        for b in 0..nb {
            da_sq += (&ops[a] * &ops[b] - &ops[b] * &ops[a]).norm_squared();
        }
    }
    Ok(OneillData {
        a_norm_sq: a_sq,
        a_components: comps,
        da_norm: da_sq.sqrt(),
        c_bound: ONEILL_C,
    })
}

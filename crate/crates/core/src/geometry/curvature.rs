use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::{spd_inv, spd_inv_sqrt, sym, sym_eigen, sym_eigenvalues, Mat, Vec_};

use super::connection::{connection_map, ConnectionData};
use super::metric::InvariantMetric;

pub const SEC_STARTS: usize = 32;
const SEC_TOL: f64 = 1e-8;
const SEC_MAX_ITERS: usize = 500;
const SEC_SEED: u64 = 0x5EC5_EC00;

#[derive(Clone, Debug, Serialize)]
pub struct SecEstimate {
    pub sec_min: f64,
    pub sec_max: f64,
    /// Eigenvalue bounds of the curvature operator; always enclose the
    /// sectional curvatures, equal to them when `m <= 3`.
    pub operator_min: f64,
    pub operator_max: f64,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct CurvaturePackage {
    pub m: usize,
    /// `Rm(e_a, e_b, e_c, e_d) = g(R(e_a,e_b)e_c, e_d)` on the m-basis.
    pub rm: Vec<f64>,
    pub ric: Mat,
    pub scal: f64,
    pub sec: SecEstimate,
    pub rm_norm: f64,
    pub ric_endo_eigs: Vec<f64>,
    /// `|Ric|_g^2`.
    pub ric_norm_sq: f64,
}

impl CurvaturePackage {
    #[inline]
    pub fn rm(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let m = self.m;
        self.rm[((a * m + b) * m + c) * m + d]
    }

    /// Worst defect among the algebraic symmetries of `Rm` relative to its size.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.m;
        let scale = self.rm.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
        let mut d = 0.0_f64;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for e in 0..m {
                        let r = self.rm(a, b, c, e);
                        d = d.max((r + self.rm(b, a, c, e)).abs());
                        d = d.max((r + self.rm(a, b, e, c)).abs());
                        d = d.max((r - self.rm(c, e, a, b)).abs());
                        d = d.max((r + self.rm(b, c, a, e) + self.rm(c, a, b, e)).abs());
                    }
                }
            }
        }
        d / scale
    }
}

/// Endomorphisms `R(e_a, e_b)` on m, indexed `a * m + b`.
fn curvature_endos(metric: &InvariantMetric, conn: &ConnectionData) -> Vec<Mat> {
    let sp = &metric.space;
    let (m, h) = (sp.mdim(), sp.hdim());
    let ls: Vec<Mat> = (0..m).map(|i| conn.lambda_mat(i)).collect();
    let mut out = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            let mut r = &ls[a] * &ls[b] - &ls[b] * &ls[a];
            for k in 0..m {
                let c = sp.cm(a, b, k);
                if c != 0.0 {
                    r -= &ls[k] * c;
                }
            }
            for al in 0..h {
                let c = sp.ch(a, b, al);
                if c != 0.0 {
                    r -= &sp.isotropy_maps[al] * c;
                }
            }
            out.push(r);
        }
    }
    out
}

fn ricci_from_endos(endos: &[Mat], m: usize) -> Mat {
    let mut ric = Mat::zeros(m, m);
    for b in 0..m {
        for c in 0..m {
            let mut s = 0.0;
            for a in 0..m {
                s += endos[a * m + b][(a, c)];
            }
            ric[(b, c)] = s;
        }
    }
    sym(&ric)
}

/// Ricci tensor as a bilinear form on the m-basis.
pub fn ricci(metric: &InvariantMetric) -> Result<Mat> {
    let conn = connection_map(metric)?;
    let endos = curvature_endos(metric, &conn);
    Ok(ricci_from_endos(&endos, metric.dim()))
}

/// Contract every slot of a 4-tensor with the columns of `f`.
fn transform4(t: &[f64], f: &Mat, m: usize) -> Vec<f64> {
    let mut cur = t.to_vec();
    for slot in 0..4 {
        let mut next = vec![0.0; cur.len()];
        let stride = m.pow(3 - slot as u32);
        for idx in 0..cur.len() {
            let p = (idx / stride) % m;
            let base = idx - p * stride;
            let mut s = 0.0;
            for a in 0..m {
                s += f[(a, p)] * cur[base + a * stride];
            }
            next[idx] = s;
        }
        cur = next;
    }
    cur
}

fn sec_search(rm_on: &[f64], m: usize) -> (f64, f64, bool) {
    let at = |a: usize, b: usize, c: usize, d: usize| rm_on[((a * m + b) * m + c) * m + d];
    // M_y(a, d) = Rm(a, y, y, d)
    let my = |y: &Vec_| -> Mat {
        let mut out = Mat::zeros(m, m);
        for a in 0..m {
            for d in 0..m {
                let mut s = 0.0;
                for b in 0..m {
                    for c in 0..m {
                        s += y[b] * y[c] * at(a, b, c, d);
                    }
                }
                out[(a, d)] = s;
            }
        }
        sym(&out)
    };
    let perp_basis = |y: &Vec_| -> Mat {
        let p = Mat::identity(m, m) - y * y.transpose();
        let (vals, vecs) = sym_eigen(&p);
        let cols: Vec<usize> = (0..m).filter(|&i| vals[i] > 0.5).collect();
        Mat::from_fn(m, cols.len(), |r, c| vecs[(r, cols[c])])
    };
    let best_partner = |y: &Vec_, maximize: bool| -> (Vec_, f64) {
        let b = perp_basis(y);
        let red = b.transpose() * my(y) * &b;
        let (vals, vecs) = sym_eigen(&red);
        let k = if maximize { vals.len() - 1 } else { 0 };
        let x = &b * vecs.column(k);
        (x.normalize(), vals[k])
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SEC_SEED);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut converged = true;
    for _ in 0..SEC_STARTS {
        let y0 = Vec_::from_fn(m, |_, _| rng.random::<f64>() - 0.5).normalize();
        for maximize in [true, false] {
            let mut y = y0.clone();
            let mut val = f64::NAN;
            let mut ok = false;
            for _ in 0..SEC_MAX_ITERS {
                let (x, v) = best_partner(&y, maximize);
                if (v - val).abs() <= SEC_TOL * v.abs().max(1.0) {
                    val = v;
                    ok = true;
                    break;
                }
                val = v;
                y = x;
            }
            converged &= ok;
            if maximize {
                hi = hi.max(val);
            } else {
                lo = lo.min(val);
            }
        }
    }
    (lo, hi, converged)
}

/// The cheap part of the curvature: what the flow needs at every step.
#[derive(Clone, Debug)]
pub struct CurvatureSummary {
    pub ric: Mat,
    pub scal: f64,
    pub rm_norm: f64,
    pub ric_norm_sq: f64,
}

pub fn curvature_summary(metric: &InvariantMetric) -> Result<CurvatureSummary> {
    let m = metric.dim();
    let g = &metric.g;
    let conn = connection_map(metric)?;
    let endos = curvature_endos(metric, &conn);
    let ric = ricci_from_endos(&endos, m);
    let ginv = spd_inv(g)?;
    let endo = &ginv * &ric;
    // |Rm|^2 = sum over R(a,b) of tr(R^T R) weighted through g^-1 on the pair
    let mut norm_sq = 0.0;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let w = ginv[(a, c)] * ginv[(b, d)];
                    if w == 0.0 {
                        continue;
                    }
                    // tr(R(a,b)^T g R(c,d) g^-1)
                    let x = endos[a * m + b].transpose() * g * &endos[c * m + d] * &ginv;
                    norm_sq += w * x.trace();
                }
            }
        }
    }
    Ok(CurvatureSummary {
        scal: endo.trace(),
        ric_norm_sq: (&endo * &endo).trace(),
        rm_norm: norm_sq.max(0.0).sqrt(),
        ric,
    })
}

pub fn curvature_package(metric: &InvariantMetric) -> Result<CurvaturePackage> {
    let m = metric.dim();
    let g = &metric.g;
    let conn = connection_map(metric)?;
    let endos = curvature_endos(metric, &conn);
    let mut rm = vec![0.0; m * m * m * m];
    for a in 0..m {
        for b in 0..m {
            let gr = g * &endos[a * m + b];
            for c in 0..m {
                for d in 0..m {
                    rm[((a * m + b) * m + c) * m + d] = gr[(d, c)];
                }
            }
        }
    }
    let ric = ricci_from_endos(&endos, m);
    let ginv = spd_inv(g)?;
    let f = spd_inv_sqrt(g)?;
    let endo = &ginv * &ric;
    let scal = endo.trace();
    let ric_norm_sq = (&endo * &endo).trace();
    let ric_on = sym(&(&f * &ric * &f));
    let eigs: Vec<f64> = sym_eigenvalues(&ric_on).iter().cloned().collect();
    let rm_on = transform4(&rm, &f, m);
    let rm_norm = rm_on.iter().map(|x| x * x).sum::<f64>().sqrt();

    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();
    let at = |a: usize, b: usize, c: usize, d: usize| rm_on[((a * m + b) * m + c) * m + d];
    let op = Mat::from_fn(pairs.len(), pairs.len(), |p, q| {
        let (i, j) = pairs[p];
        let (k, l) = pairs[q];
        at(i, j, l, k)
    });
    let op_eigs = sym_eigenvalues(&op);
    let (op_min, op_max) = if op_eigs.is_empty() {
        (0.0, 0.0)
    } else {
        (op_eigs[0], op_eigs[op_eigs.len() - 1])
    };
    let sec = if m <= 3 {
        SecEstimate {
            sec_min: op_min,
            sec_max: op_max,
            operator_min: op_min,
            operator_max: op_max,
            converged: true,
        }
    } else {
        let (lo, hi, ok) = sec_search(&rm_on, m);
        SecEstimate {
            sec_min: lo.max(op_min),
            sec_max: hi.min(op_max),
            operator_min: op_min,
            operator_max: op_max,
            converged: ok,
        }
    };
    Ok(CurvaturePackage {
        m,
        rm,
        ric,
        scal,
        sec,
        rm_norm,
        ric_endo_eigs: eigs,
        ric_norm_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{reductive_split, LieAlgebraData};
    use nalgebra::DVector;
    use std::sync::Arc;

    fn metric(alg: LieAlgebraData, h: Mat, d: &[f64]) -> InvariantMetric {
        let s = Arc::new(reductive_split(&alg, &h, None).unwrap());
        InvariantMetric::new(Mat::from_diagonal(&DVector::from_column_slice(d)), s).unwrap()
    }

    #[test]
    fn round_su2() {
        let c = curvature_package(&metric(
            LieAlgebraData::su2(),
            Mat::zeros(3, 0),
            &[1.0, 1.0, 1.0],
        ))
        .unwrap();
        assert!((c.ric - Mat::identity(3, 3) * 0.5).norm() < 1e-14);
        assert!((c.scal - 1.5).abs() < 1e-14);
        assert!((c.sec.sec_min - 0.25).abs() < 1e-14);
        assert!((c.sec.sec_max - 0.25).abs() < 1e-14);
        assert!((c.rm_norm - (12.0f64).sqrt() / 4.0).abs() < 1e-14);
    }

    #[test]
    fn milnor_values() {
        let c = curvature_package(&metric(
            LieAlgebraData::su2(),
            Mat::zeros(3, 0),
            &[1.0, 2.0, 2.0],
        ))
        .unwrap();
        let e = &c.ric_endo_eigs;
        assert!((e[0] - 0.125).abs() < 1e-14);
        assert!((e[1] - 0.375).abs() < 1e-14 && (e[2] - 0.375).abs() < 1e-14);
        assert!((c.scal - 0.875).abs() < 1e-14);
        assert!(c.symmetry_defect() < 1e-12);
    }

    #[test]
    fn round_two_sphere_quotient() {
        let h = Mat::from_column_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]);
        let c =
            curvature_package(&metric(LieAlgebraData::su2_plus_u1(), h, &[1.0, 1.0, 5.0])).unwrap();
        assert!((c.sec.sec_max - 1.0).abs() < 1e-14);
        assert!(c.sec.sec_min.abs() < 1e-14);
        assert!((c.scal - 2.0).abs() < 1e-14);
    }

    #[test]
    fn summary_matches_package() {
        let met = metric(LieAlgebraData::su2(), Mat::zeros(3, 0), &[0.4, 1.3, 2.2]);
        let p = curvature_package(&met).unwrap();
        let s = curvature_summary(&met).unwrap();
        assert!((p.rm_norm - s.rm_norm).abs() < 1e-13 * p.rm_norm);
        assert!((p.scal - s.scal).abs() < 1e-14);
        assert!((p.ric_norm_sq - s.ric_norm_sq).abs() < 1e-13);
    }

    #[test]
    fn flat_torus() {
        let c = curvature_package(&metric(
            LieAlgebraData::abelian(3),
            Mat::zeros(3, 0),
            &[1.0, 3.0, 2.0],
        ))
        .unwrap();
        assert_eq!(c.scal, 0.0);
        assert!(c.rm.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn four_dimensional_search_matches_operator_bounds() {
        // su(2) + u(1) with trivial isotropy: S^3 x S^1, sec in [0, 1/4]
        let c = curvature_package(&metric(
            LieAlgebraData::su2_plus_u1(),
            Mat::zeros(4, 0),
            &[1.0, 1.0, 1.0, 1.0],
        ))
        .unwrap();
        assert!(c.sec.converged);
        assert!(c.sec.sec_min.abs() < 1e-10);
        assert!((c.sec.sec_max - 0.25).abs() < 1e-10);
    }
}

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vec_};

use super::metric::InvariantMetric;

/// Nomizu map of the Levi-Civita connection at the origin.
///
/// `Lambda(e_i) e_j = sum_k lambda[i][j][k] e_k`, and `U` is its symmetric part.
#[derive(Clone, Debug)]
pub struct ConnectionData {
    pub m: usize,
    pub lambda: Vec<f64>,
    pub u: Vec<f64>,
}

impl ConnectionData {
    #[inline]
    pub fn lambda(&self, i: usize, j: usize, k: usize) -> f64 {
        self.lambda[(i * self.m + j) * self.m + k]
    }

    #[inline]
    pub fn u(&self, i: usize, j: usize, k: usize) -> f64 {
        self.u[(i * self.m + j) * self.m + k]
    }

    /// Matrix of `Lambda(e_i)` acting on columns.
    pub fn lambda_mat(&self, i: usize) -> Mat {
        let m = self.m;
        Mat::from_fn(m, m, |k, j| self.lambda(i, j, k))
    }

    pub fn lambda_of(&self, x: &Vec_) -> Mat {
        let m = self.m;
        let mut out = Mat::zeros(m, m);
        for i in 0..m {
            if x[i] != 0.0 {
                out += self.lambda_mat(i) * x[i];
            }
        }
        out
    }

    /// `U(x, y)`.
    pub fn u_apply(&self, x: &Vec_, y: &Vec_) -> Vec_ {
        let m = self.m;
        let mut out = Vec_::zeros(m);
        for i in 0..m {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..m {
                    out[k] += w * self.u(i, j, k);
                }
            }
        }
        out
    }

    /// `max |g(Lambda(X)Y, Z) + g(Y, Lambda(X)Z)|` over basis triples.
    pub fn compatibility_defect(&self, g: &Mat) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..self.m {
            let l = self.lambda_mat(i);
            let s = l.transpose() * g + g * &l;
            d = d.max(s.iter().fold(0.0_f64, |a, v| a.max(v.abs())));
        }
        d
    }
}

/// Levi-Civita Nomizu map `Lambda(X)Y = 1/2 [X,Y]_m + U(X,Y)` with
/// `2 g(U(X,Y), Z) = g([Z,X]_m, Y) + g(X, [Z,Y]_m)`.
pub fn connection_map(metric: &InvariantMetric) -> Result<ConnectionData> {
    let sp = &metric.space;
    let g = &metric.g;
    let m = sp.mdim();
    let chol = nalgebra::Cholesky::new(g.clone())
        .ok_or_else(|| Error::LinearSolve("metric matrix is singular or indefinite".into()))?;
    // gc[z][i][j] = g([e_z, e_i]_m, e_j)
    let mut gc = vec![0.0; m * m * m];
    for z in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut s = 0.0;
                for k in 0..m {
                    s += sp.cm(z, i, k) * g[(k, j)];
                }
                gc[(z * m + i) * m + j] = s;
            }
        }
    }
    let mut u = vec![0.0; m * m * m];
    let mut lambda = vec![0.0; m * m * m];
    for i in 0..m {
        for j in i..m {
            let w = Vec_::from_fn(m, |z, _| {
                0.5 * (gc[(z * m + i) * m + j] + gc[(z * m + j) * m + i])
            });
            let uij = chol.solve(&w);
            for k in 0..m {
                u[(i * m + j) * m + k] = uij[k];
                u[(j * m + i) * m + k] = uij[k];
            }
        }
    }
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                lambda[(i * m + j) * m + k] = 0.5 * sp.cm(i, j, k) + u[(i * m + j) * m + k];
            }
        }
    }
    Ok(ConnectionData { m, lambda, u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{reductive_split, LieAlgebraData};
    use nalgebra::DVector;
    use std::sync::Arc;

    fn su2_metric(d: &[f64]) -> InvariantMetric {
        let s = Arc::new(reductive_split(&LieAlgebraData::su2(), &Mat::zeros(3, 0), None).unwrap());
        InvariantMetric::new(Mat::from_diagonal(&DVector::from_column_slice(d)), s).unwrap()
    }

    #[test]
    fn bi_invariant_has_no_symmetric_part() {
        let c = connection_map(&su2_metric(&[1.0, 1.0, 1.0])).unwrap();
        assert!(c.u.iter().all(|x| x.abs() < 1e-15));
        assert!((c.lambda(0, 1, 2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn berger_entry() {
        let (a, b) = (0.7, 1.9);
        let c = connection_map(&su2_metric(&[a, b, b])).unwrap();
        assert!((c.lambda(0, 1, 2) - (1.0 - a / (2.0 * b))).abs() < 1e-14);
    }

    #[test]
    fn compatible_and_torsion_free() {
        let met = su2_metric(&[0.7, 1.3, 2.9]);
        let c = connection_map(&met).unwrap();
        assert!(c.compatibility_defect(&met.g) < 1e-12);
        let sp = &met.space;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let t = c.lambda(i, j, k) - c.lambda(j, i, k) - sp.cm(i, j, k);
                    assert!(t.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn abelian_is_flat_connection() {
        let s = Arc::new(
            reductive_split(&LieAlgebraData::abelian(3), &Mat::zeros(3, 0), None).unwrap(),
        );
        let g = Mat::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5]);
        let c = connection_map(&InvariantMetric::new(g, s).unwrap()).unwrap();
        assert!(c.lambda.iter().all(|x| *x == 0.0));
    }
}

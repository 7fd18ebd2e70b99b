use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{min_eig, Mat, Vec_};

pub const VALIDATION_TOL: f64 = 1e-12;

/// Real Lie algebra given by structure constants `[e_i, e_j] = sum_k c[i][j][k] e_k`
/// together with an inner product `Q`.
#[derive(Clone, Debug)]
pub struct LieAlgebraData {
    pub dim: usize,
    pub labels: Vec<String>,
    structure: Vec<f64>,
    pub q: Mat,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub antisymmetry: f64,
    pub jacobi: f64,
    pub ad_invariance: f64,
    pub q_symmetry: f64,
    pub q_min_eig: f64,
    pub pass: bool,
}

fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("e{i}")).collect()
}

impl LieAlgebraData {
    /// Dense constructor, `c` indexed as `(i * n + j) * n + k`. No validation
    /// beyond shapes; call [`LieAlgebraData::validate`].
    pub fn from_dense(
        dim: usize,
        labels: Option<Vec<String>>,
        c: Vec<f64>,
        q: Mat,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("algebra dimension must be at least 1".into()));
        }
        if c.len() != dim * dim * dim {
            return Err(Error::Shape(format!(
                "structure array has {} entries, expected {}",
                c.len(),
                dim * dim * dim
            )));
        }
        if q.nrows() != dim || q.ncols() != dim {
            return Err(Error::Shape(format!("Q must be {dim}x{dim}")));
        }
        let labels = labels.unwrap_or_else(|| default_labels(dim));
        if labels.len() != dim {
            return Err(Error::Shape(format!(
                "{} labels for dimension {dim}",
                labels.len()
            )));
        }
        Ok(Self {
            dim,
            labels,
            structure: c,
            q,
        })
    }

    /// Sparse constructor from `(i, j, k, value)` entries with `i < j`; the
    /// `j, i` entries are filled in by antisymmetry.
    pub fn from_sparse(
        dim: usize,
        labels: Option<Vec<String>>,
        entries: &[(usize, usize, usize, f64)],
        q: Option<Mat>,
    ) -> Result<Self> {
        let mut c = vec![0.0; dim * dim * dim];
        for &(i, j, k, v) in entries {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::Shape(format!(
                    "structure index ({i},{j},{k}) out of range"
                )));
            }
            if i >= j {
                return Err(Error::Shape(format!(
                    "structure entry ({i},{j},{k}) needs i < j"
                )));
            }
            c[(i * dim + j) * dim + k] += v;
            c[(j * dim + i) * dim + k] -= v;
        }
        let q = q.unwrap_or_else(|| Mat::identity(dim, dim));
        Self::from_dense(dim, labels, c, q)
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    pub fn structure(&self) -> &[f64] {
        &self.structure
    }

    pub fn set_c(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.dim;
        self.structure[(i * n + j) * n + k] = v;
    }

    pub fn bracket(&self, x: &Vec_, y: &Vec_) -> Vec_ {
        let n = self.dim;
        let mut out = Vec_::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += w * self.c(i, j, k);
                }
            }
        }
        out
    }

    /// Matrix of `ad(x)` acting on coordinate columns.
    pub fn ad(&self, x: &Vec_) -> Mat {
        let n = self.dim;
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    a[(k, j)] += x[i] * self.c(i, j, k);
                }
            }
        }
        a
    }

    pub fn ad_basis(&self, i: usize) -> Mat {
        let mut e = Vec_::zeros(self.dim);
        e[i] = 1.0;
        self.ad(&e)
    }

    /// `B(X, Y) = tr(ad X ad Y)` on the basis.
    pub fn killing_form(&self) -> Mat {
        let n = self.dim;
        let ads: Vec<Mat> = (0..n).map(|i| self.ad_basis(i)).collect();
        Mat::from_fn(n, n, |i, j| (&ads[i] * &ads[j]).trace())
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.dim;
        let mut anti = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    anti = anti.max((self.c(i, j, k) + self.c(j, i, k)).abs());
                }
            }
        }
        // [[x,y],z] + [[y,z],x] + [[z,x],y], componentwise
        let mut jac = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for p in 0..n {
                            s += self.c(i, j, p) * self.c(p, k, l)
                                + self.c(j, k, p) * self.c(p, i, l)
                                + self.c(k, i, p) * self.c(p, j, l);
                        }
                        jac = jac.max(s.abs());
                    }
                }
            }
        }
        // Q([X,Z],Y) + Q(X,[Y,Z])
        let mut adinv = 0.0_f64;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let mut s = 0.0;
                    for p in 0..n {
                        s += self.c(x, z, p) * self.q[(p, y)] + self.q[(x, p)] * self.c(y, z, p);
                    }
                    adinv = adinv.max(s.abs());
                }
            }
        }
        let qsym = (&self.q - self.q.transpose())
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        let qmin = min_eig(&self.q);
        let pass = anti <= VALIDATION_TOL
            && jac <= VALIDATION_TOL
            && adinv <= VALIDATION_TOL
            && qsym <= VALIDATION_TOL
            && qmin > 0.0;
        ValidationReport {
            antisymmetry: anti,
            jacobi: jac,
            ad_invariance: adinv,
            q_symmetry: qsym,
            q_min_eig: qmin,
            pass,
        }
    }

    pub fn direct_sum(&self, other: &LieAlgebraData) -> LieAlgebraData {
        let (n1, n2) = (self.dim, other.dim);
        let n = n1 + n2;
        let mut c = vec![0.0; n * n * n];
        for i in 0..n1 {
            for j in 0..n1 {
                for k in 0..n1 {
                    c[(i * n + j) * n + k] = self.c(i, j, k);
                }
            }
        }
        for i in 0..n2 {
            for j in 0..n2 {
                for k in 0..n2 {
                    c[((i + n1) * n + j + n1) * n + k + n1] = other.c(i, j, k);
                }
            }
        }
        let mut q = Mat::zeros(n, n);
        q.view_mut((0, 0), (n1, n1)).copy_from(&self.q);
        q.view_mut((n1, n1), (n2, n2)).copy_from(&other.q);
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        // relabel so the default e1..en naming stays contiguous
        if labels.iter().enumerate().all(|(_, l)| l.starts_with('e')) {
            labels = default_labels(n);
        }
        LieAlgebraData {
            dim: n,
            labels,
            structure: c,
            q,
        }
    }

    /// su(2) with `[e1,e2] = e3` and cyclic permutations, `Q = I`.
    pub fn su2() -> Self {
        Self::from_sparse(
            3,
            None,
            &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (0, 2, 1, -1.0)],
            None,
        )
        .expect("static su(2) data")
    }

    pub fn abelian(n: usize) -> Self {
        Self::from_sparse(n, None, &[], None).expect("static abelian data")
    }

    pub fn su2_plus_u1() -> Self {
        Self::su2().direct_sum(&Self::abelian(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn su2_validates_exactly() {
        let r = LieAlgebraData::su2().validate();
        assert!(r.pass);
        assert_eq!(r.antisymmetry, 0.0);
        assert_eq!(r.jacobi, 0.0);
        assert_eq!(r.ad_invariance, 0.0);
    }

    #[test]
    fn abelian_validates() {
        assert!(LieAlgebraData::abelian(3).validate().pass);
    }

    #[test]
    fn flipped_entry_breaks_jacobi() {
        let mut a = LieAlgebraData::su2();
        // [e1,e2] = e3 flipped on one entry only, [e2,e1] untouched
        a.set_c(0, 1, 2, -1.0);
        let r = a.validate();
        assert!(!r.pass);
        assert!(r.jacobi > 0.0);
    }

    #[test]
    fn killing_form_of_su2() {
        let b = LieAlgebraData::su2().killing_form();
        assert!((b + Mat::identity(3, 3) * 2.0).norm() < 1e-12);
    }

    #[test]
    fn sparse_rejects_bad_order() {
        assert!(LieAlgebraData::from_sparse(3, None, &[(1, 0, 2, 1.0)], None).is_err());
        assert!(LieAlgebraData::from_sparse(3, None, &[(0, 1, 5, 1.0)], None).is_err());
    }
}

use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt, max_abs, null_space, Mat, Vec_};

use super::algebra::LieAlgebraData;

pub const SUBALGEBRA_TOL: f64 = 1e-10;
pub const KERNEL_TOL: f64 = 1e-10;

/// Reductive homogeneous space data `g = h + m` at the Lie-algebra level.
///
/// Bases are stored as columns in the coordinates of the algebra. Everything
/// downstream works in `m`-coordinates with respect to the Q-orthonormal
/// `m_basis`, where Q is the Euclidean product.
#[derive(Clone, Debug)]
pub struct HomogeneousSpaceData {
    pub algebra: LieAlgebraData,
    pub h_basis: Mat,
    pub m_basis: Mat,
    /// Basis of the trivial submodule, columns in m-coordinates.
    pub m0_basis: Mat,
    /// `ad(h_a)|_m` in m-coordinates, one per column of `h_basis`.
    pub isotropy_maps: Vec<Mat>,
    pub diam_q: Option<f64>,
    pub reductivity_defect: f64,
    // adapted structure constants for the Q-orthonormal basis [h | m]
    adapted: Vec<f64>,
}

impl HomogeneousSpaceData {
    pub fn hdim(&self) -> usize {
        self.h_basis.ncols()
    }

    pub fn mdim(&self) -> usize {
        self.m_basis.ncols()
    }

    pub fn n(&self) -> usize {
        self.algebra.dim
    }

    /// Structure constant of the adapted basis `[f_a, f_b] = sum c f_c`, with
    /// indices `0..hdim` for h and `hdim..n` for m.
    #[inline]
    pub fn ca(&self, a: usize, b: usize, c: usize) -> f64 {
        let n = self.n();
        self.adapted[(a * n + b) * n + c]
    }

    /// `[e_i, e_j]_m` component `k` for m-indices.
    #[inline]
    pub fn cm(&self, i: usize, j: usize, k: usize) -> f64 {
        let h = self.hdim();
        self.ca(i + h, j + h, k + h)
    }

    /// `[e_i, e_j]_h` component `a`.
    #[inline]
    pub fn ch(&self, i: usize, j: usize, a: usize) -> f64 {
        let h = self.hdim();
        self.ca(i + h, j + h, a)
    }

    /// Bracket of two m-vectors split as (h-part, m-part).
    pub fn bracket_m(&self, x: &Vec_, y: &Vec_) -> (Vec_, Vec_) {
        let (h, m) = (self.hdim(), self.mdim());
        let mut bh = Vec_::zeros(h);
        let mut bm = Vec_::zeros(m);
        for i in 0..m {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for a in 0..h {
                    bh[a] += w * self.ch(i, j, a);
                }
                for k in 0..m {
                    bm[k] += w * self.cm(i, j, k);
                }
            }
        }
        (bh, bm)
    }

    /// `ad(x)` on the whole algebra in adapted coordinates `[h | m]`.
    pub fn ad_adapted(&self, x: &Vec_) -> Mat {
        let n = self.n();
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    a[(k, j)] += x[i] * self.ca(i, j, k);
                }
            }
        }
        a
    }

    /// Embed an m-vector into adapted coordinates.
    pub fn m_to_adapted(&self, x: &Vec_) -> Vec_ {
        let mut v = Vec_::zeros(self.n());
        v.rows_mut(self.hdim(), self.mdim()).copy_from(x);
        v
    }

    /// m-vector in algebra coordinates.
    pub fn m_to_algebra(&self, x: &Vec_) -> Vec_ {
        &self.m_basis * x
    }

    /// `ad(x)|_m` for `x` in m0 (preserves m), in m-coordinates.
    pub fn ad_m(&self, x: &Vec_) -> Mat {
        let (h, m) = (self.hdim(), self.mdim());
        let full = self.ad_adapted(&self.m_to_adapted(x));
        full.view((h, h), (m, m)).into_owned()
    }

    pub fn m0_dim(&self) -> usize {
        self.m0_basis.ncols()
    }

    /// Projector onto m0 in m-coordinates.
    pub fn m0_projector(&self) -> Mat {
        &self.m0_basis * self.m0_basis.transpose()
    }

    pub fn with_diam_q(mut self, d: Option<f64>) -> Self {
        self.diam_q = d;
        self
    }

    /// Quotient by a torus in m0: isotropy `h + t`. Returns the new data and the
    /// embedding of the new complement into the current m-coordinates.
    pub fn quotient(&self, t_basis: &Mat) -> Result<(HomogeneousSpaceData, Mat)> {
        let mut hb = Mat::zeros(self.n(), self.hdim() + t_basis.ncols());
        hb.view_mut((0, 0), (self.n(), self.hdim()))
            .copy_from(&self.h_basis);
        let t_alg = &self.m_basis * t_basis;
        hb.view_mut((0, self.hdim()), (self.n(), t_basis.ncols()))
            .copy_from(&t_alg);
        let q = reductive_split(&self.algebra, &hb, None)?;
        let emb = self.m_basis.transpose() * &self.algebra.q * &q.m_basis;
        Ok((q, emb))
    }
}

/// Split `g = h + m` with `m` the Q-orthogonal complement of `h`.
pub fn reductive_split(
    algebra: &LieAlgebraData,
    h_basis: &Mat,
    diam_q: Option<f64>,
) -> Result<HomogeneousSpaceData> {
    let n = algebra.dim;
    let report = algebra.validate();
    if !report.pass {
        return Err(Error::Algebra(format!(
            "algebra fails validation (antisymmetry {:e}, Jacobi {:e}, Ad-invariance {:e})",
            report.antisymmetry, report.jacobi, report.ad_invariance
        )));
    }
    if h_basis.nrows() != n && h_basis.ncols() != 0 {
        return Err(Error::Shape(format!(
            "h_basis vectors must have {n} entries"
        )));
    }
    let q = &algebra.q;
    let hb = if h_basis.ncols() == 0 {
        Mat::zeros(n, 0)
    } else {
        gram_schmidt(h_basis, q)
            .map_err(|_| Error::Shape("h_basis is linearly dependent".into()))?
    };
    let k = hb.ncols();

    // closure of h under the bracket
    let ph = &hb * hb.transpose() * q;
    for a in 0..k {
        for b in (a + 1)..k {
            let br = algebra.bracket(&hb.column(a).into_owned(), &hb.column(b).into_owned());
            let off = &br - &ph * &br;
            let d = (off.transpose() * q * &off)[0].max(0.0).sqrt();
            if d > SUBALGEBRA_TOL {
                return Err(Error::Algebra(format!(
                    "h_basis is not closed under the bracket (defect {d:e})"
                )));
            }
        }
    }

    // Q-orthogonal complement
    let mb = if k == 0 {
        gram_schmidt(&Mat::identity(n, n), q)?
    } else {
        let constraint = hb.transpose() * q;
        let raw = null_space(&constraint, KERNEL_TOL);
        if raw.ncols() + k != n {
            return Err(Error::Numeric(
                "h and its Q-complement do not span the algebra".into(),
            ));
        }
        gram_schmidt(&raw, q)?
    };
    let m = mb.ncols();

    // adapted Q-orthonormal basis P = [h | m]; coordinates via P^T Q
    let mut p = Mat::zeros(n, n);
    p.view_mut((0, 0), (n, k)).copy_from(&hb);
    p.view_mut((0, k), (n, m)).copy_from(&mb);
    let pinv = p.transpose() * q;
    let mut adapted = vec![0.0; n * n * n];
    for a in 0..n {
        let fa = p.column(a).into_owned();
        for b in 0..n {
            let br = algebra.bracket(&fa, &p.column(b).into_owned());
            let coords = &pinv * br;
            for c in 0..n {
                adapted[(a * n + b) * n + c] = coords[c];
            }
        }
    }

    let mut space = HomogeneousSpaceData {
        algebra: algebra.clone(),
        h_basis: hb,
        m_basis: mb,
        m0_basis: Mat::zeros(m, 0),
        isotropy_maps: Vec::new(),
        diam_q,
        reductivity_defect: 0.0,
        adapted,
    };

    let mut red = 0.0_f64;
    let mut maps = Vec::with_capacity(k);
    for a in 0..k {
        let mut am = Mat::zeros(m, m);
        for j in 0..m {
            for c in 0..k {
                red = red.max(space.ca(a, k + j, c).abs());
            }
            for i in 0..m {
                am[(i, j)] = space.ca(a, k + j, k + i);
            }
        }
        let skew = max_abs(&(&am + am.transpose()));
        if skew > SUBALGEBRA_TOL {
            return Err(Error::Algebra(format!(
                "isotropy map is not Q-skew (defect {skew:e})"
            )));
        }
        maps.push(am);
    }
    if red > SUBALGEBRA_TOL {
        return Err(Error::Algebra(format!(
            "[h, m] is not contained in m (defect {red:e})"
        )));
    }
    space.reductivity_defect = red;

    let m0 = if k == 0 || m == 0 {
        Mat::identity(m, m)
    } else {
        let mut stacked = Mat::zeros(k * m, m);
        for (a, am) in maps.iter().enumerate() {
            stacked.view_mut((a * m, 0), (m, m)).copy_from(am);
        }
        null_space(&stacked, KERNEL_TOL)
    };
    space.m0_basis = m0;
    space.isotropy_maps = maps;
    Ok(space)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Mat {
        Mat::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn trivial_isotropy() {
        let s = reductive_split(&LieAlgebraData::su2(), &Mat::zeros(3, 0), None).unwrap();
        assert_eq!(s.mdim(), 3);
        assert_eq!(s.m0_dim(), 3);
    }

    #[test]
    fn s2_times_circle() {
        let a = LieAlgebraData::su2_plus_u1();
        let s = reductive_split(&a, &col(&[1.0, 0.0, 0.0, 0.0]), None).unwrap();
        assert_eq!(s.mdim(), 3);
        assert_eq!(s.m0_dim(), 1);
        // m = span(e2, e3, e4), m0 = span(e4)
        let m0_alg = &s.m_basis * &s.m0_basis;
        assert!((m0_alg[(3, 0)].abs() - 1.0).abs() < 1e-12);
        for i in 0..3 {
            assert!(s.m_basis[(0, i)].abs() < 1e-14);
        }
    }

    #[test]
    fn central_isotropy() {
        let a = LieAlgebraData::su2_plus_u1();
        let s = reductive_split(&a, &col(&[0.0, 0.0, 0.0, 1.0]), None).unwrap();
        assert_eq!(s.m0_dim(), 3);
    }

    #[test]
    fn non_subalgebra_rejected() {
        let a = LieAlgebraData::su2();
        let h = Mat::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(matches!(
            reductive_split(&a, &h, None),
            Err(Error::Algebra(_))
        ));
    }

    #[test]
    fn split_is_idempotent() {
        let a = LieAlgebraData::su2_plus_u1();
        let s = reductive_split(&a, &col(&[1.0, 0.0, 0.0, 0.0]), None).unwrap();
        let s2 = reductive_split(&a, &s.h_basis, None).unwrap();
        for j in 0..s.mdim() {
            let d1 = (s.m_basis.column(j) - s2.m_basis.column(j)).norm();
            let d2 = (s.m_basis.column(j) + s2.m_basis.column(j)).norm();
            assert!(d1.min(d2) < 1e-12);
        }
    }
}

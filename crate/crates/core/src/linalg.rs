//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vec_ = DVector<f64>;

pub fn sym(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues ascending.
pub fn sym_eigen(a: &Mat) -> (Vec_, Mat) {
    let n = a.nrows();
    if n == 0 {
        return (Vec_::zeros(0), Mat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(sym(a));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = Vec_::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = Mat::zeros(n, n);
    for (c, &i) in idx.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        // fix the sign so results do not depend on LAPACK-style choices
        let k = v.iamax();
        if v[k] < 0.0 {
            v = -v;
        }
        vecs.set_column(c, &v);
    }
    (vals, vecs)
}

pub fn sym_eigenvalues(a: &Mat) -> Vec_ {
    sym_eigen(a).0
}

pub fn min_eig(a: &Mat) -> f64 {
    let v = sym_eigenvalues(a);
    if v.is_empty() {
        f64::INFINITY
    } else {
        v[0]
    }
}

pub fn max_eig(a: &Mat) -> f64 {
    let v = sym_eigenvalues(a);
    if v.is_empty() {
        0.0
    } else {
        v[v.len() - 1]
    }
}

fn spd_apply(a: &Mat, f: impl Fn(f64) -> f64) -> Result<Mat> {
    let (vals, vecs) = sym_eigen(a);
    if vals.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::LinearSolve(format!(
            "matrix is not positive definite (min eigenvalue {:e})",
            vals.iter().cloned().fold(f64::INFINITY, f64::min)
        )));
    }
    let d = Mat::from_diagonal(&vals.map(f));
    Ok(sym(&(&vecs * d * vecs.transpose())))
}

pub fn spd_sqrt(a: &Mat) -> Result<Mat> {
    spd_apply(a, f64::sqrt)
}

pub fn spd_inv_sqrt(a: &Mat) -> Result<Mat> {
    spd_apply(a, |l| 1.0 / l.sqrt())
}

pub fn spd_inv(a: &Mat) -> Result<Mat> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let chol = nalgebra::Cholesky::new(sym(a))
        .ok_or_else(|| Error::LinearSolve("Cholesky factorization failed".into()))?;
    Ok(sym(&chol.inverse()))
}

pub fn frob(a: &Mat) -> f64 {
    a.norm()
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Spectral norm through the SVD.
pub fn op_norm(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Kernel of `a` (as columns), singular values below `tol` count as zero.
pub fn null_space(a: &Mat, tol: f64) -> Mat {
    let cols = a.ncols();
    if cols == 0 {
        return Mat::zeros(0, 0);
    }
    let rows = a.nrows().max(cols);
    let mut padded = Mat::zeros(rows, cols);
    padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let mut basis: Vec<Vec_> = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < tol {
            basis.push(vt.row(i).transpose());
        }
    }
    let mut out = Mat::zeros(cols, basis.len());
    for (c, v) in basis.iter().enumerate() {
        out.set_column(c, v);
    }
    canonical_basis(&out)
}

/// Re-express an orthonormal basis of a subspace in a reproducible form:
/// Gram-Schmidt on the projections of the standard basis vectors.
pub fn canonical_basis(basis: &Mat) -> Mat {
    let n = basis.nrows();
    let k = basis.ncols();
    if k == 0 {
        return Mat::zeros(n, 0);
    }
    let p = basis * basis.transpose();
    let mut cols: Vec<Vec_> = Vec::with_capacity(k);
    // prefer coordinate directions that lie closest to the subspace, ties by index
    let mut cand: Vec<(usize, i64)> = (0..n)
        .map(|i| (i, (p[(i, i)] * 1e8).round() as i64))
        .collect();
    cand.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    for (i, _) in cand {
        if cols.len() == k {
            break;
        }
        let mut v = p.column(i).into_owned();
        for c in &cols {
            let d = c.dot(&v);
            v -= c * d;
        }
        let nv = v.norm();
        if nv > 1e-8 {
            cols.push(v / nv);
        }
    }
    let mut out = Mat::zeros(n, cols.len());
    for (c, v) in cols.iter().enumerate() {
        out.set_column(c, v);
    }
    out
}

/// Orthonormal basis of the Euclidean orthogonal complement of the column span.
pub fn orthogonal_complement(basis: &Mat, n: usize) -> Mat {
    if basis.ncols() == 0 {
        return Mat::identity(n, n);
    }
    null_space(&basis.transpose(), 1e-10)
}

/// Gram-Schmidt of the columns of `a` with respect to the inner product `g`.
pub fn gram_schmidt(a: &Mat, g: &Mat) -> Result<Mat> {
    let mut out = a.clone();
    for j in 0..a.ncols() {
        let mut v = out.column(j).into_owned();
        for i in 0..j {
            let u = out.column(i).into_owned();
            let d = (u.transpose() * g * &v)[0];
            v -= u * d;
        }
        let nv2 = (v.transpose() * g * &v)[0];
        if !(nv2 > 1e-28) {
            return Err(Error::Numeric("Gram-Schmidt met a dependent vector".into()));
        }
        out.set_column(j, &(v / nv2.sqrt()));
    }
    Ok(out)
}

/// Largest sine of the principal angles between two subspaces given by
/// Euclidean-orthonormal columns of equal count.
pub fn subspace_sin_angle(a: &Mat, b: &Mat) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let proj = b * b.transpose();
    let resid = a - &proj * a;
    op_norm(&resid).min(1.0)
}

pub fn expm(a: &Mat) -> Mat {
    a.clone().exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_rank_one() {
        let a = Mat::from_row_slice(1, 3, &[0.0, 0.0, 1.0]);
        let k = null_space(&a, 1e-10);
        assert_eq!(k.ncols(), 2);
        assert!((&a * &k).norm() < 1e-14);
        assert!((k[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_roundtrip() {
        let a = Mat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let s = spd_sqrt(&a).unwrap();
        assert!((&s * &s - &a).norm() < 1e-13);
        let is = spd_inv_sqrt(&a).unwrap();
        assert!((&is * &a * &is - Mat::identity(2, 2)).norm() < 1e-13);
    }

    #[test]
    fn exp_of_rotation_generator() {
        let mut a = Mat::zeros(2, 2);
        a[(0, 1)] = -std::f64::consts::FRAC_PI_2;
        a[(1, 0)] = std::f64::consts::FRAC_PI_2;
        let e = expm(&a);
        assert!((e[(1, 0)] - 1.0).abs() < 1e-13);
        assert!(e[(0, 0)].abs() < 1e-13);
    }

    #[test]
    fn angle_between_planes() {
        let a = Mat::from_row_slice(3, 1, &[1.0, 0.0, 0.0]);
        let t: f64 = 0.3;
        let b = Mat::from_row_slice(3, 1, &[t.cos(), t.sin(), 0.0]);
        assert!((subspace_sin_angle(&a, &b) - t.sin()).abs() < 1e-13);
    }
}

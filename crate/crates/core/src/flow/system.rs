use std::sync::Arc;

use crate::error::Result;
use crate::geometry::{ricci, InvariantMetric};
use crate::lie::HomogeneousSpaceData;
use crate::linalg::Mat;
use crate::ode::OdeSystem;

/// `-2 Ric(g)` as a matrix on the m-basis.
pub fn ricci_rhs(g: &InvariantMetric) -> Result<Mat> {
    Ok(ricci(g)? * -2.0)
}

/// Row-major upper triangle.
pub fn pack_sym(g: &Mat, out: &mut [f64]) {
    let m = g.nrows();
    let mut p = 0;
    for i in 0..m {
        for j in i..m {
            out[p] = g[(i, j)];
            p += 1;
        }
    }
}

pub fn unpack_sym(y: &[f64], m: usize) -> Mat {
    let mut g = Mat::zeros(m, m);
    let mut p = 0;
    for i in 0..m {
        for j in i..m {
            g[(i, j)] = y[p];
            g[(j, i)] = y[p];
            p += 1;
        }
    }
    g
}

pub struct RicciFlowSystem {
    pub space: Arc<HomogeneousSpaceData>,
}

impl RicciFlowSystem {
    pub fn new(space: Arc<HomogeneousSpaceData>) -> Self {
        Self { space }
    }

    pub fn m(&self) -> usize {
        self.space.mdim()
    }

    pub fn metric(&self, y: &[f64]) -> InvariantMetric {
        InvariantMetric::new_unchecked(unpack_sym(y, self.m()), self.space.clone())
    }
}

impl OdeSystem for RicciFlowSystem {
    fn dim(&self) -> usize {
        let m = self.m();
        m * (m + 1) / 2
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let r = ricci_rhs(&self.metric(y))?;
        pack_sym(&r, dy);
        Ok(())
    }

    fn admissible(&self, _t: f64, y: &[f64]) -> bool {
        nalgebra::Cholesky::new(unpack_sym(y, self.m())).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{reductive_split, LieAlgebraData};
    use nalgebra::DVector;

    #[test]
    fn rhs_values() {
        let s = Arc::new(reductive_split(&LieAlgebraData::su2(), &Mat::zeros(3, 0), None).unwrap());
        let g = InvariantMetric::new(Mat::identity(3, 3), s).unwrap();
        assert!((ricci_rhs(&g).unwrap() + Mat::identity(3, 3)).norm() < 1e-14);

        let a = LieAlgebraData::su2_plus_u1();
        let s = Arc::new(
            reductive_split(
                &a,
                &Mat::from_column_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]),
                None,
            )
            .unwrap(),
        );
        let g = InvariantMetric::new(
            Mat::from_diagonal(&DVector::from_vec(vec![3.0, 3.0, 0.7])),
            s.clone(),
        )
        .unwrap();
        let r = ricci_rhs(&g).unwrap();
        assert!((r - Mat::from_diagonal(&DVector::from_vec(vec![-2.0, -2.0, 0.0]))).norm() < 1e-14);
        let out = ricci_rhs(&g).unwrap();
        let inv = InvariantMetric::new_unchecked(out, s).invariance_defect();
        assert!(inv < 1e-12);
    }

    #[test]
    fn packing_roundtrip() {
        let g = Mat::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0]);
        let mut y = vec![0.0; 6];
        pack_sym(&g, &mut y);
        assert_eq!(y, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(unpack_sym(&y, 3), g);
    }
}

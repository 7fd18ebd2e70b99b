use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lie::HomogeneousSpaceData;
use crate::linalg::{max_abs, min_eig, sym, Mat};

/// Relative tolerance for `Ad(h)`-invariance of a stored metric.
pub const INVARIANCE_TOL: f64 = 1e-10;

/// Positive-definite `Ad(H)`-invariant form on m, as a matrix on the
/// Q-orthonormal `m_basis`.
#[derive(Clone, Debug)]
pub struct InvariantMetric {
    pub g: Mat,
    pub space: Arc<HomogeneousSpaceData>,
}

impl InvariantMetric {
    pub fn new(g: Mat, space: Arc<HomogeneousSpaceData>) -> Result<Self> {
        let m = space.mdim();
        if g.nrows() != m || g.ncols() != m {
            return Err(Error::Shape(format!(
                "metric must be {m}x{m}, got {}x{}",
                g.nrows(),
                g.ncols()
            )));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("metric has non-finite entries".into()));
        }
        let scale = max_abs(&g).max(f64::MIN_POSITIVE);
        let asym = max_abs(&(&g - g.transpose()));
        if asym > 1e-12 * scale.max(1.0) {
            return Err(Error::Domain(format!(
                "metric is not symmetric (defect {asym:e})"
            )));
        }
        let g = sym(&g);
        let me = min_eig(&g);
        if !(me > 0.0) {
            return Err(Error::Domain(format!(
                "metric is not positive definite (min eigenvalue {me:e})"
            )));
        }
        let out = Self { g, space };
        let d = out.invariance_defect();
        if d > INVARIANCE_TOL {
            return Err(Error::Domain(format!(
                "metric is not Ad(H)-invariant (defect {d:e})"
            )));
        }
        Ok(out)
    }

    /// Skips the invariance checks; used inside integrators and for
    /// deliberately broken controls.
    pub fn new_unchecked(g: Mat, space: Arc<HomogeneousSpaceData>) -> Self {
        Self { g, space }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `max_a |G A_a + A_a^T G| / max(1, |G|)` over the isotropy maps.
    pub fn invariance_defect(&self) -> f64 {
        let scale = max_abs(&self.g).max(1.0);
        self.space
            .isotropy_maps
            .iter()
            .map(|a| max_abs(&(&self.g * a + a.transpose() * &self.g)) / scale)
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            g: &self.g * c,
            space: self.space.clone(),
        }
    }

    pub fn min_eig(&self) -> f64 {
        min_eig(&self.g)
    }

    /// `g(x, y)` for m-vectors.
    pub fn inner(&self, x: &crate::linalg::Vec_, y: &crate::linalg::Vec_) -> f64 {
        (x.transpose() * &self.g * y)[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{reductive_split, LieAlgebraData};

    fn s2xs1() -> Arc<HomogeneousSpaceData> {
        let a = LieAlgebraData::su2_plus_u1();
        Arc::new(
            reductive_split(
                &a,
                &Mat::from_column_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]),
                None,
            )
            .unwrap(),
        )
    }

    #[test]
    fn invariant_diagonal_accepted() {
        let g = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 2.0, 1.0]));
        assert!(InvariantMetric::new(g, s2xs1()).is_ok());
    }

    #[test]
    fn non_invariant_rejected() {
        let g = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 2.2, 1.0]));
        assert!(matches!(
            InvariantMetric::new(g, s2xs1()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn indefinite_rejected() {
        let g = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 2.0, -1.0]));
        assert!(InvariantMetric::new(g, s2xs1()).is_err());
    }
}

use crate::error::{Error, Result};
use crate::linalg::max_eig;

use super::curvature::curvature_package;
use super::metric::InvariantMetric;

/// `(vol_rel, F)` with `vol_rel = sqrt(det G)`, so that the Q-metric has unit
/// volume, and `F = vol_rel^(2/m) scal`.
pub fn f_functional(metric: &InvariantMetric) -> Result<(f64, f64)> {
    let m = metric.dim() as f64;
    let vol = metric.g.determinant().sqrt();
    let scal = curvature_package(metric)?.scal;
    Ok((vol, vol.powf(2.0 / m) * scal))
}

/// `dF/dt = 2 vol^(2/m) (|Ric|^2 - scal^2 / m)` along the Ricci flow.
pub fn f_derivative(metric: &InvariantMetric) -> Result<f64> {
    let m = metric.dim() as f64;
    let vol = metric.g.determinant().sqrt();
    let c = curvature_package(metric)?;
    Ok(2.0 * vol.powf(2.0 / m) * (c.ric_norm_sq - c.scal * c.scal / m))
}

/// `sqrt(lambda_max(G)) * diam_Q`, an upper bound for the diameter.
pub fn diameter_bound(metric: &InvariantMetric) -> Result<f64> {
    let d = metric
        .space
        .diam_q
        .ok_or_else(|| Error::Config("diam_Q is not set for this space".into()))?;
    Ok(max_eig(&metric.g).sqrt() * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{reductive_split, LieAlgebraData};
    use crate::linalg::Mat;
    use nalgebra::DVector;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn su2(d: &[f64]) -> InvariantMetric {
        let s = Arc::new(
            reductive_split(&LieAlgebraData::su2(), &Mat::zeros(3, 0), Some(2.0 * PI)).unwrap(),
        );
        InvariantMetric::new(Mat::from_diagonal(&DVector::from_column_slice(d)), s).unwrap()
    }

    #[test]
    fn scale_invariant_on_round() {
        for c in [0.3, 1.0, 7.0] {
            let (_, f) = f_functional(&su2(&[c, c, c])).unwrap();
            assert!((f - 1.5).abs() < 1e-13);
        }
    }

    #[test]
    fn berger_value() {
        let (v, f) = f_functional(&su2(&[1.0, 2.0, 2.0])).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        assert!((f - 2f64.powf(2.0 / 3.0) * 0.875).abs() < 1e-13);
        let d = f_derivative(&su2(&[1.0, 2.0, 2.0])).unwrap();
        assert!((d - 2f64.powf(5.0 / 3.0) / 24.0).abs() < 1e-13);
    }

    #[test]
    fn diameter() {
        assert!((diameter_bound(&su2(&[1.0, 4.0, 4.0])).unwrap() - 4.0 * PI).abs() < 1e-13);
        let s = Arc::new(reductive_split(&LieAlgebraData::su2(), &Mat::zeros(3, 0), None).unwrap());
        let g = InvariantMetric::new(Mat::identity(3, 3), s).unwrap();
        assert!(matches!(diameter_bound(&g), Err(Error::Config(_))));
    }
}

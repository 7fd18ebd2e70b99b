//! Averaging invariant metrics over a torus of equivariant diffeomorphisms.

use crate::error::{Error, Result};
use crate::geometry::InvariantMetric;
use crate::lie::{Period, TorusCertificate};
use crate::linalg::{expm, max_abs, spd_inv_sqrt, sym, sym_eigenvalues, Mat, Vec_};

pub const AVERAGING_NODES: usize = 64;
const DOUBLING_TOL: f64 = 1e-12;

/// Pullback maps `exp(theta ad V)` at the quadrature nodes of one direction.
fn nodes(g: &InvariantMetric, torus: &TorusCertificate, i: usize, n: usize) -> Result<Vec<Mat>> {
    let v: Vec_ = torus.t_basis.column(i).into_owned();
    let ad = g.space.ad_m(&v);
    match torus.periods[i] {
        Period::Trivial => Ok(vec![Mat::identity(g.dim(), g.dim())]),
        Period::Closed { period } => Ok((0..n).map(|k| expm(&(&ad * (period * k as f64 / n as f64)))).collect()),
        Period::Open { closure_dim } => Err(Error::Domain(format!(
            "direction {i} generates a torus of dimension {closure_dim}; supply a basis of its closure"
        ))),
    }
}

fn average_with(g: &InvariantMetric, torus: &TorusCertificate, n: usize) -> Result<Mat> {
    let mut acc = g.g.clone();
    for i in 0..torus.dim() {
        let es = nodes(g, torus, i, n)?;
        let mut next = Mat::zeros(g.dim(), g.dim());
        for e in &es {
            next += e.transpose() * &acc * e;
        }
        acc = sym(&(next / es.len() as f64));
    }
    Ok(acc)
}

fn check(torus: &TorusCertificate) -> Result<()> {
    if !torus.passes() {
        return Err(Error::Precondition(
            "torus certificate does not pass".into(),
        ));
    }
    Ok(())
}

/// Torus average of `g`, trapezoid rule with a doubling check.
pub fn symmetrize(g: &InvariantMetric, torus: &TorusCertificate) -> Result<InvariantMetric> {
    check(torus)?;
    let a = average_with(g, torus, AVERAGING_NODES)?;
    let b = average_with(g, torus, 2 * AVERAGING_NODES)?;
    let change = max_abs(&(&a - &b)) / max_abs(&a).max(f64::MIN_POSITIVE);
    if change > DOUBLING_TOL {
        return Err(Error::Numeric(format!(
            "torus average changed by {change:e} when the nodes were doubled"
        )));
    }
    InvariantMetric::new(a, g.space.clone())
}

fn rel_op(diff: &Mat, wt: &Mat) -> f64 {
    sym_eigenvalues(&sym(&(wt * diff * wt))).amax()
}

/// `(|g - g_T|, max over nodes of |g - f^* g|)`, both in the `g_T` operator norm.
pub fn averaging_defect(g: &InvariantMetric, torus: &TorusCertificate) -> Result<(f64, f64)> {
    let gt = symmetrize(g, torus)?;
    let wt = spd_inv_sqrt(&gt.g)?;
    let delta0 = rel_op(&(&g.g - &gt.g), &wt);
    let per_dir: Vec<Vec<Mat>> = (0..torus.dim())
        .map(|i| nodes(g, torus, i, AVERAGING_NODES))
        .collect::<Result<_>>()?;
    let mut pull = 0.0_f64;
    let mut visit = |e: &Mat| {
        pull = pull.max(rel_op(&(&g.g - e.transpose() * &g.g * e), &wt));
    };
    let m = g.dim();
    if torus.dim() <= 2 {
        // full product grid
        let mut grid = vec![Mat::identity(m, m)];
        for es in &per_dir {
            grid = grid
                .iter()
                .flat_map(|a| es.iter().map(move |e| a * e))
                .collect();
        }
        grid.iter().for_each(&mut visit);
    } else {
        per_dir.iter().flatten().for_each(&mut visit);
    }
    Ok((delta0, pull))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{reductive_split, verify_torus, LieAlgebraData};
    use std::sync::Arc;

    fn su2(d: [f64; 3]) -> (InvariantMetric, TorusCertificate) {
        let s = Arc::new(reductive_split(&LieAlgebraData::su2(), &Mat::zeros(3, 0), None).unwrap());
        let cert = verify_torus(&s, &Mat::from_column_slice(3, 1, &[1.0, 0.0, 0.0])).unwrap();
        (
            InvariantMetric::new(Mat::from_diagonal(&Vec_::from_vec(d.to_vec())), s).unwrap(),
            cert,
        )
    }

    #[test]
    fn rotation_average() {
        let (g, t) = su2([1.0, 2.0, 4.0]);
        let gt = symmetrize(&g, &t).unwrap();
        let want = Mat::from_diagonal(&Vec_::from_vec(vec![1.0, 3.0, 3.0]));
        assert!((gt.g - want).amax() < 1e-12);
        let (d0, pull) = averaging_defect(&g, &t).unwrap();
        assert!((d0 - 1.0 / 3.0).abs() < 1e-12);
        // a quarter turn swaps the two eigenvalues
        assert!((pull - 2.0 / 3.0).abs() < 1e-12, "{pull}");
    }

    #[test]
    fn invariant_metric_is_fixed_and_idempotent() {
        let (g, t) = su2([1.0, 2.0, 2.0]);
        let gt = symmetrize(&g, &t).unwrap();
        assert!((&gt.g - &g.g).amax() < 1e-14);
        assert_eq!(averaging_defect(&g, &t).unwrap().0 < 1e-14, true);
        let (g, t) = su2([0.3, 1.0, 5.0]);
        let once = symmetrize(&g, &t).unwrap();
        let twice = symmetrize(&once, &t).unwrap();
        assert!((once.g - twice.g).amax() < 1e-13);
    }

    #[test]
    fn central_direction_is_trivial() {
        let h = Mat::from_column_slice(4, 1, &[0.0, 0.0, 1.0, 0.0]);
        let s = Arc::new(reductive_split(&LieAlgebraData::su2_plus_u1(), &h, None).unwrap());
        let t = Vec_::from_fn(3, |i, _| s.m_basis[(3, i)]);
        let cert = verify_torus(&s, &Mat::from_columns(&[t])).unwrap();
        let g = InvariantMetric::new(Mat::from_diagonal(&Vec_::from_vec(vec![2.0, 2.0, 0.3])), s)
            .unwrap();
        assert_eq!(symmetrize(&g, &cert).unwrap().g, g.g);
    }
}

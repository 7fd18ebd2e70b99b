use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{sym_eigenvalues, Mat, Vec_};

use super::space::HomogeneousSpaceData;

pub const TORUS_TOL: f64 = 1e-10;
pub const MAX_DENOMINATOR: u64 = 64;
const FREQ_ZERO: f64 = 1e-9;
const RATIO_TOL: f64 = 1e-8;

/// How `exp(theta ad V)` closes up on the algebra.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Period {
    /// Smallest `P > 0` with `exp(P ad V) = id`.
    Closed { period: f64 },
    /// `ad V = 0`: every period works.
    Trivial,
    /// Frequencies are not commensurable within the denominator bound.
    Open { closure_dim: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct TorusCertificate {
    /// Columns in m-coordinates.
    #[serde(skip)]
    pub t_basis: Mat,
    pub pairwise_bracket_norm: f64,
    pub containment_defect: f64,
    pub periods: Vec<Period>,
}

impl TorusCertificate {
    pub fn dim(&self) -> usize {
        self.t_basis.ncols()
    }

    pub fn passes(&self) -> bool {
        self.pairwise_bracket_norm <= TORUS_TOL && self.containment_defect <= TORUS_TOL
    }

    pub fn all_periodic(&self) -> bool {
        self.periods
            .iter()
            .all(|p| !matches!(p, Period::Open { .. }))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Best rational approximation `p/q` with `q <= qmax`, if within `RATIO_TOL`.
fn rationalize(x: f64, qmax: u64) -> Option<(u64, u64)> {
    for q in 1..=qmax {
        let p = (x * q as f64).round();
        if p >= 1.0 && (x * q as f64 - p).abs() <= RATIO_TOL * q as f64 * x.max(1.0) {
            let p = p as u64;
            let g = gcd(p, q);
            return Some((p / g, q / g));
        }
    }
    None
}

/// Frequencies `w` of the skew map `ad V` (eigenvalues `+-i w`), deduplicated.
fn frequencies(ad: &Mat) -> Vec<f64> {
    let s = -(ad * ad);
    let ev = sym_eigenvalues(&s);
    let scale = ev.iter().cloned().fold(0.0_f64, f64::max).max(1.0);
    let mut out: Vec<f64> = Vec::new();
    for &l in ev.iter() {
        if l > FREQ_ZERO * scale {
            let w = l.sqrt();
            if !out.iter().any(|&u| (u - w).abs() <= 1e-7 * w) {
                out.push(w);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn period_of(ad: &Mat) -> Period {
    let freqs = frequencies(ad);
    if freqs.is_empty() {
        return Period::Trivial;
    }
    let w0 = freqs[0];
    let mut ratios = Vec::with_capacity(freqs.len());
    for &w in &freqs {
        match rationalize(w / w0, MAX_DENOMINATOR) {
            Some(r) => ratios.push(r),
            None => {
                // count classes of mutually commensurable frequencies
                let mut reps: Vec<f64> = Vec::new();
                for &u in &freqs {
                    if !reps
                        .iter()
                        .any(|&r| rationalize(u / r, MAX_DENOMINATOR).is_some())
                    {
                        reps.push(u);
                    }
                }
                return Period::Open {
                    closure_dim: reps.len(),
                };
            }
        }
    }
    let l = ratios
        .iter()
        .fold(1u64, |acc, &(_, q)| acc / gcd(acc, q) * q);
    let ints: Vec<u64> = ratios.iter().map(|&(p, q)| p * (l / q)).collect();
    let g = ints.iter().fold(0u64, |acc, &k| gcd(acc, k));
    // w_k = (w0 / l) * ints[k]; exp(P ad V) = id iff P w0 / l * g in 2 pi Z
    Period::Closed {
        period: 2.0 * std::f64::consts::PI * l as f64 / (w0 * g as f64),
    }
}

/// Certify that the columns of `t_basis` (m-coordinates) span an abelian
/// subalgebra of m0 and find the periods of their one-parameter groups.
pub fn verify_torus(space: &HomogeneousSpaceData, t_basis: &Mat) -> Result<TorusCertificate> {
    let m = space.mdim();
    if t_basis.nrows() != m {
        return Err(Error::Shape(format!("torus vectors must have {m} entries")));
    }
    let s = t_basis.ncols();
    if s > 0 {
        let rank = t_basis.clone().svd(false, false).rank(1e-10);
        if rank < s {
            return Err(Error::Shape("torus basis is linearly dependent".into()));
        }
    }
    let mut br = 0.0_f64;
    for a in 0..s {
        for b in (a + 1)..s {
            let (bh, bm) = space.bracket_m(
                &t_basis.column(a).into_owned(),
                &t_basis.column(b).into_owned(),
            );
            br = br.max((bh.norm_squared() + bm.norm_squared()).sqrt());
        }
    }
    let p0 = space.m0_projector();
    let mut cont = 0.0_f64;
    for a in 0..s {
        let v: Vec_ = t_basis.column(a).into_owned();
        let off = &v - &p0 * &v;
        cont = cont.max(off.norm() / v.norm());
    }
    let periods = (0..s)
        .map(|a| period_of(&space.ad_adapted(&space.m_to_adapted(&t_basis.column(a).into_owned()))))
        .collect();
    Ok(TorusCertificate {
        t_basis: t_basis.clone(),
        pairwise_bracket_norm: br,
        containment_defect: cont,
        periods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{reductive_split, LieAlgebraData};
    use std::f64::consts::PI;

    #[test]
    fn hopf_circle_has_period_two_pi() {
        let s = reductive_split(&LieAlgebraData::su2(), &Mat::zeros(3, 0), None).unwrap();
        let t = Mat::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let c = verify_torus(&s, &t).unwrap();
        assert!(c.passes());
        match c.periods[0] {
            Period::Closed { period } => assert!((period - 2.0 * PI).abs() < 1e-12),
            ref p => panic!("unexpected {p:?}"),
        }
    }

    #[test]
    fn central_circle_is_trivial() {
        let a = LieAlgebraData::su2_plus_u1();
        let s = reductive_split(
            &a,
            &Mat::from_column_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]),
            None,
        )
        .unwrap();
        let t = Mat::from_column_slice(3, 1, &[0.0, 0.0, 1.0]);
        let c = verify_torus(&s, &t).unwrap();
        assert!(c.passes());
        assert_eq!(c.periods[0], Period::Trivial);
    }

    #[test]
    fn two_directions_in_su2_fail() {
        let s = reductive_split(&LieAlgebraData::su2(), &Mat::zeros(3, 0), None).unwrap();
        let t = Mat::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let c = verify_torus(&s, &t).unwrap();
        assert!(!c.passes());
        assert!((c.pairwise_bracket_norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scaled_generator_period() {
        let s = reductive_split(&LieAlgebraData::su2(), &Mat::zeros(3, 0), None).unwrap();
        let t = Mat::from_column_slice(3, 1, &[0.0, 0.0, 2.0]);
        let c = verify_torus(&s, &t).unwrap();
        match c.periods[0] {
            Period::Closed { period } => assert!((period - PI).abs() < 1e-12),
            ref p => panic!("unexpected {p:?}"),
        }
    }

    #[test]
    fn rational_frequencies() {
        assert_eq!(rationalize(1.5, 64), Some((3, 2)));
        assert_eq!(rationalize(2.0_f64.sqrt(), 64), None);
    }
}

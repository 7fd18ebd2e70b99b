//! The product soliton `R^s x (B, g_check)` with Gaussian potential, and
//! checks of the soliton equation on it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blowdown::{LimitRecord, LimitStatus};
use crate::error::{Error, Result};
use crate::geometry::{curvature_summary, InvariantMetric};
use crate::linalg::{frob, Mat, Vec_};

pub const SAMPLE_SEED: u64 = 0x50_11_70_17;
pub const SAMPLE_COUNT: usize = 100;
pub const SAMPLE_RADIUS: f64 = 3.0;
/// Largest base Einstein residual accepted for assembly.
pub const ASSEMBLY_RESIDUAL: f64 = 1e-2;
/// Soliton-equation residual allowed on top of the base residual.
pub const EQ_TOL: f64 = 1e-6;
pub const SCALSOL_VAR_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SolitonData {
    pub s: usize,
    pub base: InvariantMetric,
    pub lambda: f64,
    /// `f(x) = potential * |x|^2` on the flat factor.
    pub potential: f64,
    pub c_constant: f64,
    pub base_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolitonResidual {
    pub eq_res: f64,
    pub scalsol_constant: f64,
    pub scalsol_var: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RigidityCertificate {
    pub pass: bool,
    pub lambda: f64,
    pub einstein_residual: f64,
    pub eq_res: f64,
    pub scalsol_constant: f64,
    pub scalsol_var: f64,
    pub s: usize,
    pub reasons: Vec<String>,
}

/// Killing fields used to probe the potential.
#[derive(Clone, Debug)]
pub enum KillingField {
    /// `d/dx_i` on the flat factor.
    Translation(usize),
    /// A field generated on the base; the potential does not see it.
    Base(Vec_),
}

fn sample_points(s: usize, count: usize) -> Vec<Vec_> {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = Vec_::from_fn(s, |_, _| SAMPLE_RADIUS * (2.0 * rng.random::<f64>() - 1.0));
        if x.norm() <= SAMPLE_RADIUS {
            out.push(x);
        }
    }
    out
}

impl SolitonData {
    pub fn f(&self, x: &Vec_) -> f64 {
        self.potential * x.norm_squared()
    }

    pub fn grad_f(&self, x: &Vec_) -> Vec_ {
        x * (2.0 * self.potential)
    }

    /// `scal + |df|^2 - 2 lambda f` at a flat-factor point.
    pub fn scalsol_value(&self, scal: f64, x: &Vec_) -> f64 {
        scal + self.grad_f(x).norm_squared() - 2.0 * self.lambda * self.f(x)
    }
}

/// Assemble without checking the base; `lambda = scal / dim B`.
pub fn assemble_from_base(base: InvariantMetric, s: usize) -> Result<SolitonData> {
    let summ = curvature_summary(&base)?;
    let lambda = summ.scal / base.dim() as f64;
    let residual = frob(&(&summ.ric - &base.g * lambda)) / frob(&base.g);
    let mut sol = SolitonData {
        s,
        base,
        lambda,
        potential: 0.5 * lambda,
        c_constant: f64::NAN,
        base_residual: residual,
    };
    sol.c_constant = if s == 0 {
        summ.scal
    } else {
        sol.scalsol_value(summ.scal, &Vec_::zeros(s))
    };
    Ok(sol)
}

pub fn assemble_product_soliton(record: &LimitRecord) -> Result<SolitonData> {
    let mut why = Vec::new();
    if record.status != LimitStatus::Pass {
        why.push(format!("limit record status is {:?}", record.status));
        why.extend(record.reasons.iter().cloned());
    }
    if !(record.scal_base > 0.0) {
        why.push(format!(
            "base scalar curvature {} is not positive",
            record.scal_base
        ));
    }
    if !(record.einstein_residual <= ASSEMBLY_RESIDUAL) {
        why.push(format!(
            "base Einstein residual {:e} exceeds {ASSEMBLY_RESIDUAL:e}",
            record.einstein_residual
        ));
    }
    let base = record
        .base
        .clone()
        .ok_or_else(|| Error::Precondition("limit record carries no base metric".into()))?;
    if !why.is_empty() {
        return Err(Error::Precondition(format!(
            "soliton assembly refused: {}",
            why.join("; ")
        )));
    }
    assemble_from_base(base, record.s)
}

/// Blockwise `|Ric + Hess f - lambda g| / |g|` and the spread of
/// `scal + |df|^2 - 2 lambda f` over fixed sample points.
pub fn soliton_residual(sol: &SolitonData, samples: usize) -> Result<SolitonResidual> {
    let summ = curvature_summary(&sol.base)?;
    let s = sol.s;
    let nb = sol.base.dim();
    let pts = if s == 0 {
        vec![Vec_::zeros(0)]
    } else {
        sample_points(s, samples.max(1))
    };
    let mut eq_res = 0.0_f64;
    let mut values = Vec::with_capacity(pts.len());
    for x in &pts {
        let mut g = Mat::zeros(s + nb, s + nb);
        let mut e = Mat::zeros(s + nb, s + nb);
        g.view_mut((0, 0), (s, s)).fill_with_identity();
        g.view_mut((s, s), (nb, nb)).copy_from(&sol.base.g);
        // flat block: Ric = 0 and Hess f = 2 * potential * I everywhere
        let hess = Mat::identity(s, s) * (2.0 * sol.potential);
        e.view_mut((0, 0), (s, s))
            .copy_from(&(hess - Mat::identity(s, s) * sol.lambda));
        e.view_mut((s, s), (nb, nb))
            .copy_from(&(&summ.ric - &sol.base.g * sol.lambda));
        eq_res = eq_res.max(frob(&e) / frob(&g));
        values.push(sol.scalsol_value(summ.scal, x));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(SolitonResidual {
        eq_res,
        scalsol_constant: mean,
        scalsol_var: var,
    })
}

/// For each Killing field `X`, `V = grad(df(X))` should equal `lambda X` on the
/// flat factor and be parallel; returns the largest deviation of either.
pub fn killing_potential_check(sol: &SolitonData, fields: &[KillingField]) -> f64 {
    let s = sol.s;
    let h = 1e-3;
    let pts = if s == 0 {
        Vec::new()
    } else {
        sample_points(s, 8)
    };
    let mut worst = 0.0_f64;
    for field in fields {
        match field {
            KillingField::Translation(i) if *i < s => {
                let df_x = |x: &Vec_| sol.grad_f(x)[*i];
                // V by central differences of df(X)
                let v_at = |x: &Vec_| {
                    Vec_::from_fn(s, |k, _| {
                        let mut p = x.clone();
                        let mut q = x.clone();
                        p[k] += h;
                        q[k] -= h;
                        (df_x(&p) - df_x(&q)) / (2.0 * h)
                    })
                };
                let mut expect = Vec_::zeros(s);
                expect[*i] = sol.lambda;
                for x in &pts {
                    let v = v_at(x);
                    worst = worst.max((&v - &expect).amax());
                    for k in 0..s {
                        let mut p = x.clone();
                        let mut q = x.clone();
                        p[k] += h;
                        q[k] -= h;
                        worst = worst.max(((v_at(&p) - v_at(&q)) / (2.0 * h)).amax());
                    }
                }
            }
            KillingField::Translation(_) => {}
            // f is constant along the base, so df(X) and V vanish
            KillingField::Base(_) => {}
        }
    }
    worst
}

pub fn rigidity_certificate(record: &LimitRecord) -> RigidityCertificate {
    let mut reasons = Vec::new();
    if !(record.einstein_lambda > 0.0) {
        reasons.push("nonpositive Einstein constant".to_string());
    }
    if !(record.einstein_residual <= ASSEMBLY_RESIDUAL) {
        reasons.push(format!(
            "base Einstein residual {:e} above {ASSEMBLY_RESIDUAL:e}",
            record.einstein_residual
        ));
    }
    let mut cert = RigidityCertificate {
        pass: false,
        lambda: record.einstein_lambda,
        einstein_residual: record.einstein_residual,
        eq_res: f64::NAN,
        scalsol_constant: f64::NAN,
        scalsol_var: f64::NAN,
        s: record.s,
        reasons,
    };
    match assemble_product_soliton(record) {
        Err(e) => cert.reasons.push(e.to_string()),
        Ok(sol) => {
            let m = sol.base.dim() + sol.s;
            if sol.s != record.s
                || (!record.b_infty.is_empty() && record.b_infty.len() + record.s != m)
            {
                cert.reasons.push(format!(
                    "flat dimension {} does not match the detected collapse",
                    sol.s
                ));
            }
            match soliton_residual(&sol, SAMPLE_COUNT) {
                Err(e) => cert.reasons.push(e.to_string()),
                Ok(r) => {
                    if !(r.eq_res <= EQ_TOL + record.einstein_residual) {
                        cert.reasons
                            .push(format!("soliton equation residual {:e}", r.eq_res));
                    }
                    if !(r.scalsol_var <= SCALSOL_VAR_TOL) {
                        cert.reasons.push(format!(
                            "scal + |df|^2 - 2 lambda f varies by {:e}",
                            r.scalsol_var
                        ));
                    }
                    cert.eq_res = r.eq_res;
                    cert.scalsol_constant = r.scalsol_constant;
                    cert.scalsol_var = r.scalsol_var;
                }
            }
        }
    }
    cert.pass = cert.reasons.is_empty();
    cert
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{reductive_split, LieAlgebraData};
    use std::sync::Arc;

    fn s2(b: f64) -> InvariantMetric {
        let h = Mat::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let sp = Arc::new(reductive_split(&LieAlgebraData::su2(), &h, None).unwrap());
        InvariantMetric::new(Mat::identity(2, 2) * b, sp).unwrap()
    }

    fn su2(d: [f64; 3]) -> InvariantMetric {
        let sp =
            Arc::new(reductive_split(&LieAlgebraData::su2(), &Mat::zeros(3, 0), None).unwrap());
        InvariantMetric::new(Mat::from_diagonal(&Vec_::from_vec(d.to_vec())), sp).unwrap()
    }

    #[test]
    fn gaussian_soliton_over_round_sphere() {
        let rec = LimitRecord::for_base(s2(2.0), 1).unwrap();
        let sol = assemble_product_soliton(&rec).unwrap();
        assert!((sol.lambda - 0.5).abs() < 1e-12);
        assert!((sol.potential - 0.25).abs() < 1e-12);
        assert!((sol.c_constant - 1.0).abs() < 1e-12);
        let r = soliton_residual(&sol, SAMPLE_COUNT).unwrap();
        assert!(r.eq_res < 1e-12 && r.scalsol_var <= 1e-12);
        assert!((r.scalsol_constant - 1.0).abs() < 1e-12);
        let cert = rigidity_certificate(&rec);
        assert!(cert.pass, "{cert:?}");
    }

    #[test]
    fn einstein_case_has_no_potential() {
        let rec = LimitRecord::for_base(su2([1.0, 1.0, 1.0]), 0).unwrap();
        let sol = assemble_product_soliton(&rec).unwrap();
        assert!((sol.lambda - 0.5).abs() < 1e-12 && (sol.c_constant - 1.5).abs() < 1e-12);
        let r = soliton_residual(&sol, SAMPLE_COUNT).unwrap();
        assert!((r.eq_res - rec.einstein_residual).abs() < 1e-15 && r.scalsol_var == 0.0);
    }

    #[test]
    fn flat_and_non_einstein_bases_are_refused() {
        let sp = Arc::new(
            reductive_split(&LieAlgebraData::abelian(2), &Mat::zeros(2, 0), None).unwrap(),
        );
        let flat = LimitRecord::for_base(InvariantMetric::new(Mat::identity(2, 2), sp).unwrap(), 1)
            .unwrap();
        assert!(assemble_product_soliton(&flat).is_err());
        let cert = rigidity_certificate(&flat);
        assert!(
            !cert.pass
                && cert
                    .reasons
                    .iter()
                    .any(|r| r == "nonpositive Einstein constant")
        );

        let bent = su2([1.6, 2.0, 2.4]);
        let rec = LimitRecord::for_base(bent.clone(), 0).unwrap();
        assert!(rec.einstein_residual > 1e-2);
        assert!(!rigidity_certificate(&rec).pass);
        let sol = assemble_from_base(bent, 0).unwrap();
        assert!(soliton_residual(&sol, 10).unwrap().eq_res > 1e-2);
    }

    #[test]
    fn killing_potential() {
        let rec = LimitRecord::for_base(s2(2.0), 1).unwrap();
        let mut sol = assemble_product_soliton(&rec).unwrap();
        let fields = [
            KillingField::Translation(0),
            KillingField::Base(Vec_::from_vec(vec![1.0, 0.0])),
        ];
        assert!(killing_potential_check(&sol, &fields) < 1e-9);
        sol.potential += 0.1;
        assert!((killing_potential_check(&sol, &fields) - 0.2).abs() < 1e-6);
    }
}

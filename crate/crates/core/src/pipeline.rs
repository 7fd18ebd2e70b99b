//! Scenario runner: flow, blow-down, limit, models and the soliton
//! certificate, with reports written as it goes.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::blowdown::{
    blowdown_metrics, detect_collapsing_torus, limit_triple_with, CollapseDetection, LimitRecord,
    LimitStatus, LimitTolerances, DRIFT_TOL, MAX_EXPONENT, REL_EIGEN_TOL,
};
use crate::error::{Error, Result};
use crate::flow::{classify_asymptotics, integrate_flow, monitors, FlowStatus, FlowTrajectory};
use crate::geometry::InvariantMetric;
use crate::linalg::{gram_schmidt, spd_sqrt, Mat};
use crate::model::{build_model, compare_models, product_model, GeometricModel};
use crate::report::{rows, trajectory_csv, write_json};
use crate::scenario::Scenario;
use crate::soliton::{
    assemble_product_soliton, killing_potential_check, rigidity_certificate, KillingField,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_FORWARD_SINGULARITY: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Flow,
    Blowdown,
    Soliton,
    Full,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    pub report: Value,
    /// Printed to stderr by the CLI on validation failures.
    pub diagnostics: Option<Value>,
}

/// Everything computed after the flow.
pub struct Analysis {
    pub detection: CollapseDetection,
    pub limit: LimitRecord,
}

fn fail(code: i32, status: &str, err: &Error) -> (i32, Value) {
    (code, json!({ "status": status, "error": err.to_string() }))
}

/// Integrate the scenario's flow.
pub fn run_flow(sc: &Scenario) -> Result<FlowTrajectory> {
    let g0 = sc.initial()?;
    integrate_flow(&g0, sc.flow.t0, sc.t_end(), &sc.controls())
}

pub fn analyse(
    sc: &Scenario,
    traj: &FlowTrajectory,
    defect_samples: Option<usize>,
) -> Result<Analysis> {
    let bd = sc
        .blowdown
        .as_ref()
        .ok_or_else(|| Error::Config("scenario has no blowdown block".into()))?;
    let seq = blowdown_metrics(traj, &bd.taus, bd.t_eval)?;
    let detection = detect_collapsing_torus(&seq)?;
    let tol = LimitTolerances {
        defect_samples: defect_samples.unwrap_or(bd.defect_samples),
        ..Default::default()
    };
    let limit = limit_triple_with(&seq, &detection, &tol)?;
    Ok(Analysis { detection, limit })
}

/// Blow-down metric `g(tau t_eval) / tau` from the trajectory.
pub fn blowdown_at(traj: &FlowTrajectory, tau: f64, t_eval: f64) -> Result<InvariantMetric> {
    let g = traj.metric_at(tau * t_eval).ok_or_else(|| {
        Error::Domain(format!("trajectory does not reach t = {:e}", tau * t_eval))
    })?;
    InvariantMetric::new(g.g / tau, traj.space.clone())
}

/// Closed-form `R^s x S^(m-s)` model aligned with the torus directions of `g`.
/// Only meaningful when the base is a round sphere.
pub fn reference_model(
    g: &InvariantMetric,
    model: &GeometricModel,
    t_basis: &Mat,
) -> Result<GeometricModel> {
    let m = g.dim();
    let root = spd_sqrt(&(&g.g * model.normalization))?;
    let flat = if t_basis.ncols() == 0 {
        Mat::zeros(m, 0)
    } else {
        gram_schmidt(&(root * t_basis), &Mat::identity(m, m))?
    };
    product_model(m, &flat, &model.grid)
}

fn base_is_round(limit: &LimitRecord) -> bool {
    // Einstein in dimension at most 3 has constant curvature
    limit.status == LimitStatus::Pass && limit.g_check_infty.len() <= 3
}

#[derive(Serialize)]
struct CompareReport {
    order: usize,
    radial_points: usize,
    directions: usize,
    taus: Vec<f64>,
    reference: Option<String>,
    reference_distances: Vec<f64>,
    sequence_distances: Vec<f64>,
    /// Reference distances nonincreasing in tau with 5% slack per step.
    nonincreasing: Option<bool>,
}

/// Distance between the models at `tau` and at `against` (or the product
/// reference when `against` is `None`).
pub fn model_distance(sc: &Scenario, tau: f64, against: Option<f64>, order: usize) -> Result<f64> {
    let traj = run_flow(sc)?;
    let t_eval = sc.blowdown.as_ref().map_or(-1.0, |b| b.t_eval);
    let grid = sc.grid();
    let ga = blowdown_at(&traj, tau, t_eval)?;
    let a = build_model(&ga, &grid)?;
    let b = match against {
        Some(t2) => build_model(&blowdown_at(&traj, t2, t_eval)?, &grid)?,
        None => {
            let an = analyse(sc, &traj, Some(0))?;
            if !base_is_round(&an.limit) {
                return Err(Error::Precondition(
                    "no closed-form reference: the limit base is not a round sphere".into(),
                ));
            }
            reference_model(&ga, &a, &an.detection.t_basis)?
        }
    };
    compare_models(&a, &b, order)
}

fn tau_tag(tau: f64) -> String {
    format!("{tau:e}").replace('.', "p")
}

pub fn run_scenario(sc: &Scenario, out_dir: Option<&Path>, stage: Stage) -> RunOutcome {
    let out = out_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&sc.outputs.directory));
    let mut report = json!({ "name": sc.name, "stage": format!("{stage:?}").to_lowercase() });
    let (code, diagnostics) = run_inner(sc, &out, stage, &mut report);
    report["exit_code"] = json!(code);
    if report.get("status").is_none() {
        report["status"] = json!("completed");
    }
    let _ = write_json(&out.join("report.json"), &report);
    RunOutcome {
        exit_code: code,
        out_dir: out,
        report,
        diagnostics,
    }
}

fn run_inner(sc: &Scenario, out: &Path, stage: Stage, report: &mut Value) -> (i32, Option<Value>) {
    let _ = std::fs::create_dir_all(out);
    // validation
    let val = match sc.validation() {
        Ok(v) => v,
        Err(e) => {
            let (c, v) = fail(EXIT_VALIDATION, "validation_failure", &e);
            report["status"] = v["status"].clone();
            report["error"] = v["error"].clone();
            return (c, Some(v));
        }
    };
    report["validation"] = serde_json::to_value(&val).unwrap_or(Value::Null);
    if !val.pass {
        report["status"] = json!("validation_failure");
        return (
            EXIT_VALIDATION,
            Some(json!({ "status": "validation_failure", "validation": report["validation"] })),
        );
    }
    if let Err(e) = sc.initial() {
        let (c, v) = fail(EXIT_VALIDATION, "validation_failure", &e);
        report["status"] = v["status"].clone();
        report["error"] = v["error"].clone();
        return (c, Some(v));
    }

    // flow
    let traj = match run_flow(sc) {
        Ok(t) => t,
        Err(e) => {
            report["status"] = json!("numerical_failure");
            report["error"] = json!(e.to_string());
            return (EXIT_NUMERIC, None);
        }
    };
    let _ = std::fs::write(out.join("trajectory.csv"), trajectory_csv(&traj));
    let (lo, hi) = traj.coverage();
    report["flow"] = json!({
        "t0": traj.t0,
        "t_end": traj.t1,
        "coverage": [lo, hi],
        "method": traj.method,
        "steps": traj.steps,
        "rejected": traj.rejected,
        "result": serde_json::to_value(&traj.status).unwrap_or(Value::Null),
        "samples": traj.times.len(),
    });
    if let Ok(mr) = monitors(&traj) {
        report["monitors"] = json!({
            "typei_min": mr.typei_min,
            "typei_max": mr.typei_max,
            "min_df_dt": mr.min_df_dt,
            "f_monotone": mr.f_monotone,
            "max_diam_over_sqrt_t": mr.max_diam_over_sqrt_t,
            "scal_positive": mr.scal_positive,
        });
    }
    if traj.is_backward() {
        report["asymptotics"] =
            serde_json::to_value(classify_asymptotics(&traj)).unwrap_or(Value::Null);
    }
    match traj.status {
        FlowStatus::Completed => {}
        FlowStatus::HitSingularity { t_star } if !traj.is_backward() => {
            report["status"] = json!("forward_singularity");
            report["t_star"] = json!(t_star);
            return (EXIT_FORWARD_SINGULARITY, None);
        }
        FlowStatus::HitSingularity { t_star } => {
            report["status"] = json!("backward_singularity");
            report["t_star"] = json!(t_star);
            return (EXIT_NUMERIC, None);
        }
        FlowStatus::StepFailure { t } => {
            report["status"] = json!("step_failure");
            report["t_fail"] = json!(t);
            return (EXIT_NUMERIC, None);
        }
    }
    if stage == Stage::Flow || sc.blowdown.is_none() || !traj.is_backward() {
        return (EXIT_OK, None);
    }

    // blow-down and limit
    let an = match analyse(sc, &traj, None) {
        Ok(a) => a,
        Err(e) => {
            let _ = write_json(
                &out.join("blowdown.json"),
                &json!({ "status": "error", "error": e.to_string() }),
            );
            report["status"] = json!("numerical_failure");
            report["error"] = json!(e.to_string());
            return (EXIT_NUMERIC, None);
        }
    };
    let bd = sc.blowdown.as_ref().expect("checked above");
    let lim = &an.limit;
    let det = &an.detection;
    let blow = json!({
        "taus": bd.taus,
        "t_eval": bd.t_eval,
        "s": det.s,
        "t_basis": rows(&det.t_basis.transpose()),
        "eigen_decay": det.eigen_decay,
        "rates": det.rates,
        "collapse_rates": det.collapse_rates,
        "drift": det.drift,
        "tail_monotone": det.tail_monotone,
        "thresholds": { "relative_eigenvalue": REL_EIGEN_TOL, "exponent": MAX_EXPONENT, "drift": DRIFT_TOL },
        "periods": det.torus.periods,
        "b_infty": lim.b_infty,
        "g_check_infty": lim.g_check_infty,
        "g_hat_decay": lim.g_hat_decay,
        "einstein_lambda": lim.einstein_lambda,
        "einstein_residual": lim.einstein_residual,
        "scal_base": lim.scal_base,
        "lambda_seq": lim.lambda_seq,
        "residual_seq": lim.residual_seq,
        "A_norm_sq_seq": lim.a_norm_sq_seq,
        "dA_norm_seq": lim.da_norm_seq,
        "delta0_seq": lim.delta0_seq,
        "pull_defect_seq": lim.pull_defect_seq,
        "epsilon_seq": lim.epsilon_seq,
        "b_angle_tail": lim.b_angle_tail,
        "cauchy_tail": lim.cauchy_tail,
        "bn_defect": lim.bn_defect,
        "tolerances": lim.tolerances,
        "status": lim.status,
        "reasons": lim.reasons,
    });
    let _ = write_json(&out.join("blowdown.json"), &blow);
    report["limit_status"] = serde_json::to_value(lim.status).unwrap_or(Value::Null);

    // models
    if stage == Stage::Full {
        if let Some(mb) = &sc.model {
            let taus = if mb.taus.is_empty() {
                bd.taus.clone()
            } else {
                mb.taus.clone()
            };
            match models(sc, &traj, &taus, bd.t_eval, det, lim, out) {
                Ok(c) => report["models"] = c,
                Err(e) => {
                    report["status"] = json!("numerical_failure");
                    report["error"] = json!(e.to_string());
                    return (EXIT_NUMERIC, None);
                }
            }
        }
    }

    // soliton certificate
    if stage >= Stage::Soliton {
        let cert = rigidity_certificate(lim);
        let killing = assemble_product_soliton(lim).ok().map(|sol| {
            let mut fields: Vec<KillingField> = (0..sol.s).map(KillingField::Translation).collect();
            for i in 0..sol.base.dim() {
                let mut v = crate::linalg::Vec_::zeros(sol.base.dim());
                v[i] = 1.0;
                fields.push(KillingField::Base(v));
            }
            killing_potential_check(&sol, &fields)
        });
        let mut cj = serde_json::to_value(&cert).unwrap_or(Value::Null);
        cj["killing_deviation"] = json!(killing);
        let _ = write_json(&out.join("certificate.json"), &cj);
        report["certificate_pass"] = json!(cert.pass);
    }
    (EXIT_OK, None)
}

fn models(
    sc: &Scenario,
    traj: &FlowTrajectory,
    taus: &[f64],
    t_eval: f64,
    det: &CollapseDetection,
    lim: &LimitRecord,
    out: &Path,
) -> Result<Value> {
    let grid = sc.grid();
    let order = sc.model.as_ref().map_or(0, |m| m.order);
    let mut built = Vec::new();
    let mut reference = Vec::new();
    let round = base_is_round(lim);
    for &tau in taus {
        let g = blowdown_at(traj, tau, t_eval)?;
        let model = build_model(&g, &grid)?;
        write_json(
            &out.join("models")
                .join(format!("model_tau_{}.json", tau_tag(tau))),
            &model.dump(),
        )?;
        if round {
            let r = reference_model(&g, &model, &det.t_basis)?;
            reference.push(compare_models(&model, &r, order)?);
        }
        built.push(model);
    }
    let sequence: Vec<f64> = built
        .windows(2)
        .map(|w| compare_models(&w[0], &w[1], order))
        .collect::<Result<_>>()?;
    let nonincreasing = round.then(|| reference.windows(2).all(|w| w[1] <= 1.05 * w[0]));
    let rep = CompareReport {
        order,
        radial_points: grid.radial_points,
        directions: built.first().map_or(0, |m| m.directions.len()),
        taus: taus.to_vec(),
        reference: round
            .then(|| format!("R^{} x S^{} (unit sphere)", det.s, lim.g_check_infty.len())),
        reference_distances: reference,
        sequence_distances: sequence,
        nonincreasing,
    };
    write_json(&out.join("models").join("compare.json"), &rep)?;
    Ok(serde_json::to_value(&rep)?)
}

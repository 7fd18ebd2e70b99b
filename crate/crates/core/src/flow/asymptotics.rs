use serde::Serialize;

use crate::geometry::f_functional;

use super::trajectory::FlowTrajectory;

/// Collapsed when `F` has dropped below this fraction of `F(-1)`.
pub const COLLAPSE_FACTOR: f64 = 0.05;
/// Noncollapsed when `F` changes by less than this per decade of `|t|`.
pub const CONVERGED_PER_DECADE: f64 = 1e-4;
/// Power-law branch: a clean fit of `log F` against `log |t|` with at most this
/// slope also counts as collapse.
const POWER_LAW_SLOPE: f64 = -0.1;
const POWER_LAW_RMS: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticClass {
    Collapsed,
    Noncollapsed,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct Asymptotics {
    pub class: AsymptoticClass,
    /// Fitted exponent of `F ~ |t|^p` over the last two decades.
    pub exponent: f64,
    pub fit_rms: f64,
    pub f_ratio: f64,
    pub change_per_decade: f64,
    pub f_end: f64,
}

fn inconclusive() -> Asymptotics {
    Asymptotics {
        class: AsymptoticClass::Inconclusive,
        exponent: f64::NAN,
        fit_rms: f64::NAN,
        f_ratio: f64::NAN,
        change_per_decade: f64::NAN,
        f_end: f64::NAN,
    }
}

/// Least squares `y = a + b x`; returns `(b, rms)`.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(u, v)| (v - a - b * u).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (b, rms)
}

pub fn classify_asymptotics(traj: &FlowTrajectory) -> Asymptotics {
    let (lo, _) = traj.coverage();
    if !(lo <= -1e3) {
        return inconclusive();
    }
    let f_ref = match traj.metric_at(-1.0).and_then(|g| f_functional(&g).ok()) {
        Some((_, f)) => f,
        None => return inconclusive(),
    };
    let tend = lo.abs();
    let pts: Vec<(f64, f64)> = traj
        .monitors
        .iter()
        .filter(|r| r.t < 0.0 && r.t.abs() >= tend / 100.0 && r.f > 0.0)
        .map(|r| (r.t.abs().ln(), r.f.ln()))
        .collect();
    if pts.len() < 3 {
        return inconclusive();
    }
    let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (slope, rms) = line_fit(&x, &y);
    let f_end = traj
        .monitors
        .iter()
        .find(|r| r.t == lo)
        .map(|r| r.f)
        .unwrap_or(f64::NAN);
    let ratio = f_end / f_ref;
    let per_decade = (slope * std::f64::consts::LN_10).abs();
    let class = if (ratio < COLLAPSE_FACTOR && slope < 0.0)
        || (slope <= POWER_LAW_SLOPE && rms <= POWER_LAW_RMS && ratio < 1.0)
    {
        AsymptoticClass::Collapsed
    } else if per_decade < CONVERGED_PER_DECADE && f_end > 0.0 {
        AsymptoticClass::Noncollapsed
    } else {
        AsymptoticClass::Inconclusive
    };
    Asymptotics {
        class,
        exponent: slope,
        fit_rms: rms,
        f_ratio: ratio,
        change_per_decade: per_decade,
        f_end,
    }
}

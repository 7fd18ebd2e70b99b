use crate::error::Result;

use super::dense::DenseSegment;
use super::tableau::{DenseKind, Tableau, CASH_KARP, DOPRI5, DOPRI5_D, RKF45};
use super::{
    Integrator, OdeSystem, SolveOptions, SolveStatus, SolveSummary, StepControl, StepInfo,
};

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Explicit embedded pair with standard step-size control.
pub struct EmbeddedRk {
    tab: &'static Tableau,
}

impl EmbeddedRk {
    pub fn dopri5() -> Self {
        Self { tab: &DOPRI5 }
    }

    pub fn cash_karp() -> Self {
        Self { tab: &CASH_KARP }
    }

    pub fn rkf45() -> Self {
        Self { tab: &RKF45 }
    }
}

fn err_norm(e: &[f64], y0: &[f64], y1: &[f64], opts: &SolveOptions) -> f64 {
    let n = e.len().max(1) as f64;
    let s: f64 = e
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(ei, (a, b))| {
            let sc = opts.atol + opts.rtol * a.abs().max(b.abs());
            (ei / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

fn initial_step(
    sys: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    dir: f64,
    opts: &SolveOptions,
) -> f64 {
    let n = y0.len();
    let norm = |v: &[f64]| -> f64 {
        let s: f64 = v
            .iter()
            .zip(y0)
            .map(|(x, y)| (x / (opts.atol + opts.rtol * y.abs())).powi(2))
            .sum();
        (s / n.max(1) as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(opts.max_step);
    let mut y1 = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    for _ in 0..40 {
        for i in 0..n {
            y1[i] = y0[i] + dir * h0 * f0[i];
        }
        if sys.admissible(t0 + dir * h0, &y1) && sys.rhs(t0 + dir * h0, &y1, &mut f1).is_ok() {
            break;
        }
        h0 *= 0.1;
    }
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(opts.max_step)
}

impl Integrator for EmbeddedRk {
    fn name(&self) -> &str {
        self.tab.name
    }

    fn order(&self) -> u32 {
        5
    }

    fn solve(
        &self,
        sys: &dyn OdeSystem,
        t0: f64,
        y0: &[f64],
        t1: f64,
        opts: &SolveOptions,
        observer: &mut dyn FnMut(&StepInfo) -> StepControl,
    ) -> Result<SolveSummary> {
        let tab = self.tab;
        let n = y0.len();
        let ns = tab.c.len();
        let dir = if t1 >= t0 { 1.0 } else { -1.0 };
        let mut t = t0;
        let mut y = y0.to_vec();
        let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; ns];
        sys.rhs(t, &y, &mut k[0])?;
        let mut h = opts
            .h0
            .unwrap_or_else(|| initial_step(sys, t0, y0, &k[0], dir, opts))
            .abs();
        let mut steps = 0;
        let mut rejected = 0;
        let mut last_rejected = false;
        let mut ytmp = vec![0.0; n];
        let mut ynew = vec![0.0; n];
        let mut errv = vec![0.0; n];

        let summary = |status, t, y: &Vec<f64>, steps, rejected| SolveSummary {
            status,
            t,
            y: y.clone(),
            steps,
            rejected,
        };

        loop {
            if (t1 - t) * dir <= 0.0 {
                return Ok(summary(SolveStatus::Finished, t, &y, steps, rejected));
            }
            if steps >= opts.max_steps {
                return Ok(summary(SolveStatus::MaxSteps, t, &y, steps, rejected));
            }
            let remaining = (t1 - t).abs();
            h = h.min(opts.max_step);
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            let hmin = 16.0 * f64::EPSILON * t.abs().max(1e-300);
            if h < hmin {
                return Ok(summary(SolveStatus::StepTooSmall, t, &y, steps, rejected));
            }
            let hs = dir * h;

            // stages
            let mut stage_ok = true;
            for s in 1..ns {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, aij) in tab.a[s].iter().enumerate() {
                        acc += aij * k[j][i];
                    }
                    ytmp[i] = y[i] + hs * acc;
                }
                let (head, tail) = k.split_at_mut(s);
                let _ = head;
                if sys.rhs(t + tab.c[s] * hs, &ytmp, &mut tail[0]).is_err() {
                    stage_ok = false;
                    break;
                }
            }
            if stage_ok {
                for i in 0..n {
                    let mut acc = 0.0;
                    let mut e = 0.0;
                    for s in 0..ns {
                        acc += tab.b[s] * k[s][i];
                        e += (tab.b[s] - tab.bhat[s]) * k[s][i];
                    }
                    ynew[i] = y[i] + hs * acc;
                    errv[i] = hs * e;
                }
            }
            let tnew = if last { t1 } else { t + hs };
            let finite = stage_ok && ynew.iter().all(|v| v.is_finite());
            if !finite || !sys.admissible(tnew, &ynew) {
                h *= 0.5;
                rejected += 1;
                last_rejected = true;
                continue;
            }
            let err = err_norm(&errv, &y, &ynew, opts);
            if !(err <= 1.0) {
                let fac = if err.is_finite() {
                    (SAFETY * err.powf(-0.2)).max(FAC_MIN)
                } else {
                    FAC_MIN
                };
                h *= fac;
                rejected += 1;
                last_rejected = true;
                continue;
            }

            // accepted
            let fnew = if tab.fsal {
                k[ns - 1].clone()
            } else {
                let mut f = vec![0.0; n];
                if sys.rhs(tnew, &ynew, &mut f).is_err() {
                    h *= 0.5;
                    rejected += 1;
                    last_rejected = true;
                    continue;
                }
                f
            };
            let dense = match tab.dense {
                DenseKind::Dopri => {
                    let mut r: [Vec<f64>; 5] = Default::default();
                    r[0] = y.clone();
                    r[1] = (0..n).map(|i| ynew[i] - y[i]).collect();
                    r[2] = (0..n).map(|i| hs * k[0][i] - r[1][i]).collect();
                    r[3] = (0..n).map(|i| r[1][i] - hs * fnew[i] - r[2][i]).collect();
                    r[4] = (0..n)
                        .map(|i| hs * (0..ns).map(|s| DOPRI5_D[s] * k[s][i]).sum::<f64>())
                        .collect();
                    DenseSegment::Dopri {
                        t0: t,
                        h: tnew - t,
                        r,
                    }
                }
                DenseKind::Hermite => DenseSegment::Hermite {
                    t0: t,
                    h: tnew - t,
                    y0: y.clone(),
                    y1: ynew.clone(),
                    f0: k[0].clone(),
                    f1: fnew.clone(),
                },
            };
            t = tnew;
            y.copy_from_slice(&ynew);
            k[0] = fnew;
            steps += 1;
            let ctl = observer(&StepInfo {
                t,
                y: &y,
                dense: &dense,
            });
            if ctl == StepControl::Stop {
                return Ok(summary(SolveStatus::Stopped, t, &y, steps, rejected));
            }
            let mut fac = (SAFETY * err.max(1e-10).powf(-0.2)).clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            h *= fac;
        }
    }
}

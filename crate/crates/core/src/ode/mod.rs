//! Adaptive embedded Runge-Kutta integrators behind a common trait, looked up
//! by name.

mod dense;
mod erk;
mod tableau;

pub use dense::DenseSegment;
pub use erk::EmbeddedRk;

use crate::error::{Error, Result};

pub trait OdeSystem: Sync {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
    /// States outside the domain make the integrator reject the step.
    fn admissible(&self, _t: f64, _y: &[f64]) -> bool {
        true
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
            h0: None,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepControl {
    Continue,
    Stop,
}

/// One accepted step, handed to the observer.
pub struct StepInfo<'a> {
    pub t: f64,
    pub y: &'a [f64],
    pub dense: &'a DenseSegment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Finished,
    Stopped,
    StepTooSmall,
    MaxSteps,
}

#[derive(Clone, Debug)]
pub struct SolveSummary {
    pub status: SolveStatus,
    pub t: f64,
    pub y: Vec<f64>,
    pub steps: usize,
    pub rejected: usize,
}

pub trait Integrator: Send + Sync {
    fn name(&self) -> &str;
    fn order(&self) -> u32;
    fn solve(
        &self,
        sys: &dyn OdeSystem,
        t0: f64,
        y0: &[f64],
        t1: f64,
        opts: &SolveOptions,
        observer: &mut dyn FnMut(&StepInfo) -> StepControl,
    ) -> Result<SolveSummary>;
}

pub struct IntegratorRegistry {
    entries: Vec<Box<dyn Integrator>>,
}

impl IntegratorRegistry {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(EmbeddedRk::dopri5()));
        r.register(Box::new(EmbeddedRk::cash_karp()));
        r.register(Box::new(EmbeddedRk::rkf45()));
        r
    }

    /// Later registrations shadow earlier ones with the same name.
    pub fn register(&mut self, integ: Box<dyn Integrator>) {
        self.entries.retain(|e| e.name() != integ.name());
        self.entries.push(integ);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Integrator> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::Unknown {
                kind: "integrator",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name()).collect()
    }
}

/// Solve without an observer and return the final state.
pub fn solve_to_end(
    integ: &dyn Integrator,
    sys: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    t1: f64,
    opts: &SolveOptions,
) -> Result<SolveSummary> {
    integ.solve(sys, t0, y0, t1, opts, &mut |_| StepControl::Continue)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Harmonic;
    impl OdeSystem for Harmonic {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        }
    }

    struct Decay;
    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = -2.0 * t * y[0];
            Ok(())
        }
    }

    #[test]
    fn registry_lookup() {
        let r = IntegratorRegistry::builtin();
        assert_eq!(r.names(), vec!["dopri5", "cash-karp", "rkf45"]);
        assert!(r.get("dopri5").is_ok());
        assert!(matches!(r.get("euler"), Err(Error::Unknown { .. })));
    }

    #[test]
    fn all_methods_hit_harmonic_solution() {
        let r = IntegratorRegistry::builtin();
        for name in r.names() {
            let s = solve_to_end(
                r.get(name).unwrap(),
                &Harmonic,
                0.0,
                &[1.0, 0.0],
                10.0,
                &SolveOptions::default(),
            )
            .unwrap();
            assert_eq!(s.status, SolveStatus::Finished);
            assert!((s.y[0] - 10f64.cos()).abs() < 1e-8, "{name}");
            assert!((s.y[1] + 10f64.sin()).abs() < 1e-8, "{name}");
        }
    }

    #[test]
    fn backward_and_dense_output() {
        let r = IntegratorRegistry::builtin();
        for name in r.names() {
            let mut worst = 0.0_f64;
            let opts = SolveOptions {
                rtol: 1e-9,
                atol: 1e-12,
                ..Default::default()
            };
            r.get(name)
                .unwrap()
                .solve(&Decay, 1.5, &[(-2.25f64).exp()], -1.0, &opts, &mut |st| {
                    let (a, b) = st.dense.span();
                    for k in 0..=4 {
                        let t = a + (b - a) * k as f64 / 4.0;
                        let y = st.dense.eval(t);
                        worst = worst.max((y[0] - (-t * t).exp()).abs());
                    }
                    StepControl::Continue
                })
                .unwrap();
            // the Hermite extension of the non-FSAL pairs is only cubic
            let tol = if name == "dopri5" { 1e-8 } else { 1e-5 };
            assert!(worst < tol, "{name}: dense error {worst:e}");
        }
    }

    #[test]
    fn observer_can_stop() {
        let r = IntegratorRegistry::builtin();
        let mut n = 0;
        let s = r
            .get("dopri5")
            .unwrap()
            .solve(
                &Harmonic,
                0.0,
                &[1.0, 0.0],
                100.0,
                &SolveOptions::default(),
                &mut |_| {
                    n += 1;
                    if n == 3 {
                        StepControl::Stop
                    } else {
                        StepControl::Continue
                    }
                },
            )
            .unwrap();
        assert_eq!(s.status, SolveStatus::Stopped);
        assert_eq!(s.steps, 3);
    }
}

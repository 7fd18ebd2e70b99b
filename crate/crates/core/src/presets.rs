//! Built-in scenarios, looked up by name.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::scenario::{
    AlgebraBlock, BlowdownBlock, FlowBlock, IsotropyBlock, ModelBlock, OutputsBlock, QSpec,
    SampleTimes, Scenario,
};

pub trait Preset: Send + Sync {
    fn name(&self) -> &'static str;
    /// File name (without extension) used by `presets --export`.
    fn file_stem(&self) -> &'static str {
        self.name()
    }
    fn scenario(&self) -> Scenario;
}

fn su2_structure() -> Vec<(usize, usize, usize, f64)> {
    vec![(0, 1, 2, 1.0), (0, 2, 1, -1.0), (1, 2, 0, 1.0)]
}

fn su2_block() -> AlgebraBlock {
    AlgebraBlock {
        dim: 3,
        labels: None,
        structure: su2_structure(),
        q: QSpec::Named("identity".into()),
        h_basis: vec![],
    }
}

fn diag(d: &[f64]) -> Vec<Vec<f64>> {
    (0..d.len())
        .map(|i| {
            (0..d.len())
                .map(|j| if i == j { d[i] } else { 0.0 })
                .collect()
        })
        .collect()
}

fn backward(t_end: f64) -> FlowBlock {
    FlowBlock {
        t0: -1.0,
        t_backward: Some(t_end),
        t_forward: None,
        rtol: 1e-10,
        atol: 1e-12,
        sample_times: SampleTimes::Log {
            from: 1.0,
            to: -t_end,
            per_decade: 10,
        },
        method: "dopri5".into(),
    }
}

fn outputs(name: &str) -> OutputsBlock {
    OutputsBlock {
        directory: format!("out/{name}"),
        formats: vec!["csv".into(), "json".into()],
    }
}

fn model(taus: &[f64]) -> Option<ModelBlock> {
    Some(ModelBlock {
        radial_points: 40,
        directions: None,
        order: 0,
        taus: taus.to_vec(),
    })
}

fn blowdown(taus: &[f64]) -> Option<BlowdownBlock> {
    Some(BlowdownBlock {
        taus: taus.to_vec(),
        t_eval: -1.0,
        defect_samples: 24,
    })
}

pub struct RoundS3;
pub struct BergerS3;
pub struct GenericS3;
pub struct S2xS1;
pub struct FlatT3;

impl Preset for RoundS3 {
    fn name(&self) -> &'static str {
        "round_s3"
    }
    fn scenario(&self) -> Scenario {
        Scenario {
            name: self.name().into(),
            description: "Round SU(2), the shrinking sphere g(t) = -t I.".into(),
            algebra: su2_block(),
            isotropy: IsotropyBlock {
                diam_q: Some(2.0 * PI),
            },
            initial_metric: diag(&[1.0, 1.0, 1.0]),
            flow: backward(-1e4),
            blowdown: blowdown(&[1e2, 1e3, 1e4]),
            model: model(&[1e2, 1e4]),
            outputs: outputs(self.name()),
        }
    }
}

impl Preset for BergerS3 {
    fn name(&self) -> &'static str {
        "berger_s3"
    }
    fn file_stem(&self) -> &'static str {
        "berger"
    }
    fn scenario(&self) -> Scenario {
        Scenario {
            name: self.name().into(),
            description:
                "Berger sphere diag(0.9, 1, 1) at t = -1; the Hopf circle collapses backwards."
                    .into(),
            algebra: su2_block(),
            isotropy: IsotropyBlock {
                diam_q: Some(2.0 * PI),
            },
            initial_metric: diag(&[0.9, 1.0, 1.0]),
            flow: backward(-1e8),
            blowdown: blowdown(&[1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8]),
            model: model(&[1e2, 1e3, 1e4]),
            outputs: outputs(self.name()),
        }
    }
}

impl Preset for GenericS3 {
    fn name(&self) -> &'static str {
        "generic_s3"
    }
    fn scenario(&self) -> Scenario {
        Scenario {
            name: self.name().into(),
            description:
                "Three distinct eigenvalues on SU(2), run forward into the extinction singularity."
                    .into(),
            algebra: su2_block(),
            isotropy: IsotropyBlock {
                diam_q: Some(2.0 * PI),
            },
            initial_metric: diag(&[0.8, 1.0, 1.25]),
            flow: FlowBlock {
                t0: 0.0,
                t_backward: None,
                t_forward: Some(2.0),
                rtol: 1e-10,
                atol: 1e-12,
                sample_times: SampleTimes::List((1..=40).map(|k| k as f64 * 0.05).collect()),
                method: "dopri5".into(),
            },
            blowdown: None,
            model: None,
            outputs: outputs(self.name()),
        }
    }
}

impl Preset for S2xS1 {
    fn name(&self) -> &'static str {
        "s2_x_s1"
    }
    fn scenario(&self) -> Scenario {
        let mut structure = su2_structure();
        structure.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        Scenario {
            name: self.name().into(),
            description:
                "(SU(2) x U(1)) / U(1) = S2 x S1 with a shrinking sphere and a fixed circle.".into(),
            algebra: AlgebraBlock {
                dim: 4,
                labels: None,
                structure,
                q: QSpec::Named("identity".into()),
                h_basis: vec![vec![0.0, 0.0, 1.0, 0.0]],
            },
            isotropy: IsotropyBlock {
                diam_q: Some(PI * 2f64.sqrt()),
            },
            initial_metric: diag(&[2.0, 2.0, 1.0]),
            flow: backward(-1e4),
            blowdown: blowdown(&[1e2, 1e3, 1e4]),
            model: model(&[1e2, 1e4]),
            outputs: outputs(self.name()),
        }
    }
}

impl Preset for FlatT3 {
    fn name(&self) -> &'static str {
        "flat_t3"
    }
    fn scenario(&self) -> Scenario {
        Scenario {
            name: self.name().into(),
            description: "Flat three-torus; the flow is static.".into(),
            algebra: AlgebraBlock {
                dim: 3,
                labels: None,
                structure: vec![],
                q: QSpec::Named("identity".into()),
                h_basis: vec![],
            },
            isotropy: IsotropyBlock {
                diam_q: Some(PI * 3f64.sqrt()),
            },
            initial_metric: diag(&[1.0, 2.0, 3.0]),
            flow: backward(-1e4),
            blowdown: blowdown(&[1e2, 1e3, 1e4]),
            model: model(&[1e2]),
            outputs: outputs(self.name()),
        }
    }
}

pub struct PresetRegistry {
    entries: Vec<Box<dyn Preset>>,
}

impl PresetRegistry {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(RoundS3));
        r.register(Box::new(BergerS3));
        r.register(Box::new(GenericS3));
        r.register(Box::new(S2xS1));
        r.register(Box::new(FlatT3));
        r
    }

    pub fn register(&mut self, p: Box<dyn Preset>) {
        self.entries.retain(|e| e.name() != p.name());
        self.entries.push(p);
    }

    /// Lookup by name or by file stem.
    pub fn get(&self, name: &str) -> Result<&dyn Preset> {
        self.entries
            .iter()
            .find(|e| e.name() == name || e.file_stem() == name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::Unknown {
                kind: "preset",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Preset> {
        self.entries.iter().map(|b| b.as_ref())
    }
}

pub fn list_presets() -> Vec<&'static str> {
    PresetRegistry::builtin().names()
}

//! Scenario files: one JSON document describing the space, the initial metric
//! and what to run.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowControls;
use crate::geometry::InvariantMetric;
use crate::lie::{reductive_split, HomogeneousSpaceData, LieAlgebraData, ValidationReport};
use crate::linalg::Mat;
use crate::model::GridSpec;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum QSpec {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AlgebraBlock {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    /// `[i, j, k, value]` with `i < j`, meaning `[e_i, e_j]` has `value` along `e_k`.
    pub structure: Vec<(usize, usize, usize, f64)>,
    #[serde(rename = "Q")]
    pub q: QSpec,
    #[serde(default)]
    pub h_basis: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct IsotropyBlock {
    /// Diameter of the space with the metric induced by Q.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diam_q: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SampleTimes {
    List(Vec<f64>),
    /// `per_decade` log-spaced times between `-from` and `-to` (or `+` for forward runs).
    Log {
        from: f64,
        to: f64,
        per_decade: usize,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FlowBlock {
    pub t0: f64,
    /// End time of a backward run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_backward: Option<f64>,
    /// End time of a forward run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_forward: Option<f64>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_samples")]
    pub sample_times: SampleTimes,
    #[serde(default = "default_method")]
    pub method: String,
}

fn default_rtol() -> f64 {
    1e-10
}
fn default_atol() -> f64 {
    1e-12
}
fn default_samples() -> SampleTimes {
    SampleTimes::List(Vec::new())
}
fn default_method() -> String {
    "dopri5".into()
}
fn default_t_eval() -> f64 {
    -1.0
}
fn default_defect_samples() -> usize {
    24
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BlowdownBlock {
    pub taus: Vec<f64>,
    #[serde(default = "default_t_eval")]
    pub t_eval: f64,
    /// Distance pairs per blow-down used for the measured defects.
    #[serde(default = "default_defect_samples")]
    pub defect_samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModelBlock {
    #[serde(default = "default_radial")]
    pub radial_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    #[serde(default)]
    pub order: usize,
    /// Blow-down parameters at which models are built; empty uses the blow-down taus.
    #[serde(default)]
    pub taus: Vec<f64>,
}

impl Default for ModelBlock {
    fn default() -> Self {
        ModelBlock {
            radial_points: default_radial(),
            directions: None,
            order: 0,
            taus: vec![],
        }
    }
}

fn default_radial() -> usize {
    40
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OutputsBlock {
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_formats() -> Vec<String> {
    vec!["csv".into(), "json".into()]
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub algebra: AlgebraBlock,
    #[serde(default)]
    pub isotropy: IsotropyBlock,
    /// In the Q-orthonormal basis of m.
    pub initial_metric: Vec<Vec<f64>>,
    pub flow: FlowBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowdown: Option<BlowdownBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelBlock>,
    pub outputs: OutputsBlock,
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<Mat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Shape(format!("{what} must be a square matrix")));
    }
    Ok(Mat::from_fn(n, n, |i, j| rows[i][j]))
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(text)?;
        sc.check()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Structural checks that need no linear algebra.
    pub fn check(&self) -> Result<()> {
        match (self.flow.t_backward, self.flow.t_forward) {
            (Some(t), None) if t < self.flow.t0 => {}
            (None, Some(t)) if t > self.flow.t0 => {}
            _ => {
                return Err(Error::Config(
                    "flow needs exactly one of t_backward (< t0) or t_forward (> t0)".into(),
                ))
            }
        }
        if let Some(b) = &self.blowdown {
            if b.taus.windows(2).any(|w| w[0] >= w[1]) || b.taus.iter().any(|&t| !(t > 0.0)) {
                return Err(Error::Config(
                    "blowdown taus must be positive and increasing".into(),
                ));
            }
            if !(b.t_eval < 0.0) {
                return Err(Error::Config("blowdown t_eval must be negative".into()));
            }
        }
        if let Some(m) = &self.model {
            if m.order > 2 {
                return Err(Error::Config("model order must be 0, 1 or 2".into()));
            }
        }
        let h = self.algebra.h_basis.len();
        if self.initial_metric.len() + h != self.algebra.dim {
            return Err(Error::Shape(format!(
                "initial metric is {}x{}, expected {} for dim {} with {h} isotropy vectors",
                self.initial_metric.len(),
                self.initial_metric.len(),
                self.algebra.dim - h.min(self.algebra.dim),
                self.algebra.dim
            )));
        }
        Ok(())
    }

    pub fn algebra(&self) -> Result<LieAlgebraData> {
        let a = &self.algebra;
        let q = match &a.q {
            QSpec::Named(s) if s == "identity" => None,
            QSpec::Named(s) => return Err(Error::Config(format!("unknown Q \"{s}\""))),
            QSpec::Matrix(rows) => Some(matrix(rows, "Q")?),
        };
        let entries: Vec<(usize, usize, usize, f64)> = a.structure.clone();
        LieAlgebraData::from_sparse(a.dim, a.labels.clone(), &entries, q)
    }

    pub fn validation(&self) -> Result<ValidationReport> {
        Ok(self.algebra()?.validate())
    }

    pub fn space(&self) -> Result<Arc<HomogeneousSpaceData>> {
        let alg = self.algebra()?;
        let n = alg.dim;
        let mut h = Mat::zeros(n, self.algebra.h_basis.len());
        for (c, v) in self.algebra.h_basis.iter().enumerate() {
            if v.len() != n {
                return Err(Error::Shape(format!(
                    "h_basis vector {c} has {} entries, expected {n}",
                    v.len()
                )));
            }
            for (i, x) in v.iter().enumerate() {
                h[(i, c)] = *x;
            }
        }
        Ok(Arc::new(reductive_split(&alg, &h, self.isotropy.diam_q)?))
    }

    pub fn initial(&self) -> Result<InvariantMetric> {
        InvariantMetric::new(
            matrix(&self.initial_metric, "initial_metric")?,
            self.space()?,
        )
    }

    pub fn t_end(&self) -> f64 {
        self.flow
            .t_backward
            .or(self.flow.t_forward)
            .unwrap_or(self.flow.t0)
    }

    pub fn is_backward(&self) -> bool {
        self.flow.t_backward.is_some()
    }

    pub fn sample_times(&self) -> Vec<f64> {
        match &self.flow.sample_times {
            SampleTimes::List(v) => v.clone(),
            SampleTimes::Log {
                from,
                to,
                per_decade,
            } => {
                let sign = if self.is_backward() { -1.0 } else { 1.0 };
                let (lo, hi) = (from.abs().log10(), to.abs().log10());
                let n = ((hi - lo) * *per_decade as f64).round().max(0.0) as usize;
                (0..=n)
                    .map(|k| sign * 10f64.powf(lo + (hi - lo) * k as f64 / n.max(1) as f64))
                    .collect()
            }
        }
    }

    pub fn controls(&self) -> FlowControls {
        FlowControls {
            rtol: self.flow.rtol,
            atol: self.flow.atol,
            sample_times: self.sample_times(),
            method: self.flow.method.clone(),
            ..Default::default()
        }
    }

    pub fn grid(&self) -> GridSpec {
        let m = self.model.clone().unwrap_or_default();
        GridSpec {
            radial_points: m.radial_points,
            directions: m.directions,
            ..Default::default()
        }
    }

    pub fn to_json(&self) -> String {
        crate::report::to_json_string(self).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"{
        "name": "tiny",
        "algebra": {"dim": 3, "structure": [[0,1,2,1.0],[1,2,0,1.0],[0,2,1,-1.0]], "Q": "identity", "h_basis": []},
        "initial_metric": [[1,0,0],[0,1,0],[0,0,1]],
        "flow": {"t0": -1, "t_backward": -10, "sample_times": {"from": 1, "to": 10, "per_decade": 4}},
        "outputs": {"directory": "out"}
    }"#;

    #[test]
    fn parse_and_build() {
        let sc = Scenario::from_json(TEXT).unwrap();
        assert!(sc.validation().unwrap().pass);
        let g = sc.initial().unwrap();
        assert_eq!(g.dim(), 3);
        let st = sc.sample_times();
        assert_eq!(st.len(), 5);
        assert!((st[4] + 10.0).abs() < 1e-12);
        let back = Scenario::from_json(&sc.to_json()).unwrap();
        assert_eq!(back, sc);
    }

    #[test]
    fn rejects_bad_blocks() {
        let bad = TEXT.replace("\"t_backward\": -10", "\"t_backward\": 5");
        assert!(matches!(Scenario::from_json(&bad), Err(Error::Config(_))));
        let bad = TEXT.replace("[[1,0,0],[0,1,0],[0,0,1]]", "[[1,0],[0,1]]");
        assert!(matches!(Scenario::from_json(&bad), Err(Error::Shape(_))));
    }
}

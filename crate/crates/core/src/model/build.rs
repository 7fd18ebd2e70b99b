//! Geometric models: the metric pulled back by `exp` to the tangent ball of
//! radius close to pi, after scaling to `max |sec| = 1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{curvature_package, InvariantMetric};
use crate::linalg::{spd_inv_sqrt, sym, Mat, Vec_};
use crate::ode::{EmbeddedRk, Integrator, SolveOptions, SolveStatus, StepControl};

use super::systems::{FrameData, JacobiSystem};

pub const MODEL_RADIUS: f64 = std::f64::consts::PI - 0.05;
pub const DIRECTION_SEED: u64 = 0x5EED;
/// Below this the metric is treated as flat and left unscaled.
const FLAT_SEC: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub radial_points: usize,
    /// `None` picks a default for the dimension.
    pub directions: Option<usize>,
    pub max_radius: f64,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            radial_points: 40,
            directions: None,
            max_radius: MODEL_RADIUS,
            seed: DIRECTION_SEED,
        }
    }
}

impl GridSpec {
    pub fn direction_count(&self, m: usize) -> usize {
        self.directions.unwrap_or(match m {
            1 => 2,
            2 => 32,
            3 => 60,
            _ => 120,
        })
    }

    /// Chebyshev nodes of `(0, max_radius]`, clustered at both ends.
    pub fn radii(&self) -> Vec<f64> {
        let n = self.radial_points;
        let r = self.max_radius;
        (1..=n)
            .map(|j| {
                let th = (2 * j - 1) as f64 * std::f64::consts::PI / (2 * n) as f64;
                0.5 * r * (1.0 - th.cos())
            })
            .collect()
    }

    pub fn unit_directions(&self, m: usize) -> Vec<Vec_> {
        let count = self.direction_count(m);
        match m {
            0 => Vec::new(),
            1 => vec![Vec_::from_element(1, 1.0), Vec_::from_element(1, -1.0)],
            2 => (0..count)
                .map(|k| {
                    let a = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                    Vec_::from_vec(vec![a.cos(), a.sin()])
                })
                .collect(),
            3 => {
                let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
                (0..count)
                    .map(|k| {
                        let z = 1.0 - (2 * k + 1) as f64 / count as f64;
                        let rho = (1.0 - z * z).sqrt();
                        let a = golden * k as f64;
                        Vec_::from_vec(vec![rho * a.cos(), rho * a.sin(), z])
                    })
                    .collect()
            }
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                (0..count)
                    .map(|_| {
                        let v = Vec_::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
                        v.normalize()
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeometricModel {
    pub dim: usize,
    pub grid: GridSpec,
    pub radii: Vec<f64>,
    pub directions: Vec<Vec_>,
    /// `metric_field[d * radii.len() + j]` at `radii[j] * directions[d]`.
    pub metric_field: Vec<Mat>,
    /// Factor applied to the metric before building.
    pub normalization: f64,
    /// Columns of the g'-orthonormal frame at the origin, in m-coordinates.
    pub origin_frame: Mat,
    /// Largest radius reached along every direction.
    pub reach: f64,
    pub gauss_defect: f64,
    pub origin_defect: f64,
}

impl GeometricModel {
    pub fn at(&self, d: usize, j: usize) -> &Mat {
        &self.metric_field[d * self.radii.len() + j]
    }

    /// Build a model from a closed-form metric field in normal coordinates.
    pub fn from_fn(
        dim: usize,
        grid: &GridSpec,
        normalization: f64,
        f: impl Fn(&Vec_) -> Mat,
    ) -> Self {
        let radii = grid.radii();
        let directions = grid.unit_directions(dim);
        let mut field = Vec::with_capacity(radii.len() * directions.len());
        for u in &directions {
            for &r in &radii {
                field.push(f(&(u * r)));
            }
        }
        let mut model = Self {
            dim,
            grid: grid.clone(),
            reach: grid.max_radius,
            radii,
            directions,
            metric_field: field,
            normalization,
            origin_frame: Mat::identity(dim, dim),
            gauss_defect: 0.0,
            origin_defect: 0.0,
        };
        model.post_check();
        model
    }

    fn post_check(&mut self) {
        let nr = self.radii.len();
        let mut gauss = 0.0_f64;
        let mut origin = 0.0_f64;
        for (d, u) in self.directions.iter().enumerate() {
            for j in 0..nr {
                if self.radii[j] > self.reach {
                    continue;
                }
                let gm = self.at(d, j);
                gauss = gauss.max((gm * u - u).amax());
                if j == 0 {
                    let dev = gm - Mat::identity(self.dim, self.dim);
                    origin = origin.max(dev.amax());
                }
            }
        }
        self.gauss_defect = gauss;
        self.origin_defect = origin;
    }

    pub fn dump(&self) -> ModelDump {
        ModelDump {
            dim: self.dim,
            radial_points: self.radii.len(),
            direction_count: self.directions.len(),
            max_radius: self.grid.max_radius,
            normalization: self.normalization,
            seed: self.grid.seed,
            reach: self.reach,
            gauss_defect: self.gauss_defect,
            origin_defect: self.origin_defect,
            radii: self.radii.clone(),
            directions: self
                .directions
                .iter()
                .map(|u| u.iter().cloned().collect())
                .collect(),
            metric: self
                .metric_field
                .iter()
                .map(|g| g.transpose().iter().cloned().collect())
                .collect(),
        }
    }
}

/// Serialized form: header, then each node's metric flattened row by row.
#[derive(Clone, Debug, Serialize)]
pub struct ModelDump {
    pub dim: usize,
    pub radial_points: usize,
    pub direction_count: usize,
    pub max_radius: f64,
    pub normalization: f64,
    pub seed: u64,
    pub reach: f64,
    pub gauss_defect: f64,
    pub origin_defect: f64,
    pub radii: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    pub metric: Vec<Vec<f64>>,
}

/// `max(|sec_min|, |sec_max|)`, or 1 for flat metrics.
pub fn normalization_factor(g: &InvariantMetric) -> Result<f64> {
    let pkg = curvature_package(g)?;
    let k = pkg.sec.sec_min.abs().max(pkg.sec.sec_max.abs());
    Ok(if k < FLAT_SEC { 1.0 } else { k })
}

pub fn build_model(g: &InvariantMetric, grid: &GridSpec) -> Result<GeometricModel> {
    let m = g.dim();
    if m == 0 {
        return Err(Error::Shape("cannot model a point".into()));
    }
    let kappa = normalization_factor(g)?;
    let gn = g.scaled(kappa);
    let frame = spd_inv_sqrt(&gn.g)?;
    let radii = grid.radii();
    let directions = grid.unit_directions(m);
    let sys = JacobiSystem {
        frame: FrameData::new(&gn)?,
    };
    let integ = EmbeddedRk::dopri5();
    let opts = SolveOptions {
        rtol: 1e-10,
        atol: 1e-12,
        ..Default::default()
    };

    let rows: Vec<(Vec<Mat>, f64)> = directions
        .par_iter()
        .map(|u| -> Result<(Vec<Mat>, f64)> {
            let w0 = &frame * u;
            let y0 = sys.initial_state(&w0, &frame);
            let mut out: Vec<Mat> = Vec::with_capacity(radii.len());
            let mut next = 0;
            let node = |y: &[f64], r: f64| -> Mat {
                let b = Mat::from_columns(&(0..m).map(|i| sys.field(y, i)).collect::<Vec<_>>());
                sym(&(b.transpose() * &gn.g * b)) / (r * r)
            };
            let last = *radii.last().unwrap();
            let sum = integ.solve(&sys, 0.0, &y0, last, &opts, &mut |info| {
                while next < radii.len() && radii[next] <= info.t {
                    let y = if radii[next] == info.t {
                        info.y.to_vec()
                    } else {
                        info.dense.eval(radii[next])
                    };
                    out.push(node(&y, radii[next]));
                    next += 1;
                }
                StepControl::Continue
            })?;
            let reach = if sum.status == SolveStatus::Finished {
                grid.max_radius
            } else {
                sum.t
            };
            // unreachable nodes are filled with NaN and excluded from comparisons
            while out.len() < radii.len() {
                out.push(Mat::from_element(m, m, f64::NAN));
            }
            Ok((out, reach))
        })
        .collect::<Result<_>>()?;

    let reach = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let metric_field = rows.into_iter().flat_map(|r| r.0).collect();
    let mut model = GeometricModel {
        dim: m,
        grid: grid.clone(),
        radii,
        directions,
        metric_field,
        normalization: kappa,
        origin_frame: frame,
        reach,
        gauss_defect: 0.0,
        origin_defect: 0.0,
    };
    model.post_check();
    Ok(model)
}

/// Normal-coordinate metric of the unit sphere of dimension `k >= 1` at `y`.
fn sphere_normal_form(y: &Vec_) -> Mat {
    let k = y.len();
    let r = y.norm();
    if r < 1e-300 {
        return Mat::identity(k, k);
    }
    let yh = y / r;
    let radial = &yh * yh.transpose();
    let ratio = if r < 1e-4 {
        1.0 - r * r / 3.0
    } else {
        (r.sin() / r).powi(2)
    };
    &radial + (Mat::identity(k, k) - &radial) * ratio
}

/// Model of `R^s x S^(m-s)` with the unit round sphere; `flat` holds
/// orthonormal columns spanning the Euclidean factor in normal coordinates.
pub fn product_model(dim: usize, flat: &Mat, grid: &GridSpec) -> Result<GeometricModel> {
    if flat.nrows() != dim {
        return Err(Error::Shape(
            "flat subspace has the wrong ambient dimension".into(),
        ));
    }
    let s = flat.ncols();
    let pf = flat * flat.transpose();
    if (flat.transpose() * flat - Mat::identity(s, s)).amax() > 1e-12 {
        return Err(Error::Shape(
            "flat subspace basis must be orthonormal".into(),
        ));
    }
    let comp = crate::linalg::orthogonal_complement(flat, dim);
    Ok(GeometricModel::from_fn(dim, grid, 1.0, |x| {
        let y = comp.transpose() * x;
        let sph = sphere_normal_form(&y);
        &pf + &comp * sph * comp.transpose()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{reductive_split, LieAlgebraData};
    use std::sync::Arc;

    fn metric(alg: LieAlgebraData, h: Mat, g: Mat) -> InvariantMetric {
        let s = Arc::new(reductive_split(&alg, &h, None).unwrap());
        InvariantMetric::new(g, s).unwrap()
    }

    fn small() -> GridSpec {
        GridSpec {
            radial_points: 12,
            directions: Some(14),
            ..Default::default()
        }
    }

    #[test]
    fn round_model_is_unit_sphere() {
        let g = metric(LieAlgebraData::su2(), Mat::zeros(3, 0), Mat::identity(3, 3));
        let model = build_model(&g, &small()).unwrap();
        assert!((model.normalization - 0.25).abs() < 1e-12);
        let mut err = 0.0_f64;
        for (d, u) in model.directions.iter().enumerate() {
            for (j, &r) in model.radii.iter().enumerate() {
                err = err.max((model.at(d, j) - sphere_normal_form(&(u * r))).amax());
            }
        }
        assert!(err < 1e-8, "{err}");
        assert!(model.gauss_defect < 1e-8);
        let r0 = model.radii[0];
        assert!(model.origin_defect < r0 * r0 / 2.0);
        assert!(GridSpec::default().radii()[0].powi(2) / 3.0 < 1e-6);
    }

    #[test]
    fn flat_model_is_euclidean() {
        let gm = Mat::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 4.0]);
        let g = metric(LieAlgebraData::abelian(3), Mat::zeros(3, 0), gm);
        let model = build_model(&g, &small()).unwrap();
        assert_eq!(model.normalization, 1.0);
        let err = model
            .metric_field
            .iter()
            .map(|x| (x - Mat::identity(3, 3)).amax())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn product_metric_matches_product_model() {
        let h = Mat::from_column_slice(4, 1, &[0.0, 0.0, 1.0, 0.0]);
        let g = metric(
            LieAlgebraData::su2_plus_u1(),
            h,
            Mat::from_diagonal(&Vec_::from_vec(vec![2.0, 2.0, 0.7])),
        );
        let grid = small();
        let model = build_model(&g, &grid).unwrap();
        let sp = &g.space;
        // the central direction in m-coordinates
        let t = Vec_::from_fn(3, |i, _| sp.m_basis[(3, i)]);
        let flat =
            (crate::linalg::spd_sqrt(&g.scaled(model.normalization).g).unwrap() * t).normalize();
        let prod = product_model(3, &Mat::from_columns(&[flat]), &grid).unwrap();
        let err = model
            .metric_field
            .iter()
            .zip(&prod.metric_field)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn direction_sets_are_unit_and_deterministic() {
        let grid = GridSpec::default();
        for m in 1..=4 {
            let a = grid.unit_directions(m);
            let b = grid.unit_directions(m);
            assert_eq!(a, b);
            assert!(a.iter().all(|u| (u.norm() - 1.0).abs() < 1e-14));
        }
        assert_eq!(grid.unit_directions(3).len(), 60);
        assert_eq!(grid.unit_directions(4).len(), 120);
        let r = grid.radii();
        assert_eq!(r.len(), 40);
        assert!(r.windows(2).all(|w| w[0] < w[1]) && *r.last().unwrap() <= MODEL_RADIUS);
    }
}

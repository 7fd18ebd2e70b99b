//! Geodesics, Jacobi fields and chart tracking in the left-trivialized frame.
//!
//! A curve `sigma(r) o` with `sigma^-1 sigma' = w(r)` in m is a geodesic iff
//! `w' = -U(w, w)`. Variations are carried by `beta = sigma^-1 d_s sigma`, whose
//! m-part is the Jacobi field seen from the origin.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{connection_map, InvariantMetric};
use crate::lie::HomogeneousSpaceData;
use crate::linalg::{Mat, Vec_};
use crate::ode::OdeSystem;

use super::chart::dexp_left;

/// Bilinear data shared by the systems below.
pub struct FrameData {
    pub space: Arc<HomogeneousSpaceData>,
    pub m: usize,
    pub h: usize,
    u: Vec<f64>,
}

impl FrameData {
    pub fn new(g: &InvariantMetric) -> Result<Self> {
        let conn = connection_map(g)?;
        Ok(Self {
            space: g.space.clone(),
            m: g.dim(),
            h: g.space.hdim(),
            u: conn.u,
        })
    }

    #[inline]
    fn u_into(&self, x: &[f64], y: &[f64], out: &mut [f64], scale: f64) {
        let m = self.m;
        for i in 0..m {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                let w = x[i] * y[j] * scale;
                if w == 0.0 {
                    continue;
                }
                let base = (i * m + j) * m;
                for k in 0..m {
                    out[k] += w * self.u[base + k];
                }
            }
        }
    }
}

/// Geodesic from the origin together with the `m` Jacobi fields that vanish at
/// the origin and start with the given derivatives.
///
/// Layout: `w (m) | per field: eta (m), b_m (m), b_h (h)`.
pub struct JacobiSystem {
    pub frame: FrameData,
}

impl JacobiSystem {
    pub fn block(&self) -> usize {
        2 * self.frame.m + self.frame.h
    }

    pub fn initial_state(&self, w0: &Vec_, derivs: &Mat) -> Vec<f64> {
        let m = self.frame.m;
        let mut y = vec![0.0; m + derivs.ncols() * self.block()];
        y[..m].copy_from_slice(w0.as_slice());
        for i in 0..derivs.ncols() {
            let off = m + i * self.block();
            for k in 0..m {
                y[off + k] = derivs[(k, i)];
            }
        }
        y
    }

    /// `b_m` of field `i` from a state vector.
    pub fn field(&self, y: &[f64], i: usize) -> Vec_ {
        let m = self.frame.m;
        let off = m + i * self.block() + m;
        Vec_::from_column_slice(&y[off..off + m])
    }
}

impl OdeSystem for JacobiSystem {
    fn dim(&self) -> usize {
        self.frame.m + self.frame.m * self.block()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let f = &self.frame;
        let (m, h) = (f.m, f.h);
        let sp = &f.space;
        let w = &y[..m];
        dy.iter_mut().for_each(|v| *v = 0.0);
        {
            let (head, _) = dy.split_at_mut(m);
            f.u_into(w, w, head, -1.0);
        }
        let nf = (y.len() - m) / self.block();
        for i in 0..nf {
            let off = m + i * self.block();
            let eta = &y[off..off + m];
            let bm = &y[off + m..off + 2 * m];
            let bh = &y[off + 2 * m..off + 2 * m + h];
            let out = &mut dy[off..off + self.block()];
            f.u_into(w, eta, &mut out[..m], -2.0);
            for k in 0..m {
                out[m + k] = eta[k];
            }
            // -[w, b_m] split into m and h parts
            for a in 0..m {
                if w[a] == 0.0 {
                    continue;
                }
                for b in 0..m {
                    let c = w[a] * bm[b];
                    if c == 0.0 {
                        continue;
                    }
                    for k in 0..m {
                        out[m + k] -= c * sp.cm(a, b, k);
                    }
                    for al in 0..h {
                        out[2 * m + al] -= c * sp.ch(a, b, al);
                    }
                }
            }
            // -[w, b_h] = sum_a b_h[a] ad(h_a) w
            for al in 0..h {
                if bh[al] == 0.0 {
                    continue;
                }
                let iso = &sp.isotropy_maps[al];
                for k in 0..m {
                    let mut s = 0.0;
                    for b in 0..m {
                        s += iso[(k, b)] * w[b];
                    }
                    out[m + k] += bh[al] * s;
                }
            }
        }
        Ok(())
    }
}

/// Chart coordinates of a moving point `sigma(s) o`, written `sigma = exp(X) k`
/// with `k` in H; `kad = Ad(k)` on the adapted basis.
///
/// Given the left-trivialized velocity `v`, solves
/// `dexp_left(X) X' + z = Ad(k) v` with `X'` in m, `z` in h, and `Ad(k)' = ad(z) Ad(k)`.
pub fn chart_velocity(
    space: &HomogeneousSpaceData,
    x: &Vec_,
    kad: &Mat,
    v_adapted: &Vec_,
) -> Result<(Vec_, Mat)> {
    let (h, m, n) = (space.hdim(), space.mdim(), space.n());
    let psi = dexp_left(space, x)?;
    let mut a = Mat::zeros(n, n);
    for al in 0..h {
        a[(al, al)] = 1.0;
    }
    a.view_mut((0, h), (n, m))
        .copy_from(&psi.view((0, h), (n, m)));
    let rhs = kad * v_adapted;
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::LinearSolve("chart tracking hit a critical point of exp".into()))?;
    let xdot = sol.rows(h, m).into_owned();
    let mut zeta = Vec_::zeros(n);
    zeta.rows_mut(0, h).copy_from(&sol.rows(0, h));
    let kdot = space.ad_adapted(&zeta) * kad;
    Ok((xdot, kdot))
}

/// Geodesic from the origin with chart tracking: `w (m) | X (m) | Ad(k) (n*n)`.
pub struct TrackedGeodesic {
    pub frame: FrameData,
}

impl TrackedGeodesic {
    pub fn initial_state(&self, v: &Vec_) -> Vec<f64> {
        let (m, n) = (self.frame.m, self.frame.space.n());
        let mut y = vec![0.0; 2 * m + n * n];
        y[..m].copy_from_slice(v.as_slice());
        for i in 0..n {
            y[2 * m + i * n + i] = 1.0;
        }
        y
    }

    pub fn chart_point(&self, y: &[f64]) -> Vec_ {
        let m = self.frame.m;
        Vec_::from_column_slice(&y[m..2 * m])
    }
}

impl OdeSystem for TrackedGeodesic {
    fn dim(&self) -> usize {
        let n = self.frame.space.n();
        2 * self.frame.m + n * n
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let f = &self.frame;
        let m = f.m;
        let n = f.space.n();
        let w = &y[..m];
        dy.iter_mut().for_each(|v| *v = 0.0);
        f.u_into(w, w, &mut dy[..m], -1.0);
        let x = Vec_::from_column_slice(&y[m..2 * m]);
        let kad = Mat::from_row_slice(n, n, &y[2 * m..]);
        let v = f.space.m_to_adapted(&Vec_::from_column_slice(w));
        let (xdot, kdot) = chart_velocity(&f.space, &x, &kad, &v)?;
        dy[m..2 * m].copy_from_slice(xdot.as_slice());
        for i in 0..n {
            for j in 0..n {
                dy[2 * m + i * n + j] = kdot[(i, j)];
            }
        }
        Ok(())
    }
}

/// Chart tracking along `exp(s Z)` from a given chart state, `X (m) | Ad(k) (n*n)`.
pub struct TrackedOneParameter {
    pub space: Arc<HomogeneousSpaceData>,
    pub z_adapted: Vec_,
}

impl OdeSystem for TrackedOneParameter {
    fn dim(&self) -> usize {
        let n = self.space.n();
        self.space.mdim() + n * n
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let m = self.space.mdim();
        let n = self.space.n();
        let x = Vec_::from_column_slice(&y[..m]);
        let kad = Mat::from_row_slice(n, n, &y[m..]);
        let (xdot, kdot) = chart_velocity(&self.space, &x, &kad, &self.z_adapted)?;
        dy[..m].copy_from_slice(xdot.as_slice());
        for i in 0..n {
            for j in 0..n {
                dy[m + i * n + j] = kdot[(i, j)];
            }
        }
        Ok(())
    }
}

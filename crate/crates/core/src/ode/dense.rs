/// Continuous extension over one accepted step.
#[derive(Clone, Debug)]
pub enum DenseSegment {
    /// Fifth-order interpolant of the Dormand-Prince pair.
    Dopri { t0: f64, h: f64, r: [Vec<f64>; 5] },
    /// Cubic Hermite interpolant from end values and slopes.
    Hermite {
        t0: f64,
        h: f64,
        y0: Vec<f64>,
        y1: Vec<f64>,
        f0: Vec<f64>,
        f1: Vec<f64>,
    },
}

impl DenseSegment {
    fn th(&self) -> (f64, f64) {
        match self {
            DenseSegment::Dopri { t0, h, .. } | DenseSegment::Hermite { t0, h, .. } => (*t0, *h),
        }
    }

    /// `(min, max)` of the covered time interval.
    pub fn span(&self) -> (f64, f64) {
        let (t0, h) = self.th();
        let t1 = t0 + h;
        (t0.min(t1), t0.max(t1))
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = self.span();
        t >= a && t <= b
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        match self {
            DenseSegment::Dopri { t0, h, r } => {
                let s = (t - t0) / h;
                let s1 = 1.0 - s;
                (0..r[0].len())
                    .map(|i| {
                        r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])))
                    })
                    .collect()
            }
            DenseSegment::Hermite {
                t0,
                h,
                y0,
                y1,
                f0,
                f1,
            } => {
                let s = (t - t0) / h;
                let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
                let h10 = s * (1.0 - s) * (1.0 - s);
                let h01 = s * s * (3.0 - 2.0 * s);
                let h11 = s * s * (s - 1.0);
                (0..y0.len())
                    .map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
                    .collect()
            }
        }
    }
}

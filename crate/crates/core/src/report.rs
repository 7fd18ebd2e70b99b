//! Output formatting: JSON with 17 significant digits and the trajectory CSV.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Result;
use crate::flow::FlowTrajectory;
use crate::linalg::Mat;

/// Pretty JSON formatter printing every float as `d.dddddddddddddddde±x`;
/// non-finite values become `null`.
struct Sig17<'a>(PrettyFormatter<'a>);

fn float17<W: ?Sized + Write>(w: &mut W, v: f64) -> std::io::Result<()> {
    if v.is_finite() {
        write!(w, "{v:.16e}")
    } else {
        w.write_all(b"null")
    }
}

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        float17(w, v)
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> std::io::Result<()> {
        float17(w, v as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn rows(a: &Mat) -> Vec<Vec<f64>> {
    a.row_iter().map(|r| r.iter().cloned().collect()).collect()
}

fn csv_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// `t, g_11..g_mm (upper triangle, row-major), scal, Rm_norm, F, typeI_ratio,
/// diam_over_sqrt_t, min_eig`.
pub fn trajectory_csv(traj: &FlowTrajectory) -> String {
    let m = traj.space.mdim();
    let mut head = vec!["t".to_string()];
    for i in 0..m {
        for j in i..m {
            head.push(format!("g_{}{}", i + 1, j + 1));
        }
    }
    head.extend(
        [
            "scal",
            "Rm_norm",
            "F",
            "typeI_ratio",
            "diam_over_sqrt_t",
            "min_eig",
        ]
        .map(String::from),
    );
    let mut out = head.join(",");
    out.push('\n');
    for (g, mon) in traj.metrics.iter().zip(&traj.monitors) {
        let mut row = vec![csv_float(mon.t)];
        for i in 0..m {
            for j in i..m {
                row.push(csv_float(g.g[(i, j)]));
            }
        }
        for v in [
            mon.scal,
            mon.rm_norm,
            mon.f,
            mon.typei_ratio,
            mon.diam_over_sqrt_t,
            mon.min_eig,
        ] {
            row.push(csv_float(v));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

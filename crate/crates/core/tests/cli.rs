use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hrf_core::presets::PresetRegistry;
use hrf_core::scenario::Scenario;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hrf-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn presets_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn exported_presets_match_registry() {
    for p in PresetRegistry::builtin().iter() {
        let path = presets_dir().join(format!("{}.json", p.file_stem()));
        let on_disk = Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(
            on_disk,
            p.scenario(),
            "{} is stale; re-export with `hrf-lab presets --export presets`",
            path.display()
        );
    }
}

#[test]
fn presets_lists_names() {
    let out = run(&["presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert!(names.len() >= 5);
    for n in ["round_s3", "berger_s3", "generic_s3", "s2_x_s1", "flat_t3"] {
        assert!(names.contains(&n), "{n}");
    }
}

#[test]
fn help_documents_every_subcommand() {
    let out = run(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for c in [
        "validate",
        "flow",
        "blowdown",
        "model-compare",
        "soliton-verify",
        "run",
        "presets",
    ] {
        assert!(text.contains(c), "{c}");
    }
    assert!(text.contains("HRF_LAB_THREADS"));
}

#[test]
fn non_jacobi_scenario_exits_one_with_report_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let mut sc = PresetRegistry::builtin()
        .get("round_s3")
        .unwrap()
        .scenario();
    // [e1,e2] = e3, [e1,e3] = e1: the Jacobi sum is e3
    sc.algebra.structure = vec![(0, 1, 2, 1.0), (0, 2, 0, 1.0)];
    let path = dir.path().join("bad.json");
    std::fs::write(&path, sc.to_json()).unwrap();
    let out_dir = dir.path().join("out");
    for sub in ["validate", "run"] {
        let mut args = vec![sub, path.to_str().unwrap()];
        if sub == "run" {
            args.extend(["--out", out_dir.to_str().unwrap()]);
        }
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{sub}");
        let err: serde_json::Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
        let report = if sub == "validate" {
            &err
        } else {
            &err["validation"]
        };
        assert_eq!(report["pass"], false, "{sub}: {err}");
        assert!(report["jacobi"].as_f64().unwrap() > 1e-3);
    }
    assert_eq!(
        read_json(&out_dir.join("report.json"))["status"],
        "validation_failure"
    );
}

#[test]
fn unreadable_scenario_exits_one() {
    let out = run(&["flow", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generic_forward_run_reports_singularity() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["run", "generic_s3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let rep = read_json(&dir.path().join("report.json"));
    assert_eq!(rep["status"], "forward_singularity");
    let t_star = rep["t_star"].as_f64().unwrap();
    assert!(t_star > 0.0 && t_star < 2.0);
    assert!(dir.path().join("trajectory.csv").exists());
}

#[test]
fn round_run_has_constant_f() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["run", "round_s3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let fi = header.iter().position(|h| *h == "F").unwrap();
    for line in lines {
        let f: f64 = line.split(',').nth(fi).unwrap().parse().unwrap();
        assert!((f - 1.5).abs() < 1e-10, "{f}");
    }
    assert_eq!(read_json(&dir.path().join("blowdown.json"))["s"], 0);
    assert_eq!(
        read_json(&dir.path().join("report.json"))["asymptotics"]["class"],
        "noncollapsed"
    );
}

#[test]
fn model_compare_prints_one_number() {
    let out = run(&["model-compare", "s2_x_s1", "--tau", "1e2"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let v: f64 = text.trim().parse().unwrap();
    // the product preset is exactly self-similar
    assert!(v < 1e-6, "{v}");
}

#[test]
fn method_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "flow",
        "round_s3",
        "--method",
        "cash-karp",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        read_json(&dir.path().join("report.json"))["flow"]["method"],
        "cash-karp"
    );
    let out = run(&[
        "flow",
        "round_s3",
        "--method",
        "euler",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn smoke_matrix() {
    let subs = [
        "validate",
        "flow",
        "blowdown",
        "model-compare",
        "soliton-verify",
        "run",
    ];
    for p in PresetRegistry::builtin().iter() {
        let file = presets_dir().join(format!("{}.json", p.file_stem()));
        for sub in subs {
            let dir = tempfile::tempdir().unwrap();
            let mut args = vec![sub.to_string(), file.to_str().unwrap().to_string()];
            let writes = !matches!(sub, "validate" | "model-compare");
            if writes {
                args.extend(["--out".into(), dir.path().to_str().unwrap().into()]);
            }
            let out = bin()
                .args(&args)
                .env("HRF_LAB_THREADS", "2")
                .output()
                .unwrap();
            let code = out.status.code();
            assert!(
                matches!(code, Some(0..=3)),
                "{} {sub}: {code:?}\n{}",
                p.name(),
                String::from_utf8_lossy(&out.stderr)
            );
            if writes {
                assert!(
                    dir.path().join("report.json").exists(),
                    "{} {sub}",
                    p.name()
                );
            }
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hrf_core::pipeline::{model_distance, run_scenario, Stage, EXIT_VALIDATION};
use hrf_core::presets::PresetRegistry;
use hrf_core::report::{to_json_string, write_json};
use hrf_core::scenario::Scenario;

/// Ricci flow laboratory for invariant metrics on homogeneous spaces.
#[derive(Parser)]
#[command(name = "hrf-lab", version)]
struct Cli {
    /// Worker threads for internal parallelism (defaults to all cores).
    #[arg(long, global = true, env = "HRF_LAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Target {
    /// Scenario JSON file or the name of a built-in preset.
    scenario: String,
    /// Output directory, overriding the scenario's outputs block.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integrator overriding the scenario's flow method (dopri5, cash-karp, rkf45).
    #[arg(long)]
    method: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the algebra and initial metric; prints the validation report.
    Validate {
        /// Scenario JSON file or preset name.
        scenario: String,
    },
    /// Integrate the flow and write trajectory.csv and report.json.
    Flow(Target),
    /// Flow, blow-down, collapse detection and the limit triple (blowdown.json).
    Blowdown(Target),
    /// Geometric-model distance; prints one number.
    ModelCompare {
        /// Scenario JSON file or preset name.
        scenario: String,
        /// Blow-down parameter of the first model (default: last model tau).
        #[arg(long)]
        tau: Option<f64>,
        /// Compare against the model at this tau instead of the product reference.
        #[arg(long)]
        against: Option<f64>,
        /// Derivative order 0, 1 or 2 (default: the scenario's model order).
        #[arg(long)]
        order: Option<usize>,
    },
    /// Everything up to the soliton certificate (certificate.json).
    SolitonVerify(Target),
    /// Full pipeline including geometric models.
    Run(Target),
    /// List the built-in presets.
    Presets {
        /// Write each preset as <stem>.json into this directory.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

fn resolve(arg: &str) -> Result<Scenario, String> {
    let path = Path::new(arg);
    if path.exists() {
        return Scenario::load(path).map_err(|e| e.to_string());
    }
    PresetRegistry::builtin()
        .get(arg)
        .map(|p| p.scenario())
        .map_err(|e| e.to_string())
}

fn fail_load(msg: String) -> ExitCode {
    eprintln!(
        "{}",
        to_json_string(&json!({ "status": "validation_failure", "error": msg }))
            .unwrap_or_default()
    );
    ExitCode::from(EXIT_VALIDATION as u8)
}

fn staged(t: &Target, stage: Stage) -> ExitCode {
    let mut sc = match resolve(&t.scenario) {
        Ok(s) => s,
        Err(e) => return fail_load(e),
    };
    if let Some(m) = &t.method {
        sc.flow.method = m.clone();
    }
    let outcome = run_scenario(&sc, t.out.as_deref(), stage);
    if let Some(d) = &outcome.diagnostics {
        eprintln!("{}", to_json_string(d).unwrap_or_default());
    }
    println!("{}", to_json_string(&outcome.report).unwrap_or_default());
    ExitCode::from(outcome.exit_code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads.filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match &cli.command {
        Command::Validate { scenario } => {
            let sc = match resolve(scenario) {
                Ok(s) => s,
                Err(e) => return fail_load(e),
            };
            match sc.validation() {
                Ok(v) => {
                    let text = to_json_string(&v).unwrap_or_default();
                    if v.pass {
                        println!("{text}");
                        ExitCode::SUCCESS
                    } else {
                        eprintln!("{text}");
                        ExitCode::from(EXIT_VALIDATION as u8)
                    }
                }
                Err(e) => fail_load(e.to_string()),
            }
        }
        Command::Flow(t) => staged(t, Stage::Flow),
        Command::Blowdown(t) => staged(t, Stage::Blowdown),
        Command::SolitonVerify(t) => staged(t, Stage::Soliton),
        Command::Run(t) => staged(t, Stage::Full),
        Command::ModelCompare {
            scenario,
            tau,
            against,
            order,
        } => {
            let sc = match resolve(scenario) {
                Ok(s) => s,
                Err(e) => return fail_load(e),
            };
            let model = sc.model.clone().unwrap_or_default();
            let Some(tau) = tau.or_else(|| model.taus.last().copied()) else {
                eprintln!("no --tau given and the scenario has no model taus");
                return ExitCode::from(EXIT_VALIDATION as u8);
            };
            match model_distance(&sc, tau, *against, order.unwrap_or(model.order)) {
                Ok(d) => {
                    println!("{d:.16e}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!(
                        "{}",
                        to_json_string(&json!({ "status": "error", "error": e.to_string() }))
                            .unwrap_or_default()
                    );
                    ExitCode::from(2)
                }
            }
        }
        Command::Presets { export } => {
            let reg = PresetRegistry::builtin();
            for p in reg.iter() {
                println!("{}", p.name());
                if let Some(dir) = export {
                    if let Err(e) =
                        write_json(&dir.join(format!("{}.json", p.file_stem())), &p.scenario())
                    {
                        eprintln!("{e}");
                        return ExitCode::from(2);
                    }
                }
            }
            ExitCode::SUCCESS
        }
    }
}

//! Command-line entry point: run scenarios, evaluate one-off diagnostics
//! on saved tracks, rescale tracks, and print report tables.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::Point3;

use mcf_cli::{bundle, config::ScenarioConfig, emit_report, runner};
use mcf_core::diagnostics::SpacetimePoint;
use mcf_core::rescaling::parabolic_dilate;

#[derive(Parser)]
#[command(name = "mcf", about = "Mean curvature flow simulation and singularity diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its bundle.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate one diagnostic on a saved track.
    Diagnose {
        #[arg(long)]
        track: PathBuf,
        /// Operation name as in the scenario schema.
        #[arg(long)]
        op: String,
        /// JSON object with the operation parameters.
        #[arg(long, default_value = "{}")]
        params: String,
    },
    /// Parabolic rescaling of a saved track.
    Rescale {
        #[arg(long)]
        track: PathBuf,
        /// Comma-separated dilation scales.
        #[arg(long)]
        lambda: String,
        /// Center as x,y,z.
        #[arg(long)]
        center: String,
        /// Singular time T.
        #[arg(long = "T")]
        t_singular: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the summary table of a bundle.
    Report {
        #[arg(long)]
        bundle: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Run { config, out } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = ScenarioConfig::from_json(&text)?;
            let report = runner::run_scenario(&cfg, &out)?;
            println!(
                "scenario {} finished: {} snapshots, stop {}, {} diagnostics, {} failures",
                report.scenario,
                report.track.snapshots,
                report.track.stop_reason,
                report.diagnostics.len(),
                report.failures.len()
            );
            Ok(())
        }
        Command::Diagnose { track, op, params } => {
            let loaded = bundle::load_track(&track)?;
            let mut request = serde_json::from_str::<serde_json::Value>(&params)?;
            request["op"] = serde_json::Value::String(op);
            let request: mcf_cli::config::DiagnosticRequest = serde_json::from_value(request)?;
            let value = runner::diagnose_on_track(&loaded, &request)?;
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(())
        }
        Command::Rescale { track, lambda, center, t_singular, out } => {
            let loaded = bundle::load_track(&track)?;
            let coords: Vec<f64> = center
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()?;
            if coords.len() != 3 {
                return Err("center must be x,y,z".into());
            }
            let sp = SpacetimePoint::new(Point3::new(coords[0], coords[1], coords[2]), t_singular);
            std::fs::create_dir_all(&out)?;
            for lam_str in lambda.split(',') {
                let lam: f64 = lam_str.trim().parse()?;
                let rtrack = parabolic_dilate(&loaded, &sp, lam)?;
                let dir = out.join(format!("lambda_{}", lam_str.trim()));
                std::fs::create_dir_all(&dir)?;
                bundle::save_rescaled(&rtrack, &dir)?;
                println!("lambda {lam}: {} states -> {dir:?}", rtrack.states().len());
            }
            Ok(())
        }
        Command::Report { bundle } => {
            let table = emit_report(&bundle)?;
            print!("{table}");
            Ok(())
        }
    }
}

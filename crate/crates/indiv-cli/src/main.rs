mod config;
mod experiments;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::ScenarioConfig;

#[derive(Parser)]
#[command(
    name = "indiv",
    about = "Exact indivisibility experiments over F_p: run scenario configs, verify certificates"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario config (JSON); exits 0 only if every case matches.
    Run {
        config: PathBuf,
    },
    /// Re-verify a serialized certificate without re-solving.
    Verify {
        witness: PathBuf,
    },
    /// Run a built-in scenario (E1..E5) with default settings.
    Demo {
        experiment: String,
        /// Certificate output directory (default indiv-out).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Optional CSV output path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn run_scenario(cfg: &ScenarioConfig) -> Result<bool> {
    let report = experiments::run(cfg)?;
    print!("{}", report.render_table());
    if let Some(csv) = &cfg.csv {
        report.write_csv(csv)?;
        println!("  csv written to {}", csv.display());
    }
    Ok(report.all_ok())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Run { config } => ScenarioConfig::load(&config).and_then(|cfg| run_scenario(&cfg)),
        Cmd::Demo {
            experiment,
            out_dir,
            csv,
        } => ScenarioConfig::demo(&experiment).and_then(|mut cfg| {
            cfg.out_dir = out_dir;
            cfg.csv = csv;
            run_scenario(&cfg)
        }),
        Cmd::Verify { witness } => experiments::verify_file(&witness).map(|(ok, what)| {
            if ok {
                println!("OK: {what} verified ({})", witness.display());
            } else {
                println!("FAILED: {what} did not verify ({})", witness.display());
            }
            ok
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

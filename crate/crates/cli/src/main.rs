//! `nsm` — pseudo-spectral plasma simulation driver.
//!
//! Exit codes: 0 = all asserted checks pass, 1 = a check failed,
//! 2 = usage or configuration error.

use clap::{Parser, Subcommand};
use nsm_cli::{config, report::Check, scenarios, snapshot, verify};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nsm", version, about = "plasma simulation and verification suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured scenario and write diagnostics, snapshots and report.
    Run {
        /// Path to a key = value config file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a verification suite: invariants | oracles | calibration.
    Verify {
        #[arg(long)]
        suite: String,
        /// Where calibration writes its constants file (default: cwd).
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Seed for the suite's random draws.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a snapshot's header and field norms.
    Inspect {
        #[arg(long)]
        snapshot: PathBuf,
    },
}

fn print_checks(checks: &[Check]) -> bool {
    let mut all_pass = true;
    for c in checks {
        let status = match c.pass {
            Some(true) => "PASS",
            Some(false) => {
                all_pass = false;
                "FAIL"
            }
            None => "INFO",
        };
        match c.bound {
            Some(b) => println!("{status} {:40} value {:.6e} bound {:.6e}", c.name, c.value, b),
            None => println!("{status} {:40} value {:.6e}", c.name, c.value),
        }
        if !c.detail.is_empty() {
            println!("     {}", c.detail);
        }
    }
    all_pass
}

fn run_command(cmd: Command) -> Result<bool, (u8, anyhow::Error)> {
    match cmd {
        Command::Run { config: path, out } => {
            let cfg = config::load_config(&path).map_err(|e| (2, e))?;
            let rep = scenarios::run(&cfg, &out).map_err(|e| (1, e))?;
            println!("scenario {}", rep.scenario);
            let ok = print_checks(&rep.checks);
            println!(
                "report written to {}",
                out.join("report.json").display()
            );
            Ok(ok)
        }
        Command::Verify { suite, out, seed } => {
            let checks = verify::run_suite(&suite, &out, seed).map_err(|e| (2, e))?;
            Ok(print_checks(&checks))
        }
        Command::Inspect { snapshot: path } => {
            let (hdr, state) = snapshot::load(&path).map_err(|e| (2, e))?;
            println!(
                "snapshot {}: d = {}, N = {}, L = {:.6}, t = {:.6}, fields: {}",
                path.display(),
                hdr.d,
                hdr.n,
                hdr.len,
                hdr.t,
                hdr.names.join(", ")
            );
            println!("  ||v||_L2 = {:.12e}", state.v.l2());
            if let Some(e) = &state.e {
                println!("  ||E||_L2 = {:.12e}", e.l2());
            }
            println!("  ||B||_L2 = {:.12e}", state.b.l2());
            println!(
                "  div v rel = {:.3e}, div B rel = {:.3e}",
                state.v.divergence_rel(),
                state.b.divergence_rel()
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli.command) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err((code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

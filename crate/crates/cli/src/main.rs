use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vns_core::harness::{run_coupled, run_sweep, validate, RunConfig};
use vns_core::VnsError;

/// Multiscale Vlasov–Navier–Stokes simulator.
#[derive(Parser)]
#[command(name = "vns", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one coupled simulation.
    Run { config: PathBuf },
    /// Run an ε-sweep against the limit reference and fit rates.
    Sweep { config: PathBuf },
    /// Run the built-in oracle checks.
    Validate {
        /// Only run checks whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
    },
}

fn fail(e: &VnsError) -> ExitCode {
    eprintln!("vns: {e}");
    if e.is_config() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Command::Run { config } => {
            let cfg = match RunConfig::from_file(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            match run_coupled(&cfg) {
                Ok(out) => {
                    print!("{}", out.summary.to_text());
                    println!("output = {}", cfg.dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Sweep { config } => {
            let cfg = match RunConfig::from_file(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            match run_sweep(&cfg) {
                Ok(fit) => {
                    print!("{}", fit.slopes_csv());
                    println!("output = {}", cfg.dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Validate { filter } => {
            let checks = validate(filter.as_deref());
            if checks.is_empty() {
                eprintln!("vns: no check matches the filter");
                return ExitCode::from(2);
            }
            let mut ok = true;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}

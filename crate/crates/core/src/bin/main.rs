use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nonlocal_lab::config::ExperimentConfig;
use nonlocal_lab::experiments::{registry, run};

/// Numerical laboratory for parabolic nonlocal equations.
#[derive(Parser)]
#[command(name = "nonlocal-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config file.
    Run {
        /// Path to the experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for artifacts (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Treat hypothesis-audit failures as hard failures.
        #[arg(long)]
        strict: bool,
    },
    /// List the available experiment ids.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for e in registry() {
                println!("{:<16} {}", e.id, e.description);
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            out,
            strict,
        } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            let cfg = match ExperimentConfig::parse(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let out_dir = out
                .or_else(|| cfg.out.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out").join(&cfg.experiment));
            match run(&cfg, &out_dir, strict) {
                Ok(outcome) => {
                    for c in &outcome.manifest.checks {
                        println!(
                            "{} {}: {}",
                            if c.pass { "PASS" } else { "FAIL" },
                            c.name,
                            c.detail
                        );
                    }
                    println!(
                        "{}: artifacts in {}",
                        if outcome.pass { "ok" } else { "failed" },
                        out_dir.display()
                    );
                    if outcome.pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(nonlocal_lab::Error::Config(msg)) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(2)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}

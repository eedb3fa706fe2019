use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use stein_lab::divergences::{d_hyp, d_max, d_max_smooth, kl, Certificate};
use stein_lab::{units, Distribution};
use stein_lab_cli::checks;
use stein_lab_cli::config::Config;
use stein_lab_cli::runner::{self, Exit, RunOptions};

#[derive(Parser)]
#[command(name = "stein-lab", version, about = "Composite hypothesis testing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario in a JSON config and write the report directory.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Overrides every scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the check ids accepted in configs.
    ListChecks,
    /// Evaluate one divergence between two distributions.
    Divergence {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Comma-separated probabilities.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        q: Vec<f64>,
        /// Error (dhyp) or smoothing (dmax-smooth) parameter.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Kl,
    Dmax,
    DmaxSmooth,
    Dhyp,
}

fn divergence(kind: Kind, p: Vec<f64>, q: Vec<f64>, eps: f64) -> stein_lab::Result<serde_json::Value> {
    let (p, q) = (Distribution::from_weights(p)?, Distribution::from_weights(q)?);
    let r = match kind {
        Kind::Kl => kl(&p, &q)?,
        Kind::Dmax => d_max(&p, &q)?,
        Kind::DmaxSmooth => d_max_smooth(&p, &q, eps)?,
        Kind::Dhyp => d_hyp(&p, &q, eps)?,
    };
    let optimizer = match &r.optimizer {
        Some(Certificate::Test(v) | Certificate::Distribution(v) | Certificate::Weights(v)) => Some(v.clone()),
        None => None,
    };
    Ok(serde_json::json!({
        "value": r.value,
        "unit": units::unit(),
        "status": format!("{:?}", r.status),
        "residual": r.residual,
        "optimizer": optimizer,
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListChecks => {
            for c in checks::registry() {
                let kind = if c.hard { "hard" } else { "diagnostic" };
                println!("{}\t{}\t{}", c.id, kind, c.description);
            }
            ExitCode::SUCCESS
        }
        Command::Divergence { kind, p, q, eps } => match divergence(kind, p, q, eps) {
            Ok(v) => {
                println!("{}", serde_json::to_string_pretty(&v).expect("json"));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(Exit::Config as u8)
            }
        },
        Command::Run { config, out, jobs, seed } => {
            let cfg = match Config::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(Exit::Config as u8);
                }
            };
            match runner::run(&cfg, &out, &RunOptions { jobs, seed }) {
                Ok(r) => {
                    for s in &r.summary.scenarios {
                        for c in &s.checks {
                            println!("{}/{}: {:?} {}", s.name, c.id, c.status, c.message);
                        }
                    }
                    ExitCode::from(r.exit as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(Exit::Fail as u8)
                }
            }
        }
    }
}

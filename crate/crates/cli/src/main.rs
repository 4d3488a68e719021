mod config;
mod run;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use qca_core::oracle::dirac::convergence_order;
use qca_core::verify::{CheckResult, Suite};

#[derive(Parser)]
#[command(name = "qca", version, about = "Lattice QED as a quantum cellular automaton")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the state described by a config file and write observables as CSV.
    Run {
        config: PathBuf,
        /// CSV output file (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Directory for snapshots when `snapshot_every` > 0.
        #[arg(long, default_value = "snapshots")]
        snapshot_dir: PathBuf,
    },
    /// Run a verification suite and print a JSON report.
    Verify {
        /// algebra, locality, gauge, magnetic, trotter, dirac-convergence,
        /// causality, exchange or all.
        suite: String,
        /// Write the JSON report here instead of stdout.
        #[arg(short, long)]
        report: Option<PathBuf>,
    },
    /// Tabulate the one-step distance between the Dirac walk and the continuum.
    Convergence {
        /// Momentum components, comma separated (2 or 3 of them).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        k: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        mass: f64,
        /// Step sizes, comma separated (at least 3).
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025,0.0125")]
        eps: Vec<f64>,
    },
}

fn verify(suite: &str, report: Option<PathBuf>) -> Result<bool> {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        match Suite::from_name(suite) {
            Some(s) => vec![s],
            None => bail!("unknown suite `{suite}`"),
        }
    };
    let mut results: Vec<CheckResult> = Vec::new();
    for s in suites {
        let r = s.run();
        for c in &r {
            eprintln!("{c}");
        }
        results.extend(r);
    }
    let ok = results.iter().all(|r| r.passed());
    let json = serde_json::to_string_pretty(&results)?;
    match report {
        Some(p) => std::fs::write(&p, json + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{json}"),
    }
    eprintln!("{} of {} checks passed", results.iter().filter(|r| r.passed()).count(), results.len());
    Ok(ok)
}

fn convergence(k: &[f64], mass: f64, eps: &[f64]) -> Result<()> {
    if !(2..=3).contains(&k.len()) {
        bail!("--k needs 2 or 3 components, got {}", k.len());
    }
    if eps.len() < 3 {
        bail!("--eps needs at least 3 values, got {}", eps.len());
    }
    let (defects, order) = convergence_order(k, mass, eps, k.len());
    println!("eps,defect");
    for (e, d) in eps.iter().zip(&defects) {
        println!("{e},{d:e}");
    }
    println!("order,{order}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output, snapshot_dir } => config::RunConfig::load(&config).and_then(|cfg| match output {
            Some(p) => {
                let f = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                run::run(&cfg, &mut BufWriter::new(f), &snapshot_dir)
            }
            None => run::run(&cfg, &mut std::io::stdout().lock(), &snapshot_dir),
        }),
        Command::Verify { suite, report } => match verify(&suite, report) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::FAILURE,
            Err(e) => Err(e),
        },
        Command::Convergence { k, mass, eps } => convergence(&k, mass, &eps),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = std::io::stdout().flush();
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

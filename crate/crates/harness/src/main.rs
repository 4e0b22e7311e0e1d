use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use thinflow::corrector::SymbolGrid;
use thinflow_harness::datum::make_initial_datum;
use thinflow_harness::invariants::{run_invariant_suite, write_ledger, ChainGrid, Mutation};
use thinflow_harness::report::{to_json, Check};
use thinflow_harness::simulate::{simulate, write_run};
use thinflow_harness::sweep::{run_sweep, write_sweep};
use thinflow_harness::verify::{verify_corrector, write_corrector};
use thinflow_harness::ExperimentConfig;

#[derive(Parser)]
#[command(name = "thinflow", version, about = "Thin-strip flow experiments and verification")]
struct Cli {
    /// JSON experiment configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `output_dir` from the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridChoice {
    Reference,
    Dense,
}

#[derive(Subcommand)]
enum Command {
    /// One anisotropic run with snapshots and `run.json`.
    Simulate {
        /// Defaults to the first entry of `eps_list`.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// The epsilon sweep: `sweep.csv` and `sweep.json`.
    Sweep,
    /// Symbol bounds and influence probes: `bounds.json` and `corrector.json`.
    VerifyCorrector {
        #[arg(long, value_enum, default_value = "reference")]
        grid: GridChoice,
    },
    /// The invariant ledger: `invariants.json`.
    CheckInvariants {
        #[arg(long, value_enum, default_value = "dense")]
        chain_grid: GridChoice,
    },
    /// Initial datum compatibility report: `datum.json`.
    MakeDatum,
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:<40} {:>14.6e}  {}", c.name, c.value, c.threshold);
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_path(p).with_context(|| format!("reading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    cfg.validate()?;
    let dir: &Path = &cfg.output_dir;
    match cli.command {
        Command::Simulate { eps } => {
            let eps = eps.unwrap_or(cfg.eps_list[0]);
            let log = simulate(&cfg, eps, dir)?;
            let path = write_run(&log, dir)?;
            println!("wrote {}", path.display());
            if let Some(f) = &log.failure {
                println!("FAIL run stopped: {f}");
            }
            Ok(log.completed())
        }
        Command::Sweep => {
            let report = run_sweep(&cfg)?;
            let (csv, json) = write_sweep(&report, dir)?;
            print_checks(&report.checks);
            println!("wrote {} and {}", csv.display(), json.display());
            Ok(report.pass)
        }
        Command::VerifyCorrector { grid } => {
            let g = match grid {
                GridChoice::Reference => SymbolGrid::reference(),
                GridChoice::Dense => SymbolGrid::dense(),
            };
            let report = verify_corrector(&cfg, &g)?;
            let (bounds, full) = write_corrector(&report, dir)?;
            print_checks(&report.checks);
            println!("wrote {} and {}", bounds.display(), full.display());
            Ok(report.pass)
        }
        Command::CheckInvariants { chain_grid } => {
            let chain = match chain_grid {
                GridChoice::Reference => ChainGrid::Reference,
                GridChoice::Dense => ChainGrid::Dense,
            };
            let ledger = run_invariant_suite(&cfg, Mutation::None, chain)?;
            let path = write_ledger(&ledger, dir)?;
            print_checks(&ledger.checks);
            println!("wrote {}", path.display());
            Ok(ledger.pass)
        }
        Command::MakeDatum => {
            let (_, _, report) = make_initial_datum(&cfg)?;
            std::fs::create_dir_all(dir)?;
            let path = dir.join("datum.json");
            std::fs::write(&path, to_json(&report)?)?;
            println!("{}", to_json(&report)?);
            println!("wrote {}", path.display());
            Ok(report.pass())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

//! `lsa`: run, fit, compare, audit and gibbs-tv from a key-value config.
//!
//! Exit codes: 0 success, 2 config error, 3 divergence, 4 metric failure,
//! 1 anything else (I/O).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use langevin_anneal::harness::{
    audit, compare_schemes, fit_rate, gibbs_tv_sweep, parse_assignment, run_experiment, ExperimentConfig, Table,
    OUTPUT_ROOT_ENV,
};
use langevin_anneal::{Error, Result};

#[derive(Parser)]
#[command(name = "lsa", version, about = "Langevin simulated annealing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Key-value config file; defaults apply to missing keys.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set sim.n_traj=500`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate and track distances to the Gibbs reference over time.
    Run(ConfigArgs),
    /// Fit a power-law decay to one column of a trace.
    Fit {
        trace: PathBuf,
        #[arg(long, default_value = "tv")]
        column: String,
        /// Window start; defaults to the first positive time.
        #[arg(long)]
        t_min: Option<f64>,
        /// Window end; defaults to the last time.
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Euler scheme with eta = 1 and compare.eta next to the continuous process.
    Compare(ConfigArgs),
    /// Grid audit of the assumptions on V and sigma.
    Audit {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Exit with code 4 when a check fails.
        #[arg(long)]
        strict: bool,
    },
    /// TV between successive plateau Gibbs measures.
    GibbsTv(ConfigArgs),
}

fn load(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    for s in &args.overrides {
        let (k, v) = parse_assignment(s)?;
        cfg.set(&k, &v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_table(t: &Table) {
    println!("{}", t.columns.join("\t"));
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        println!("{}", cells.join("\t"));
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let report = run_experiment(&load(&args)?)?;
            print_table(&report.trace);
            println!("wrote {}", report.dir.display());
        }
        Command::Fit {
            trace,
            column,
            t_min,
            t_max,
        } => {
            let table = Table::read_csv(&trace)?;
            let ts = table.column("t")?;
            let lo = t_min.unwrap_or_else(|| ts.iter().copied().find(|&t| t > 0.0).unwrap_or(0.0));
            let hi = t_max.unwrap_or_else(|| ts.last().copied().unwrap_or(0.0));
            println!("{column}: {}", fit_rate(&table, &column, (lo, hi))?);
        }
        Command::Compare(args) => {
            let report = compare_schemes(&load(&args)?)?;
            print_table(&report.table);
            println!("wrote {}", report.dir.display());
        }
        Command::Audit { cfg, strict } => {
            let report = audit(&load(&cfg)?)?;
            print!("{report}");
            if strict && !report.all_pass() {
                return Err(Error::Metric("assumption audit failed".into()));
            }
        }
        Command::GibbsTv(args) => {
            let report = gibbs_tv_sweep(&load(&args)?)?;
            println!("max/min of n log(n) TV over the sweep: {:.4}", report.band_ratio);
            println!("wrote {}", report.dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lsa: {e}");
            if matches!(e, Error::Io { .. }) {
                eprintln!("(default output root comes from ${OUTPUT_ROOT_ENV})");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Command-line driver: verification suites and CGO experiments.
//!
//! Exit codes: 0 pass, 1 check failure, 2 config or I/O error, 3 solver divergence,
//! 4 resonant grid, 5 acceptance-trend failure.

mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use commands::{CommandError, Report, EXIT_CONFIG};
use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "hodge-cgo", version, about = "Exterior-calculus checks and CGO experiments for Maxwell media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON run configuration; defaults describe the reference setup.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for results.csv, manifest.json and snapshots.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Print the report as JSON on stdout.
    #[arg(long)]
    json: bool,
    /// Overrides sampling.seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exterior-algebra identities on basis blades and random forms.
    CheckAlgebra {
        #[command(flatten)]
        common: Common,
        /// Flip one vee sign to exercise the failure path.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Spectral calculus identities and the resolvent norm.
    CheckCalculus(Common),
    /// Weak factorization identities for the configured medium.
    CheckFactorization(Common),
    /// CGO solves over geometry.s_list.
    RunCgo(Common),
    /// Averaged remainder decay over geometry.lambda_list.
    RunDecay(Common),
    /// Pairing of two media against the scattering-relation limits, plus the optional UCP check.
    RunUniqueness(Common),
    /// Randomized lower bound for the potential's operator norm over geometry.s_list.
    EstimateQnorm(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CheckAlgebra { .. } => "check-algebra",
            Command::CheckCalculus(_) => "check-calculus",
            Command::CheckFactorization(_) => "check-factorization",
            Command::RunCgo(_) => "run-cgo",
            Command::RunDecay(_) => "run-decay",
            Command::RunUniqueness(_) => "run-uniqueness",
            Command::EstimateQnorm(_) => "estimate-qnorm",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::CheckAlgebra { common, .. } => common,
            Command::CheckCalculus(c)
            | Command::CheckFactorization(c)
            | Command::RunCgo(c)
            | Command::RunDecay(c)
            | Command::RunUniqueness(c)
            | Command::EstimateQnorm(c) => c,
        }
    }

    fn is_experiment(&self) -> bool {
        matches!(self, Command::RunCgo(_) | Command::RunDecay(_) | Command::RunUniqueness(_) | Command::EstimateQnorm(_))
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_outputs(dir: &Path, report: &Report, manifest: &serde_json::Value, snapshots: bool) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_csv(&dir.join("results.csv"), &report.header, &report.rows)?;
    for (name, header, rows) in &report.extra_tables {
        write_csv(&dir.join(name), header, rows)?;
    }
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(manifest)?)?;
    if snapshots {
        if let Some(f) = &report.snapshot {
            hodge_cgo::io::save_snapshot(dir, "fields", f)?;
        }
    }
    Ok(())
}

fn print_table(report: &Report) {
    if !report.checks.is_empty() {
        for c in &report.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            println!("{tag}  {:<44} max_error {:>10.3e}  tol {:.0e}", c.name, c.max_error, c.tolerance);
        }
    } else {
        println!("{}", report.header.join("\t"));
        for row in &report.rows {
            println!("{}", row.join("\t"));
        }
    }
    for (name, ok) in &report.flags {
        println!("{}  {name}", if *ok { "ok  " } else { "FAIL" });
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let command = cli.command;
    let common = command.common().clone();
    let mut cfg = match &common.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{e}");
                return Ok(EXIT_CONFIG);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.sampling.seed = seed;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("{e}");
        return Ok(EXIT_CONFIG);
    }
    if let Some(n) = common.threads {
        if n == 0 {
            eprintln!("--threads must be at least 1");
            return Ok(EXIT_CONFIG);
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }

    let start = Instant::now();
    let result: Result<Report, CommandError> = match &command {
        Command::CheckAlgebra { inject_fault, .. } => Ok(commands::check_algebra(&cfg, *inject_fault)),
        Command::CheckCalculus(_) => commands::check_calculus(&cfg),
        Command::CheckFactorization(_) => commands::check_factorization(&cfg),
        Command::RunCgo(_) => commands::run_cgo(&cfg),
        Command::RunDecay(_) => commands::run_decay(&cfg),
        Command::RunUniqueness(_) => commands::run_uniqueness(&cfg),
        Command::EstimateQnorm(_) => commands::estimate_qnorm(&cfg),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: {e}", command.name());
            return Ok(e.exit_code());
        }
    };

    let manifest = json!({
        "command": command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "wall_clock_seconds": elapsed,
        "diagnostics": report.diagnostics,
        "acceptance": report.flags,
        "checks": report.checks,
        "exit_code": report.exit_code,
    });
    let out = common.out.clone().or_else(|| cfg.output.dir.as_ref().map(PathBuf::from));
    let out = match out {
        Some(dir) => Some(dir),
        None if command.is_experiment() => Some(PathBuf::from("out")),
        None => None,
    };
    if let Some(dir) = &out {
        write_outputs(dir, &report, &manifest, cfg.output.snapshots)?;
    }
    if common.json {
        let body = if report.checks.is_empty() { manifest } else { json!(report.checks) };
        println!("{}", serde_json::to_string_pretty(&body)?);
    } else {
        print_table(&report);
        if let Some(dir) = &out {
            println!("wrote {}", dir.display());
        }
    }
    Ok(report.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}

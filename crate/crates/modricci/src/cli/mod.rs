//! Scenario runner behind the `modricci` binary.
//!
//! ```text
//! modricci [--seed S] [--tolerance T] [--out DIR] [--jobs K] verify <config.toml>
//! modricci list-models
//! modricci plot <report.json> <kind>
//! ```
//!
//! Exit codes: `0` every certificate passes, `1` some row fails, `2` the
//! configuration is rejected, `3` a numeric failure.

pub mod report;
pub mod scenario;
pub mod suites;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

pub use report::{Report, ReportRow, Summary, SCHEMA};
pub use scenario::Scenario;

use crate::error::{Error, Result};
use crate::models::{build_model, catalog, Model};

#[derive(Debug, Parser)]
#[command(name = "modricci", version, about = "Certificates for comparison geometry on explicit models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the default certificate tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Runs a scenario file and writes the JSON report and the margin table.
    Verify { config: PathBuf },
    /// Lists the model catalog.
    ListModels,
    /// Writes `parameter,lhs,rhs,margin` for one certificate kind of a report.
    Plot { report: PathBuf, kind: String },
}

/// Runs every (model, suite) cell of `scenario` on `jobs` threads.
pub fn run_scenario(scenario: &Scenario, jobs: usize) -> Result<Report> {
    let start = Instant::now();
    let models: Vec<Model> = scenario.model_specs()?.iter().map(build_model).collect::<Result<_>>()?;
    let mut suites: Vec<&str> = Vec::new();
    for s in &scenario.scenario.suites {
        let expanded: Vec<&str> = if s == "all" { scenario::SUITES[..5].to_vec() } else { vec![s.as_str()] };
        for e in expanded {
            if !suites.contains(&e) {
                suites.push(e);
            }
        }
    }
    let cells: Vec<(&Model, &str)> = models.iter().flat_map(|m| suites.iter().map(move |&s| (m, s))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| Error::Io(e.to_string()))?;
    let outputs = pool.install(|| cells.par_iter().map(|&(m, s)| suites::run_suite(m, s, scenario)).collect());
    Ok(Report::assemble(scenario.clone(), outputs, start.elapsed().as_secs_f64()))
}

/// Writes `report.json`, the margin CSV and `timing.json` under `dir`.
pub fn write_report(report: &Report, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let out = &report.scenario.output;
    let json = dir.join(&out.json);
    std::fs::write(&json, report.to_json()? + "\n")?;
    std::fs::write(dir.join(&out.csv), report.margins_csv()?)?;
    std::fs::write(dir.join("timing.json"), format!("{{\"wall_time_s\": {}}}\n", report.wall_time_s))?;
    Ok(json)
}

fn code_for(e: &Error) -> i32 {
    if e.is_numeric() {
        3
    } else {
        2
    }
}

fn verify(cli: &Cli, config: &Path) -> Result<i32> {
    let mut sc = Scenario::from_file(config)?;
    if let Some(seed) = cli.seed {
        sc.scenario.seed = seed;
    }
    if let Some(t) = cli.tolerance {
        sc.scenario.tolerance = Some(t);
    }
    if let Some(out) = &cli.out {
        sc.output.dir = out.display().to_string();
    }
    let report = run_scenario(&sc, cli.jobs)?;
    let path = write_report(&report, Path::new(&report.scenario.output.dir))?;
    let s = &report.summary;
    println!(
        "{} certificates, {} rows, {} failed, {} skipped, {} errors, worst margin {}",
        s.certificates,
        s.rows,
        s.failed_rows,
        s.skipped,
        s.errors,
        s.worst_margin.map_or("-".into(), |m| format!("{m:e}"))
    );
    for e in &report.errors {
        eprintln!("error: model `{}`, suite `{}`, check `{}`: {}", e.model, e.suite, e.check, e.error);
    }
    println!("report: {}", path.display());
    Ok(report.exit_code())
}

fn list_models() -> Result<i32> {
    println!("{:<18} {:<18} {:>2} {:>7} {:>7} {:>7}", "name", "type", "n", "lambda", "K", "alpha");
    for spec in catalog() {
        println!(
            "{:<18} {:<18} {:>2} {:>7} {:>7} {:>7}",
            spec.name,
            spec.kind_tag(),
            spec.n,
            spec.lambda,
            spec.k,
            spec.alpha
        );
    }
    Ok(0)
}

fn plot(cli: &Cli, report: &Path, kind: &str) -> Result<i32> {
    let data = Report::from_json(&std::fs::read_to_string(report)?)?.plot_data(kind)?;
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{kind}.csv")), data)?;
        }
        None => print!("{data}"),
    }
    Ok(0)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Verify { config } => verify(&cli, config),
        Command::ListModels => list_models(),
        Command::Plot { report, kind } => plot(&cli, report, kind),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        code_for(&e)
    })
}

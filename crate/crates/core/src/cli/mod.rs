//! Command-line front end: config parsing, grid orchestration and report
//! output.

pub mod check;
pub mod config;
pub mod converge;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{
    box_spectrum, chain_spectrum, group_multiplicities, laplacian_matrix, LatticeSpec,
};
use crate::linalg::sym_eigenvalues;
use config::ExperimentConfig;
use converge::{converge, ConvergenceRow, ScanMode};
use report::{ReportRecord, VERSION};

#[derive(Debug, Parser)]
#[command(
    name = "thermal-arealaw",
    version,
    about = "Exact-diagonalization checks of the thermal area law"
)]
pub struct Cli {
    /// Experiment config (TOML, or JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for independent grid points.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized checks; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the bound chain on every grid point.
    Run,
    /// Scan the occupation cutoff and report convergence.
    Converge,
    /// Print the periodic Laplacian spectrum with residuals.
    Spectrum {
        /// Side length L of the periodic box.
        #[arg(long)]
        side: usize,
        /// Lattice dimension d.
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
    /// Run the standalone inequality suites.
    Check,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let mut config = ExperimentConfig::from_path(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    Ok(config)
}

fn out_dir(config: &ExperimentConfig) -> Result<PathBuf> {
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Run => {
            let config = load_config(cli)?;
            let start = Instant::now();
            let outcome = run_experiment(&config, cli.jobs)?;
            let dir = out_dir(&config)?;
            write_outputs(&dir, &config, &outcome, start.elapsed().as_secs_f64())?;
            for r in &outcome.records {
                let c = &r.chain;
                println!(
                    "L={} n_max={} beta={} I={:.6e} lemma1={:.6e} prop1={:.6e} theorem={:.6e} [{}]{}",
                    c.side,
                    c.n_max,
                    c.beta,
                    c.exact_mi,
                    c.lemma1_value,
                    c.prop1_value,
                    c.theorem_value,
                    r.convergence,
                    if c.violations.is_empty() {
                        String::new()
                    } else {
                        format!(" flags: {}", c.violations.join("; "))
                    }
                );
            }
            Ok(0)
        }
        Command::Converge => {
            let config = load_config(cli)?;
            let rows = converge_experiment(&config, |side, status, diff| {
                println!(
                    "L={side}: {} (last relative difference {})",
                    status,
                    diff.map_or("n/a".to_string(), |d| format!("{d:.3e}"))
                );
            })?;
            let dir = out_dir(&config)?;
            report::write_convergence_csv(&dir.join("convergence.csv"), &rows)?;
            Ok(0)
        }
        Command::Spectrum { side, dim } => {
            print!("{}", spectrum_table(*dim, *side)?);
            Ok(0)
        }
        Command::Check => {
            let seed = match (&cli.seed, &cli.config) {
                (Some(s), _) => *s,
                (None, Some(_)) => load_config(cli)?.seed,
                (None, None) => check::DEFAULT_SEED,
            };
            println!("seed {seed}");
            let results = check::run_all(seed)?;
            for r in &results {
                println!("{r}");
            }
            Ok(if results.iter().all(check::SuiteResult::passed) {
                0
            } else {
                2
            })
        }
    }
}

/// Records and convergence rows of one `run`.
pub struct RunOutcome {
    pub records: Vec<ReportRecord>,
    pub convergence: Vec<ConvergenceRow>,
}

enum Job {
    Fixed { side: usize, n_max: usize },
    Scan { side: usize, range: [usize; 2] },
}

fn run_job(
    config: &ExperimentConfig,
    job: &Job,
    hash: &str,
) -> Result<(Vec<ReportRecord>, Vec<ConvergenceRow>)> {
    let start = Instant::now();
    let (prepared, status, rows) = match *job {
        Job::Fixed { side, n_max } => (
            crate::bounds::Prepared::new(&config.params(side, n_max), &config.beta)?,
            "n/a".to_string(),
            Vec::new(),
        ),
        Job::Scan { side, range } => {
            let base = config.params(side, range[0]);
            let budget = config.time_budget.map(Duration::from_secs_f64);
            let scan = converge(
                &base,
                &config.beta,
                range,
                config.converge_tol,
                ScanMode::FirstConverged,
                budget,
            )?;
            let status = scan.status.as_str().to_string();
            let prepared = match scan.last {
                Some(p) => p,
                // nothing was diagonalized; surface the underlying error
                None => crate::bounds::Prepared::new(&base, &config.beta)?,
            };
            (prepared, status, scan.rows)
        }
    };
    let setup = start.elapsed();
    let records = config
        .beta
        .iter()
        .map(|&beta| {
            let t = Instant::now();
            let chain = prepared.evaluate(beta)?;
            Ok(ReportRecord {
                version: VERSION.to_string(),
                config_hash: hash.to_string(),
                convergence: status.clone(),
                wall_time_s: (setup + t.elapsed()).as_secs_f64(),
                chain,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((records, rows))
}

/// Evaluates every grid point of `config` on a pool of `jobs` workers.
/// Output order follows the config: side length, then `n_max`, then `β`.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<RunOutcome> {
    config.validate()?;
    let hash = config.hash();
    let grid: Vec<Job> = config
        .l
        .iter()
        .flat_map(|&side| match (&config.n_max, config.n_max_range) {
            (Some(list), _) => list
                .iter()
                .map(|&n_max| Job::Fixed { side, n_max })
                .collect(),
            (None, Some(range)) => vec![Job::Scan { side, range }],
            (None, None) => Vec::new(),
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<_>> = pool.install(|| {
        grid.par_iter()
            .map(|job| run_job(config, job, &hash))
            .collect()
    });
    let mut outcome = RunOutcome {
        records: Vec::new(),
        convergence: Vec::new(),
    };
    for r in results {
        let (records, rows) = r?;
        outcome.records.extend(records);
        outcome.convergence.extend(rows);
    }
    Ok(outcome)
}

pub fn write_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    outcome: &RunOutcome,
    wall_time_s: f64,
) -> Result<()> {
    report::write_report_csv(&dir.join("report.csv"), &outcome.records)?;
    let convergence = (!outcome.convergence.is_empty()).then_some(outcome.convergence.as_slice());
    report::write_report_json(
        &dir.join("report.json"),
        config,
        &outcome.records,
        convergence,
        wall_time_s,
    )?;
    if let Some(rows) = convergence {
        report::write_convergence_csv(&dir.join("convergence.csv"), rows)?;
    }
    Ok(())
}

/// Full-range scan for every side length; `on_status` sees each verdict.
pub fn converge_experiment(
    config: &ExperimentConfig,
    mut on_status: impl FnMut(usize, &str, Option<f64>),
) -> Result<Vec<ConvergenceRow>> {
    let range = config
        .n_max_range
        .ok_or_else(|| Error::Config("converge needs n_max_range = [low, high]".into()))?;
    let budget = config.time_budget.map(Duration::from_secs_f64);
    let mut rows = Vec::new();
    for &side in &config.l {
        let base = config.params(side, range[0]);
        let scan = converge(
            &base,
            &config.beta,
            range,
            config.converge_tol,
            ScanMode::Exhaust,
            budget,
        )?;
        on_status(side, scan.status.as_str(), scan.last_difference);
        rows.extend(scan.rows);
    }
    Ok(rows)
}

/// Closed-form Laplacian spectrum next to direct diagonalization.
pub fn spectrum_table(dim: usize, side: usize) -> Result<String> {
    use std::fmt::Write;
    let lattice = LatticeSpec::new(dim, side)?;
    let lap = laplacian_matrix(&lattice);
    let direct = sym_eigenvalues(lap.as_ref())?;
    let mut out = String::new();
    let closed = if dim == 1 {
        let table = chain_spectrum(side)?;
        writeln!(out, "label  eigenvalue           residual").unwrap();
        for (i, (lambda, v)) in table
            .eigenvalues
            .iter()
            .zip(&table.eigenvectors)
            .enumerate()
        {
            let residual = (0..side)
                .map(|r| {
                    let lv: f64 = (0..side).map(|c| lap[(r, c)] * v[c]).sum();
                    (lv - lambda * v[r]).abs()
                })
                .fold(0.0, f64::max);
            writeln!(out, "{:>5}  {:<19.12e}  {:.3e}", i + 1, lambda, residual).unwrap();
        }
        let mut sorted = table.eigenvalues.clone();
        sorted.sort_by(f64::total_cmp);
        sorted
    } else {
        box_spectrum(dim, side)?
    };
    let mismatch = closed
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    writeln!(out, "eigenvalue  multiplicity").unwrap();
    for (value, count) in group_multiplicities(&closed, 1e-9) {
        writeln!(out, "{value:<10.6}  {count}").unwrap();
    }
    writeln!(
        out,
        "max deviation from direct diagonalization: {mismatch:.3e}"
    )
    .unwrap();
    Ok(out)
}

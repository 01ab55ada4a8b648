//! `qmct`: point-set generation, discrepancy tables, integration benchmarks
//! and trail audits.
//!
//! Exit status: 0 success, 1 failed audit or run, 2 bad usage, config or
//! input.

mod audit;
mod bench;
mod config;
mod error;
mod generate;
mod io;
mod table1;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use qmc_transfer::metrics::{star_discrepancy, Method, MAX_GRID_CORNERS};

use crate::config::ExperimentConfig;
use crate::error::{is_usage, OrUsage};

#[derive(Parser, Debug)]
#[command(name = "qmct", version, about = "Quasi-Monte Carlo point sets by discrepancy transference")]
struct Cli {
    /// JSON experiment config; defaults apply to every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`; default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Base seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the transference once and write its output sets and manifest.
    Generate,
    /// Star discrepancy of a qmcpts file (exact for d <= 3).
    Stardisc {
        file: PathBuf,
        /// Grid cells per side for the lower bound used when d > 3.
        #[arg(long)]
        grid: Option<u32>,
    },
    /// Two-dimensional discrepancy table over the n sweep.
    Table1,
    /// Integration errors of every method over the n sweep.
    Bench,
    /// Check the lineage identity of a generated run.
    Audit {
        manifest: PathBuf,
        /// Regions file, one box `lo_1 hi_1 ... lo_d hi_d` per line;
        /// default: 100 random dyadic boxes and the unit cube.
        #[arg(long)]
        regions: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Largest per-side resolution whose grid stays within the corner budget.
fn auto_grid(d: usize) -> u32 {
    let mut r: u32 = 64;
    while r > 2 && (r as f64).powi(d as i32) > MAX_GRID_CORNERS as f64 {
        r -= 1;
    }
    r
}

fn cmd_stardisc(file: &Path, grid: Option<u32>) -> Result<ExitCode> {
    let pts = config::read_points(file)?;
    let r = star_discrepancy(&pts, grid.unwrap_or_else(|| auto_grid(pts.dim()))).or_usage("stardisc")?;
    let method = match r.method {
        Method::ExactGrid => "exact".to_string(),
        Method::GridLowerBound { resolution } => format!("grid_lower_bound_{resolution}"),
    };
    println!("file,n,d,stardisc,method");
    println!("{},{},{},{:?},{}", file.display(), pts.len(), pts.dim(), r.value, method);
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    if let Some(k) = cli.workers {
        if k == 0 {
            return Err(error::usage("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("cannot size the worker pool")?;
    }
    match &cli.command {
        Command::Stardisc { file, grid } => cmd_stardisc(file, *grid),
        Command::Generate => {
            let cfg = load_config(cli)?;
            let g = generate::generate(&cfg, &out_dir(cli, &cfg))?;
            let m = &g.manifest;
            println!(
                "wrote {} sets of {} points (d={}, n0={}, T={}, h={}) and {} to {}",
                m.files.len(),
                m.n,
                m.d,
                m.n0,
                m.levels,
                m.h,
                generate::MANIFEST_FILE,
                g.dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Table1 => {
            let cfg = load_config(cli)?;
            let cells = table1::table1(&cfg)?;
            let path = out_dir(cli, &cfg).join("table1.csv");
            io::write_atomic(&path, table1::to_csv(&cells).as_bytes())?;
            print!("{}", table1::to_text(&cells));
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench => {
            let cfg = load_config(cli)?;
            let rows = bench::bench(&cfg)?;
            let summary = bench::summary(&rows)?;
            let dir = out_dir(cli, &cfg);
            let mut staged = io::Staged::new();
            staged.write(&dir.join("bench_raw.csv"), bench::raw_csv(&rows).as_bytes())?;
            staged.write(&dir.join("bench_summary.csv"), bench::summary_csv(&summary).as_bytes())?;
            staged.commit()?;
            print!("{}", bench::summary_csv(&summary));
            Ok(ExitCode::SUCCESS)
        }
        Command::Audit { manifest, regions } => {
            if !manifest.is_file() {
                return Err(error::usage(format!("manifest {} not found", manifest.display())));
            }
            let m = generate::Manifest::read(manifest)?;
            let regions = audit::regions_for(&m, regions.as_deref(), cli.seed)?;
            let report = audit::audit(manifest, &regions)?;
            println!("regions: {}", report.regions);
            println!("balance violation: {:e}", report.balance_violation);
            match report.identity_violation {
                Some(_) if report.regions == 0 => println!("identity violation: 0 (vacuous: no regions)"),
                Some(v) => println!("identity violation: {v:e}"),
                None => println!("identity violation: not computed"),
            }
            for (t, i) in &report.digest_mismatches {
                println!("digest mismatch at node ({t}, {i})");
            }
            for p in &report.problems {
                println!("problem: {p}");
            }
            println!("max violation: {:e}", report.max_violation());
            if report.passed() {
                println!("PASS");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("FAIL");
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_usage(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

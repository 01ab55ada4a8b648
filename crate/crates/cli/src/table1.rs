//! `table1`: exact star discrepancy in two dimensions for Sobol', IID and
//! transference sets.
//!
//! A transference cell averages the discrepancy over all output sets of a
//! run, then over runs; its minimum is over every output set of every run.

use std::fmt::Write as _;

use anyhow::Result;
use qmc_transfer::metrics::star_discrepancy_exact;
use qmc_transfer::sampling::{derive_seed, iid_uniform, sobol, Scramble};
use qmc_transfer::transference::run;
use qmc_transfer::PointSet;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, InitConfig, RunSeeds, ScrambleKind, WeightsConfig};
use crate::io::cell;

pub const HEADER: &str = "n,method,mean,min,reps";
pub const METHODS: [&str; 6] = ["sobol", "iid", "st_iid_k16", "st_iid_kn", "st_sobol_k16", "st_sobol_kn"];

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub method: &'static str,
    pub mean: f64,
    pub min: f64,
    pub reps: usize,
}

fn disc(p: &PointSet) -> Result<f64> {
    Ok(star_discrepancy_exact(p)?.value)
}

/// Discrepancies of the sets one repetition of `method` produces.
fn repetition(config: &ExperimentConfig, method: usize, n: usize, rep: usize) -> Result<Vec<f64>> {
    let base = derive_seed(config.seed, &[method as u64]);
    match METHODS[method] {
        "sobol" => Ok(vec![disc(&sobol(n, 2, Scramble::None)?)?]),
        "iid" => Ok(vec![disc(&iid_uniform(n, 2, derive_seed(base, &[n as u64, rep as u64])))?]),
        name => {
            let mut cfg = config.clone();
            cfg.d = 2;
            cfg.weights = WeightsConfig::default();
            cfg.h = None;
            cfg.oversample_k = if name.ends_with("k16") { 16 } else { n };
            cfg.init = if name.starts_with("st_iid") {
                InitConfig::Iid
            } else {
                InitConfig::Sobol {
                    scramble: ScrambleKind::None,
                }
            };
            let (sets, _) = run(&cfg.transference(n, RunSeeds::derive(base, n, rep))?)?;
            sets.iter().map(disc).collect()
        }
    }
}

pub fn table1(config: &ExperimentConfig) -> Result<Vec<Cell>> {
    let jobs: Vec<(usize, usize, usize)> = config
        .n_sweep
        .iter()
        .flat_map(|&n| {
            (0..METHODS.len()).flat_map(move |m| {
                let reps = if METHODS[m] == "sobol" { 1 } else { config.repetitions };
                (0..reps).map(move |r| (n, m, r))
            })
        })
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(n, m, r)| repetition(config, m, n, r))
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    let mut k = 0;
    while k < jobs.len() {
        let (n, m, _) = jobs[k];
        let mut means = Vec::new();
        let mut min = f64::INFINITY;
        while k < jobs.len() && (jobs[k].0, jobs[k].1) == (n, m) {
            let v = &results[k];
            means.push(v.iter().sum::<f64>() / v.len() as f64);
            min = v.iter().copied().fold(min, f64::min);
            k += 1;
        }
        cells.push(Cell {
            n,
            method: METHODS[m],
            mean: means.iter().sum::<f64>() / means.len() as f64,
            min,
            reps: means.len(),
        });
    }
    Ok(cells)
}

pub fn to_csv(cells: &[Cell]) -> String {
    let mut s = format!("{HEADER}\n");
    for c in cells {
        writeln!(s, "{},{},{},{},{}", c.n, c.method, cell(Some(c.mean)), cell(Some(c.min)), c.reps).unwrap();
    }
    s
}

/// One row per `n`, one column per method, means to six decimals.
pub fn to_text(cells: &[Cell]) -> String {
    let mut s = format!("{:>5}", "n");
    for m in METHODS {
        write!(s, " {m:>13}").unwrap();
    }
    s.push('\n');
    for row in cells.chunks(METHODS.len()) {
        write!(s, "{:>5}", row[0].n).unwrap();
        for c in row {
            write!(s, " {:>13.6}", c.mean).unwrap();
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_table() {
        let mut cfg = ExperimentConfig::default();
        cfg.n_sweep = vec![8];
        cfg.repetitions = 2;
        let cells = table1(&cfg).unwrap();
        assert_eq!(cells.len(), METHODS.len());
        assert_eq!(cells[0].method, "sobol");
        assert_eq!(cells[0].mean, 0.3125);
        assert_eq!(cells[0].reps, 1);
        assert!(cells[1..].iter().all(|c| c.reps == 2 && c.min <= c.mean));
        let csv = to_csv(&cells);
        assert!(csv.starts_with("n,method,mean,min,reps\n8,sobol,0.3125,0.3125,1\n"));
        assert_eq!(table1(&cfg).unwrap(), cells);
    }
}

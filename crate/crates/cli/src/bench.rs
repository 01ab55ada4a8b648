//! `bench`: integration errors across an `n` sweep.
//!
//! Column mapping for plotting: `n` is the abscissa, `mae` the curve and
//! `iqr_lo` / `iqr_hi` the band (quartiles of the absolute error), one curve
//! per `method`; `alpha` is the fitted rate of that curve.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::Result;
use qmc_transfer::metrics::{integration_error, ols_slope, star_discrepancy_exact, summarize, MAX_EXACT_DIM};
use qmc_transfer::sampling::{derive_seed, iid_uniform, sobol, Scramble};
use qmc_transfer::transference::run;
use qmc_transfer::PointSet;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, RunSeeds};
use crate::io::cell;

pub const RAW_HEADER: &str = "method,n,d,seed,error,abs_error,stardisc";
pub const SUMMARY_HEADER: &str = "method,n,mae,iqr_lo,iqr_hi,alpha";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    WSubgTrans,
    Iid,
    Sobol,
    SobolScrambled,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::WSubgTrans => "wsubgtrans",
            Method::Iid => "iid",
            Method::Sobol => "sobol",
            Method::SobolScrambled => "sobol-scrambled",
        }
    }

    fn deterministic(self) -> bool {
        self == Method::Sobol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub method: Method,
    pub n: usize,
    pub d: usize,
    pub seed: Option<u64>,
    pub error: f64,
    pub stardisc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub n: usize,
    pub mae: f64,
    pub iqr_lo: f64,
    pub iqr_hi: f64,
    pub alpha: Option<f64>,
}

pub fn methods(config: &ExperimentConfig) -> Vec<Method> {
    let b = config.baselines;
    let mut m = vec![Method::WSubgTrans];
    m.extend(b.iid.then_some(Method::Iid));
    m.extend(b.sobol.then_some(Method::Sobol));
    m.extend(b.sobol_scrambled.then_some(Method::SobolScrambled));
    m
}

/// The point set and seed of one repetition. Transference contributes its
/// first output set, so repetitions are independent runs.
fn points(config: &ExperimentConfig, method: Method, n: usize, rep: usize) -> Result<(PointSet, Option<u64>)> {
    let base = derive_seed(config.seed, &[method as u64]);
    let seed = derive_seed(base, &[n as u64, rep as u64]);
    Ok(match method {
        Method::WSubgTrans => {
            let seeds = RunSeeds::derive(base, n, rep);
            let (mut sets, _) = run(&config.transference(n, seeds)?)?;
            (sets.swap_remove(0), Some(seeds.run))
        }
        Method::Iid => (iid_uniform(n, config.d, seed), Some(seed)),
        Method::Sobol => (sobol(n, config.d, Scramble::None)?, None),
        Method::SobolScrambled => (sobol(n, config.d, Scramble::Owen(seed))?, Some(seed)),
    })
}

pub fn bench(config: &ExperimentConfig) -> Result<Vec<RawRow>> {
    let (f, exact) = config.integrand()?;
    let methods = methods(config);
    let jobs: Vec<(Method, usize, usize)> = methods
        .iter()
        .flat_map(|&m| {
            let reps = if m.deterministic() { 1 } else { config.repetitions };
            config
                .n_sweep
                .iter()
                .flat_map(move |&n| (0..reps).map(move |r| (m, n, r)))
        })
        .collect();
    jobs.par_iter()
        .map(|&(method, n, rep)| {
            let (pts, seed) = points(config, method, n, rep)?;
            Ok(RawRow {
                method,
                n,
                d: config.d,
                seed,
                error: integration_error(&pts, |x| f.eval(x), exact),
                stardisc: if config.d <= MAX_EXACT_DIM {
                    Some(star_discrepancy_exact(&pts)?.value)
                } else {
                    None
                },
            })
        })
        .collect()
}

/// Per-method summaries; a method with one error per `n` reports that
/// error's magnitude as MAE and both quartiles.
pub fn summary(rows: &[RawRow]) -> Result<Vec<SummaryRow>> {
    let mut by_method: BTreeMap<Method, Vec<(usize, f64)>> = BTreeMap::new();
    for r in rows {
        by_method.entry(r.method).or_default().push((r.n, r.error));
    }
    let mut out = Vec::new();
    for (method, errs) in by_method {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &(n, _) in &errs {
            *counts.entry(n).or_default() += 1;
        }
        if counts.values().all(|&c| c >= 2) {
            let s = summarize(&errs)?;
            out.extend(s.sizes.iter().map(|z| SummaryRow {
                method,
                n: z.n,
                mae: z.mae,
                iqr_lo: z.abs_q1,
                iqr_hi: z.abs_q3,
                alpha: s.alpha,
            }));
        } else {
            let mut single: Vec<(usize, f64)> = errs.iter().map(|&(n, e)| (n, e.abs())).collect();
            single.sort_by_key(|&(n, _)| n);
            let alpha = if single.iter().all(|&(_, e)| e > 0.0) {
                let x: Vec<f64> = single.iter().map(|&(n, _)| (n as f64).ln()).collect();
                let y: Vec<f64> = single.iter().map(|&(_, e)| e.ln()).collect();
                ols_slope(&x, &y).map(|s| -s)
            } else {
                None
            };
            out.extend(single.iter().map(|&(n, e)| SummaryRow {
                method,
                n,
                mae: e,
                iqr_lo: e,
                iqr_hi: e,
                alpha,
            }));
        }
    }
    Ok(out)
}

pub fn raw_csv(rows: &[RawRow]) -> String {
    let mut s = format!("{RAW_HEADER}\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.method.name(),
            r.n,
            r.d,
            r.seed.map(|v| v.to_string()).unwrap_or_default(),
            cell(Some(r.error)),
            cell(Some(r.error.abs())),
            cell(r.stardisc)
        )
        .unwrap();
    }
    s
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            r.method.name(),
            r.n,
            cell(Some(r.mae)),
            cell(Some(r.iqr_lo)),
            cell(Some(r.iqr_hi)),
            cell(r.alpha)
        )
        .unwrap();
    }
    s
}

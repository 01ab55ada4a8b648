//! `audit`: replays a manifest and checks the lineage identity against the
//! written output files.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use anyhow::Result;
use qmc_transfer::balance::Coloring;
use qmc_transfer::metrics::{random_dyadic_regions, transference_audit_all};
use qmc_transfer::region::{Interval, Region};
use qmc_transfer::transference::TransferenceTrail;
use qmc_transfer::PointSet;

use crate::config::read_points;
use crate::error::{usage, OrUsage};
use crate::generate::{digest, Manifest};

pub const TOLERANCE: f64 = 1e-10;
pub const DEFAULT_REGION_COUNT: usize = 100;

/// Boxes `prod_j (lo_j, hi_j]`, one per line as `lo_1 hi_1 ... lo_d hi_d`.
/// Blank lines and `#` comments are skipped.
pub fn read_regions(path: &Path, d: usize) -> Result<Vec<Region>> {
    let file = std::fs::File::open(path).or_usage(format!("cannot open regions file {}", path.display()))?;
    let mut regions = Vec::new();
    for (no, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let vals: Vec<f64> = body
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .or_usage(format!("{}:{}", path.display(), no + 1))?;
        if vals.len() != 2 * d {
            return Err(usage(format!(
                "{}:{}: expected {} numbers, got {}",
                path.display(),
                no + 1,
                2 * d,
                vals.len()
            )));
        }
        let sides = vals.chunks_exact(2).map(|s| Interval::left_open(s[0], s[1])).collect();
        regions.push(Region::new(sides));
    }
    Ok(regions)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub regions: usize,
    /// `max_t |disc_t(full cube)| / n_t`, which the identity needs to vanish.
    pub balance_violation: f64,
    /// Identity residual over the regions; `None` if the colorings could not
    /// be replayed.
    pub identity_violation: Option<f64>,
    pub digest_mismatches: Vec<(usize, usize)>,
    pub problems: Vec<String>,
}

impl AuditReport {
    pub fn max_violation(&self) -> f64 {
        self.balance_violation.max(self.identity_violation.unwrap_or(0.0))
    }

    pub fn passed(&self) -> bool {
        self.max_violation() <= TOLERANCE
            && self.identity_violation.is_some()
            && self.digest_mismatches.is_empty()
            && self.problems.is_empty()
    }
}

fn colorings(m: &Manifest, report: &mut AuditReport) -> Option<Vec<Vec<Coloring>>> {
    let mut levels: BTreeMap<usize, BTreeMap<usize, Coloring>> = BTreeMap::new();
    for node in &m.nodes {
        if digest(&node.coloring) != node.digest {
            report.digest_mismatches.push((node.t, node.i));
        }
        let c = match Coloring::from_sign_string(&node.coloring) {
            Ok(c) => c,
            Err(e) => {
                report.problems.push(format!("node ({}, {}): {e}", node.t, node.i));
                return None;
            }
        };
        let nt = m.n0 >> node.t;
        report.balance_violation = report.balance_violation.max(c.sum().abs() as f64 / nt as f64);
        levels.entry(node.t).or_default().insert(node.i, c);
    }
    let complete = levels.len() == m.levels
        && levels
            .iter()
            .enumerate()
            .all(|(k, (&t, nodes))| t == k && nodes.len() == 1 << t && nodes.keys().copied().eq(0..1 << t));
    if !complete {
        report.problems.push("manifest does not list every node of the halving tree".into());
        return None;
    }
    Some(levels.into_values().map(|l| l.into_values().collect()).collect())
}

fn count(points: &PointSet, region: &Region) -> usize {
    points.iter().filter(|x| region.contains(x)).count()
}

/// `max |h_file(C) - (h_0(C) + sum_t sigma_t disc_t(C) / n_t)|` over output
/// files and regions.
fn file_residual(trail: &TransferenceTrail, outputs: &[PointSet], regions: &[Region]) -> Result<f64> {
    let n0 = trail.population() as f64;
    let mut worst: f64 = 0.0;
    for (p, set) in outputs.iter().enumerate() {
        let lineage = trail.lineage(TransferenceTrail::leaf_at_output(p))?;
        for region in regions {
            let vol = region.volume();
            let lhs = vol - count(set, region) as f64 / set.len() as f64;
            let mut rhs = vol - count(&trail.initial, region) as f64 / n0;
            for s in &lineage {
                let nt = trail.node(s.level, s.node)?.members.len() as f64;
                rhs += s.sigma as f64 * trail.combinatorial_disc(region, s.level, s.node)? as f64 / nt;
            }
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

/// Regions from `regions_file`, or `DEFAULT_REGION_COUNT` random dyadic
/// boxes plus the unit cube.
pub fn regions_for(m: &Manifest, regions_file: Option<&Path>, seed: Option<u64>) -> Result<Vec<Region>> {
    match regions_file {
        Some(p) => read_regions(p, m.d),
        None => {
            let mut r = random_dyadic_regions(m.d, m.h, DEFAULT_REGION_COUNT, seed.unwrap_or(m.seeds.run));
            r.push(Region::unit(m.d));
            Ok(r)
        }
    }
}

pub fn audit(manifest_path: &Path, regions: &[Region]) -> Result<AuditReport> {
    let m = Manifest::read(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    if let Some(r) = regions.iter().find(|r| r.dim() != m.d) {
        return Err(usage(format!("region has dimension {}, manifest has d = {}", r.dim(), m.d)));
    }
    let mut report = AuditReport {
        regions: regions.len(),
        balance_violation: 0.0,
        identity_violation: None,
        digest_mismatches: Vec::new(),
        problems: Vec::new(),
    };
    let initial = m.config.transference(m.n, m.seeds)?.initial_population()?;
    if initial.len() != m.n0 {
        report.problems.push(format!("initial population has {} points, manifest says {}", initial.len(), m.n0));
        return Ok(report);
    }
    let outputs = m
        .files
        .iter()
        .map(|f| read_points(&dir.join(f)))
        .collect::<Result<Vec<_>>>()?;
    let Some(colorings) = colorings(&m, &mut report) else {
        return Ok(report);
    };
    let trail = match TransferenceTrail::replay(m.n, m.h, m.shift.clone(), initial, colorings) {
        Ok(t) => t,
        Err(e) => {
            report.problems.push(format!("replay failed: {e}"));
            return Ok(report);
        }
    };
    if outputs.len() != trail.leaves.len() {
        report
            .problems
            .push(format!("{} output files for {} leaves", outputs.len(), trail.leaves.len()));
        return Ok(report);
    }
    let internal = transference_audit_all(&trail, regions)?;
    report.identity_violation = Some(internal.max(file_residual(&trail, &outputs, regions)?));
    Ok(report)
}

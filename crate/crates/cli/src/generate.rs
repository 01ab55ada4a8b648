//! `generate`: output sets plus the trail manifest.

use std::path::{Path, PathBuf};

use anyhow::Result;
use qmc_transfer::transference::{run, TransferenceTrail};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, RunSeeds};
use crate::error::{usage, OrUsage};
use crate::io::Staged;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "qmct-manifest v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub t: usize,
    pub i: usize,
    /// One `+` / `-` per member, in node order.
    pub coloring: String,
    /// Hex sha256 of `coloring`.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub config: ExperimentConfig,
    pub seeds: RunSeeds,
    pub n: usize,
    pub d: usize,
    pub n0: usize,
    pub levels: usize,
    pub h: u32,
    pub shift: Vec<f64>,
    /// File of output set `p`, relative to the manifest.
    pub files: Vec<String>,
    pub nodes: Vec<NodeEntry>,
}

pub fn digest(coloring: &str) -> String {
    hex::encode(Sha256::digest(coloring.as_bytes()))
}

pub fn set_file_name(p: usize) -> String {
    format!("set_{p:04}.qmcpts")
}

impl Manifest {
    pub fn from_trail(config: &ExperimentConfig, seeds: RunSeeds, trail: &TransferenceTrail) -> Self {
        let nodes = trail
            .steps
            .iter()
            .flatten()
            .map(|rec| {
                let coloring = rec.coloring.to_sign_string();
                NodeEntry {
                    t: rec.level,
                    i: rec.index,
                    digest: digest(&coloring),
                    coloring,
                }
            })
            .collect();
        Self {
            format: MANIFEST_FORMAT.into(),
            config: config.clone(),
            seeds,
            n: trail.n,
            d: trail.initial.dim(),
            n0: trail.population(),
            levels: trail.levels(),
            h: trail.h,
            shift: trail.shift.clone(),
            files: (0..trail.leaves.len()).map(set_file_name).collect(),
            nodes,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).or_usage(format!("cannot read manifest {}", path.display()))?;
        let m: Self = serde_json::from_str(&text).or_usage(format!("invalid manifest {}", path.display()))?;
        if m.format != MANIFEST_FORMAT {
            return Err(usage(format!("unsupported manifest format `{}`", m.format)));
        }
        Ok(m)
    }
}

pub struct Generated {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

pub fn generate(config: &ExperimentConfig, out: &Path) -> Result<Generated> {
    let n = config.n.ok_or_else(|| usage("generate needs `n` in the config"))?;
    let seeds = RunSeeds::derive(config.seed, n, 0);
    let tcfg = config.transference(n, seeds)?;
    let (sets, trail) = run(&tcfg)?;
    let manifest = Manifest::from_trail(config, seeds, &trail);
    let mut staged = Staged::new();
    for (set, name) in sets.iter().zip(&manifest.files) {
        staged.write(&out.join(name), set.to_qmcpts().as_bytes())?;
    }
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    staged.write(&out.join(MANIFEST_FILE), json.as_bytes())?;
    staged.commit()?;
    Ok(Generated {
        dir: out.to_path_buf(),
        manifest,
    })
}

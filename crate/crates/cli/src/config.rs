//! JSON experiment configuration.
//!
//! Every field is optional; `{}` is a valid config. Unknown keys are
//! rejected. Example:
//!
//! ```json
//! {
//!   "seed": 1,
//!   "n": 8,
//!   "d": 2,
//!   "oversample_k": 16,
//!   "weights": { "gammas": [1.0, 1.0], "mode": { "kind": "full" } },
//!   "init": { "kind": "iid" },
//!   "walk": { "lambda_mode": { "greedy": { "lambda": 0.001 } } },
//!   "shift": "random",
//!   "repetitions": 16,
//!   "n_sweep": [8, 16, 32, 64, 128, 256],
//!   "baselines": { "iid": true, "sobol": true, "sobol_scrambled": true },
//!   "integrand": { "name": "truncation" },
//!   "output_dir": "out"
//! }
//! ```

use std::path::{Path, PathBuf};

use anyhow::Result;
use qmc_transfer::balance::{LambdaMode, WalkConfig};
use qmc_transfer::dyadic::{Mode, WeightProfile};
use qmc_transfer::integrands::{AsianParams, Integrand};
use qmc_transfer::sampling::{derive_seed, sobol_max_dimension, Scramble};
use qmc_transfer::transference::{Init, ShiftMode, TransferenceConfig, DEFAULT_OVERSAMPLE};
use qmc_transfer::PointSet;
use serde::{Deserialize, Serialize};

use crate::error::{usage, OrUsage};

pub const DEFAULT_SWEEP: [usize; 6] = [8, 16, 32, 64, 128, 256];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Output set size for `generate`.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_k")]
    pub oversample_k: usize,
    #[serde(default)]
    pub weights: WeightsConfig,
    /// Dyadic level; derived from `n`, `d` and the mode when absent.
    #[serde(default)]
    pub h: Option<u32>,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default)]
    pub walk: WalkSettings,
    #[serde(default)]
    pub shift: ShiftMode,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default = "default_sweep")]
    pub n_sweep: Vec<usize>,
    #[serde(default)]
    pub baselines: Baselines,
    #[serde(default)]
    pub integrand: Option<IntegrandConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_d() -> usize {
    2
}

fn default_k() -> usize {
    DEFAULT_OVERSAMPLE
}

fn default_reps() -> usize {
    16
}

fn default_sweep() -> Vec<usize> {
    DEFAULT_SWEEP.to_vec()
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    /// Defaults to unit weights, or to the 0/1 sequence in truncation mode.
    #[serde(default)]
    pub gammas: Option<Vec<f64>>,
    #[serde(default)]
    pub mode: Option<Mode>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitConfig {
    #[default]
    Iid,
    Sobol {
        #[serde(default)]
        scramble: ScrambleKind,
    },
    External {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScrambleKind {
    #[default]
    None,
    DigitalShift,
    Owen,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSettings {
    #[serde(default)]
    pub lambda_mode: LambdaMode,
    #[serde(default)]
    pub pre_shuffle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baselines {
    #[serde(default = "yes")]
    pub iid: bool,
    #[serde(default = "yes")]
    pub sobol: bool,
    #[serde(default = "yes")]
    pub sobol_scrambled: bool,
}

impl Default for Baselines {
    fn default() -> Self {
        Self {
            iid: true,
            sobol: true,
            sobol_scrambled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandConfig {
    /// Registry name: `truncation`, `asian`, `fourier:<file>`, `constant[:v]`.
    pub name: String,
    #[serde(default)]
    pub asian: Option<AsianParams>,
    /// Integral to measure errors against when none is known.
    #[serde(default)]
    pub reference: Option<f64>,
}

/// Seeds of one run, all derived from the config seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSeeds {
    pub run: u64,
    pub init: u64,
    pub walk: u64,
    pub shift: u64,
}

impl RunSeeds {
    pub fn derive(seed: u64, n: usize, rep: usize) -> Self {
        let run = derive_seed(seed, &[n as u64, rep as u64]);
        Self {
            run,
            init: derive_seed(run, &[0]),
            walk: derive_seed(run, &[1]),
            shift: derive_seed(run, &[2]),
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

impl ExperimentConfig {
    /// Parse and validate a config file. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).or_usage(format!("cannot read config {}", path.display()))?;
        let mut cfg: Self = serde_json::from_str(&text).or_usage(format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let InitConfig::External { path } = &mut cfg.init {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        if let Some(ic) = &mut cfg.integrand {
            if let Some(file) = ic.name.strip_prefix("fourier:") {
                let p = Path::new(file);
                if p.is_relative() {
                    ic.name = format!("fourier:{}", base.join(p).display());
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(usage("d must be at least 1"));
        }
        if let Some(n) = self.n {
            check_power_of_two("n", n)?;
        }
        check_power_of_two("oversample_k", self.oversample_k)?;
        if self.n_sweep.is_empty() {
            return Err(usage("n_sweep must not be empty"));
        }
        for &n in &self.n_sweep {
            check_power_of_two("n_sweep entry", n)?;
        }
        if self.repetitions == 0 {
            return Err(usage("repetitions must be at least 1"));
        }
        if matches!(self.init, InitConfig::Sobol { .. }) && self.d > sobol_max_dimension() {
            return Err(usage(format!(
                "sobol init supports d <= {}, got {}",
                sobol_max_dimension(),
                self.d
            )));
        }
        self.profile()?;
        let mut walk = WalkConfig::greedy(0.0, 1, 0);
        walk.lambda_mode = self.walk.lambda_mode;
        walk.validate().or_usage("invalid walk")?;
        Ok(())
    }

    pub fn profile(&self) -> Result<WeightProfile> {
        let mode = self.weights.mode.unwrap_or(Mode::Full);
        let p = match (&self.weights.gammas, mode) {
            (None, Mode::Truncation(s)) => WeightProfile::truncation(self.d, s),
            (None, m) => WeightProfile::new(vec![1.0; self.d], m),
            (Some(g), m) => {
                if g.len() != self.d {
                    return Err(usage(format!("weights.gammas has {} entries, d = {}", g.len(), self.d)));
                }
                WeightProfile::new(g.clone(), m)
            }
        };
        p.or_usage("invalid weights")
    }

    pub fn integrand(&self) -> Result<(Integrand, f64)> {
        let ic = self
            .integrand
            .as_ref()
            .ok_or_else(|| usage("config names no integrand"))?;
        let f = Integrand::from_name(&ic.name, self.d, ic.asian).or_usage("invalid integrand")?;
        let exact = ic
            .reference
            .or_else(|| f.exact())
            .ok_or_else(|| usage(format!("integrand `{}` has no known integral; set `reference`", ic.name)))?;
        Ok((f, exact))
    }

    /// Transference settings for output size `n` and repetition `rep`.
    pub fn transference(&self, n: usize, seeds: RunSeeds) -> Result<TransferenceConfig> {
        let mut cfg = TransferenceConfig::new(n, self.d, seeds.run);
        cfg.oversample_k = self.oversample_k;
        cfg.profile = self.profile()?;
        cfg.h_override = self.h;
        cfg.init = match &self.init {
            InitConfig::Iid => Init::Iid { seed: seeds.init },
            InitConfig::Sobol { scramble } => Init::Sobol {
                scramble: match scramble {
                    ScrambleKind::None => Scramble::None,
                    ScrambleKind::DigitalShift => Scramble::DigitalShift(seeds.init),
                    ScrambleKind::Owen => Scramble::Owen(seeds.init),
                },
            },
            InitConfig::External { path } => Init::External(read_points(path)?),
        };
        cfg.walk.lambda_mode = self.walk.lambda_mode;
        cfg.walk.rng_seed = seeds.walk;
        cfg.walk.pre_shuffle = self.walk.pre_shuffle;
        cfg.shift_mode = self.shift;
        cfg.shift_seed = seeds.shift;
        cfg.validate().or_usage("invalid transference settings")?;
        Ok(cfg)
    }
}

fn check_power_of_two(what: &str, v: usize) -> Result<()> {
    if v == 0 || !v.is_power_of_two() {
        return Err(usage(format!("{what} = {v} is not a power of two")));
    }
    Ok(())
}

pub fn read_points(path: &Path) -> Result<PointSet> {
    let file = std::fs::File::open(path).or_usage(format!("cannot open {}", path.display()))?;
    PointSet::read_qmcpts(file).or_usage(format!("cannot parse {}", path.display()))
}

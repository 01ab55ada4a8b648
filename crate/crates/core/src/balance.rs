//! Online vector balancing.
//!
//! [`SelfBalancingWalk`] assigns signs one vector at a time, keeping the
//! signed running sum `w` small: vector `v_j` gets `+1` with probability
//! `1/2 - <w, v_j> / (2 lambda)`. In strict mode the walk fails once
//! `|<w, v_j>|` or `||w||_inf` exceeds `lambda = 30 ln(m n / delta)`; in
//! greedy mode a small `lambda` is used and the sign is chosen
//! deterministically as `-sign(<w, v_j>)` whenever `|<w, v_j>| > lambda`.
//!
//! [`balanced_coloring`] pairs consecutive vectors, walks on the differences
//! `v_1 - v_2, v_3 - v_4, ...` and expands each pair sign `s` to `(s, -s)`,
//! so the coloring always sums to zero.
//!
//! `w` is touched only at the nonzero coordinates of each input, so a walk
//! costs `O(sum_j nnz(v_j))`. Small ambient dimensions use a dense buffer,
//! larger ones a hash map.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{derive_seed, Rng};
use crate::sparse::SparseVec;

/// Ambient dimensions up to this size use a dense accumulator.
const DENSE_LIMIT: u64 = 1 << 22;

pub const DEFAULT_GREEDY_LAMBDA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    Strict { delta: f64 },
    Greedy { lambda: f64 },
}

impl Default for LambdaMode {
    fn default() -> Self {
        LambdaMode::Greedy {
            lambda: DEFAULT_GREEDY_LAMBDA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub lambda_mode: LambdaMode,
    /// Ambient dimension; enters only the strict-mode `lambda`.
    pub m: u64,
    pub rng_seed: u64,
    /// Randomly permute the vectors before pairing in [`balanced_coloring`].
    #[serde(default)]
    pub pre_shuffle: bool,
}

impl WalkConfig {
    pub fn greedy(lambda: f64, m: u64, rng_seed: u64) -> Self {
        Self {
            lambda_mode: LambdaMode::Greedy { lambda },
            m,
            rng_seed,
            pre_shuffle: false,
        }
    }

    pub fn strict(delta: f64, m: u64, rng_seed: u64) -> Self {
        Self {
            lambda_mode: LambdaMode::Strict { delta },
            m,
            rng_seed,
            pre_shuffle: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.lambda_mode {
            LambdaMode::Strict { delta } if !(delta > 0.0 && delta < 1.0) => {
                Err(Error::InvalidConfig(format!("delta = {delta} must lie in (0, 1)")))
            }
            LambdaMode::Greedy { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                Err(Error::InvalidConfig(format!("lambda = {lambda} must be positive")))
            }
            _ if self.m == 0 => Err(Error::InvalidConfig("ambient dimension m must be positive".into())),
            _ => Ok(()),
        }
    }

    /// The threshold for a walk over `n` vectors.
    pub fn lambda(&self, n: usize) -> f64 {
        match self.lambda_mode {
            LambdaMode::Strict { delta } => 30.0 * ((self.m as f64) * (n.max(1) as f64) / delta).ln(),
            LambdaMode::Greedy { lambda } => lambda,
        }
    }
}

/// A `±1` assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coloring {
    signs: Vec<i8>,
    balanced: bool,
}

impl Coloring {
    pub fn new(signs: Vec<i8>, balanced: bool) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidConfig("coloring entries must be +1 or -1".into()));
        }
        let c = Self { signs, balanced };
        if balanced && c.sum() != 0 {
            return Err(Error::InvalidConfig("coloring marked balanced does not sum to 0".into()));
        }
        Ok(c)
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn is_balanced(&self) -> bool {
        self.balanced
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn sum(&self) -> i64 {
        self.signs.iter().map(|&s| s as i64).sum()
    }

    /// `+` / `-` string, one character per sign.
    pub fn to_sign_string(&self) -> String {
        self.signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
    }

    pub fn from_sign_string(s: &str) -> Result<Self> {
        let signs = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::InvalidConfig(format!("bad sign character `{other}`"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        let balanced = signs.iter().map(|&s| s as i64).sum::<i64>() == 0;
        Ok(Self { signs, balanced })
    }
}

#[derive(Debug, Clone)]
enum Accumulator {
    Dense(Vec<f64>),
    Sparse(FxHashMap<u64, f64>),
}

impl Accumulator {
    fn new(m: u64) -> Self {
        if m <= DENSE_LIMIT {
            Accumulator::Dense(vec![0.0; m as usize])
        } else {
            Accumulator::Sparse(FxHashMap::default())
        }
    }

    #[inline]
    fn dot(&self, v: &SparseVec) -> f64 {
        match self {
            Accumulator::Dense(w) => v.entries().iter().map(|&(i, x)| w[i as usize] * x).sum(),
            Accumulator::Sparse(w) => v
                .entries()
                .iter()
                .map(|&(i, x)| w.get(&i).map_or(0.0, |wi| wi * x))
                .sum(),
        }
    }

    /// `w += c v`; returns the largest `|w_i|` among touched coordinates.
    #[inline]
    fn add(&mut self, c: f64, v: &SparseVec) -> f64 {
        let mut max_abs: f64 = 0.0;
        match self {
            Accumulator::Dense(w) => {
                for &(i, x) in v.entries() {
                    let wi = &mut w[i as usize];
                    *wi += c * x;
                    max_abs = max_abs.max(wi.abs());
                }
            }
            Accumulator::Sparse(w) => {
                for &(i, x) in v.entries() {
                    let wi = w.entry(i).or_insert(0.0);
                    *wi += c * x;
                    max_abs = max_abs.max(wi.abs());
                }
            }
        }
        max_abs
    }

    fn max_abs(&self) -> f64 {
        match self {
            Accumulator::Dense(w) => w.iter().fold(0.0, |m, x| m.max(x.abs())),
            Accumulator::Sparse(w) => w.values().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    fn get(&self, i: u64) -> f64 {
        match self {
            Accumulator::Dense(w) => w.get(i as usize).copied().unwrap_or(0.0),
            Accumulator::Sparse(w) => w.get(&i).copied().unwrap_or(0.0),
        }
    }
}

/// One run of the self-balancing walk.
#[derive(Debug, Clone)]
pub struct SelfBalancingWalk {
    lambda: f64,
    greedy: bool,
    m: u64,
    w: Accumulator,
    rng: Rng,
    step: usize,
    /// Upper bound on `||w||_inf`; recomputed exactly only when it
    /// crosses `lambda`.
    max_abs_bound: f64,
}

impl SelfBalancingWalk {
    /// A walk that will see `n` vectors (`n` only enters strict-mode lambda).
    pub fn new(config: &WalkConfig, n: usize) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            lambda: config.lambda(n),
            greedy: matches!(config.lambda_mode, LambdaMode::Greedy { .. }),
            m: config.m,
            w: Accumulator::new(config.m),
            rng: Rng::new(config.rng_seed),
            step: 0,
            max_abs_bound: 0.0,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Current `w_i`.
    pub fn position(&self, i: u64) -> f64 {
        self.w.get(i)
    }

    /// Current `<w, v>`.
    pub fn alignment(&self, v: &SparseVec) -> f64 {
        self.w.dot(v)
    }

    /// Sign the next vector and fold it into `w`.
    pub fn step(&mut self, v: &SparseVec) -> Result<i8> {
        if let Some(max) = v.max_index() {
            if max >= self.m {
                return Err(Error::DimensionMismatch {
                    expected: self.m as usize,
                    got: max as usize + 1,
                });
            }
        }
        let ip = self.w.dot(v);
        let sign = self.choose(ip)?;
        let touched = self.w.add(sign as f64, v);
        self.max_abs_bound = self.max_abs_bound.max(touched);
        Ok(sign)
    }

    /// A greedy walk whose position is tracked by the caller, who supplies
    /// each alignment to [`Self::choose`].
    pub(crate) fn detached(config: &WalkConfig, n: usize) -> Result<Self> {
        config.validate()?;
        if !matches!(config.lambda_mode, LambdaMode::Greedy { .. }) {
            return Err(Error::InvalidConfig("a detached walk must be greedy".into()));
        }
        Ok(Self {
            lambda: config.lambda(n),
            greedy: true,
            m: config.m,
            w: Accumulator::Sparse(FxHashMap::default()),
            rng: Rng::new(config.rng_seed),
            step: 0,
            max_abs_bound: 0.0,
        })
    }

    /// Sign for the next vector given its alignment `<w, v>`.
    pub(crate) fn choose(&mut self, ip: f64) -> Result<i8> {
        let j = self.step;
        let sign = if self.greedy {
            if ip.abs() > self.lambda {
                if ip > 0.0 {
                    -1
                } else {
                    1
                }
            } else {
                self.sample(ip)
            }
        } else {
            if self.max_abs_bound > self.lambda {
                self.max_abs_bound = self.w.max_abs();
            }
            if ip.abs() > self.lambda || self.max_abs_bound > self.lambda {
                return Err(Error::WalkFailure {
                    step: j,
                    alignment: ip,
                    max_abs: self.max_abs_bound,
                    lambda: self.lambda,
                });
            }
            self.sample(ip)
        };
        self.step += 1;
        Ok(sign)
    }

    fn sample(&mut self, ip: f64) -> i8 {
        let p = (0.5 - ip / (2.0 * self.lambda)).clamp(0.0, 1.0);
        if self.rng.bernoulli(p) {
            1
        } else {
            -1
        }
    }
}

/// Run the walk over `vectors`; the result is generally not balanced.
pub fn self_balancing_walk<I>(vectors: I, config: &WalkConfig) -> Result<Coloring>
where
    I: IntoIterator,
    I::IntoIter: ExactSizeIterator,
    I::Item: std::borrow::Borrow<SparseVec>,
{
    let iter = vectors.into_iter();
    let mut walk = SelfBalancingWalk::new(config, iter.len())?;
    let signs = iter
        .map(|v| walk.step(std::borrow::Borrow::borrow(&v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Coloring {
        signs,
        balanced: false,
    })
}

/// Walk over pair differences supplied lazily; returns one sign per pair.
pub fn balance_pair_differences<I>(differences: I, config: &WalkConfig) -> Result<Vec<i8>>
where
    I: ExactSizeIterator<Item = SparseVec>,
{
    let mut walk = SelfBalancingWalk::new(config, differences.len())?;
    differences.map(|diff| walk.step(&diff)).collect()
}

/// Pairing order used by [`balanced_coloring`]: identity, or a seeded
/// permutation when `pre_shuffle` is set.
pub fn pairing_order(n: usize, config: &WalkConfig) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if config.pre_shuffle {
        let mut rng = Rng::new(derive_seed(config.rng_seed, &[0x5348_5546]));
        for i in (1..n).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            order.swap(i, j);
        }
    }
    order
}

/// Expand pair signs over `order` into a balanced coloring of `n` items.
pub fn expand_pair_signs(order: &[usize], pair_signs: &[i8]) -> Coloring {
    let mut signs = vec![0i8; order.len()];
    for (k, &s) in pair_signs.iter().enumerate() {
        signs[order[2 * k]] = s;
        signs[order[2 * k + 1]] = -s;
    }
    Coloring {
        signs,
        balanced: true,
    }
}

/// Balanced coloring of an even-length sequence of vectors.
pub fn balanced_coloring<V: std::borrow::Borrow<SparseVec>>(vectors: &[V], config: &WalkConfig) -> Result<Coloring> {
    let n = vectors.len();
    if n % 2 != 0 {
        return Err(Error::OddLength(n));
    }
    let order = pairing_order(n, config);
    let diffs = order
        .chunks_exact(2)
        .map(|p| vectors[p[0]].borrow().sub(vectors[p[1]].borrow()));
    let pair_signs = balance_pair_differences(diffs, config)?;
    Ok(expand_pair_signs(&order, &pair_signs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(i: u64) -> SparseVec {
        SparseVec::unit(i)
    }

    #[test]
    fn first_sign_is_fair() {
        let v = e(0);
        let mut total = 0i64;
        for seed in 0..10_000 {
            let c = self_balancing_walk([&v], &WalkConfig::greedy(1e-3, 1, seed)).unwrap();
            total += c.signs()[0] as i64;
        }
        let mean = total as f64 / 10_000.0;
        assert!(mean.abs() <= 0.05, "{mean}");
    }

    #[test]
    fn greedy_cancels_repeated_vector() {
        for seed in 0..50 {
            let cfg = WalkConfig::greedy(1e-3, 1, seed);
            let mut walk = SelfBalancingWalk::new(&cfg, 2).unwrap();
            let c1 = walk.step(&e(0)).unwrap();
            assert_eq!(walk.alignment(&e(0)), c1 as f64);
            let c2 = walk.step(&e(0)).unwrap();
            assert_eq!(c2, -c1);
            assert_eq!(walk.position(0), 0.0);
        }
    }

    #[test]
    fn strict_two_steps_never_fail() {
        let cfg = WalkConfig::strict(0.5, 1, 0);
        let lambda = cfg.lambda(2);
        assert!((lambda - 30.0 * 4f64.ln()).abs() < 1e-12);
        assert!((lambda - 41.588_830_833_596_72).abs() < 1e-9);
        let mut seen = std::collections::HashSet::new();
        for seed in 0..200 {
            let cfg = WalkConfig::strict(0.5, 1, seed);
            let mut walk = SelfBalancingWalk::new(&cfg, 2).unwrap();
            let a = walk.step(&e(0)).unwrap();
            let b = walk.step(&e(0)).unwrap();
            assert!(walk.position(0).abs() <= 2.0);
            seen.insert((a, b));
        }
        // All four outcomes are reachable under strict lambda.
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn strict_failure_reports_step() {
        // lambda = 30 ln(20) ~ 89.9 < 100 = ||w_1||_inf, so step 1 fails.
        let big = SparseVec::from_entries(vec![(0, 100.0)]);
        let cfg = WalkConfig::strict(0.5, 1, 3);
        let vs = vec![big.clone(); 10];
        match self_balancing_walk(&vs, &cfg) {
            Err(Error::WalkFailure { step, .. }) => assert!(step >= 1),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let cfg = WalkConfig::greedy(1e-3, 2, 0);
        assert!(matches!(
            self_balancing_walk([&e(5)], &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn invalid_configs() {
        assert!(WalkConfig::strict(1.5, 1, 0).validate().is_err());
        assert!(WalkConfig::greedy(0.0, 1, 0).validate().is_err());
        assert!(WalkConfig::greedy(1e-3, 0, 0).validate().is_err());
    }

    #[test]
    fn pair_of_identical_vectors() {
        for seed in 0..20 {
            let c = balanced_coloring(&[e(0), e(0)], &WalkConfig::greedy(1e-3, 1, seed)).unwrap();
            assert_eq!(c.sum(), 0);
            assert!(c.is_balanced());
        }
    }

    #[test]
    fn four_identical_vectors() {
        let vs = vec![e(0); 4];
        let c = balanced_coloring(&vs, &WalkConfig::greedy(1e-3, 1, 1)).unwrap();
        let s = c.signs();
        assert_eq!(s[0], -s[1]);
        assert_eq!(s[2], -s[3]);
        assert_eq!(c.sum(), 0);
    }

    #[test]
    fn identical_vectors_cancel_exactly() {
        for k in 1..=6 {
            let n = 1 << k;
            let vs = vec![e(3); n];
            let c = balanced_coloring(&vs, &WalkConfig::greedy(1e-3, 4, k as u64)).unwrap();
            let total: f64 = c.signs().iter().map(|&s| s as f64).sum();
            assert_eq!(total, 0.0);
        }
    }

    #[test]
    fn odd_length_rejected() {
        assert!(matches!(
            balanced_coloring(&[e(0), e(0), e(0)], &WalkConfig::greedy(1e-3, 1, 0)),
            Err(Error::OddLength(3))
        ));
    }

    #[test]
    fn orthogonal_stream_is_fair() {
        // Every vector is orthogonal to w, so each sign is Bernoulli(1/2).
        let n = 10_000u64;
        let vs: Vec<SparseVec> = (0..n).map(e).collect();
        let c = self_balancing_walk(&vs, &WalkConfig::greedy(1e-3, n, 11)).unwrap();
        let plus = c.signs().iter().filter(|&&s| s > 0).count() as f64;
        let z = (plus - n as f64 / 2.0) / (n as f64 / 4.0).sqrt();
        // two-sided p > 0.001
        assert!(z.abs() < 3.29, "z = {z}");
    }

    #[test]
    fn greedy_drift_bound_on_repeated_vector() {
        let lambda = 1e-3;
        for seed in 0..64 {
            let cfg = WalkConfig::greedy(lambda, 1, seed);
            let mut walk = SelfBalancingWalk::new(&cfg, 32).unwrap();
            for _ in 0..32 {
                walk.step(&e(0)).unwrap();
                assert!(walk.alignment(&e(0)).abs() <= 1.0 + lambda);
            }
        }
    }

    #[test]
    fn shuffled_pairing_stays_balanced() {
        let vs: Vec<SparseVec> = (0..16).map(|i| e(i % 3)).collect();
        let mut cfg = WalkConfig::greedy(1e-3, 3, 4);
        cfg.pre_shuffle = true;
        let order = pairing_order(16, &cfg);
        assert_ne!(order, (0..16).collect::<Vec<_>>());
        let c = balanced_coloring(&vs, &cfg).unwrap();
        assert_eq!(c.sum(), 0);
    }

    #[test]
    fn sign_string_round_trip() {
        let c = Coloring::new(vec![1, -1, -1, 1], true).unwrap();
        assert_eq!(c.to_sign_string(), "+--+");
        assert_eq!(Coloring::from_sign_string("+--+").unwrap(), c);
        assert!(Coloring::new(vec![1, 1], true).is_err());
    }

    fn random_vectors() -> impl Strategy<Value = Vec<SparseVec>> {
        proptest::collection::vec(
            proptest::collection::vec((0u64..50, -2.0f64..2.0), 0..6).prop_map(SparseVec::from_entries),
            0..20,
        )
        .prop_map(|mut v| {
            if v.len() % 2 == 1 {
                v.pop();
            }
            v
        })
    }

    proptest! {
        #[test]
        fn balanced_and_deterministic(vs in random_vectors(), seed in any::<u64>(), greedy in any::<bool>()) {
            let cfg = if greedy {
                WalkConfig::greedy(1e-3, 50, seed)
            } else {
                WalkConfig::strict(0.01, 50, seed)
            };
            let a = balanced_coloring(&vs, &cfg).unwrap();
            let b = balanced_coloring(&vs, &cfg).unwrap();
            prop_assert_eq!(a.sum(), 0);
            prop_assert_eq!(a.len(), vs.len());
            prop_assert_eq!(a, b);
        }
    }
}

//! The weighted subgaussian transference driver.
//!
//! Starting from `n0 = k n` points, every node of a binary tree is split in
//! half by a balanced coloring of its points' incidence vectors; after
//! `T = log2 k` rounds the `k` leaves each hold `n` points.
//!
//! The vector of point `z_j` at a node is its weighted dyadic incidence
//! (against the randomly shifted system) followed by a one-hot identity
//! coordinate local to the node, all divided by
//! `sqrt(1 + sum_B gamma(B)^2 1{z_j in B})`, which is the same for every
//! point. Children follow the split rule: node `(t, i)` sends its `-1`
//! points to `(t + 1, 2i)` and its `+1` points to `(t + 1, 2i + 1)`.
//!
//! Nodes at the same depth are colored in parallel; each node draws its walk
//! randomness from a seed derived from `(walk seed, t, i)`, so the result
//! does not depend on scheduling.
//!
//! Leaves are returned in binary-reflected Gray order of their sign paths:
//! output position `p` holds leaf `p ^ (p >> 1)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balance::{
    balance_pair_differences, expand_pair_signs, pairing_order, Coloring, LambdaMode, SelfBalancingWalk, WalkConfig,
};
use crate::dyadic::{default_level, IncidenceBuilder, Mode, WeightProfile};
use crate::error::{Error, Result};
use crate::pointset::{PointSet, Provenance};
use crate::region::Region;
use crate::sampling::{derive_seed, iid_uniform, sobol, Rng, Scramble};
use crate::sparse::SparseVec;

pub const DEFAULT_OVERSAMPLE: usize = 16;

/// How the dyadic system is translated before incidence vectors are built.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftMode {
    /// Uniform on `[0,1)^d`, drawn from `shift_seed`.
    #[default]
    Random,
    /// No translation; anchored boxes at dyadic corners are then unions of
    /// the balanced boxes.
    Zero,
}

/// Source of the initial population.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Iid { seed: u64 },
    Sobol { scramble: Scramble },
    External(PointSet),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferenceConfig {
    /// Output set size, a power of two.
    pub n: usize,
    pub d: usize,
    /// Population is `oversample_k * n`; a power of two.
    pub oversample_k: usize,
    pub profile: WeightProfile,
    pub h_override: Option<u32>,
    pub init: Init,
    /// `m` is replaced per node by the node's ambient dimension.
    pub walk: WalkConfig,
    pub shift_mode: ShiftMode,
    pub shift_seed: u64,
}

impl TransferenceConfig {
    /// Unit weights in full mode, greedy walk, IID start.
    pub fn new(n: usize, d: usize, seed: u64) -> Self {
        Self {
            n,
            d,
            oversample_k: DEFAULT_OVERSAMPLE,
            profile: WeightProfile::unit(d),
            h_override: None,
            init: Init::Iid { seed },
            walk: WalkConfig::greedy(crate::balance::DEFAULT_GREEDY_LAMBDA, 1, seed),
            shift_mode: ShiftMode::Random,
            shift_seed: seed,
        }
    }

    pub fn population(&self) -> usize {
        self.oversample_k * self.n
    }

    pub fn levels(&self) -> usize {
        self.oversample_k.trailing_zeros() as usize
    }

    pub fn level(&self) -> u32 {
        self.h_override
            .unwrap_or_else(|| default_level(self.d, self.n, self.profile.mode()))
    }

    pub fn draw_shift(&self) -> Vec<f64> {
        match self.shift_mode {
            ShiftMode::Random => {
                let mut rng = Rng::new(self.shift_seed);
                (0..self.d).map(|_| rng.uniform()).collect()
            }
            ShiftMode::Zero => vec![0.0; self.d],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() {
            return Err(Error::InvalidConfig(format!("n = {} is not a power of two", self.n)));
        }
        if !self.oversample_k.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "oversample_k = {} is not a power of two",
                self.oversample_k
            )));
        }
        if self.n.checked_mul(self.oversample_k).is_none() {
            return Err(Error::InvalidConfig("population size overflows".into()));
        }
        if self.d == 0 || self.profile.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: self.profile.dim(),
            });
        }
        let mut walk = self.walk;
        walk.m = walk.m.max(1);
        walk.validate()
    }

    /// The population `A_0` the run starts from.
    pub fn initial_population(&self) -> Result<PointSet> {
        let n0 = self.population();
        let points = match &self.init {
            Init::Iid { seed } => iid_uniform(n0, self.d, *seed),
            Init::Sobol { scramble } => sobol(n0, self.d, *scramble)?,
            Init::External(p) => {
                if p.dim() != self.d {
                    return Err(Error::DimensionMismatch {
                        expected: self.d,
                        got: p.dim(),
                    });
                }
                if p.len() != n0 {
                    return Err(Error::SizeMismatch {
                        expected: n0,
                        got: p.len(),
                    });
                }
                p.clone()
            }
        };
        Ok(points)
    }
}

/// One colored node of the halving tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub level: usize,
    pub index: usize,
    /// Indices into the initial population, in node order.
    pub members: Vec<usize>,
    pub coloring: Coloring,
}

impl NodeRecord {
    /// Members colored `-1` (child `2i`) and `+1` (child `2i + 1`).
    pub fn children(&self) -> (Vec<usize>, Vec<usize>) {
        split_by_sign(&self.members, self.coloring.signs())
    }
}

fn split_by_sign(members: &[usize], signs: &[i8]) -> (Vec<usize>, Vec<usize>) {
    let mut minus = Vec::with_capacity(members.len() / 2);
    let mut plus = Vec::with_capacity(members.len() / 2);
    for (&m, &s) in members.iter().zip(signs) {
        if s < 0 {
            minus.push(m);
        } else {
            plus.push(m);
        }
    }
    (minus, plus)
}

/// One step of a leaf's ancestry: node `(level, node)` and the sign
/// `sigma = +1` if the lineage took the `-1` child, `-1` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineageStep {
    pub level: usize,
    pub node: usize,
    pub sigma: i8,
}

/// Audit record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferenceTrail {
    pub n: usize,
    pub h: u32,
    pub shift: Vec<f64>,
    pub initial: PointSet,
    /// `steps[t][i]` is node `i` at depth `t`.
    pub steps: Vec<Vec<NodeRecord>>,
    /// Members of leaf `i` (algorithm numbering) at depth `T`.
    pub leaves: Vec<Vec<usize>>,
}

impl TransferenceTrail {
    /// Rebuild a trail from an initial population and per-node colorings
    /// (`colorings[t][i]`), replaying the split rule.
    pub fn replay(n: usize, h: u32, shift: Vec<f64>, initial: PointSet, colorings: Vec<Vec<Coloring>>) -> Result<Self> {
        let mut nodes: Vec<Vec<usize>> = vec![(0..initial.len()).collect()];
        let mut steps = Vec::with_capacity(colorings.len());
        for (t, level) in colorings.into_iter().enumerate() {
            if level.len() != nodes.len() {
                return Err(Error::SizeMismatch {
                    expected: nodes.len(),
                    got: level.len(),
                });
            }
            let mut records = Vec::with_capacity(level.len());
            let mut next = Vec::with_capacity(2 * level.len());
            for (i, (members, coloring)) in nodes.into_iter().zip(level).enumerate() {
                if coloring.len() != members.len() {
                    return Err(Error::SizeMismatch {
                        expected: members.len(),
                        got: coloring.len(),
                    });
                }
                let (minus, plus) = split_by_sign(&members, coloring.signs());
                next.push(minus);
                next.push(plus);
                records.push(NodeRecord {
                    level: t,
                    index: i,
                    members,
                    coloring,
                });
            }
            steps.push(records);
            nodes = next;
        }
        Ok(Self {
            n,
            h,
            shift,
            initial,
            steps,
            leaves: nodes,
        })
    }

    pub fn levels(&self) -> usize {
        self.steps.len()
    }

    pub fn population(&self) -> usize {
        self.initial.len()
    }

    pub fn node(&self, level: usize, node: usize) -> Result<&NodeRecord> {
        self.steps
            .get(level)
            .and_then(|l| l.get(node))
            .ok_or(Error::UnknownNode { level, node })
    }

    /// Leaf index (algorithm numbering) stored at output position `p`.
    pub fn leaf_at_output(p: usize) -> usize {
        p ^ (p >> 1)
    }

    /// Output position of leaf `leaf`.
    pub fn output_of_leaf(leaf: usize) -> usize {
        let mut p = leaf;
        let mut shift = leaf >> 1;
        while shift > 0 {
            p ^= shift;
            shift >>= 1;
        }
        p
    }

    pub fn lineage(&self, leaf: usize) -> Result<Vec<LineageStep>> {
        let t_max = self.levels();
        if leaf >= 1 << t_max {
            return Err(Error::UnknownNode { level: t_max, node: leaf });
        }
        Ok((0..t_max)
            .map(|t| {
                let node = leaf >> (t_max - t);
                let went_plus = (leaf >> (t_max - t - 1)) & 1 == 1;
                LineageStep {
                    level: t,
                    node,
                    sigma: if went_plus { -1 } else { 1 },
                }
            })
            .collect())
    }

    pub fn leaf_points(&self, leaf: usize) -> Result<PointSet> {
        let members = self.leaves.get(leaf).ok_or(Error::UnknownNode {
            level: self.levels(),
            node: leaf,
        })?;
        Ok(self.initial.select(
            members,
            Provenance::new(self.initial.provenance().seed, format!("wsubgtrans leaf {leaf}")),
        ))
    }

    /// Point sets in output order.
    pub fn output_sets(&self) -> Result<Vec<PointSet>> {
        (0..self.leaves.len())
            .map(|p| self.leaf_points(Self::leaf_at_output(p)))
            .collect()
    }

    /// Number of points of `members` inside `region`.
    pub fn count_in(&self, members: &[usize], region: &Region) -> i64 {
        members
            .iter()
            .filter(|&&m| region.contains(self.initial.point(m)))
            .count() as i64
    }

    /// `disc_t(C)`: `+1` points minus `-1` points of node `(t, i)` in `C`.
    ///
    /// Regions are taken in the frame of the output points; the shift only
    /// affects which incidence vectors the walk saw.
    pub fn combinatorial_disc(&self, region: &Region, level: usize, node: usize) -> Result<i64> {
        let rec = self.node(level, node)?;
        Ok(rec
            .members
            .iter()
            .zip(rec.coloring.signs())
            .filter(|(&m, _)| region.contains(self.initial.point(m)))
            .map(|(_, &s)| s as i64)
            .sum())
    }
}

/// Node vector: incidence entries, then the identity coordinate.
fn node_vector(builder: &IncidenceBuilder, point: &[f64], local: usize, scale: f64, buf: &mut Vec<(u64, f64)>) -> Result<SparseVec> {
    builder.incidence_into(point, buf)?;
    let mut entries = Vec::with_capacity(buf.len() + 1);
    entries.extend(buf.iter().map(|&(i, w)| (i, w * scale)));
    entries.push((builder.space().len() + local as u64, scale));
    Ok(SparseVec::from_sorted_unchecked(entries))
}

/// Unscaled vectors `(incidence, e_j)` for every point of `points`; the
/// identity coordinate of point `j` is `box_count + j`.
pub fn incidence_block(points: &PointSet, builder: &IncidenceBuilder) -> Result<Vec<SparseVec>> {
    let mut buf = Vec::new();
    points
        .iter()
        .enumerate()
        .map(|(j, p)| node_vector(builder, p, j, 1.0, &mut buf))
        .collect()
}

/// How a node's walk computes alignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Engine {
    /// Explicit sparse vectors and position `w`.
    Sparse,
    /// Greedy only: `<w, v>` as a signed sum of kernel values against the
    /// pairs already placed, which avoids touching `w` at all.
    Gram,
}

fn entries_per_point(builder: &IncidenceBuilder) -> f64 {
    let a = builder.active_dims().len() as f64;
    let h = builder.level() as f64;
    match builder.profile().mode() {
        Mode::Full | Mode::Truncation(_) => (h + 1.0).powf(a),
        Mode::Superposition(s) => {
            let mut binom = 1.0;
            let mut total = 0.0;
            for k in 0..=s {
                if k as f64 > a {
                    break;
                }
                total += binom * h.powi(k as i32);
                binom = binom * (a - k as f64) / (k as f64 + 1.0);
            }
            total
        }
    }
}

fn pick_engine(builder: &IncidenceBuilder, walk: &WalkConfig, nt: usize) -> Engine {
    if !matches!(walk.lambda_mode, LambdaMode::Greedy { .. }) {
        return Engine::Sparse;
    }
    let pairs = (nt / 2) as f64;
    // Rough per-entry costs in nanoseconds: dense accumulator, hash map,
    // one kernel coordinate.
    let per_entry = if builder.space().len() <= 1 << 22 { 4.0 } else { 60.0 };
    let sparse = pairs * 2.0 * entries_per_point(builder) * per_entry;
    let gram = pairs * pairs * 2.0 * (builder.active_dims().len() as f64 + 2.0);
    if gram < sparse {
        Engine::Gram
    } else {
        Engine::Sparse
    }
}

fn color_node(
    builder: &IncidenceBuilder,
    scale: f64,
    initial: &PointSet,
    walk: &WalkConfig,
    level: usize,
    index: usize,
    members: Vec<usize>,
) -> Result<NodeRecord> {
    let nt = members.len();
    let wrap = |source: Error| Error::TransferenceFailure {
        level,
        node: index,
        source: Box::new(source),
    };
    let m = builder
        .space()
        .len()
        .checked_add(nt as u64)
        .ok_or_else(|| Error::IndexOverflow {
            d: builder.profile().dim(),
            h: builder.level(),
        })?;
    let cfg = WalkConfig {
        m,
        rng_seed: derive_seed(walk.rng_seed, &[level as u64, index as u64]),
        ..*walk
    };
    let order = pairing_order(nt, &cfg);
    let pair_signs = match pick_engine(builder, &cfg, nt) {
        Engine::Sparse => sparse_walk(builder, scale, initial, &members, &order, &cfg),
        Engine::Gram => gram_walk(builder, scale, initial, &members, &order, &cfg),
    }
    .map_err(wrap)?;
    let coloring = expand_pair_signs(&order, &pair_signs);
    Ok(NodeRecord {
        level,
        index,
        members,
        coloring,
    })
}

fn sparse_walk(
    builder: &IncidenceBuilder,
    scale: f64,
    initial: &PointSet,
    members: &[usize],
    order: &[usize],
    cfg: &WalkConfig,
) -> Result<Vec<i8>> {
    let mut buf = Vec::new();
    let mut first_error = None;
    let diffs = order.chunks_exact(2).map(|pair| {
        let a = node_vector(builder, initial.point(members[pair[0]]), pair[0], scale, &mut buf);
        let b = node_vector(builder, initial.point(members[pair[1]]), pair[1], scale, &mut buf);
        match (a, b) {
            (Ok(a), Ok(b)) => a.sub(&b),
            (Err(e), _) | (_, Err(e)) => {
                first_error.get_or_insert(e);
                SparseVec::default()
            }
        }
    });
    let signs = balance_pair_differences(diffs, cfg)?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(signs),
    }
}

fn gram_walk(
    builder: &IncidenceBuilder,
    scale: f64,
    initial: &PointSet,
    members: &[usize],
    order: &[usize],
    cfg: &WalkConfig,
) -> Result<Vec<i8>> {
    let a = builder.active_dims().len();
    let mut digits = Vec::with_capacity(order.len() * a);
    let mut one = Vec::with_capacity(a);
    for &j in order {
        builder.digits_into(initial.point(members[j]), &mut one)?;
        digits.extend_from_slice(&one);
    }
    let point = |j: usize| &digits[j * a..(j + 1) * a];
    let pairs = order.len() / 2;
    let mut walk = SelfBalancingWalk::detached(cfg, pairs)?;
    let mut signs: Vec<i8> = Vec::with_capacity(pairs);
    let scale_sq = scale * scale;
    for p in 0..pairs {
        let (x, y) = (point(2 * p), point(2 * p + 1));
        let mut ip = 0.0;
        for (q, &c) in signs.iter().enumerate() {
            let (u, v) = (point(2 * q), point(2 * q + 1));
            let k = builder.kernel(u, x) - builder.kernel(u, y) - builder.kernel(v, x) + builder.kernel(v, y);
            ip += c as f64 * k;
        }
        signs.push(walk.choose(ip * scale_sq)?);
    }
    Ok(signs)
}

/// Run the transference and return the `k` output sets (in output order)
/// together with the full trail.
pub fn run(config: &TransferenceConfig) -> Result<(Vec<PointSet>, TransferenceTrail)> {
    config.validate()?;
    let initial = config.initial_population()?;
    let h = config.level();
    let shift = config.draw_shift();
    let builder = IncidenceBuilder::new(h, config.profile.clone(), shift.clone())?;
    let scale = 1.0 / (1.0 + config.profile.incidence_norm_sq(h)).sqrt();

    let mut nodes: Vec<Vec<usize>> = vec![(0..initial.len()).collect()];
    let mut steps = Vec::with_capacity(config.levels());
    for level in 0..config.levels() {
        let records = nodes
            .into_par_iter()
            .enumerate()
            .map(|(index, members)| color_node(&builder, scale, &initial, &config.walk, level, index, members))
            .collect::<Result<Vec<_>>>()?;
        nodes = records
            .iter()
            .flat_map(|r| {
                let (minus, plus) = r.children();
                [minus, plus]
            })
            .collect();
        steps.push(records);
    }
    let trail = TransferenceTrail {
        n: config.n,
        h,
        shift,
        initial,
        steps,
        leaves: nodes,
    };
    let sets = trail.output_sets()?;
    Ok((sets, trail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{Mode, WeightProfile};
    use crate::region::Interval;

    #[test]
    fn small_run_partitions_population() {
        let mut cfg = TransferenceConfig::new(2, 1, 7);
        cfg.oversample_k = 2;
        let (sets, trail) = run(&cfg).unwrap();
        assert_eq!(sets.len(), 2);
        assert!(sets.iter().all(|s| s.len() == 2));
        let mut all: Vec<f64> = sets.iter().flat_map(|s| s.coords().to_vec()).collect();
        let mut init = trail.initial.coords().to_vec();
        all.sort_by(f64::total_cmp);
        init.sort_by(f64::total_cmp);
        assert_eq!(all, init);
        assert_eq!(init.len(), 4);
    }

    #[test]
    fn deterministic_given_config() {
        let cfg = TransferenceConfig::new(8, 2, 3);
        let (a, ta) = run(&cfg).unwrap();
        let (b, tb) = run(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
    }

    #[test]
    fn rejects_bad_sizes() {
        let mut cfg = TransferenceConfig::new(12, 2, 0);
        assert!(matches!(run(&cfg), Err(Error::InvalidConfig(_))));
        cfg.n = 8;
        cfg.oversample_k = 3;
        assert!(matches!(run(&cfg), Err(Error::InvalidConfig(_))));
        cfg.oversample_k = 2;
        cfg.init = Init::External(iid_uniform(15, 2, 0));
        assert!(matches!(run(&cfg), Err(Error::SizeMismatch { expected: 16, got: 15 })));
    }

    #[test]
    fn external_init_is_used_verbatim() {
        let pts = iid_uniform(32, 2, 99);
        let mut cfg = TransferenceConfig::new(8, 2, 1);
        cfg.oversample_k = 4;
        cfg.init = Init::External(pts.clone());
        let (_, trail) = run(&cfg).unwrap();
        assert_eq!(trail.initial, pts);
    }

    #[test]
    fn every_node_balanced_and_children_partition() {
        let mut cfg = TransferenceConfig::new(16, 2, 5);
        cfg.profile = WeightProfile::full(vec![1.0, 0.5]).unwrap();
        let (_, trail) = run(&cfg).unwrap();
        for (t, level) in trail.steps.iter().enumerate() {
            assert_eq!(level.len(), 1 << t);
            for rec in level {
                assert_eq!(rec.coloring.sum(), 0);
                let (minus, plus) = rec.children();
                assert_eq!(minus.len(), plus.len());
                let full = Region::unit(2);
                assert_eq!(trail.combinatorial_disc(&full, t, rec.index).unwrap(), 0);
            }
        }
        assert!(trail.node(9, 0).is_err());
    }

    #[test]
    fn incidence_block_examples() {
        let profile = WeightProfile::unit(1);
        let builder = IncidenceBuilder::new(1, profile, vec![0.0]).unwrap();
        let pts = PointSet::new(1, vec![0.3, 0.8], Provenance::new(0, "t")).unwrap();
        let vs = incidence_block(&pts, &builder).unwrap();
        // boxes: 0 = (0,1], 1 = (0,1/2], 2 = (1/2,1]; identities at 3, 4.
        assert_eq!(vs[0].entries(), &[(0, 1.0), (1, 1.0), (3, 1.0)]);
        assert_eq!(vs[1].entries(), &[(0, 1.0), (2, 1.0), (4, 1.0)]);
        assert!(vs.iter().all(|v| v.norm_sq() == 3.0));

        let t = WeightProfile::truncation(3, 1).unwrap();
        let b = IncidenceBuilder::new(2, t, vec![0.0; 3]).unwrap();
        let p = PointSet::new(3, vec![0.3, 0.9, 0.1], Provenance::new(0, "t")).unwrap();
        assert_eq!(incidence_block(&p, &b).unwrap()[0].nnz(), 4);

        let s = WeightProfile::superposition(vec![1.0, 1.0], 1).unwrap();
        let b = IncidenceBuilder::new(1, s, vec![0.0; 2]).unwrap();
        let p = PointSet::new(2, vec![0.3, 0.7], Provenance::new(0, "t")).unwrap();
        assert_eq!(incidence_block(&p, &b).unwrap()[0].nnz(), 4);
    }

    #[test]
    fn combinatorial_disc_counts_signs() {
        let pts = PointSet::new(1, vec![0.1, 0.9], Provenance::new(0, "t")).unwrap();
        let coloring = Coloring::new(vec![1, -1], true).unwrap();
        let trail = TransferenceTrail::replay(1, 1, vec![0.0], pts, vec![vec![coloring]]).unwrap();
        let half = Region::new(vec![Interval::left_open(0.0, 0.5)]);
        assert_eq!(trail.combinatorial_disc(&half, 0, 0).unwrap(), 1);
        let empty = Region::new(vec![Interval::left_open(0.3, 0.3)]);
        assert_eq!(trail.combinatorial_disc(&empty, 0, 0).unwrap(), 0);
        assert_eq!(trail.combinatorial_disc(&Region::unit(1), 0, 0).unwrap(), 0);
        assert!(matches!(
            trail.combinatorial_disc(&half, 1, 0),
            Err(Error::UnknownNode { .. })
        ));
    }

    #[test]
    fn gray_order_round_trip() {
        for leaf in 0..64 {
            let p = TransferenceTrail::output_of_leaf(leaf);
            assert_eq!(TransferenceTrail::leaf_at_output(p), leaf);
        }
        assert_eq!(TransferenceTrail::leaf_at_output(0), 0);
    }

    #[test]
    fn lineage_signs_follow_split_rule() {
        let mut cfg = TransferenceConfig::new(4, 1, 2);
        cfg.oversample_k = 8;
        let (_, trail) = run(&cfg).unwrap();
        let lin = trail.lineage(0b101).unwrap();
        assert_eq!(
            lin,
            vec![
                LineageStep { level: 0, node: 0, sigma: -1 },
                LineageStep { level: 1, node: 1, sigma: 1 },
                LineageStep { level: 2, node: 2, sigma: -1 },
            ]
        );
        assert!(trail.lineage(8).is_err());
    }

    #[test]
    fn replay_reproduces_run() {
        let mut cfg = TransferenceConfig::new(8, 2, 11);
        cfg.profile = WeightProfile::new(vec![1.0, 1.0], Mode::Superposition(1)).unwrap();
        let (_, trail) = run(&cfg).unwrap();
        let colorings = trail
            .steps
            .iter()
            .map(|l| l.iter().map(|r| r.coloring.clone()).collect())
            .collect();
        let replayed =
            TransferenceTrail::replay(trail.n, trail.h, trail.shift.clone(), trail.initial.clone(), colorings).unwrap();
        assert_eq!(replayed, trail);
    }

    #[test]
    fn shift_modes() {
        let mut cfg = TransferenceConfig::new(4, 3, 8);
        let (_, t) = run(&cfg).unwrap();
        assert!(t.shift.iter().all(|&s| (0.0..1.0).contains(&s)));
        assert_ne!(t.shift, vec![0.0; 3]);
        cfg.shift_mode = ShiftMode::Zero;
        let (_, t) = run(&cfg).unwrap();
        assert_eq!(t.shift, vec![0.0; 3]);
    }

    #[test]
    fn engines_agree() {
        for (d, profile) in [
            (2, WeightProfile::unit(2)),
            (4, WeightProfile::superposition(vec![1.0; 4], 2).unwrap()),
            (5, WeightProfile::truncation(5, 2).unwrap()),
        ] {
            let pts = iid_uniform(64, d, 3);
            let builder = IncidenceBuilder::new(5, profile.clone(), vec![0.25; d]).unwrap();
            let cfg = WalkConfig::greedy(1e-3, builder.space().len() + 64, 17);
            let scale = 1.0 / (1.0 + profile.incidence_norm_sq(5)).sqrt();
            let members: Vec<usize> = (0..64).collect();
            let order = pairing_order(64, &cfg);
            let a = sparse_walk(&builder, scale, &pts, &members, &order, &cfg).unwrap();
            let b = gram_walk(&builder, scale, &pts, &members, &order, &cfg).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn strict_mode_runs() {
        let mut cfg = TransferenceConfig::new(8, 2, 4);
        cfg.walk = WalkConfig::strict(0.1, 1, 4);
        let (sets, _) = run(&cfg).unwrap();
        assert_eq!(sets.len(), 16);
    }
}

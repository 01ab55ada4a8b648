//! Checks of the lineage identity
//! `h_leaf(C) = h_0(C) + sum_t sigma_t disc_t(C) / n_t`
//! with `h_t(C) = vol(C) - |C cap A_t| / n_t`.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::dyadic::{DyadicBox, DyadicInterval};
use crate::error::Result;
use crate::region::{ratio, Region};
use crate::sampling::Rng;
use crate::transference::TransferenceTrail;

struct Terms {
    /// `|C cap A_0|`, `n_0`
    root: (i64, usize),
    /// `|C cap A_leaf|`, `n_leaf`
    leaf: (i64, usize),
    /// `(sigma_t disc_t(C), n_t)` along the lineage
    steps: Vec<(i64, usize)>,
}

fn terms(trail: &TransferenceTrail, leaf: usize, region: &Region) -> Result<Terms> {
    let lineage = trail.lineage(leaf)?;
    let all: Vec<usize> = (0..trail.population()).collect();
    let members = &trail.leaves[leaf];
    let steps = lineage
        .iter()
        .map(|s| {
            let disc = trail.combinatorial_disc(region, s.level, s.node)?;
            let nt = trail.node(s.level, s.node)?.members.len();
            Ok((s.sigma as i64 * disc, nt))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Terms {
        root: (trail.count_in(&all, region), all.len()),
        leaf: (trail.count_in(members, region), members.len()),
        steps,
    })
}

/// Largest violation of the identity over `regions` for one leaf, in
/// floating point. An empty region list gives 0.
pub fn transference_audit(trail: &TransferenceTrail, leaf: usize, regions: &[Region]) -> Result<f64> {
    trail.lineage(leaf)?;
    let mut worst: f64 = 0.0;
    for region in regions {
        let t = terms(trail, leaf, region)?;
        let vol = region.volume();
        let lhs = vol - t.leaf.0 as f64 / t.leaf.1 as f64;
        let rhs = vol - t.root.0 as f64 / t.root.1 as f64
            + t.steps.iter().map(|&(s, nt)| s as f64 / nt as f64).sum::<f64>();
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// [`transference_audit`] in exact rational arithmetic.
pub fn transference_audit_exact(trail: &TransferenceTrail, leaf: usize, regions: &[Region]) -> Result<BigRational> {
    trail.lineage(leaf)?;
    let mut worst = BigRational::zero();
    for region in regions {
        let t = terms(trail, leaf, region)?;
        let vol = region.volume_exact();
        let lhs = &vol - ratio(t.leaf.0, t.leaf.1);
        let mut rhs = vol - ratio(t.root.0, t.root.1);
        for &(s, nt) in &t.steps {
            rhs += ratio(s, nt);
        }
        let v = (lhs - rhs).abs();
        if v > worst {
            worst = v;
        }
    }
    Ok(worst)
}

/// Worst violation over every leaf of the trail.
pub fn transference_audit_all(trail: &TransferenceTrail, regions: &[Region]) -> Result<f64> {
    (0..trail.leaves.len()).try_fold(0.0f64, |acc, leaf| Ok(acc.max(transference_audit(trail, leaf, regions)?)))
}

/// Random left-open dyadic boxes with levels up to `max_level` per
/// dimension.
pub fn random_dyadic_regions(d: usize, max_level: u32, count: usize, seed: u64) -> Vec<Region> {
    let mut rng = Rng::new(seed);
    (0..count)
        .map(|_| {
            let dims = (0..d)
                .map(|_| {
                    let level = (rng.next_u64() % (max_level as u64 + 1)) as u32;
                    let offset = if level == 0 { 0 } else { rng.next_u64() % (1u64 << level) };
                    DyadicInterval::new(level, offset).expect("offset below 2^level")
                })
                .collect();
            Region::from_dyadic(&DyadicBox::new(dims))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::Coloring;
    use crate::pointset::{PointSet, Provenance};
    use crate::region::Interval;
    use crate::transference::{run, TransferenceConfig};

    #[test]
    fn hand_trace_four_points() {
        // A_0 = {0.1, 0.3, 0.6, 0.8}; c = (+,-,-,+) puts {0.3, 0.6} in leaf 0
        let pts = PointSet::new(1, vec![0.1, 0.3, 0.6, 0.8], Provenance::new(0, "t")).unwrap();
        let c = Coloring::new(vec![1, -1, -1, 1], true).unwrap();
        let trail = TransferenceTrail::replay(2, 1, vec![0.0], pts, vec![vec![c]]).unwrap();
        let half = Region::new(vec![Interval::left_open(0.0, 0.5)]);
        // h_0 = 1/2 - 2/4 = 0, disc = 1 - 1 = 0, h_leaf0 = 1/2 - 1/2 = 0
        for leaf in 0..2 {
            assert_eq!(transference_audit(&trail, leaf, &[half.clone()]).unwrap(), 0.0);
            assert!(transference_audit_exact(&trail, leaf, &[half.clone()]).unwrap().is_zero());
        }
        let low = Region::new(vec![Interval::left_open(0.0, 0.2)]);
        // disc = +1; leaf 0 = -1 child has no points: h = 0.2 = (0.2 - 1/4) + 1/4
        assert!(transference_audit_exact(&trail, 0, &[low]).unwrap().is_zero());
    }

    #[test]
    fn full_cube_and_empty_list() {
        let mut cfg = TransferenceConfig::new(4, 2, 9);
        cfg.oversample_k = 4;
        let (_, trail) = run(&cfg).unwrap();
        assert_eq!(transference_audit(&trail, 3, &[Region::unit(2)]).unwrap(), 0.0);
        assert_eq!(transference_audit(&trail, 0, &[]).unwrap(), 0.0);
        assert!(transference_audit(&trail, 4, &[]).is_err());
    }

    #[test]
    fn random_regions_on_a_run() {
        let cfg = TransferenceConfig::new(64, 2, 21);
        let (_, trail) = run(&cfg).unwrap();
        let regions = random_dyadic_regions(2, 8, 100, 5);
        assert!(transference_audit_all(&trail, &regions).unwrap() <= 1e-10);
        assert!(transference_audit_exact(&trail, 7, &regions).unwrap().is_zero());
    }
}

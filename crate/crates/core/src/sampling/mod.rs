//! Random sources and baseline point generators.

mod normal;
mod rng;
mod sobol;

pub use normal::{inverse_normal_cdf, normal_cdf};
pub use rng::{derive_seed, Rng, SMALLEST_UNIFORM};
pub use sobol::{max_dimension as sobol_max_dimension, owen_scramble, sobol, Scramble, SobolSequence, DIRECTION_TABLE};

use crate::pointset::{PointSet, Provenance};

/// `n` IID uniform points in `[0, 1)^d`, row-major from one stream.
pub fn iid_uniform(n: usize, d: usize, seed: u64) -> PointSet {
    let mut rng = Rng::new(seed);
    let coords = (0..n * d).map(|_| rng.uniform()).collect();
    PointSet::new(d, coords, Provenance::new(seed, "iid")).expect("uniforms lie in [0, 1)")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_is_deterministic() {
        assert_eq!(iid_uniform(1, 1, 0).coords(), iid_uniform(1, 1, 0).coords());
        assert_ne!(iid_uniform(4, 2, 0).coords(), iid_uniform(4, 2, 1).coords());
    }

    #[test]
    fn iid_mean_within_clt_bound() {
        let p = iid_uniform(100_000, 1, 1);
        let mean = p.coords().iter().sum::<f64>() / 1e5;
        assert!((0.495..=0.505).contains(&mean), "{mean}");
    }

    #[test]
    fn iid_coordinates_uncorrelated() {
        let n = 100_000;
        let p = iid_uniform(n, 2, 2);
        let (mut sx, mut sy, mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for x in p.iter() {
            sx += x[0];
            sy += x[1];
            sxy += x[0] * x[1];
            sxx += x[0] * x[0];
            syy += x[1] * x[1];
        }
        let nf = n as f64;
        let cov = sxy / nf - sx * sy / nf / nf;
        let vx = sxx / nf - (sx / nf).powi(2);
        let vy = syy / nf - (sy / nf).powi(2);
        let corr = cov / (vx * vy).sqrt();
        assert!(corr.abs() <= 0.01, "{corr}");
    }
}

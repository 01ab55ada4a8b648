//! Weighted smoothed-out variation of Fourier polynomials.
//!
//! `sigma_WSO(f)^2 = sum_{k != 0} |c_k|^2 sum_{u nonempty} prod_{j in u} |k_j| / gamma_j^2`,
//! with the inner sum in closed form `prod_j (1 + |k_j| / gamma_j^2) - 1`.
//! Unit weights give the unweighted variation.

use crate::dyadic::WeightProfile;
use crate::error::{Error, Result};
use crate::fourier::FourierPolynomial;

/// `prod_j (1 + |k_j| / gamma_j^2) - 1`, or the offending coordinate when a
/// zero weight meets a nonzero frequency.
pub fn subset_weight_sum(k: &[i64], gammas: &[f64]) -> std::result::Result<f64, usize> {
    let mut prod = 1.0;
    for (j, (&kj, &g)) in k.iter().zip(gammas).enumerate() {
        if kj == 0 {
            continue;
        }
        if g == 0.0 {
            return Err(j);
        }
        prod *= 1.0 + kj.unsigned_abs() as f64 / (g * g);
    }
    Ok(prod - 1.0)
}

/// Squared weighted variation `sigma_WSO(f)^2`.
pub fn wso_variation(f: &FourierPolynomial, profile: &WeightProfile) -> Result<f64> {
    if f.dim() != profile.dim() {
        return Err(Error::DimensionMismatch {
            expected: profile.dim(),
            got: f.dim(),
        });
    }
    let mut total = 0.0;
    for (k, c) in f.terms() {
        if k.iter().all(|&v| v == 0) || c.norm_sqr() == 0.0 {
            continue;
        }
        let inner = subset_weight_sum(k, profile.gammas()).map_err(|coordinate| Error::InfiniteVariation {
            frequency: k.to_vec(),
            coordinate,
        })?;
        total += c.norm_sqr() * inner;
    }
    Ok(total)
}

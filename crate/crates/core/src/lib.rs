//! Quasi-Monte Carlo point sets built by weighted subgaussian transference.
//!
//! A large random (or Sobol') population is halved repeatedly by balanced
//! colorings from the self-balancing walk, run on weighted dyadic incidence
//! vectors; every leaf of the resulting binary tree is a point set with low
//! star discrepancy in the coordinates that carry weight.
//!
//! Module map:
//! * [`dyadic`]: box indexing, product weights, sparse incidence vectors
//! * [`balance`]: self-balancing walk and balanced colorings
//! * [`transference`]: the halving driver and its audit trail
//! * [`sampling`]: seeded RNG, IID and Sobol' generators, inverse normal CDF
//! * [`metrics`]: star discrepancy, error statistics, weighted variation,
//!   transference audit
//! * [`integrands`]: benchmark integrands with reference values

pub mod balance;
pub mod dyadic;
pub mod error;
pub mod fourier;
pub mod integrands;
pub mod metrics;
pub mod pointset;
pub mod region;
pub mod sampling;
pub mod sparse;
pub mod transference;

pub use error::{Error, Result};
pub use pointset::{PointSet, Provenance};

//! Discrepancy, error statistics, weighted variation and the transference
//! audit.

mod audit;
mod stardisc;
mod stats;
mod variation;

pub use audit::{random_dyadic_regions, transference_audit, transference_audit_all, transference_audit_exact};
pub use stardisc::{
    star_discrepancy, star_discrepancy_exact, star_discrepancy_grid, DiscrepancyReport, Method, Side,
    MAX_EXACT_DIM, MAX_GRID_CORNERS,
};
pub use stats::{
    integration_error, ols_slope, quantile_sorted, sample_mean, summarize, ErrorSummary, SizeSummary,
};
pub use variation::{subset_weight_sum, wso_variation};

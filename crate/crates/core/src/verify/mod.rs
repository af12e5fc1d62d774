//! Checks of the quantitative claims: the explicit sup-norm bound, moment
//! finiteness proxies, negative moments and the scaling law.

mod bound;
mod moments;
mod scaling;
mod stats;

pub use bound::{
    assemble_c_ibp, bound_constants, bound_growth_slope, check_path_bound, default_bound_gamma,
    fernique_gamma, path_entry, step_size_delta, supnorm_bound, supnorm_log_bound, BoundConstants,
    BoundParams, CIbp, PathBoundEntry, PathBoundReport,
};
pub use moments::{
    check_negative_moments, empirical_moment_stability, moment_stability_from_sups, negative_moment_report,
    negative_moment_threshold, MomentOutcome, MomentReport, StabilityEntry, StabilityReport,
};
pub use scaling::{check_homogeneity, scaling_exponent, scaling_transform, ScalingSpec};
pub use stats::{distributional_distance, ks_critical_value, MIN_KS_SAMPLES};

//! Closed-form collision moments, Chebyshev bounds, Monte Carlo success
//! estimation, minimal-query search and scaling fits.

mod moments;
mod scaling;
mod success;

pub use moments::{
    chebyshev_success, collision_moments, haar_mean_moments, haar_variance_upper, uniform_moments, CollisionMoments,
    MomentPair,
};
pub use scaling::{
    minimal_query_search, minimal_reps_search, scaling_exponent, search_minimal, ScalingFit, ScalingPoint,
    SearchOutcome, MEASURE_TWICE_REPS_CAP,
};
pub use success::{
    collision_success, empirical_success, measure_twice_success, wilson_interval, Prior, SuccessEstimate, Tally,
    TrialRecord, TrialRunner,
};

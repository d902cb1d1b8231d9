//! Distinguishing protocols and their decision rules.
//!
//! * [`collision_test`]: classical-only access, `O(√d)` queries.
//! * [`measure_twice`]: post-state access, `O(1)` queries.
//! * [`robust_measure_twice`]: coin-routed variant with an honesty baseline.

mod adversary;
mod collision;
mod cswap;
mod twice;

use serde::{Deserialize, Serialize};

pub use adversary::RepeatLast;
pub use collision::{
    collision_count, collision_test, collision_test_counted, collision_threshold, default_collision_queries,
    pair_count, CollisionOutcome,
};
pub use cswap::{controlled_swap_equivalence_check, cswap_tables, CswapCase, CswapReport, CswapTables};
pub use twice::{
    baseline_is_honest, decide_sharpness, measure_twice, measure_twice_with_bias, robust_measure_twice, robust_round,
    BiasReport, RobustReport, RobustRound, SharpnessEstimate, SHARPNESS_THRESHOLD,
};

pub use crate::measure::Hypothesis as Verdict;

/// A verdict together with the statistic and threshold that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    pub statistic: f64,
    pub threshold: f64,
}

impl Decision {
    /// `Quantum` iff `statistic ≥ threshold`.
    pub fn from_threshold(statistic: f64, threshold: f64) -> Self {
        let verdict = if statistic >= threshold {
            Verdict::Quantum
        } else {
            Verdict::Classical
        };
        Self {
            verdict,
            statistic,
            threshold,
        }
    }
}

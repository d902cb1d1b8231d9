//! Numerical checks of the Haar-moment machinery behind the lower bound:
//! Gram and Weingarten matrices over `S_T`, the twirl formula, the cycle-sum
//! identity, and the exact total-variation distance for protocols that make
//! `T` i.i.d. queries on a fixed input.

mod permutation;
mod twirl;
mod tv;
mod weingarten;

pub use permutation::{all_permutations, cycle_count, Permutation};
pub use twirl::{permutation_operator, twirl_compare, weingarten_twirl, TwirlReport};
pub use tv::{tv_iid_exact, tv_iid_protocol, tv_iid_value, TvReport};
pub use weingarten::{
    cycle_sum_identity, cycle_sum_identity_exact, weingarten_table, wg_identity_gap, GapReport, WeingartenTable,
};

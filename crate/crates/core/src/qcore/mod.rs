//! Complex linear algebra, seeded randomness and Haar sampling.

pub mod haar;
pub mod matrix;
pub mod rng;
pub mod states;

pub use haar::{complex_gaussian, sample_haar_state, sample_haar_unitary};
pub use matrix::ComplexMatrix;
pub use rng::{stream_index, RngStream, DEFAULT_SEED};
pub use states::{maximally_mixed, DensityState, PureState, UnitaryMatrix};

//! Simulation of the sharpness-learning separation between classical-only
//! and post-measurement-state access to a measurement device.
//!
//! The linear algebra and measurement layers are generic over the
//! [`Real`] scalar (`f32` or `f64`); the aliases below fix `f64`, which the
//! protocols and experiments use.

pub mod error;
pub mod expcli;
pub mod haarverify;
pub mod measure;
pub mod protocols;
pub mod qcore;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix = qcore::ComplexMatrix<f64>;
pub type Unitary = qcore::UnitaryMatrix<f64>;
pub type Density = qcore::DensityState<f64>;
pub type Pure = qcore::PureState<f64>;
pub type Povm = measure::Povm<f64>;
pub type Instrument = measure::Instrument<f64>;
pub type Device = measure::Device<f64>;
pub type WeingartenTable = haarverify::WeingartenTable<f64>;

/// Exact rational scalar for closed-form verification quantities.
pub type Rational = num_rational::Ratio<i128>;

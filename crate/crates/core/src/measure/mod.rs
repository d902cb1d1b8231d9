//! Measurement formalism and the two black-box devices.

pub mod device;
pub mod format;
pub mod povm;

pub use device::{
    make_device, Access, Backend, BlackBox, Device, DeviceKind, FastInput, Hypothesis, KindSpec, MeasurementOutcome,
    OutcomeTable, Probe, ProjectiveHaar, Response,
};
pub use format::{parse_operator_file, OperatorFile, OperatorKind, ParsedOperators};
pub use povm::{diagonal_kraus, povm_of, projective_instrument, sharpness, Instrument, Povm};

//! Hybrid quantum-classical channel autoencoders.
//!
//! A statevector simulator, parameterized circuit templates with
//! parameter-shift and adjoint gradients, small dense networks, AWGN and
//! Rayleigh channels, end-to-end training and SER evaluation.

pub mod ansatz;
pub mod autoencoder;
pub mod channel;
pub mod classical;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod qgrad;
pub mod qstate;

pub use error::{Error, Result};

pub use ansatz::{CircuitSpec, CoreLayerSpec, EncodingKind, EncodingSpec, MeasurementSpec};
pub use autoencoder::{train, Model, ModelSpec, RxSpec, TrainConfig, TrainRecord, TxSpec};
pub use channel::{ChannelConfig, ChannelFamily, SigmaMode};
pub use eval::{snr_sweep, SweepConfig, SweepResult};
pub use experiment::{zoo, zoo_model, ExperimentConfig};
pub use qstate::{GateOp, Pauli, PauliWord, StateVector};

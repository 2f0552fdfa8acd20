//! Levenberg-Marquardt least squares and the model-specific fitters that pull
//! qubit and transducer parameters out of measured or synthetic traces.

pub mod dataset;
pub mod engine;
pub mod fitters;
pub mod models;
pub mod synthetic;

pub use dataset::{Dataset, DatasetError};
pub use engine::{least_squares, FitParam, FitResult, LmOptions, Model};
pub use fitters::{
    dominant_frequency, fit_decay, fit_lorentzian, fit_power_rabi, fit_time_rabi, DecayKind, FitError, ModelKind,
};

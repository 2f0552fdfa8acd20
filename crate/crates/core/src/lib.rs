//! Models and fitting tools for a cavity electro-optic microwave-to-optical
//! transducer driving a superconducting qubit, from device geometry through to
//! remote-entanglement budgets.

pub mod eo_coupling;
pub mod fitting;
pub mod network;
pub mod qubit;
pub mod transduction;
pub mod units;
pub mod vernier;

pub use units::{AngularFrequency, Power, Transmittance};

/// Fixed nine-significant-digit rendering used by every emitted file.
pub fn format_number(value: f64) -> String {
    format!("{value:.8e}")
}

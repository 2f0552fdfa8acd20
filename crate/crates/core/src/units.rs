//! Physical constants, unit conversions and the small value types shared by
//! every model in the crate.
//!
//! Frequencies are always stored as angular frequency (rad/s). Values quoted
//! as `X/2π` in hertz enter through [`AngularFrequency::from_hz`] and leave
//! through [`AngularFrequency::hz`], so the factor of 2π is applied in exactly
//! one place.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = PLANCK / TAU;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UnitError {
    #[error("dB loss must be non-negative, got {0}")]
    NegativeLoss(f64),
    #[error("frequency must be positive, got {0} rad/s")]
    NonPositiveFrequency(f64),
    #[error("wavelength must be positive, got {0} m")]
    NonPositiveWavelength(f64),
    #[error("transmittance must lie in [0, 1], got {0}")]
    TransmittanceOutOfRange(f64),
    #[error("power must be non-negative, got {0} W")]
    NegativePower(f64),
}

/// Angular frequency in rad/s. Signed, so it also represents detunings.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngularFrequency(f64);

impl AngularFrequency {
    pub const ZERO: Self = Self(0.0);

    pub const fn from_rad_per_s(value: f64) -> Self {
        Self(value)
    }

    pub fn from_hz(hz: f64) -> Self {
        Self(TAU * hz)
    }

    /// Optical carrier frequency for a vacuum wavelength.
    pub fn from_wavelength(wavelength_m: f64) -> Result<Self, UnitError> {
        if !(wavelength_m > 0.0) {
            return Err(UnitError::NonPositiveWavelength(wavelength_m));
        }
        Ok(Self::from_hz(SPEED_OF_LIGHT / wavelength_m))
    }

    pub const fn rad_per_s(self) -> f64 {
        self.0
    }

    pub fn hz(self) -> f64 {
        self.0 / TAU
    }

    /// Vacuum wavelength for this carrier frequency.
    pub fn wavelength(self) -> Result<f64, UnitError> {
        if !(self.0 > 0.0) {
            return Err(UnitError::NonPositiveFrequency(self.0));
        }
        Ok(SPEED_OF_LIGHT / self.hz())
    }

    pub fn abs(self) -> Self {
        Self(self.0.abs())
    }

    /// Photon energy ħω in joules.
    pub fn photon_energy(self) -> f64 {
        HBAR * self.0
    }
}

impl Add for AngularFrequency {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for AngularFrequency {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Neg for AngularFrequency {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl Mul<f64> for AngularFrequency {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self(self.0 * rhs)
    }
}

impl Div<f64> for AngularFrequency {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        Self(self.0 / rhs)
    }
}

/// Ratio of two angular frequencies.
impl Div for AngularFrequency {
    type Output = f64;
    fn div(self, rhs: Self) -> f64 {
        self.0 / rhs.0
    }
}

impl fmt::Display for AngularFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2π·{:.6e} Hz", self.hz())
    }
}

/// Optical or microwave power in watts.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Power(f64);

impl Power {
    pub fn from_watts(watts: f64) -> Result<Self, UnitError> {
        if !(watts >= 0.0) {
            return Err(UnitError::NegativePower(watts));
        }
        Ok(Self(watts))
    }

    pub fn from_dbm(dbm: f64) -> Self {
        dbm_to_watts(dbm)
    }

    pub const fn watts(self) -> f64 {
        self.0
    }

    pub fn dbm(self) -> f64 {
        10.0 * (self.0 * 1e3).log10()
    }
}

/// Dimensionless power transmission in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Transmittance(f64);

impl Transmittance {
    pub const UNITY: Self = Self(1.0);

    pub fn new(value: f64) -> Result<Self, UnitError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(UnitError::TransmittanceOutOfRange(value));
        }
        Ok(Self(value))
    }

    /// Transmittance of a passive element with the given insertion loss.
    pub fn from_db_loss(loss_db: f64) -> Result<Self, UnitError> {
        if !(loss_db >= 0.0) {
            return Err(UnitError::NegativeLoss(loss_db));
        }
        Ok(Self(10f64.powf(-loss_db / 10.0)))
    }

    pub const fn value(self) -> f64 {
        self.0
    }

    pub fn db_loss(self) -> f64 {
        -10.0 * self.0.log10()
    }
}

impl Mul for Transmittance {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

pub fn dbm_to_watts(dbm: f64) -> Power {
    Power(10f64.powf((dbm - 30.0) / 10.0))
}

/// Probability that a photon is lost in an element with `loss_db` of loss.
pub fn db_to_loss_probability(loss_db: f64) -> Result<f64, UnitError> {
    Ok(1.0 - Transmittance::from_db_loss(loss_db)?.value())
}

/// Photons per second carried by `power` at carrier `omega`.
pub fn photon_flux(power: Power, omega: AngularFrequency) -> Result<f64, UnitError> {
    if !(omega.rad_per_s() > 0.0) {
        return Err(UnitError::NonPositiveFrequency(omega.rad_per_s()));
    }
    Ok(power.watts() / omega.photon_energy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn dbm_examples() {
        assert_relative_eq!(dbm_to_watts(0.0).watts(), 1e-3, max_relative = 1e-15);
        assert_relative_eq!(dbm_to_watts(-30.0).watts(), 1e-6, max_relative = 1e-15);
        // -13.8 dBm is 41.7 µW, not the 44.2 µW quoted alongside it.
        assert_relative_eq!(dbm_to_watts(-13.8).watts(), 41.686_938e-6, max_relative = 1e-6);
    }

    #[test]
    fn loss_probability_examples() {
        assert_relative_eq!(db_to_loss_probability(3.0).unwrap(), 0.498_812_766, epsilon = 1e-9);
        assert_eq!(db_to_loss_probability(0.0).unwrap(), 0.0);
        assert_relative_eq!(db_to_loss_probability(0.3).unwrap(), 0.066_745_699, epsilon = 1e-9);
        assert_eq!(db_to_loss_probability(-1.0), Err(UnitError::NegativeLoss(-1.0)));
    }

    #[test]
    fn photon_flux_examples() {
        let omega = AngularFrequency::from_hz(196e12);
        let p = Power::from_watts(44.2e-6).unwrap();
        assert_relative_eq!(photon_flux(p, omega).unwrap(), 3.403_377_854e14, max_relative = 1e-9);
        assert_eq!(photon_flux(Power::from_watts(0.0).unwrap(), omega).unwrap(), 0.0);
        let one_photon = Power::from_watts(PLANCK * 196e12).unwrap();
        assert_relative_eq!(photon_flux(one_photon, omega).unwrap(), 1.0, max_relative = 1e-12);
        assert!(photon_flux(p, AngularFrequency::ZERO).is_err());
    }

    #[test]
    fn wavelength_constructor() {
        let omega = AngularFrequency::from_wavelength(1530e-9).unwrap();
        assert_relative_eq!(omega.hz(), 195.942_783e12, max_relative = 1e-8);
        assert_relative_eq!(omega.wavelength().unwrap(), 1530e-9, max_relative = 1e-14);
        assert!(AngularFrequency::from_wavelength(0.0).is_err());
    }

    #[test]
    fn transmittance_bounds() {
        assert!(Transmittance::new(1.2).is_err());
        assert!(Transmittance::new(-0.1).is_err());
        assert!(Transmittance::from_db_loss(-0.5).is_err());
        assert_relative_eq!(Transmittance::from_db_loss(10.0).unwrap().value(), 0.1, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn hz_round_trip(hz in 1e-3f64..1e16) {
            let back = AngularFrequency::from_hz(hz).hz();
            prop_assert!((back - hz).abs() <= 1e-12 * hz);
        }

        #[test]
        fn dbm_round_trip(dbm in -200f64..60.0) {
            let back = dbm_to_watts(dbm).dbm();
            prop_assert!((back - dbm).abs() <= 1e-12 * dbm.abs().max(1.0));
        }

        #[test]
        fn db_round_trip(db in 0.0f64..80.0) {
            let back = Transmittance::from_db_loss(db).unwrap().db_loss();
            prop_assert!((back - db).abs() <= 1e-12 * db.max(1.0));
        }

        #[test]
        fn flux_is_linear(watts in 0.0f64..1.0, hz in 1e9f64..1e15) {
            let omega = AngularFrequency::from_hz(hz);
            let single = photon_flux(Power::from_watts(watts).unwrap(), omega).unwrap();
            let double = photon_flux(Power::from_watts(2.0 * watts).unwrap(), omega).unwrap();
            prop_assert_eq!(double, 2.0 * single);
        }
    }
}

//! Single-photon electro-optic coupling from lumped device parameters, and
//! the grating-coupler phase-matching relation.
//!
//! The coupling is built in three stages: the electro-optic susceptibility
//! `G/2π = n_e² r33 f0 α Γ / (2|V/E|)` (optical frequency shift per volt on the
//! electrodes), the zero-point voltage of the LC resonator
//! `V_zpf = sqrt(ħω_m / 2C)`, and their product `g_eo/2π = G·V_zpf`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{AngularFrequency, HBAR};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CouplingError {
    #[error("geometry field `{field}` is invalid: {value}")]
    InvalidGeometry { field: &'static str, value: f64 },
    #[error("`{field}` must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("cladded reference coupling must be non-zero")]
    ZeroReference,
    #[error("target coupling {target_hz} Hz needs {param} outside [{lo:e}, {hi:e}]")]
    OutOfBounds {
        param: &'static str,
        target_hz: f64,
        lo: f64,
        hi: f64,
    },
    #[error("grating has no phase-matched wavelength")]
    NoPhaseMatch,
}

/// Lumped description of the electro-optic ring and its LC resonator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceGeometry {
    /// Extraordinary refractive index.
    pub n_e: f64,
    /// Electro-optic coefficient r33 in m/V.
    pub r33_m_per_v: f64,
    /// Fraction of the ring covered by electrodes.
    pub alpha: f64,
    /// Mode-index confinement factor.
    pub gamma: f64,
    /// Electrode voltage per unit field in the waveguide, in metres.
    pub v_over_e_m: f64,
    /// LC resonator capacitance in farads.
    pub capacitance_f: f64,
    /// Optical resonance frequency in Hz.
    pub f_opt_hz: f64,
}

impl DeviceGeometry {
    pub fn validate(&self) -> Result<(), CouplingError> {
        let positive = [
            ("n_e", self.n_e),
            ("r33_m_per_v", self.r33_m_per_v),
            ("gamma", self.gamma),
            ("v_over_e_m", self.v_over_e_m),
            ("capacitance_f", self.capacitance_f),
            ("f_opt_hz", self.f_opt_hz),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(CouplingError::InvalidGeometry { field, value });
            }
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(CouplingError::InvalidGeometry {
                field: "alpha",
                value: self.alpha,
            });
        }
        Ok(())
    }
}

/// Electro-optic susceptibility `G/2π` in Hz per volt.
pub fn eo_susceptibility(g: &DeviceGeometry) -> Result<f64, CouplingError> {
    g.validate()?;
    Ok(g.n_e * g.n_e * g.r33_m_per_v * g.f_opt_hz * g.alpha * g.gamma / (2.0 * g.v_over_e_m))
}

/// RMS vacuum voltage of an LC resonator, from `C·V² = ħω/2`.
pub fn zero_point_voltage(
    capacitance_f: f64,
    omega_m: AngularFrequency,
) -> Result<f64, CouplingError> {
    if !(capacitance_f > 0.0) {
        return Err(CouplingError::NonPositive {
            field: "capacitance",
            value: capacitance_f,
        });
    }
    if omega_m.rad_per_s() < 0.0 {
        return Err(CouplingError::NonPositive {
            field: "omega_m",
            value: omega_m.rad_per_s(),
        });
    }
    Ok((HBAR * omega_m.rad_per_s() / (2.0 * capacitance_f)).sqrt())
}

/// Vacuum coupling rate from susceptibility (Hz/V) and zero-point voltage.
pub fn single_photon_coupling(g_hz_per_v: f64, v_zpf: f64) -> AngularFrequency {
    AngularFrequency::from_hz(g_hz_per_v * v_zpf)
}

/// The full chain from geometry to `g_eo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingChain {
    pub susceptibility_hz_per_v: f64,
    pub v_zpf: f64,
    pub g_eo: AngularFrequency,
}

pub fn coupling_chain(
    g: &DeviceGeometry,
    omega_m: AngularFrequency,
) -> Result<CouplingChain, CouplingError> {
    let susceptibility_hz_per_v = eo_susceptibility(g)?;
    let v_zpf = zero_point_voltage(g.capacitance_f, omega_m)?;
    Ok(CouplingChain {
        susceptibility_hz_per_v,
        v_zpf,
        g_eo: single_photon_coupling(susceptibility_hz_per_v, v_zpf),
    })
}

/// Improvement factor of the plateau electrode geometry over a fully cladded one.
pub fn plateau_vs_cladded(
    g_plateau: AngularFrequency,
    g_cladded: AngularFrequency,
) -> Result<f64, CouplingError> {
    if g_cladded.rad_per_s() == 0.0 {
        return Err(CouplingError::ZeroReference);
    }
    Ok(g_plateau / g_cladded)
}

/// Geometry parameter that [`solve_geometry`] may adjust.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryParam {
    VOverE,
    Capacitance,
    Alpha,
    R33,
    Gamma,
}

impl GeometryParam {
    pub fn name(self) -> &'static str {
        match self {
            Self::VOverE => "v_over_e",
            Self::Capacitance => "capacitance",
            Self::Alpha => "alpha",
            Self::R33 => "r33",
            Self::Gamma => "gamma",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [
            Self::VOverE,
            Self::Capacitance,
            Self::Alpha,
            Self::R33,
            Self::Gamma,
        ]
        .into_iter()
        .find(|p| p.name() == name)
    }

    /// Physically admissible search interval.
    fn bounds(self) -> (f64, f64) {
        match self {
            Self::VOverE => (1e-9, 1.0),
            Self::Capacitance => (1e-18, 1e-9),
            Self::Alpha => (0.0, 1.0),
            Self::R33 => (1e-15, 1e-9),
            Self::Gamma => (1e-6, 2.0),
        }
    }

    fn get(self, g: &DeviceGeometry) -> f64 {
        match self {
            Self::VOverE => g.v_over_e_m,
            Self::Capacitance => g.capacitance_f,
            Self::Alpha => g.alpha,
            Self::R33 => g.r33_m_per_v,
            Self::Gamma => g.gamma,
        }
    }

    fn set(self, g: &mut DeviceGeometry, value: f64) {
        match self {
            Self::VOverE => g.v_over_e_m = value,
            Self::Capacitance => g.capacitance_f = value,
            Self::Alpha => g.alpha = value,
            Self::R33 => g.r33_m_per_v = value,
            Self::Gamma => g.gamma = value,
        }
    }
}

/// Find the value of `param` for which the chain yields `target`.
///
/// Every parameter enters `g_eo` monotonically, so a bracketed bisection is
/// sufficient. Parameters spanning decades are bisected in log space.
pub fn solve_geometry(
    base: &DeviceGeometry,
    omega_m: AngularFrequency,
    param: GeometryParam,
    target: AngularFrequency,
) -> Result<DeviceGeometry, CouplingError> {
    base.validate()?;
    let (lo, hi) = param.bounds();
    let log_space = !matches!(param, GeometryParam::Alpha);
    let eval = |x: f64| -> Result<f64, CouplingError> {
        let mut g = *base;
        param.set(&mut g, x);
        Ok(coupling_chain(&g, omega_m)?.g_eo.rad_per_s() - target.rad_per_s())
    };
    let out_of_bounds = CouplingError::OutOfBounds {
        param: param.name(),
        target_hz: target.hz(),
        lo,
        hi,
    };
    let (mut a, mut b) = if log_space {
        (lo.ln(), hi.ln())
    } else {
        (lo, hi)
    };
    let map = |u: f64| if log_space { u.exp() } else { u };
    let mut fa = eval(map(a))?;
    let fb = eval(map(b))?;
    if fa == 0.0 {
        let mut g = *base;
        param.set(&mut g, map(a));
        return Ok(g);
    }
    if fa.signum() == fb.signum() {
        return Err(out_of_bounds);
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = eval(map(mid))?;
        if fm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        if (b - a).abs() <= 1e-15 * a.abs().max(1e-300) {
            break;
        }
    }
    let mut g = *base;
    param.set(&mut g, map(0.5 * (a + b)));
    debug_assert!(param.get(&g).is_finite());
    Ok(g)
}

/// Grating coupler geometry.
///
/// `n_guide` and `n_upper` are the indices of the media in which the guided
/// and incident wave vectors are measured. Both default to 1, which gives the
/// phase-matching relation written directly in vacuum wave numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GratingSpec {
    pub pitch_m: f64,
    pub angle_rad: f64,
    pub n_eff: f64,
    #[serde(default = "one")]
    pub n_guide: f64,
    #[serde(default = "one")]
    pub n_upper: f64,
}

fn one() -> f64 {
    1.0
}

impl GratingSpec {
    pub fn new(pitch_m: f64, angle_rad: f64, n_eff: f64) -> Self {
        Self {
            pitch_m,
            angle_rad,
            n_eff,
            n_guide: 1.0,
            n_upper: 1.0,
        }
    }

    /// Phase mismatch `k2 − (k1 sinθ + 2π n_eff / Λ)` in 1/m.
    pub fn residual(&self, wavelength_m: f64) -> Result<f64, CouplingError> {
        if !(wavelength_m > 0.0) {
            return Err(CouplingError::NonPositive {
                field: "wavelength",
                value: wavelength_m,
            });
        }
        let k0 = TAU / wavelength_m;
        let k2 = self.n_guide * k0;
        let k1 = self.n_upper * k0;
        Ok(k2 - (k1 * self.angle_rad.sin() + TAU * self.n_eff / self.pitch_m))
    }

    /// Wavelength at which the residual vanishes.
    ///
    /// The residual is `(2π/λ)(n_guide − n_upper sinθ) − 2π n_eff/Λ`, strictly
    /// monotone in λ when the bracket is positive, so the root is unique.
    pub fn phase_matched_wavelength(&self) -> Result<f64, CouplingError> {
        if !(self.pitch_m > 0.0) {
            return Err(CouplingError::NonPositive {
                field: "pitch",
                value: self.pitch_m,
            });
        }
        let bracket = self.n_guide - self.n_upper * self.angle_rad.sin();
        let grating_term = self.n_eff / self.pitch_m;
        if !(bracket > 0.0) || !(grating_term > 0.0) || !grating_term.is_finite() {
            return Err(CouplingError::NoPhaseMatch);
        }
        Ok(bracket / grating_term)
    }

    /// Effective index that phase-matches `wavelength_m` for this pitch and angle.
    pub fn n_eff_for(&self, wavelength_m: f64) -> f64 {
        (self.n_guide - self.n_upper * self.angle_rad.sin()) * self.pitch_m / wavelength_m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn example_geometry() -> DeviceGeometry {
        DeviceGeometry {
            n_e: 2.14,
            r33_m_per_v: 30e-12,
            alpha: 0.5,
            gamma: 1.0,
            v_over_e_m: 2.0e-6,
            capacitance_f: 10e-15,
            f_opt_hz: 196e12,
        }
    }

    #[test]
    fn susceptibility_examples() {
        let g = example_geometry();
        // 2.14² · 30e-12 · 196e12 · 0.5 / (2 · 2e-6)
        assert_relative_eq!(eo_susceptibility(&g).unwrap(), 3.366_006e9, max_relative = 1e-9);

        let mut doubled = g;
        doubled.v_over_e_m *= 2.0;
        assert_relative_eq!(
            eo_susceptibility(&doubled).unwrap(),
            0.5 * eo_susceptibility(&g).unwrap(),
            max_relative = 1e-15
        );

        let mut uncovered = g;
        uncovered.alpha = 0.0;
        assert_eq!(eo_susceptibility(&uncovered).unwrap(), 0.0);

        let mut degenerate = g;
        degenerate.v_over_e_m = 0.0;
        assert!(eo_susceptibility(&degenerate).is_err());
    }

    #[test]
    fn zero_point_voltage_examples() {
        let omega = AngularFrequency::from_hz(3.71e9);
        // sqrt(ħ · 2π · 3.71e9 / (2 · 1e-14)) = 11.087 µV
        assert_relative_eq!(
            zero_point_voltage(10e-15, omega).unwrap(),
            1.108_664e-5,
            max_relative = 1e-6
        );
        assert_eq!(zero_point_voltage(10e-15, AngularFrequency::ZERO).unwrap(), 0.0);
        assert!(zero_point_voltage(0.0, omega).is_err());
        assert!(zero_point_voltage(1e-15, AngularFrequency::from_hz(-1.0)).is_err());
    }

    #[test]
    fn single_photon_coupling_examples() {
        let g = single_photon_coupling(3.366_006e9, 1.108_664_066e-5);
        assert_relative_eq!(g.hz(), 37_317.699, max_relative = 1e-7);
        assert_eq!(single_photon_coupling(0.0, 1e-6).hz(), 0.0);
    }

    #[test]
    fn plateau_ratio() {
        let r = plateau_vs_cladded(AngularFrequency::from_hz(945.0), AngularFrequency::from_hz(675.0))
            .unwrap();
        assert_relative_eq!(r, 1.4, max_relative = 1e-12);
        let same = AngularFrequency::from_hz(800.0);
        assert_eq!(plateau_vs_cladded(same, same).unwrap(), 1.0);
        assert!(plateau_vs_cladded(same, AngularFrequency::ZERO).is_err());
    }

    #[test]
    fn inversion_round_trips() {
        let omega = AngularFrequency::from_hz(3.71e9);
        let target = AngularFrequency::from_hz(945.0);
        for param in [
            GeometryParam::VOverE,
            GeometryParam::Capacitance,
            GeometryParam::Alpha,
            GeometryParam::R33,
        ] {
            let mut base = example_geometry();
            if param == GeometryParam::Alpha {
                base.v_over_e_m = 4e-5;
                base.capacitance_f = 100e-15;
            }
            let solved = solve_geometry(&base, omega, param, target).unwrap();
            let g = coupling_chain(&solved, omega).unwrap().g_eo;
            assert_relative_eq!(g.hz(), 945.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn inversion_rejects_unreachable_target() {
        let omega = AngularFrequency::from_hz(3.71e9);
        let base = example_geometry();
        // α ≤ 1 cannot lift the coupling to 10 MHz.
        let err = solve_geometry(&base, omega, GeometryParam::Alpha, AngularFrequency::from_hz(1e7));
        assert!(matches!(err, Err(CouplingError::OutOfBounds { .. })));
    }

    #[test]
    fn grating_solver_recovers_design_wavelength() {
        let mut spec = GratingSpec::new(750e-9, 8f64.to_radians(), 0.0);
        spec.n_eff = spec.n_eff_for(1560e-9);
        let lambda = spec.phase_matched_wavelength().unwrap();
        assert!((lambda - 1560e-9).abs() < 0.1e-9);
        assert!(spec.residual(lambda).unwrap().abs() < 1e-6);
    }

    #[test]
    fn grating_degenerate_limit_has_no_solution() {
        let spec = GratingSpec::new(f64::INFINITY, 0.0, 1.0);
        assert_eq!(spec.phase_matched_wavelength(), Err(CouplingError::NoPhaseMatch));
        assert!(spec.residual(0.0).is_err());
    }

    #[test]
    fn grating_residual_monotone_over_c_band() {
        let mut spec = GratingSpec::new(750e-9, 8f64.to_radians(), 0.0);
        spec.n_eff = spec.n_eff_for(1560e-9);
        let samples: Vec<f64> = (0..=400)
            .map(|i| spec.residual(1500e-9 + i as f64 * 0.25e-9).unwrap())
            .collect();
        assert!(samples.windows(2).all(|w| w[1] < w[0]));
    }

    proptest! {
        #[test]
        fn coupling_linear_in_r33(scale in 0.01f64..100.0) {
            let omega = AngularFrequency::from_hz(3.71e9);
            let g = example_geometry();
            let mut scaled = g;
            scaled.r33_m_per_v *= scale;
            let base = coupling_chain(&g, omega).unwrap().g_eo.rad_per_s();
            let out = coupling_chain(&scaled, omega).unwrap().g_eo.rad_per_s();
            prop_assert!((out - scale * base).abs() <= 1e-12 * scale * base);
        }

        #[test]
        fn quadrupled_capacitance_halves_vzpf(c in 1e-16f64..1e-11, hz in 1e8f64..1e11) {
            let omega = AngularFrequency::from_hz(hz);
            let v = zero_point_voltage(c, omega).unwrap();
            let v4 = zero_point_voltage(4.0 * c, omega).unwrap();
            prop_assert!((v4 - 0.5 * v).abs() <= 1e-12 * v);
        }

        #[test]
        fn positive_for_valid_geometry(alpha in 0.01f64..1.0, voe in 1e-7f64..1e-3, c in 1e-16f64..1e-12) {
            let mut g = example_geometry();
            g.alpha = alpha;
            g.v_over_e_m = voe;
            g.capacitance_f = c;
            let chain = coupling_chain(&g, AngularFrequency::from_hz(3.71e9)).unwrap();
            prop_assert!(chain.susceptibility_hz_per_v > 0.0);
            prop_assert!(chain.v_zpf > 0.0);
            prop_assert!(chain.g_eo.rad_per_s() > 0.0);
        }
    }
}

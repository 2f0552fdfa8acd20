//! Heralded (DLCZ-style) remote-entanglement budget for two transducer nodes:
//! pair-generation probability per pump pulse, herald rate, and a linear
//! error budget for the transducer-to-qubit link fidelity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{db_to_loss_probability, Transmittance, UnitError, PLANCK, SPEED_OF_LIGHT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("{field} must be a probability in [0, 1], got {value}")]
    Probability { field: &'static str, value: f64 },
    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{field} must be non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error(transparent)]
    Unit(#[from] UnitError),
}

type Result<T> = std::result::Result<T, NetworkError>;

fn probability(field: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(NetworkError::Probability { field, value })
    }
}

fn positive(field: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(NetworkError::NonPositive { field, value })
    }
}

fn non_negative(field: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(NetworkError::Negative { field, value })
    }
}

/// Above this pair probability the single-pair approximation is suspect.
pub const WEAK_PUMP_LIMIT: f64 = 0.1;

/// Photons in one rectangular pump pulse.
pub fn pump_pulse_photons(p_pk_w: f64, pulse_width_s: f64, wavelength_m: f64) -> Result<f64> {
    non_negative("p_pk_w", p_pk_w)?;
    non_negative("pulse_width_s", pulse_width_s)?;
    positive("wavelength_m", wavelength_m)?;
    Ok(p_pk_w * pulse_width_s / (PLANCK * SPEED_OF_LIGHT / wavelength_m))
}

/// `4(g/κ_o)²·N`. Both rates must share one convention (Hz or rad/s).
pub fn pair_probability(g_eo: f64, kappa_o: f64, n_pump: f64) -> Result<f64> {
    positive("kappa_o", kappa_o)?;
    non_negative("n_pump", n_pump)?;
    Ok(4.0 * (g_eo / kappa_o).powi(2) * n_pump)
}

pub fn entanglement_rate(eta_o: Transmittance, p: f64, rep_rate_hz: f64) -> Result<f64> {
    probability("p_pair", p)?;
    non_negative("rep_rate_hz", rep_rate_hz)?;
    Ok(eta_o.value() * p * rep_rate_hz)
}

/// Detection efficiency that yields `target_hz` heralds per second.
pub fn required_detection_efficiency(target_hz: f64, p: f64, rep_rate_hz: f64) -> Result<f64> {
    positive("p_pair", p)?;
    positive("rep_rate_hz", rep_rate_hz)?;
    Ok(target_hz / (p * rep_rate_hz))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fidelity {
    pub raw: f64,
    pub clamped: f64,
}

/// `F = 1 − p_multi − 2P_m − (3/2)P_loss − P_false − P_phase`.
pub fn link_fidelity(p_multi: f64, p_m: f64, p_loss: f64, p_false: f64, p_phase: f64) -> Result<Fidelity> {
    probability("p_multi", p_multi)?;
    probability("p_m", p_m)?;
    probability("p_loss", p_loss)?;
    probability("p_false", p_false)?;
    probability("p_phase", p_phase)?;
    let raw = 1.0 - p_multi - 2.0 * p_m - 1.5 * p_loss - p_false - p_phase;
    Ok(Fidelity { raw, clamped: raw.clamp(0.0, 1.0) })
}

/// Reset-limited attempt rate, `κ_m/10` with `κ_m` in Hz.
pub fn max_repetition_rate(kappa_m_hz: f64) -> Result<f64> {
    Ok(positive("kappa_m_hz", kappa_m_hz)? / 10.0)
}

/// Insertion losses of the optical detection path, in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalPathDb {
    pub facet: f64,
    pub filter: f64,
    pub detector: f64,
}

impl OpticalPathDb {
    pub fn total_db(&self) -> f64 {
        self.facet + self.filter + self.detector
    }

    pub fn transmittance(&self) -> Result<Transmittance> {
        let t = Transmittance::from_db_loss(self.facet)?
            * Transmittance::from_db_loss(self.filter)?
            * Transmittance::from_db_loss(self.detector)?;
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntanglementScenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub g_eo_hz: f64,
    pub kappa_o_hz: f64,
    pub kappa_m_hz: f64,
    pub p_pk_w: f64,
    pub pulse_width_s: f64,
    pub rep_rate_hz: f64,
    pub wavelength_m: f64,
    pub optical_path_db: OpticalPathDb,
    pub p_m: f64,
    pub p_false: f64,
    pub p_phase: f64,
    pub loss_mw_db: f64,
    /// Multi-photon error used in the fidelity; the pair probability when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_multi: Option<f64>,
}

impl EntanglementScenario {
    pub fn validate(&self) -> Result<()> {
        non_negative("g_eo_hz", self.g_eo_hz)?;
        positive("kappa_o_hz", self.kappa_o_hz)?;
        positive("kappa_m_hz", self.kappa_m_hz)?;
        non_negative("p_pk_w", self.p_pk_w)?;
        non_negative("pulse_width_s", self.pulse_width_s)?;
        non_negative("rep_rate_hz", self.rep_rate_hz)?;
        positive("wavelength_m", self.wavelength_m)?;
        probability("p_m", self.p_m)?;
        probability("p_false", self.p_false)?;
        probability("p_phase", self.p_phase)?;
        if let Some(p) = self.p_multi {
            probability("p_multi", p)?;
        }
        let duty = self.pulse_width_s * self.rep_rate_hz;
        if duty > 1.0 {
            return Err(NetworkError::Probability { field: "duty (pulse_width_s * rep_rate_hz)", value: duty });
        }
        for (field, v) in [
            ("optical_path_db.facet", self.optical_path_db.facet),
            ("optical_path_db.filter", self.optical_path_db.filter),
            ("optical_path_db.detector", self.optical_path_db.detector),
            ("loss_mw_db", self.loss_mw_db),
        ] {
            non_negative(field, v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetResult {
    pub scenario: String,
    pub n_pump: f64,
    pub p_pair: f64,
    pub p_multi: f64,
    pub eta_opt_detect: f64,
    pub p_loss: f64,
    pub r_ent_hz: f64,
    pub fidelity: f64,
    pub fidelity_clamped: f64,
    pub max_rep_rate_hz: f64,
    pub warnings: Vec<String>,
}

pub fn evaluate_scenario(s: &EntanglementScenario) -> Result<BudgetResult> {
    s.validate()?;
    let mut warnings = Vec::new();
    let n_pump = pump_pulse_photons(s.p_pk_w, s.pulse_width_s, s.wavelength_m)?;
    let p_pair = pair_probability(s.g_eo_hz, s.kappa_o_hz, n_pump)?;
    if p_pair > WEAK_PUMP_LIMIT {
        warnings.push(format!("p_pair = {p_pair:.4} exceeds {WEAK_PUMP_LIMIT}; multi-pair events are not negligible"));
    }
    let ceiling = max_repetition_rate(s.kappa_m_hz)?;
    if s.rep_rate_hz > ceiling {
        warnings.push(format!(
            "rep_rate_hz = {:.4e} exceeds the reset limit kappa_m/10 = {:.4e}",
            s.rep_rate_hz, ceiling
        ));
    }
    let eta = s.optical_path_db.transmittance()?;
    let r_ent_hz = entanglement_rate(eta, p_pair.min(1.0), s.rep_rate_hz)?;
    let p_multi = s.p_multi.unwrap_or(p_pair).min(1.0);
    let p_loss = db_to_loss_probability(s.loss_mw_db)?;
    let f = link_fidelity(p_multi, s.p_m, p_loss, s.p_false, s.p_phase)?;
    Ok(BudgetResult {
        scenario: s.name.clone(),
        n_pump,
        p_pair,
        p_multi,
        eta_opt_detect: eta.value(),
        p_loss,
        r_ent_hz,
        fidelity: f.raw,
        fidelity_clamped: f.clamped,
        max_rep_rate_hz: ceiling,
        warnings,
    })
}

/// Two-node states after a herald, with amplitudes ordered `(|01⟩, |10⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellStates {
    pub psi_plus: [Complex64; 2],
    pub psi_minus: [Complex64; 2],
    /// Amplitude of the `|11⟩` pair term in each node before heralding.
    pub pair_amplitude: f64,
}

pub fn bell_state_amplitudes(p: f64, delta_phi: f64) -> Result<BellStates> {
    probability("p", p)?;
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let b = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, delta_phi);
    Ok(BellStates { psi_plus: [a, b], psi_minus: [a, -b], pair_amplitude: p.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn photon_count_examples() {
        assert_relative_eq!(pump_pulse_photons(40e-6, 150e-9, 1530e-9).unwrap(), 4.621_319_009e7, max_relative = 1e-9);
        assert_eq!(pump_pulse_photons(40e-6, 0.0, 1530e-9).unwrap(), 0.0);
        assert_relative_eq!(
            pump_pulse_photons(80e-6, 150e-9, 1530e-9).unwrap(),
            2.0 * pump_pulse_photons(40e-6, 150e-9, 1530e-9).unwrap(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn pair_probability_examples() {
        let n = pump_pulse_photons(40e-6, 150e-9, 1530e-9).unwrap();
        let p = pair_probability(945.0, 80e6, n).unwrap();
        assert_relative_eq!(p, 0.025_793_458_8, max_relative = 1e-8);
        assert_eq!(pair_probability(945.0, 80e6, 0.0).unwrap(), 0.0);
        assert_relative_eq!(pair_probability(945.0, 50e6, n).unwrap() / p, 2.56, max_relative = 1e-12);
        assert!(pair_probability(945.0, 0.0, n).is_err());
    }

    #[test]
    fn rate_examples() {
        let eta = Transmittance::new(2.636_327e-5).unwrap();
        assert_relative_eq!(entanglement_rate(eta, 0.025_793_458_8, 1e6).unwrap(), 0.68, max_relative = 1e-5);
        assert_eq!(entanglement_rate(Transmittance::UNITY, 1.0, 1e6).unwrap(), 1e6);
        assert_relative_eq!(required_detection_efficiency(0.68, 0.025_793_458_8, 1e6).unwrap(), 2.636_327e-5, max_relative = 1e-6);
    }

    #[test]
    fn fidelity_rows() {
        let rows = [(3.0, 0.180_780_850), (0.3, 0.828_881_451), (0.1, 0.894_855_831)];
        for (db, expected) in rows {
            let p_loss = db_to_loss_probability(db).unwrap();
            let f = link_fidelity(0.02, 0.02, p_loss, 1e-3, 0.01).unwrap();
            assert_relative_eq!(f.raw, expected, max_relative = 1e-8);
        }
        let neg = link_fidelity(0.5, 0.5, 1.0, 0.0, 0.0).unwrap();
        assert!(neg.raw < 0.0);
        assert_eq!(neg.clamped, 0.0);
        assert!(link_fidelity(1.5, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn fidelity_coefficients() {
        let base = link_fidelity(0.01, 0.01, 0.1, 0.001, 0.01).unwrap().raw;
        let dm = link_fidelity(0.01, 0.02, 0.1, 0.001, 0.01).unwrap().raw;
        let dl = link_fidelity(0.01, 0.01, 0.2, 0.001, 0.01).unwrap().raw;
        assert_relative_eq!((dm - base) / 0.01, -2.0, max_relative = 1e-9);
        assert_relative_eq!((dl - base) / 0.1, -1.5, max_relative = 1e-9);
    }

    #[test]
    fn repetition_ceiling() {
        assert_eq!(max_repetition_rate(10e6).unwrap(), 1e6);
        assert_eq!(max_repetition_rate(20e6).unwrap(), 2e6);
    }

    fn scenario() -> EntanglementScenario {
        EntanglementScenario {
            name: "test".into(),
            description: None,
            g_eo_hz: 945.0,
            kappa_o_hz: 80e6,
            kappa_m_hz: 16e6,
            p_pk_w: 40e-6,
            pulse_width_s: 150e-9,
            rep_rate_hz: 1e6,
            wavelength_m: 1530e-9,
            optical_path_db: OpticalPathDb { facet: 10.0, filter: 33.79, detector: 2.0 },
            p_m: 0.02,
            p_false: 1e-3,
            p_phase: 0.01,
            loss_mw_db: 3.0,
            p_multi: Some(0.02),
        }
    }

    #[test]
    fn scenario_composition() {
        let r = evaluate_scenario(&scenario()).unwrap();
        assert!((r.r_ent_hz - 0.68).abs() < 1e-3);
        assert!((r.fidelity - 0.18).abs() < 0.01);
        assert!(r.warnings.is_empty());

        let zero = EntanglementScenario { p_pk_w: 0.0, p_multi: None, ..scenario() };
        let z = evaluate_scenario(&zero).unwrap();
        assert_eq!(z.r_ent_hz, 0.0);
        assert_relative_eq!(z.fidelity, 1.0 - 0.04 - 1.5 * z.p_loss - 0.011, max_relative = 1e-12);

        let fast = EntanglementScenario { rep_rate_hz: 2e6, ..scenario() };
        assert_eq!(evaluate_scenario(&fast).unwrap().warnings.len(), 1);

        let bad = EntanglementScenario { p_m: 1.5, ..scenario() };
        assert_eq!(evaluate_scenario(&bad), Err(NetworkError::Probability { field: "p_m", value: 1.5 }));
    }

    #[test]
    fn bell_examples() {
        let b = bell_state_amplitudes(0.026, 0.0).unwrap();
        assert_relative_eq!(b.psi_plus[0].re, b.psi_plus[1].re, max_relative = 1e-15);
        assert_eq!(b.psi_plus[1].im, 0.0);
        assert!((b.pair_amplitude - 0.161).abs() < 5e-4);
    }

    proptest! {
        #[test]
        fn bell_states_normalized(phi in -10.0f64..10.0, p in 0.0f64..1.0) {
            let b = bell_state_amplitudes(p, phi).unwrap();
            for s in [b.psi_plus, b.psi_minus] {
                let norm: f64 = s.iter().map(|a| a.norm_sqr()).sum();
                prop_assert!((norm - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn pulse_scaling_leaves_pair_probability(scale in 0.1f64..10.0) {
            let s = scenario();
            let t = EntanglementScenario { pulse_width_s: s.pulse_width_s * scale, p_pk_w: s.p_pk_w / scale, rep_rate_hz: 1e5, ..s.clone() };
            let a = evaluate_scenario(&EntanglementScenario { rep_rate_hz: 1e5, ..s }).unwrap().p_pair;
            let b = evaluate_scenario(&t).unwrap().p_pair;
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn unit_convention_invariant(g in 1.0f64..1e4, k in 1e6f64..1e9, n in 0.0f64..1e8) {
            let hz = pair_probability(g, k, n).unwrap();
            let rad = pair_probability(std::f64::consts::TAU * g, std::f64::consts::TAU * k, n).unwrap();
            prop_assert!((hz - rad).abs() <= 1e-12 * hz.max(1e-300));
        }

        #[test]
        fn fidelity_monotone(a in 0.0f64..0.5, d in 0.0f64..0.5) {
            let f0 = link_fidelity(a, a, a, a, a).unwrap().raw;
            prop_assert!(link_fidelity(a + d, a, a, a, a).unwrap().raw <= f0);
            prop_assert!(link_fidelity(a, a + d, a, a, a).unwrap().raw <= f0);
            prop_assert!(link_fidelity(a, a, a + d, a, a).unwrap().raw <= f0);
            prop_assert!(link_fidelity(a, a, a, a + d, a).unwrap().raw <= f0);
            prop_assert!(link_fidelity(a, a, a, a, a + d).unwrap().raw <= f0);
        }
    }
}

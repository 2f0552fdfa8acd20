//! Closed-form driven two-level-system models: spectroscopy line, power and
//! time Rabi oscillations (on and off resonance), dispersive readout shift,
//! drive-power conversion and pulse averaging.
//!
//! Two conventions coexist for Rabi data. The *signal* accessors follow the
//! fitted form `P_b + A·sin(π·x/x_π)`; the *population* accessors use the
//! physical excitation `P_b + A·sin²(π·x/(2x_π))`. Both repeat every `2x_π`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{AngularFrequency, Power};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QubitError {
    #[error("qubit-readout detuning must be non-zero")]
    ZeroDetuning,
    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("duty cycle {0} exceeds 1")]
    DutyAboveOne(f64),
    #[error("{0} grid is empty")]
    EmptyGrid(&'static str),
}

type Result<T> = std::result::Result<T, QubitError>;

fn positive(field: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(QubitError::NonPositive { field, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub omega_q: AngularFrequency,
    pub kappa_q: AngularFrequency,
    pub t1_s: f64,
    pub t2star_s: f64,
    pub g_q_ro: AngularFrequency,
    pub omega_ro: AngularFrequency,
}

impl QubitParams {
    pub fn validate(&self) -> Result<()> {
        positive("t1_s", self.t1_s)?;
        positive("t2star_s", self.t2star_s)?;
        positive("kappa_q", self.kappa_q.rad_per_s())?;
        Ok(())
    }

    pub fn delta_ro(&self) -> AngularFrequency {
        self.omega_ro - self.omega_q
    }

    /// Human-readable notes for every violated dispersive-regime condition.
    pub fn dispersive_warnings(&self) -> Vec<String> {
        let g = self.g_q_ro.abs().rad_per_s();
        let mut out = Vec::new();
        if g >= 0.1 * self.delta_ro().abs().rad_per_s() {
            out.push(format!("g_q_ro/2π = {:.4e} Hz is not small against |Δ_ro|", self.g_q_ro.hz()));
        }
        if g <= 10.0 * self.kappa_q.rad_per_s() {
            out.push(format!("g_q_ro/2π = {:.4e} Hz is not large against κ_q", self.g_q_ro.hz()));
        }
        out
    }
}

pub fn lorentzian_response(omega: AngularFrequency, q: &QubitParams, amplitude: f64, baseline: f64) -> f64 {
    let hw = 0.5 * q.kappa_q.rad_per_s();
    let d = (omega - q.omega_q).rad_per_s();
    baseline + amplitude * hw * hw / (d * d + hw * hw)
}

/// Rabi rate produced by an average drive power reaching the qubit through
/// its readout resonator.
///
/// The rate is proportional to `2(g/Δ_ro)` and to the drive amplitude
/// `√(P/ħω_dr)`; `cal` (rad·s^-1/2) absorbs the coupling of the drive line.
pub fn rabi_rate_from_power(
    p_avg: Power,
    q: &QubitParams,
    omega_dr: AngularFrequency,
    cal: f64,
) -> Result<AngularFrequency> {
    let delta = q.delta_ro().rad_per_s();
    if delta == 0.0 {
        return Err(QubitError::ZeroDetuning);
    }
    positive("omega_dr", omega_dr.rad_per_s())?;
    let amplitude = (p_avg.watts() / omega_dr.photon_energy()).sqrt();
    Ok(AngularFrequency::from_rad_per_s(cal * 2.0 * q.g_q_ro.rad_per_s() / delta * amplitude))
}

/// Calibration constant for [`rabi_rate_from_power`] from one measured point.
pub fn drive_calibration(
    p_avg: Power,
    q: &QubitParams,
    omega_dr: AngularFrequency,
    measured: AngularFrequency,
) -> Result<f64> {
    positive("p_avg", p_avg.watts())?;
    let unit = rabi_rate_from_power(p_avg, q, omega_dr, 1.0)?;
    positive("g_q_ro", unit.rad_per_s().abs())?;
    Ok(measured / unit)
}

pub fn detuned_rabi(omega_r: AngularFrequency, delta: AngularFrequency) -> AngularFrequency {
    AngularFrequency::from_rad_per_s(omega_r.rad_per_s().hypot(delta.rad_per_s()))
}

/// Voltage amplitude of a drive of `power` into `impedance_ohm`.
pub fn drive_voltage(power: Power, impedance_ohm: f64) -> f64 {
    (power.watts() * impedance_ohm).sqrt()
}

pub fn drive_power(voltage: f64, impedance_ohm: f64) -> Power {
    Power::from_watts(voltage * voltage / impedance_ohm).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeRabiModel {
    pub amplitude: f64,
    pub offset: f64,
    pub t_pi_s: f64,
    /// `None` means no decay.
    pub tau_s: Option<f64>,
}

impl TimeRabiModel {
    /// Resonant Rabi rate implied by the π time, `Ω_R = π/T_π`.
    pub fn rabi_rate(&self) -> AngularFrequency {
        AngularFrequency::from_rad_per_s(PI / self.t_pi_s)
    }

    pub fn from_rabi_rate(omega_r: AngularFrequency, amplitude: f64, offset: f64, tau_s: Option<f64>) -> Self {
        Self { amplitude, offset, t_pi_s: PI / omega_r.rad_per_s(), tau_s }
    }

    fn envelope(&self, t: f64) -> f64 {
        self.tau_s.map_or(1.0, |tau| (-t / tau).exp())
    }
}

/// The fitted form `P_b + A·e^{−t/τ}·sin(πt/T_π)`.
pub fn time_rabi_signal(t: f64, m: &TimeRabiModel) -> f64 {
    m.offset + m.amplitude * m.envelope(t) * (PI * t / m.t_pi_s).sin()
}

/// Excited population under a drive detuned by `delta`, with contrast
/// `Ω²/Ω′²` and fringe rate `Ω′ = √(Ω² + δ²)`.
pub fn time_rabi_population(t: f64, m: &TimeRabiModel, delta: AngularFrequency) -> f64 {
    let omega = m.rabi_rate();
    let omega_p = detuned_rabi(omega, delta).rad_per_s();
    if omega_p == 0.0 {
        return m.offset;
    }
    let contrast = (omega.rad_per_s() / omega_p).powi(2);
    m.offset + m.amplitude * contrast * m.envelope(t) * (0.5 * omega_p * t).sin().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerRabiModel {
    pub amplitude: f64,
    pub offset: f64,
    pub v_pi: f64,
}

/// The fitted form `P_b + A·sin(πV/V_π)`.
pub fn power_rabi_signal(v: f64, m: &PowerRabiModel) -> f64 {
    m.offset + m.amplitude * (PI * v / m.v_pi).sin()
}

/// Excited population `P_b + A·sin²(πV/(2V_π))`, maximal at `V = V_π`.
pub fn power_rabi_population(v: f64, m: &PowerRabiModel) -> f64 {
    m.offset + m.amplitude * (0.5 * PI * v / m.v_pi).sin().powi(2)
}

/// Normalized excited population on a detuning × pulse-width grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChevronGrid {
    pub widths_s: Vec<f64>,
    pub detunings: Vec<AngularFrequency>,
    /// `values[row][col]` with rows indexed by detuning and columns by width.
    pub values: Vec<Vec<f64>>,
}

impl ChevronGrid {
    /// `(width_s, detuning_hz, population)` triples, detuning-major.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.detunings.iter().zip(&self.values).flat_map(move |(d, row)| {
            self.widths_s.iter().zip(row).map(move |(w, p)| (*w, d.hz(), *p))
        })
    }
}

pub fn chevron_map(
    widths_s: &[f64],
    detunings: &[AngularFrequency],
    omega_r: AngularFrequency,
    tau_s: Option<f64>,
) -> Result<ChevronGrid> {
    if widths_s.is_empty() {
        return Err(QubitError::EmptyGrid("widths"));
    }
    if detunings.is_empty() {
        return Err(QubitError::EmptyGrid("detunings"));
    }
    positive("omega_r", omega_r.rad_per_s())?;
    let model = TimeRabiModel::from_rabi_rate(omega_r, 1.0, 0.0, tau_s);
    let values = detunings
        .iter()
        .map(|&d| widths_s.iter().map(|&t| time_rabi_population(t, &model, d)).collect())
        .collect();
    Ok(ChevronGrid { widths_s: widths_s.to_vec(), detunings: detunings.to_vec(), values })
}

pub fn dispersive_shift(g_q_ro: AngularFrequency, delta_ro: AngularFrequency) -> Result<AngularFrequency> {
    if delta_ro.rad_per_s() == 0.0 {
        return Err(QubitError::ZeroDetuning);
    }
    Ok(AngularFrequency::from_rad_per_s(g_q_ro.rad_per_s().powi(2) / delta_ro.rad_per_s()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub pulse_width_s: f64,
    pub rep_rate_hz: f64,
    #[serde(default = "PulseSchedule::default_shape")]
    pub shape_factor: f64,
}

impl PulseSchedule {
    pub fn default_shape() -> f64 {
        1.0 / 0.94
    }

    pub fn new(pulse_width_s: f64, rep_rate_hz: f64) -> Self {
        Self { pulse_width_s, rep_rate_hz, shape_factor: Self::default_shape() }
    }

    pub fn continuous() -> Self {
        Self { pulse_width_s: 1.0, rep_rate_hz: 1.0, shape_factor: 1.0 }
    }

    pub fn duty(&self) -> f64 {
        self.pulse_width_s * self.rep_rate_hz
    }
}

pub fn average_power(p_pk: Power, s: &PulseSchedule) -> Result<Power> {
    let duty = s.duty();
    if duty > 1.0 {
        return Err(QubitError::DutyAboveOne(duty));
    }
    positive("shape_factor", s.shape_factor)?;
    Ok(Power::from_watts(p_pk.watts() * duty * s.shape_factor).unwrap_or_default())
}

/// `(e^{−t/T1}, e^{−t/T2*})`.
pub fn decay_models(t: f64, q: &QubitParams) -> (f64, f64) {
    ((-t / q.t1_s).exp(), (-t / q.t2star_s).exp())
}

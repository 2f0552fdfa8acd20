//! Steady-state input-output model of the pump-enhanced beam-splitter
//! interaction between the blue optical mode `a₊` and the microwave mode `b`.
//!
//! The red mode `a₋` is driven by a strong pump; its intracavity photon number
//! enhances the vacuum coupling to `g = √n̄·g_eo`. The probe detuning `δ` is
//! measured from `ω₊ − ω_L`, the microwave frequency that lands an up-converted
//! photon exactly on the blue optical resonance.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{AngularFrequency, Power, Transmittance, UnitError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransductionError {
    #[error("{field} must be non-negative, got {value}")]
    NegativeRate { field: &'static str, value: f64 },
    #[error("{field}: total linewidth must be positive")]
    ZeroLinewidth { field: &'static str },
    #[error("duty cycle must lie in (0, 1], got {0}")]
    InvalidDuty(f64),
    #[error("heating coefficient {field} must be non-negative, got {value}")]
    NegativeHeating { field: &'static str, value: f64 },
    #[error("heating shift pushes the microwave resonance to {0} rad/s")]
    ResonanceCollapsed(f64),
    #[error("inconsistent link calibration: inferred {quantity} = {value}")]
    InconsistentLink { quantity: &'static str, value: f64 },
    #[error(
        "anchor {index} asks for η = {target:.4e} but the unheated model only reaches {envelope:.4e}"
    )]
    AnchorAboveEnvelope { index: usize, target: f64, envelope: f64 },
    #[error("no non-negative heating coefficients reproduce both anchors")]
    CalibrationUnreachable,
    #[error("sweep needs at least one power and one schedule")]
    EmptySweep,
    #[error(transparent)]
    Unit(#[from] UnitError),
}

type Result<T> = std::result::Result<T, TransductionError>;

fn check_rates(field: &'static str, intrinsic: f64, external: f64) -> Result<()> {
    if !(intrinsic >= 0.0) {
        return Err(TransductionError::NegativeRate { field, value: intrinsic });
    }
    if !(external >= 0.0) {
        return Err(TransductionError::NegativeRate { field, value: external });
    }
    if !(intrinsic + external > 0.0) {
        return Err(TransductionError::ZeroLinewidth { field });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalModeParams {
    pub omega: AngularFrequency,
    pub kappa_i: AngularFrequency,
    pub kappa_e: AngularFrequency,
}

impl OpticalModeParams {
    pub fn new(omega: AngularFrequency, kappa_i: AngularFrequency, kappa_e: AngularFrequency) -> Result<Self> {
        check_rates("optical kappa", kappa_i.rad_per_s(), kappa_e.rad_per_s())?;
        Ok(Self { omega, kappa_i, kappa_e })
    }

    pub fn kappa(&self) -> AngularFrequency {
        self.kappa_i + self.kappa_e
    }

    pub fn external_ratio(&self) -> f64 {
        self.kappa_e / self.kappa()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicrowaveModeParams {
    pub omega_m: AngularFrequency,
    pub kappa_i: AngularFrequency,
    pub kappa_e: AngularFrequency,
}

impl MicrowaveModeParams {
    pub fn new(omega_m: AngularFrequency, kappa_i: AngularFrequency, kappa_e: AngularFrequency) -> Result<Self> {
        check_rates("microwave kappa", kappa_i.rad_per_s(), kappa_e.rad_per_s())?;
        Ok(Self { omega_m, kappa_i, kappa_e })
    }

    /// Split a total linewidth into intrinsic and external parts.
    pub fn from_total(omega_m: AngularFrequency, kappa: AngularFrequency, external_ratio: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&external_ratio) {
            return Err(TransductionError::NegativeRate { field: "microwave external ratio", value: external_ratio });
        }
        Self::new(omega_m, kappa * (1.0 - external_ratio), kappa * external_ratio)
    }

    pub fn kappa(&self) -> AngularFrequency {
        self.kappa_i + self.kappa_e
    }

    pub fn external_ratio(&self) -> f64 {
        self.kappa_e / self.kappa()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpDrive {
    pub power_peak: Power,
    /// Pump frequency minus the red-mode frequency.
    pub detuning: AngularFrequency,
    pub wavelength_m: f64,
    pub pulse_width_s: f64,
    pub rep_rate_hz: f64,
    pub cw: bool,
}

impl PumpDrive {
    pub fn cw(power: Power, wavelength_m: f64) -> Self {
        Self {
            power_peak: power,
            detuning: AngularFrequency::ZERO,
            wavelength_m,
            pulse_width_s: 0.0,
            rep_rate_hz: 0.0,
            cw: true,
        }
    }

    pub fn duty(&self) -> f64 {
        if self.cw {
            1.0
        } else {
            self.pulse_width_s * self.rep_rate_hz
        }
    }

    pub fn validate(&self) -> Result<()> {
        let duty = self.duty();
        if !(duty > 0.0 && duty <= 1.0) {
            return Err(TransductionError::InvalidDuty(duty));
        }
        AngularFrequency::from_wavelength(self.wavelength_m)?;
        Ok(())
    }

    pub fn average_power(&self) -> Power {
        Power::from_watts(self.power_peak.watts() * self.duty()).unwrap_or_default()
    }

    pub fn laser_frequency(&self) -> Result<AngularFrequency> {
        Ok(AngularFrequency::from_wavelength(self.wavelength_m)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransducerState {
    pub red: OpticalModeParams,
    pub blue: OpticalModeParams,
    pub microwave: MicrowaveModeParams,
    pub g_eo: AngularFrequency,
    pub pump: PumpDrive,
}

impl TransducerState {
    pub fn validate(&self) -> Result<()> {
        OpticalModeParams::new(self.red.omega, self.red.kappa_i, self.red.kappa_e)?;
        OpticalModeParams::new(self.blue.omega, self.blue.kappa_i, self.blue.kappa_e)?;
        MicrowaveModeParams::new(self.microwave.omega_m, self.microwave.kappa_i, self.microwave.kappa_e)?;
        if !(self.g_eo.rad_per_s() >= 0.0) {
            return Err(TransductionError::NegativeRate { field: "g_eo", value: self.g_eo.rad_per_s() });
        }
        self.pump.validate()
    }

    pub fn pump_photons(&self) -> Result<f64> {
        pump_photon_number(&self.pump, &self.red)
    }

    pub fn enhanced_coupling(&self) -> Result<AngularFrequency> {
        Ok(enhanced_coupling(self.g_eo, self.pump_photons()?))
    }

    pub fn cooperativity(&self) -> Result<f64> {
        cooperativity(self.g_eo, self.pump_photons()?, self.blue.kappa(), self.microwave.kappa())
    }

    pub fn triple_resonance_mismatch(&self) -> AngularFrequency {
        self.blue.omega - self.red.omega - self.microwave.omega_m
    }

    pub fn is_triple_resonant(&self) -> bool {
        self.triple_resonance_mismatch().abs().rad_per_s() <= self.microwave.kappa().rad_per_s() / 10.0
    }

    /// Probe detunings from the blue optical mode and from the microwave mode.
    fn mode_detunings(&self, delta: AngularFrequency) -> (f64, f64) {
        let laser = self.red.omega + self.pump.detuning;
        let probe = self.blue.omega - laser + delta;
        (delta.rad_per_s(), (probe - self.microwave.omega_m).rad_per_s())
    }
}

/// Intracavity photon number of a pumped mode.
pub fn pump_photon_number(pump: &PumpDrive, mode: &OpticalModeParams) -> Result<f64> {
    let omega_l = pump.laser_frequency()?;
    let kappa = mode.kappa().rad_per_s();
    if !(kappa > 0.0) {
        return Err(TransductionError::ZeroLinewidth { field: "optical kappa" });
    }
    let lorentz = mode.kappa_e.rad_per_s() / (pump.detuning.rad_per_s().powi(2) + (kappa / 2.0).powi(2));
    Ok(lorentz * pump.power_peak.watts() / omega_l.photon_energy())
}

pub fn enhanced_coupling(g_eo: AngularFrequency, n_pump: f64) -> AngularFrequency {
    g_eo * n_pump.max(0.0).sqrt()
}

pub fn cooperativity(
    g_eo: AngularFrequency,
    n_pump: f64,
    kappa_plus: AngularFrequency,
    kappa_m: AngularFrequency,
) -> Result<f64> {
    if !(kappa_plus.rad_per_s() > 0.0) {
        return Err(TransductionError::ZeroLinewidth { field: "kappa_plus" });
    }
    if !(kappa_m.rad_per_s() > 0.0) {
        return Err(TransductionError::ZeroLinewidth { field: "kappa_m" });
    }
    Ok(4.0 * g_eo.rad_per_s().powi(2) * n_pump / (kappa_plus.rad_per_s() * kappa_m.rad_per_s()))
}

/// Pump photon number that yields cooperativity `c`.
pub fn photons_for_cooperativity(
    c: f64,
    g_eo: AngularFrequency,
    kappa_plus: AngularFrequency,
    kappa_m: AngularFrequency,
) -> f64 {
    c * kappa_plus.rad_per_s() * kappa_m.rad_per_s() / (4.0 * g_eo.rad_per_s().powi(2))
}

/// Peak conversion efficiency at triple resonance, exact for a beam splitter.
pub fn resonant_efficiency(external_ratio_o: f64, external_ratio_m: f64, c: f64) -> f64 {
    external_ratio_o * external_ratio_m * 4.0 * c / (1.0 + c).powi(2)
}

/// Element `[out][in]` with index 0 the optical port and 1 the microwave port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringMatrix(pub [[Complex64; 2]; 2]);

impl ScatteringMatrix {
    pub fn s_oo(&self) -> Complex64 {
        self.0[0][0]
    }
    /// Microwave in, optical out.
    pub fn s_om(&self) -> Complex64 {
        self.0[0][1]
    }
    /// Optical in, microwave out.
    pub fn s_mo(&self) -> Complex64 {
        self.0[1][0]
    }
    pub fn s_mm(&self) -> Complex64 {
        self.0[1][1]
    }
}

fn invert_2x2(m: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ]
}

/// `S = 1 − K^{1/2} M^{-1} K^{1/2}` for the coupled-mode matrix
/// `M = [[iδ_a + κ₊/2, ig], [ig, iδ_b + κ_m/2]]`.
pub fn scattering_matrix_with_coupling(
    state: &TransducerState,
    g: AngularFrequency,
    delta: AngularFrequency,
) -> ScatteringMatrix {
    let (da, db) = state.mode_detunings(delta);
    let ka = state.blue.kappa().rad_per_s();
    let kb = state.microwave.kappa().rad_per_s();
    let ig = Complex64::new(0.0, g.rad_per_s());
    let m = [
        [Complex64::new(ka / 2.0, da), ig],
        [ig, Complex64::new(kb / 2.0, db)],
    ];
    let inv = invert_2x2(m);
    let root = [state.blue.kappa_e.rad_per_s().sqrt(), state.microwave.kappa_e.rad_per_s().sqrt()];
    let mut s = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let identity = if i == j { 1.0 } else { 0.0 };
            s[i][j] = Complex64::new(identity, 0.0) - root[i] * inv[i][j] * root[j];
        }
    }
    ScatteringMatrix(s)
}

pub fn scattering_matrix(state: &TransducerState, delta: AngularFrequency) -> Result<ScatteringMatrix> {
    let g = state.enhanced_coupling()?;
    Ok(scattering_matrix_with_coupling(state, g, delta))
}

/// Frequency-resolved conversion efficiency `|S_om(δ)|²` for a fixed state.
#[derive(Debug, Clone, Copy)]
pub struct EfficiencyProfile {
    state: TransducerState,
    g: AngularFrequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConversionEfficiency {
    pub eta_peak: f64,
    pub delta_at_peak: AngularFrequency,
}

impl EfficiencyProfile {
    pub fn new(state: &TransducerState) -> Result<Self> {
        Ok(Self { state: *state, g: state.enhanced_coupling()? })
    }

    pub fn at(&self, delta: AngularFrequency) -> f64 {
        scattering_matrix_with_coupling(&self.state, self.g, delta).s_om().norm_sqr()
    }

    fn scale(&self) -> f64 {
        let s = &self.state;
        let offset = s.mode_detunings(AngularFrequency::ZERO).1.abs();
        s.blue.kappa().rad_per_s() + s.microwave.kappa().rad_per_s() + 2.0 * self.g.rad_per_s() + offset
    }

    /// Global maximum over δ: dense grid, then golden-section refinement.
    pub fn peak(&self) -> ConversionEfficiency {
        const N: usize = 4001;
        let w = 4.0 * self.scale();
        let step = 2.0 * w / (N - 1) as f64;
        let x = |k: usize| -w + step * k as f64;
        let best = (0..N)
            .map(|k| (k, self.at(AngularFrequency::from_rad_per_s(x(k)))))
            .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc })
            .0;
        let (mut lo, mut hi) = (x(best) - step, x(best) + step);
        let f = |d: f64| self.at(AngularFrequency::from_rad_per_s(d));
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - ratio * (hi - lo);
        let mut d = lo + ratio * (hi - lo);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..100 {
            if fc > fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - ratio * (hi - lo);
                fc = f(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + ratio * (hi - lo);
                fd = f(d);
            }
            if hi - lo <= 1e-12 * w {
                break;
            }
        }
        let mid = 0.5 * (lo + hi);
        let (delta, eta) = [(x(best), f(x(best))), (mid, f(mid))]
            .into_iter()
            .fold((0.0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        ConversionEfficiency { eta_peak: eta, delta_at_peak: AngularFrequency::from_rad_per_s(delta) }
    }

    /// Detunings bounding the outermost half-maximum crossings.
    pub fn half_power_edges(&self) -> Option<(AngularFrequency, AngularFrequency)> {
        let peak = self.peak();
        if !(peak.eta_peak > 0.0) {
            return None;
        }
        let half = 0.5 * peak.eta_peak;
        let center = peak.delta_at_peak.rad_per_s();
        let f = |d: f64| self.at(AngularFrequency::from_rad_per_s(d)) - half;
        let mut reach = 4.0 * self.scale();
        while f(center + reach) >= 0.0 || f(center - reach) >= 0.0 {
            reach *= 2.0;
        }
        let edge = |sign: f64| {
            // March inward from the far side to the first point above half
            // power, so side lobes beyond a central dip are included.
            const N: usize = 2000;
            let step = reach / N as f64;
            let mut outside = center + sign * reach;
            let mut inside = center;
            for k in (0..N).rev() {
                let probe = center + sign * step * k as f64;
                if f(probe) >= 0.0 {
                    inside = probe;
                    break;
                }
                outside = probe;
            }
            for _ in 0..200 {
                let mid = 0.5 * (inside + outside);
                if f(mid) >= 0.0 {
                    inside = mid;
                } else {
                    outside = mid;
                }
                if (outside - inside).abs() <= 1e-13 * reach {
                    break;
                }
            }
            0.5 * (inside + outside)
        };
        Some((
            AngularFrequency::from_rad_per_s(edge(-1.0)),
            AngularFrequency::from_rad_per_s(edge(1.0)),
        ))
    }

    pub fn bandwidth_3db(&self) -> AngularFrequency {
        match self.half_power_edges() {
            Some((lo, hi)) => hi - lo,
            None => AngularFrequency::ZERO,
        }
    }
}

pub fn conversion_efficiency(state: &TransducerState) -> Result<(ConversionEfficiency, EfficiencyProfile)> {
    let profile = EfficiencyProfile::new(state)?;
    Ok((profile.peak(), profile))
}

pub fn bandwidth_3db(state: &TransducerState) -> Result<AngularFrequency> {
    Ok(EfficiencyProfile::new(state)?.bandwidth_3db())
}

/// Linear response of the microwave mode to average absorbed pump power.
/// Both coefficients are rates per watt.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HeatingCoefficients {
    pub beta_loss: AngularFrequency,
    pub beta_shift: AngularFrequency,
}

impl HeatingCoefficients {
    pub const NONE: Self = Self { beta_loss: AngularFrequency::ZERO, beta_shift: AngularFrequency::ZERO };
}

pub fn pump_heating_model(
    p_avg: Power,
    base: &MicrowaveModeParams,
    heating: &HeatingCoefficients,
) -> Result<MicrowaveModeParams> {
    if !(heating.beta_loss.rad_per_s() >= 0.0) {
        return Err(TransductionError::NegativeHeating { field: "beta_loss", value: heating.beta_loss.rad_per_s() });
    }
    if !(heating.beta_shift.rad_per_s() >= 0.0) {
        return Err(TransductionError::NegativeHeating { field: "beta_shift", value: heating.beta_shift.rad_per_s() });
    }
    let p = p_avg.watts();
    let omega_m = base.omega_m - heating.beta_shift * p;
    if !(omega_m.rad_per_s() > 0.0) {
        return Err(TransductionError::ResonanceCollapsed(omega_m.rad_per_s()));
    }
    Ok(MicrowaveModeParams { omega_m, kappa_i: base.kappa_i + heating.beta_loss * p, kappa_e: base.kappa_e })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub p_peak_w: f64,
    pub duty: f64,
    pub p_avg_w: f64,
    pub n_pump: f64,
    pub g_hz: f64,
    pub cooperativity: f64,
    pub eta_peak: f64,
    pub bw_3db_hz: f64,
}

impl SweepRow {
    pub const HEADER: [&'static str; 8] =
        ["p_peak_w", "duty", "p_avg_w", "n_pump", "g_hz", "cooperativity", "eta_peak", "bw_3db_hz"];

    pub fn values(&self) -> [f64; 8] {
        [
            self.p_peak_w,
            self.duty,
            self.p_avg_w,
            self.n_pump,
            self.g_hz,
            self.cooperativity,
            self.eta_peak,
            self.bw_3db_hz,
        ]
    }
}

/// State with the given peak power and duty, microwave mode heated accordingly.
pub fn heated_state(
    template: &TransducerState,
    p_peak: Power,
    duty: f64,
    heating: &HeatingCoefficients,
) -> Result<TransducerState> {
    if !(duty > 0.0 && duty <= 1.0) {
        return Err(TransductionError::InvalidDuty(duty));
    }
    let mut state = *template;
    state.pump.power_peak = p_peak;
    let p_avg = Power::from_watts(p_peak.watts() * duty)?;
    state.microwave = pump_heating_model(p_avg, &template.microwave, heating)?;
    Ok(state)
}

pub fn sweep_point(
    template: &TransducerState,
    p_peak: Power,
    duty: f64,
    heating: &HeatingCoefficients,
) -> Result<SweepRow> {
    let state = heated_state(template, p_peak, duty, heating)?;
    let n_pump = state.pump_photons()?;
    let profile = EfficiencyProfile::new(&state)?;
    let peak = profile.peak();
    Ok(SweepRow {
        p_peak_w: p_peak.watts(),
        duty,
        p_avg_w: p_peak.watts() * duty,
        n_pump,
        g_hz: profile.g.hz(),
        cooperativity: state.cooperativity()?,
        eta_peak: peak.eta_peak.max(0.0),
        bw_3db_hz: profile.bandwidth_3db().hz(),
    })
}

/// Efficiency table over every (schedule, power) pair; a duty of 1 is CW.
/// Rows are grouped by schedule in input order.
pub fn efficiency_sweep(
    template: &TransducerState,
    powers: &[Power],
    duties: &[f64],
    heating: &HeatingCoefficients,
) -> Result<Vec<SweepRow>> {
    if powers.is_empty() || duties.is_empty() {
        return Err(TransductionError::EmptySweep);
    }
    let mut rows = Vec::with_capacity(powers.len() * duties.len());
    for &duty in duties {
        for &p in powers {
            rows.push(sweep_point(template, p, duty, heating)?);
        }
    }
    Ok(rows)
}

/// Least-squares slope of `η` against peak power through the origin, using
/// rows with `p_peak ≤ p_max`. Units: efficiency per watt.
pub fn low_power_slope(rows: &[SweepRow], p_max: Power) -> Option<f64> {
    let (num, den) = rows
        .iter()
        .filter(|r| r.p_peak_w <= p_max.watts())
        .fold((0.0, 0.0), |(n, d), r| (n + r.p_peak_w * r.eta_peak, d + r.p_peak_w * r.p_peak_w));
    (den > 0.0).then(|| num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatingAnchor {
    pub p_peak: Power,
    pub duty: f64,
    pub eta: f64,
}

fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    // Requires f(lo) ≥ 0 ≥ f(hi).
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Grow `hi` until `f(hi) < 0`, starting from `start`.
fn bracket_upper<F: FnMut(f64) -> f64>(mut f: F, start: f64) -> Option<f64> {
    let mut hi = start;
    for _ in 0..200 {
        if f(hi) < 0.0 {
            return Some(hi);
        }
        hi *= 2.0;
    }
    None
}

/// Solve for the two heating coefficients that put the sweep through two
/// measured `(power, duty, η)` points.
///
/// The first anchor fixes `β_shift` for every trial `β_loss`; the second anchor
/// then fixes `β_loss`. Both coefficients are constrained to be non-negative.
pub fn calibrate_heating(template: &TransducerState, anchors: [HeatingAnchor; 2]) -> Result<HeatingCoefficients> {
    let eta = |a: &HeatingAnchor, h: HeatingCoefficients| -> Result<f64> {
        let state = heated_state(template, a.p_peak, a.duty, &h)?;
        Ok(EfficiencyProfile::new(&state)?.peak().eta_peak.max(0.0))
    };
    for (index, a) in anchors.iter().enumerate() {
        let envelope = eta(a, HeatingCoefficients::NONE)?;
        if a.eta > envelope {
            return Err(TransductionError::AnchorAboveEnvelope { index, target: a.eta, envelope });
        }
    }
    let [first, second] = anchors;
    let scale = template.microwave.kappa().rad_per_s() / first.p_peak.watts().max(1e-12) / first.duty;
    let residual = |h: HeatingCoefficients, a: &HeatingAnchor| eta(a, h).map(|e| e - a.eta).unwrap_or(-1.0);

    let loss_only =
        |bl: f64| residual(HeatingCoefficients { beta_loss: AngularFrequency::from_rad_per_s(bl), ..HeatingCoefficients::NONE }, &first);
    let hi = bracket_upper(loss_only, scale).ok_or(TransductionError::CalibrationUnreachable)?;
    // Loss alone reproducing the first anchor is the far end of its
    // constraint curve, where the fitted shift vanishes.
    let max_loss = bisect(loss_only, 0.0, hi, 100);

    let shift_for = |bl: f64| -> f64 {
        let loss = AngularFrequency::from_rad_per_s(bl);
        let f = |bs: f64| residual(HeatingCoefficients { beta_loss: loss, beta_shift: AngularFrequency::from_rad_per_s(bs) }, &first);
        if f(0.0) < 0.0 {
            return 0.0;
        }
        match bracket_upper(f, scale) {
            Some(hi) => bisect(f, 0.0, hi, 64),
            None => 0.0,
        }
    };
    let outer = |bl: f64| {
        let h = HeatingCoefficients {
            beta_loss: AngularFrequency::from_rad_per_s(bl),
            beta_shift: AngularFrequency::from_rad_per_s(shift_for(bl)),
        };
        residual(h, &second)
    };
    // Loss scales with average power and the shift penalty roughly with its
    // square, so the second anchor's residual changes sign along the curve.
    let (at_zero, at_max) = (outer(0.0), outer(max_loss));
    let beta_loss = if at_zero == 0.0 {
        0.0
    } else if at_zero.signum() != at_max.signum() {
        let s = at_zero.signum();
        bisect(|bl| s * outer(bl), 0.0, max_loss, 64)
    } else {
        return Err(TransductionError::CalibrationUnreachable);
    };
    Ok(HeatingCoefficients {
        beta_loss: AngularFrequency::from_rad_per_s(beta_loss),
        beta_shift: AngularFrequency::from_rad_per_s(shift_for(beta_loss)),
    })
}

/// Which extra quantity pins down the microwave link once the two
/// bidirectional measurements fix `η_m,in·η_m,out·η_t²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkReference {
    /// Through-line gain `η_m,in·η_m,out` measured with the transducer bypassed.
    MicrowaveThroughGain(f64),
    /// On-chip efficiency known from an independent measurement.
    TransducerEfficiency(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkCalibration {
    /// `η_m,in·η_m,out·η_t²`, identifiable from the two measurements alone.
    pub gain_product: f64,
    pub microwave_product: f64,
    pub eta_transducer: f64,
    pub eta_m_in: f64,
    pub eta_m_out: f64,
}

fn check_gain(quantity: &'static str, value: f64) -> Result<f64> {
    if !(value > 0.0 && value <= 1.0) {
        return Err(TransductionError::InconsistentLink { quantity, value });
    }
    Ok(value)
}

/// Measured efficiency (output photons per input photon, including link gains)
/// for microwave → optical and optical → microwave conversion.
pub fn forward_link_model(
    eta_t: f64,
    eta_m_in: f64,
    eta_m_out: f64,
    eta_opt_in: Transmittance,
    eta_opt_out: Transmittance,
    omega_o: AngularFrequency,
    omega_m: AngularFrequency,
) -> (f64, f64) {
    let r = omega_o / omega_m;
    (r * eta_m_in * eta_opt_out.value() * eta_t, eta_opt_in.value() * eta_m_out * eta_t / r)
}

pub fn calibrate_link(
    meas_fwd: f64,
    meas_rev: f64,
    eta_opt_in: Transmittance,
    eta_opt_out: Transmittance,
    omega_o: AngularFrequency,
    omega_m: AngularFrequency,
    reference: LinkReference,
) -> Result<LinkCalibration> {
    if !(meas_fwd > 0.0) {
        return Err(TransductionError::InconsistentLink { quantity: "meas_fwd", value: meas_fwd });
    }
    if !(meas_rev > 0.0) {
        return Err(TransductionError::InconsistentLink { quantity: "meas_rev", value: meas_rev });
    }
    check_gain("eta_opt_in", eta_opt_in.value())?;
    check_gain("eta_opt_out", eta_opt_out.value())?;
    let r = omega_o / omega_m;
    // x = η_m,in·η_t and y = η_m,out·η_t.
    let x = meas_fwd / (r * eta_opt_out.value());
    let y = meas_rev * r / eta_opt_in.value();
    let gain_product = x * y;
    let eta_t = match reference {
        LinkReference::MicrowaveThroughGain(product) => {
            check_gain("microwave_product", product)?;
            (gain_product / product).sqrt()
        }
        LinkReference::TransducerEfficiency(eta_t) => eta_t,
    };
    let eta_t = check_gain("eta_transducer", eta_t)?;
    let eta_m_in = check_gain("eta_m_in", x / eta_t)?;
    let eta_m_out = check_gain("eta_m_out", y / eta_t)?;
    Ok(LinkCalibration {
        gain_product,
        microwave_product: eta_m_in * eta_m_out,
        eta_transducer: eta_t,
        eta_m_in,
        eta_m_out,
    })
}

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use moqt_core::eo_coupling::{coupling_chain, DeviceGeometry};
use moqt_core::qubit::QubitParams;
use moqt_core::transduction::{
    HeatingAnchor, HeatingCoefficients, MicrowaveModeParams, OpticalModeParams, PumpDrive, TransducerState,
};
use moqt_core::vernier::RingComb;
use moqt_core::{AngularFrequency, Power};
use serde::Deserialize;
use serde_json::Value;

use crate::Failure;

pub const DEVICE_DEFAULT: &str = include_str!("../data/device-default.json");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub device: DeviceConfig,
    pub pump: PumpConfig,
    pub qubit: QubitConfig,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub paths: PathsConfig,
    #[serde(default)]
    pub overrides: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub geometry: DeviceGeometry,
    /// Overrides the value derived from the geometry when present.
    #[serde(default)]
    pub g_eo_hz: Option<f64>,
    pub optical: OpticalConfig,
    pub microwave: MicrowaveConfig,
    pub heating: HeatingConfig,
    pub vernier: VernierConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalConfig {
    pub wavelength_m: f64,
    pub kappa_i_hz: f64,
    pub kappa_e_hz: f64,
    /// Blue-mode offset from exact triple resonance.
    #[serde(default)]
    pub mismatch_hz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicrowaveConfig {
    pub f_m_hz: f64,
    pub kappa_hz: f64,
    pub external_ratio: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatingConfig {
    pub beta_loss_hz_per_w: f64,
    pub beta_shift_hz_per_w: f64,
    #[serde(default)]
    pub anchors: Vec<AnchorConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorConfig {
    pub p_peak_w: f64,
    pub duty: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VernierConfig {
    pub fsr_a_hz: f64,
    pub fsr_b_hz: f64,
    pub anchor_a_hz: f64,
    pub anchor_b_hz: f64,
    pub count_a: usize,
    pub count_b: usize,
    pub coupling_hz: f64,
    pub tune_rate_hz_per_v: f64,
    pub v_max: f64,
    pub window_hz: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    pub power_w: f64,
    #[serde(default)]
    pub detuning_hz: f64,
    /// Both absent means continuous wave.
    #[serde(default)]
    pub pulse_width_s: Option<f64>,
    #[serde(default)]
    pub rep_rate_hz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    pub f_q_hz: f64,
    pub kappa_q_hz: f64,
    pub t1_s: f64,
    pub t2star_s: f64,
    pub g_q_ro_hz: f64,
    pub f_ro_hz: f64,
    pub rabi_hz: f64,
    #[serde(default)]
    pub rabi_tau_s: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub powers_w: Vec<f64>,
    pub duties: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn set_path(root: &mut Value, key: &str, value: Value) -> anyhow::Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("override key `{key}` is malformed");
    }
    let (leaf, parents) = parts.split_last().expect("split yields at least one part");
    let mut node = root;
    for part in parents {
        node = node
            .get_mut(*part)
            .filter(|v| v.is_object())
            .ok_or_else(|| anyhow!("override key `{key}`: no section `{part}`"))?;
    }
    node.as_object_mut()
        .ok_or_else(|| anyhow!("override key `{key}` does not name a field"))?
        .insert(leaf.to_string(), value);
    Ok(())
}

/// Parse `key=value`, reading the value as JSON and falling back to a string.
pub fn parse_set(entry: &str) -> anyhow::Result<(String, Value)> {
    let (key, raw) = entry.split_once('=').ok_or_else(|| anyhow!("--set expects key=value, got `{entry}`"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.trim().to_string(), value))
}

impl RunConfig {
    pub fn load(path: Option<&Path>, sets: &[String]) -> Result<Self, Failure> {
        let (text, origin) = match path {
            Some(p) => (
                std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display())).map_err(Failure::config)?,
                p.display().to_string(),
            ),
            None => (DEVICE_DEFAULT.to_string(), "device-default".to_string()),
        };
        Self::from_text(&text, &origin, sets)
    }

    pub fn from_text(text: &str, origin: &str, sets: &[String]) -> Result<Self, Failure> {
        let mut tree: Value = serde_json::from_str(text)
            .map_err(|e| Failure::config(anyhow!("{origin}: line {} column {}: {e}", e.line(), e.column())))?;
        let mut overrides: Vec<(String, Value)> = match tree.get("overrides") {
            Some(Value::Object(map)) => map.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            Some(_) => return Err(Failure::config(anyhow!("{origin}: `overrides` must be an object"))),
            None => Vec::new(),
        };
        for s in sets {
            overrides.push(parse_set(s).map_err(Failure::config)?);
        }
        for (key, value) in overrides {
            if key == "overrides" || key.starts_with("overrides.") {
                return Err(Failure::config(anyhow!("override key `{key}` may not target the overrides section")));
            }
            set_path(&mut tree, &key, value).map_err(Failure::config)?;
        }
        let config: RunConfig = serde_path_to_error::deserialize(tree).map_err(|e| {
            let path = e.path().to_string();
            Failure::config(anyhow!("{origin}: field `{path}`: {}", e.into_inner()))
        })?;
        config.validate().map_err(Failure::config)?;
        Ok(config)
    }

    fn validate(&self) -> anyhow::Result<()> {
        self.device.geometry.validate().context("device.geometry")?;
        self.transducer_state().context("device")?.validate().context("device")?;
        self.qubit_params().validate().context("qubit")?;
        for (field, v) in [("qubit.rabi_hz", self.qubit.rabi_hz), ("qubit.f_q_hz", self.qubit.f_q_hz)] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{field} must be positive, got {v}");
            }
        }
        if let Some(tau) = self.qubit.rabi_tau_s {
            if !(tau > 0.0) {
                bail!("qubit.rabi_tau_s must be positive, got {tau}");
            }
        }
        self.heating().context("device.heating")?;
        for (i, a) in self.device.heating.anchors.iter().enumerate() {
            Power::from_watts(a.p_peak_w).with_context(|| format!("device.heating.anchors[{i}].p_peak_w"))?;
            if !(a.duty > 0.0 && a.duty <= 1.0) {
                bail!("device.heating.anchors[{i}].duty must lie in (0, 1], got {}", a.duty);
            }
            if !(a.eta >= 0.0 && a.eta <= 1.0) {
                bail!("device.heating.anchors[{i}].eta must lie in [0, 1], got {}", a.eta);
            }
        }
        self.combs().context("device.vernier")?;
        let v = &self.device.vernier;
        if !(v.v_max >= 0.0) {
            bail!("device.vernier.v_max must be non-negative, got {}", v.v_max);
        }
        if v.tune_rate_hz_per_v == 0.0 || !v.tune_rate_hz_per_v.is_finite() {
            bail!("device.vernier.tune_rate_hz_per_v must be finite and non-zero");
        }
        for (i, p) in self.sweep.powers_w.iter().enumerate() {
            Power::from_watts(*p).with_context(|| format!("sweep.powers_w[{i}]"))?;
        }
        for (i, d) in self.sweep.duties.iter().enumerate() {
            if !(*d > 0.0 && *d <= 1.0) {
                bail!("sweep.duties[{i}] must lie in (0, 1], got {d}");
            }
        }
        Ok(())
    }

    pub fn omega_m(&self) -> AngularFrequency {
        AngularFrequency::from_hz(self.device.microwave.f_m_hz)
    }

    pub fn g_eo(&self) -> anyhow::Result<AngularFrequency> {
        match self.device.g_eo_hz {
            Some(g) => Ok(AngularFrequency::from_hz(g)),
            None => Ok(coupling_chain(&self.device.geometry, self.omega_m())?.g_eo),
        }
    }

    pub fn pump(&self) -> anyhow::Result<PumpDrive> {
        let p = &self.pump;
        let mut drive = PumpDrive::cw(Power::from_watts(p.power_w).context("pump.power_w")?, self.device.optical.wavelength_m);
        drive.detuning = AngularFrequency::from_hz(p.detuning_hz);
        match (p.pulse_width_s, p.rep_rate_hz) {
            (None, None) => {}
            (Some(w), Some(r)) => {
                drive.pulse_width_s = w;
                drive.rep_rate_hz = r;
                drive.cw = false;
            }
            _ => bail!("pump.pulse_width_s and pump.rep_rate_hz must be given together"),
        }
        Ok(drive)
    }

    pub fn transducer_state(&self) -> anyhow::Result<TransducerState> {
        let o = &self.device.optical;
        let m = &self.device.microwave;
        let omega_m = self.omega_m();
        let red_omega = AngularFrequency::from_wavelength(o.wavelength_m).context("optical.wavelength_m")?;
        let red = OpticalModeParams::new(red_omega, AngularFrequency::from_hz(o.kappa_i_hz), AngularFrequency::from_hz(o.kappa_e_hz))
            .context("optical")?;
        let blue = OpticalModeParams { omega: red_omega + omega_m + AngularFrequency::from_hz(o.mismatch_hz), ..red };
        if !(0.0..=1.0).contains(&m.external_ratio) {
            bail!("microwave.external_ratio must lie in [0, 1], got {}", m.external_ratio);
        }
        let microwave = MicrowaveModeParams::from_total(omega_m, AngularFrequency::from_hz(m.kappa_hz), m.external_ratio)
            .context("microwave")?;
        Ok(TransducerState { red, blue, microwave, g_eo: self.g_eo()?, pump: self.pump()? })
    }

    pub fn heating(&self) -> anyhow::Result<HeatingCoefficients> {
        let h = &self.device.heating;
        for (field, v) in [("beta_loss_hz_per_w", h.beta_loss_hz_per_w), ("beta_shift_hz_per_w", h.beta_shift_hz_per_w)] {
            if !(v >= 0.0 && v.is_finite()) {
                bail!("{field} must be non-negative, got {v}");
            }
        }
        Ok(HeatingCoefficients {
            beta_loss: AngularFrequency::from_hz(h.beta_loss_hz_per_w),
            beta_shift: AngularFrequency::from_hz(h.beta_shift_hz_per_w),
        })
    }

    pub fn anchors(&self) -> anyhow::Result<[HeatingAnchor; 2]> {
        let a = &self.device.heating.anchors;
        if a.len() != 2 {
            bail!("device.heating.anchors must hold exactly two points, found {}", a.len());
        }
        let conv = |c: &AnchorConfig| -> anyhow::Result<HeatingAnchor> {
            Ok(HeatingAnchor { p_peak: Power::from_watts(c.p_peak_w)?, duty: c.duty, eta: c.eta })
        };
        Ok([conv(&a[0])?, conv(&a[1])?])
    }

    pub fn combs(&self) -> anyhow::Result<(RingComb, RingComb)> {
        let v = &self.device.vernier;
        let a = RingComb::new(AngularFrequency::from_hz(v.fsr_a_hz), AngularFrequency::from_hz(v.anchor_a_hz), v.count_a)?;
        let b = RingComb::new(AngularFrequency::from_hz(v.fsr_b_hz), AngularFrequency::from_hz(v.anchor_b_hz), v.count_b)?;
        Ok((a, b))
    }

    pub fn qubit_params(&self) -> QubitParams {
        let q = &self.qubit;
        QubitParams {
            omega_q: AngularFrequency::from_hz(q.f_q_hz),
            kappa_q: AngularFrequency::from_hz(q.kappa_q_hz),
            t1_s: q.t1_s,
            t2star_s: q.t2star_s,
            g_q_ro: AngularFrequency::from_hz(q.g_q_ro_hz),
            omega_ro: AngularFrequency::from_hz(q.f_ro_hz),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_default_loads() {
        let c = RunConfig::from_text(DEVICE_DEFAULT, "device-default", &[]).unwrap();
        assert!((c.g_eo().unwrap().hz() - 945.0).abs() < 0.01);
    }

    #[test]
    fn unknown_key_is_named() {
        let mut v: Value = serde_json::from_str(DEVICE_DEFAULT).unwrap();
        v["device"]["optical"]["kappa_x_hz"] = Value::from(1.0);
        let err = RunConfig::from_text(&v.to_string(), "cfg", &[]).unwrap_err();
        assert_eq!(err.code, 2);
        let msg = format!("{:#}", err.error);
        assert!(msg.contains("kappa_x_hz") && msg.contains("device.optical"), "{msg}");
    }

    #[test]
    fn overrides_apply_in_order() {
        let c = RunConfig::from_text(DEVICE_DEFAULT, "d", &["device.microwave.external_ratio=0.6".into()]).unwrap();
        assert_eq!(c.device.microwave.external_ratio, 0.6);
        let err = RunConfig::from_text(DEVICE_DEFAULT, "d", &["device.nope.x=1".into()]).unwrap_err();
        assert!(format!("{:#}", err.error).contains("device.nope.x"));
    }

    #[test]
    fn physical_invariants_checked_at_load() {
        let err = RunConfig::from_text(DEVICE_DEFAULT, "d", &["device.geometry.alpha=1.5".into()]).unwrap_err();
        assert_eq!(err.code, 2);
        assert!(format!("{:#}", err.error).contains("alpha"));
    }
}

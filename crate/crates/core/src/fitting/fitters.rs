use std::f64::consts::{PI, TAU};

use thiserror::Error;

use super::dataset::{Dataset, DatasetError};
use super::engine::{least_squares, FitResult, LmOptions, Model};
use super::models::{DampedSine, ExpDecay, Lorentzian, PowerRabi, Ramsey};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("no peak or dip found in the data")]
    NoPeak,
    #[error("no oscillatory component detected")]
    NoOscillation,
    #[error("non-physical fit: {param} = {value}")]
    NonPhysical { param: &'static str, value: f64 },
    #[error("unknown model `{0}`; expected lorentzian, time_rabi, power_rabi, t1 or ramsey")]
    UnknownModel(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayKind {
    T1,
    Ramsey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Lorentzian,
    TimeRabi,
    PowerRabi,
    Decay(DecayKind),
}

impl ModelKind {
    pub fn parse(name: &str) -> Result<Self, FitError> {
        Ok(match name {
            "lorentzian" => Self::Lorentzian,
            "time_rabi" => Self::TimeRabi,
            "power_rabi" => Self::PowerRabi,
            "t1" => Self::Decay(DecayKind::T1),
            "ramsey" => Self::Decay(DecayKind::Ramsey),
            other => return Err(FitError::UnknownModel(other.to_string())),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Lorentzian => "lorentzian",
            Self::TimeRabi => "time_rabi",
            Self::PowerRabi => "power_rabi",
            Self::Decay(DecayKind::T1) => "t1",
            Self::Decay(DecayKind::Ramsey) => "ramsey",
        }
    }

    pub fn model(self) -> &'static dyn Model {
        match self {
            Self::Lorentzian => &Lorentzian,
            Self::TimeRabi => &DampedSine,
            Self::PowerRabi => &PowerRabi,
            Self::Decay(DecayKind::T1) => &ExpDecay,
            Self::Decay(DecayKind::Ramsey) => &Ramsey,
        }
    }

    pub fn fit(self, data: &Dataset) -> Result<FitResult, FitError> {
        match self {
            Self::Lorentzian => fit_lorentzian(data),
            Self::TimeRabi => fit_time_rabi(data),
            Self::PowerRabi => fit_power_rabi(data),
            Self::Decay(kind) => fit_decay(data, kind),
        }
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Least-squares `y ≈ a·g + b`; returns `(a, b, cost)`.
fn linear_two(g: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = g.len() as f64;
    let (sg, sy) = (g.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sgg: f64 = g.iter().map(|v| v * v).sum();
    let sgy: f64 = g.iter().zip(y).map(|(a, b)| a * b).sum();
    let den = n * sgg - sg * sg;
    let (a, b) = if den.abs() > 0.0 { ((n * sgy - sg * sy) / den, (sgg * sy - sg * sgy) / den) } else { (0.0, sy / n) };
    let cost = g.iter().zip(y).map(|(gi, yi)| (yi - a * gi - b).powi(2)).sum();
    (a, b, cost)
}

fn range(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

fn is_flat(y: &[f64]) -> bool {
    let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    range(y) <= 1e-12 * scale.max(f64::MIN_POSITIVE)
}

/// Argmax of `|Σ (y_i − ȳ) e^{−2πi f x_i}|²` over a grid with 10× oversampling of
/// the natural resolution `1/span`, refined by a parabola through the peak.
/// Returns `None` when the strongest component completes less than one cycle
/// over the data.
pub fn dominant_frequency(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 4 {
        return None;
    }
    // Only the mean is removed: a fitted straight line would leave a
    // one-cycle bump on pure decays and pass it off as a tone.
    let m = mean(y);
    let d: Vec<f64> = y.iter().map(|yi| yi - m).collect();
    let span = x[n - 1] - x[0];
    let mut steps: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    steps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nyquist = 0.5 / steps[steps.len() / 2];
    let df = 0.1 / span;
    let f0 = 0.5 / span;
    let count = ((nyquist - f0) / df).floor() as usize + 1;
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (xi, di) in x.iter().zip(&d) {
            let (s, c) = (TAU * f * (xi - x[0])).sin_cos();
            re += di * c;
            im -= di * s;
        }
        re * re + im * im
    };
    let spectrum: Vec<f64> = (0..count).map(|k| power(f0 + df * k as f64)).collect();
    let best = spectrum
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, &p)| if p > acc.1 { (k, p) } else { acc })
        .0;
    let mut f = f0 + df * best as f64;
    if best > 0 && best + 1 < count {
        let (a, b, c) = (spectrum[best - 1], spectrum[best], spectrum[best + 1]);
        let den = a - 2.0 * b + c;
        if den < 0.0 {
            f += 0.5 * df * (a - c) / den;
        }
    }
    (f * span >= 1.0).then_some(f)
}

fn fit_best_of(
    model: &dyn Model,
    data: &Dataset,
    inits: impl IntoIterator<Item = Vec<f64>>,
) -> FitResult {
    let options = LmOptions::default();
    inits
        .into_iter()
        .map(|init| least_squares(model, data, &init, &options))
        .filter(|r| r.residual.is_finite())
        .fold(None::<FitResult>, |best, r| match best {
            Some(b) if b.residual <= r.residual => Some(b),
            _ => Some(r),
        })
        .expect("at least one initial guess")
}

pub fn fit_lorentzian(data: &Dataset) -> Result<FitResult, FitError> {
    data.require_points(4)?;
    let (x, y) = (&data.x, &data.y);
    if is_flat(y) {
        return Err(FitError::NoPeak);
    }
    let base = median(y);
    let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let sign = if max - base >= base - min { 1.0 } else { -1.0 };
    let z: Vec<f64> = y.iter().map(|v| sign * (v - base)).collect();
    let peak = z
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
        .0;
    let n = y.len();
    if peak == 0 || peak == n - 1 || !(z[peak] > 0.0) {
        return Err(FitError::NoPeak);
    }
    let half = 0.5 * z[peak];
    let crossing = |range: &mut dyn Iterator<Item = usize>, step: isize| -> Option<f64> {
        for i in range {
            if z[i] < half {
                let j = (i as isize - step) as usize;
                let t = (half - z[i]) / (z[j] - z[i]);
                return Some(x[i] + t * (x[j] - x[i]));
            }
        }
        None
    };
    let left = crossing(&mut (0..peak).rev(), -1);
    let right = crossing(&mut (peak + 1..n), 1);
    let mut notes = Vec::new();
    let width = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (x[peak] - l),
        (None, Some(r)) => 2.0 * (r - x[peak]),
        (None, None) => return Err(FitError::NoPeak),
    };
    let init = vec![x[peak], width, sign * z[peak], base];
    let mut fit = least_squares(&Lorentzian, data, &init, &LmOptions::default());
    let kappa = fit.value("linewidth");
    let sk = fit.sigma("linewidth");
    fit.set("linewidth", kappa.abs(), sk);
    if data.span() < 3.0 * kappa.abs() {
        notes.push("data spans fewer than 3 linewidths".to_string());
    }
    fit.notes.extend(notes);
    Ok(fit)
}

pub fn fit_time_rabi(data: &Dataset) -> Result<FitResult, FitError> {
    data.require_points(5)?;
    let (x, y) = (&data.x, &data.y);
    if is_flat(y) {
        return Err(FitError::NoOscillation);
    }
    let f = dominant_frequency(x, y).ok_or(FitError::NoOscillation)?;
    let t_pi = 0.5 / f;
    let span = data.span();
    let inits = [span / 3.0, span, 3.0 * span].map(|tau| {
        let g: Vec<f64> = x.iter().map(|t| (-t / tau).exp() * (PI * t / t_pi).sin()).collect();
        let (a, b, _) = linear_two(&g, y);
        vec![a, tau, t_pi, b]
    });
    let mut fit = fit_best_of(&DampedSine, data, inits);
    let (tp, stp) = (fit.value("t_pi"), fit.sigma("t_pi"));
    if tp < 0.0 {
        let (a, sa) = (fit.value("amplitude"), fit.sigma("amplitude"));
        fit.set("t_pi", -tp, stp);
        fit.set("amplitude", -a, sa);
    }
    let tau = fit.value("tau");
    if !(tau > 0.0) {
        return Err(FitError::NonPhysical { param: "tau", value: tau });
    }
    if span < 4.0 * fit.value("t_pi") {
        fit.notes.push("data covers fewer than two oscillation periods".to_string());
    }
    fit.notes.push(format!("rabi_frequency_hz = {:.8e}", 0.5 / fit.value("t_pi")));
    Ok(fit)
}

pub fn fit_power_rabi(data: &Dataset) -> Result<FitResult, FitError> {
    data.require_points(4)?;
    let (x, y) = (&data.x, &data.y);
    if is_flat(y) {
        return Err(FitError::NoOscillation);
    }
    let reach = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut steps: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    steps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k_max = PI / steps[steps.len() / 2];
    let k_min = 0.25 * PI / reach;
    // The phase πV/V_π is pinned at V = 0, so the scan step keeps the phase
    // error at the far end of the window below 0.05 rad.
    let dk = 0.05 / reach;
    let count = ((k_max - k_min) / dk).floor() as usize + 1;
    let mut best = (f64::INFINITY, k_min, 0.0, 0.0);
    let mut g = vec![0.0; x.len()];
    for i in 0..count {
        let k = k_min + dk * i as f64;
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi = (k * xi).sin();
        }
        let (a, b, cost) = linear_two(&g, y);
        if cost < best.0 {
            best = (cost, k, a, b);
        }
    }
    let (_, k, a, b) = best;
    let mut fit = fit_best_of(&PowerRabi, data, [vec![a, PI / k, b]]);
    let (vp, svp) = (fit.value("v_pi"), fit.sigma("v_pi"));
    if vp < 0.0 {
        let (amp, sa) = (fit.value("amplitude"), fit.sigma("amplitude"));
        fit.set("v_pi", -vp, svp);
        fit.set("amplitude", -amp, sa);
    }
    let v_pi = fit.value("v_pi");
    if !(v_pi > 0.0) {
        return Err(FitError::NonPhysical { param: "v_pi", value: v_pi });
    }
    if data.span() < v_pi {
        fit.notes.push("voltage window covers less than half a period".to_string());
    }
    fit.notes.push("pi rotations also occur at integer multiples n*v_pi; the smallest positive v_pi is reported".to_string());
    Ok(fit)
}

pub fn fit_decay(data: &Dataset, kind: DecayKind) -> Result<FitResult, FitError> {
    match kind {
        DecayKind::T1 => fit_t1(data),
        DecayKind::Ramsey => fit_ramsey(data),
    }
}

fn fit_t1(data: &Dataset) -> Result<FitResult, FitError> {
    data.require_points(4)?;
    let (x, y) = (&data.x, &data.y);
    if is_flat(y) {
        return Err(FitError::NonPhysical { param: "t1", value: f64::INFINITY });
    }
    let n = y.len();
    let tail = (n / 10).max(1);
    let offset = mean(&y[n - tail..]);
    let amp = y[0] - offset;
    let target = (-1f64).exp();
    let tau = (1..n)
        .find(|&i| (y[i] - offset) / amp < target)
        .map_or(data.span(), |i| x[i] - x[0]);
    let inits = [0.5 * tau, tau, 2.0 * tau].map(|t| {
        let g: Vec<f64> = x.iter().map(|xi| (-xi / t).exp()).collect();
        let (a, b, _) = linear_two(&g, y);
        vec![a, t, b]
    });
    let mut fit = fit_best_of(&ExpDecay, data, inits);
    let t1 = fit.value("t1");
    if !(t1 > 0.0) || !t1.is_finite() {
        return Err(FitError::NonPhysical { param: "t1", value: t1 });
    }
    if data.span() < 2.0 * t1 {
        fit.notes.push("data spans fewer than two time constants".to_string());
    }
    Ok(fit)
}

fn fit_ramsey(data: &Dataset) -> Result<FitResult, FitError> {
    data.require_points(6)?;
    let (x, y) = (&data.x, &data.y);
    if is_flat(y) {
        return Err(FitError::NonPhysical { param: "t2star", value: f64::INFINITY });
    }
    let f = dominant_frequency(x, y).ok_or(FitError::NoOscillation)?;
    let span = data.span();
    let offset = mean(y);
    let (mut re, mut im) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let (s, c) = (TAU * f * xi).sin_cos();
        re += (yi - offset) * c;
        im += (yi - offset) * s;
    }
    let phase = (-im).atan2(re);
    let inits = [span / 3.0, span, 3.0 * span].map(|tau| {
        let g: Vec<f64> = x.iter().map(|t| (-t / tau).exp() * (TAU * f * t + phase).cos()).collect();
        let (a, b, _) = linear_two(&g, y);
        vec![a, tau, f, phase, b]
    });
    let mut fit = fit_best_of(&Ramsey, data, inits);
    let mut p = fit.values();
    if p[2] < 0.0 {
        p[2] = -p[2];
        p[3] = -p[3];
    }
    if p[0] < 0.0 {
        p[0] = -p[0];
        p[3] += PI;
    }
    p[3] = (p[3] + PI).rem_euclid(TAU) - PI;
    for (i, name) in ["amplitude", "t2star", "fringe", "phase", "offset"].iter().enumerate() {
        let s = fit.sigma(name);
        fit.set(name, p[i], s);
    }
    let t2 = fit.value("t2star");
    if !(t2 > 0.0) || !t2.is_finite() {
        return Err(FitError::NonPhysical { param: "t2star", value: t2 });
    }
    if span < 2.0 * t2 {
        fit.notes.push("data spans fewer than two time constants".to_string());
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn flat_lorentzian_is_no_peak() {
        let d = Dataset::new(grid(0.0, 1.0, 50), vec![0.3; 50], None).unwrap();
        assert!(matches!(fit_lorentzian(&d), Err(FitError::NoPeak)));
        let mono = Dataset::new(grid(0.0, 1.0, 50), grid(0.0, 1.0, 50), None).unwrap();
        assert!(matches!(fit_lorentzian(&mono), Err(FitError::NoPeak)));
    }

    #[test]
    fn pure_decay_is_not_oscillatory() {
        let x = grid(0.0, 2e-6, 200);
        let y = x.iter().map(|t| 0.2 + 0.6 * (-t / 500e-9).exp()).collect();
        let d = Dataset::new(x, y, None).unwrap();
        assert!(matches!(fit_time_rabi(&d), Err(FitError::NoOscillation)));
    }

    #[test]
    fn constant_decay_is_non_physical() {
        let d = Dataset::new(grid(0.0, 1e-5, 50), vec![0.5; 50], None).unwrap();
        assert!(matches!(fit_decay(&d, DecayKind::T1), Err(FitError::NonPhysical { .. })));
        assert!(matches!(fit_decay(&d, DecayKind::Ramsey), Err(FitError::NonPhysical { .. })));
    }

    #[test]
    fn dominant_frequency_finds_tone() {
        let x = grid(0.0, 2e-6, 201);
        let y: Vec<f64> = x.iter().map(|t| (TAU * 2.27e6 * t).sin()).collect();
        let f = dominant_frequency(&x, &y).unwrap();
        assert!((f - 2.27e6).abs() / 2.27e6 < 0.02, "{f}");
    }

    #[test]
    fn model_names_round_trip() {
        for name in ["lorentzian", "time_rabi", "power_rabi", "t1", "ramsey"] {
            assert_eq!(ModelKind::parse(name).unwrap().name(), name);
        }
        assert!(ModelKind::parse("gaussian").is_err());
    }
}

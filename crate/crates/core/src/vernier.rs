//! Coupled racetrack ("paperclip") spectrum: two resonance combs with slightly
//! different free spectral ranges hybridize pairwise, and the splitting of each
//! hybrid pair sweeps through its minimum `2µ` once per Vernier period.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{AngularFrequency, SPEED_OF_LIGHT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VernierError {
    #[error("free spectral ranges are equal; the Vernier period is infinite")]
    EqualFsr,
    #[error("free spectral range must be positive")]
    NonPositiveFsr,
    #[error("comb needs at least one mode")]
    EmptyComb,
    #[error("bias tune rate must be non-zero")]
    ZeroTuneRate,
    #[error("coupling must be non-negative")]
    NegativeCoupling,
}

/// Equally spaced resonances `anchor + k·fsr` for `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingComb {
    pub fsr: AngularFrequency,
    pub anchor: AngularFrequency,
    pub count: usize,
}

impl RingComb {
    pub fn new(fsr: AngularFrequency, anchor: AngularFrequency, count: usize) -> Result<Self, VernierError> {
        if !(fsr.rad_per_s() > 0.0) {
            return Err(VernierError::NonPositiveFsr);
        }
        if count == 0 {
            return Err(VernierError::EmptyComb);
        }
        Ok(Self { fsr, anchor, count })
    }

    pub fn modes(&self) -> impl Iterator<Item = AngularFrequency> + '_ {
        (0..self.count).map(move |k| self.anchor + self.fsr * k as f64)
    }
}

/// A pair of supermodes formed from one resonance of each ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridPair {
    pub omega_plus: AngularFrequency,
    pub omega_minus: AngularFrequency,
    pub splitting: AngularFrequency,
    /// Weight of ring A in the upper supermode; ring B carries `1 − participation`.
    pub participation: f64,
}

impl HybridPair {
    pub fn center(&self) -> AngularFrequency {
        (self.omega_plus + self.omega_minus) * 0.5
    }
}

/// Diagonalize the 2×2 coupled-mode matrix `[[ω_a, µ], [µ, ω_b]]`.
pub fn hybridize(
    omega_a: AngularFrequency,
    omega_b: AngularFrequency,
    coupling: AngularFrequency,
) -> Result<HybridPair, VernierError> {
    if coupling.rad_per_s() < 0.0 {
        return Err(VernierError::NegativeCoupling);
    }
    let mean = 0.5 * (omega_a.rad_per_s() + omega_b.rad_per_s());
    let detuning = omega_a.rad_per_s() - omega_b.rad_per_s();
    let splitting = (4.0 * coupling.rad_per_s().powi(2) + detuning * detuning).sqrt();
    let participation = if splitting == 0.0 {
        0.5
    } else {
        0.5 * (1.0 + detuning / splitting)
    };
    Ok(HybridPair {
        omega_plus: AngularFrequency::from_rad_per_s(mean + 0.5 * splitting),
        omega_minus: AngularFrequency::from_rad_per_s(mean - 0.5 * splitting),
        splitting: AngularFrequency::from_rad_per_s(splitting),
        participation,
    })
}

/// Frequency span over which the two combs return to the same alignment.
pub fn vernier_period(
    fsr_a: AngularFrequency,
    fsr_b: AngularFrequency,
) -> Result<AngularFrequency, VernierError> {
    let (a, b) = (fsr_a.rad_per_s(), fsr_b.rad_per_s());
    if !(a > 0.0 && b > 0.0) {
        return Err(VernierError::NonPositiveFsr);
    }
    if a == b {
        return Err(VernierError::EqualFsr);
    }
    Ok(AngularFrequency::from_rad_per_s(a * b / (a - b).abs()))
}

/// Convert a small frequency interval near `carrier` into a wavelength interval.
pub fn frequency_span_to_wavelength(span: AngularFrequency, carrier: AngularFrequency) -> f64 {
    let f = carrier.hz();
    SPEED_OF_LIGHT * span.hz() / (f * f)
}

/// Hybridize every ring-A mode in `window` with its nearest ring-B mode.
///
/// `coupling(i, bare_center)` supplies `µ` for the `i`-th pair in the window,
/// which allows a per-pair coupling table. Ties in nearest-neighbour pairing go
/// to the lower-frequency ring-B mode. The result is sorted by `ω₋`.
pub fn spectrum_scan_with<F>(
    comb_a: &RingComb,
    comb_b: &RingComb,
    window: (AngularFrequency, AngularFrequency),
    mut coupling: F,
) -> Result<Vec<HybridPair>, VernierError>
where
    F: FnMut(usize, AngularFrequency) -> AngularFrequency,
{
    let (lo, hi) = window;
    if !(hi > lo) {
        return Ok(Vec::new());
    }
    let b_modes: Vec<AngularFrequency> = comb_b.modes().collect();
    let mut pairs = Vec::new();
    for a in comb_a.modes().filter(|a| *a >= lo && *a <= hi) {
        let b = nearest(&b_modes, a);
        let index = pairs.len();
        let mu = coupling(index, (a + b) * 0.5);
        pairs.push(hybridize(a, b, mu)?);
    }
    pairs.sort_by(|x, y| x.omega_minus.partial_cmp(&y.omega_minus).unwrap());
    Ok(pairs)
}

/// [`spectrum_scan_with`] for a mode-independent coupling.
pub fn spectrum_scan(
    comb_a: &RingComb,
    comb_b: &RingComb,
    coupling: AngularFrequency,
    window: (AngularFrequency, AngularFrequency),
) -> Result<Vec<HybridPair>, VernierError> {
    spectrum_scan_with(comb_a, comb_b, window, |_, _| coupling)
}

fn nearest(sorted: &[AngularFrequency], target: AngularFrequency) -> AngularFrequency {
    let idx = sorted.partition_point(|m| *m < target);
    let above = sorted.get(idx).copied();
    let below = idx.checked_sub(1).map(|i| sorted[i]);
    match (below, above) {
        (Some(lo), Some(hi)) => {
            let dl = (target - lo).rad_per_s();
            let dh = (hi - target).rad_per_s();
            if dh < dl {
                hi
            } else {
                lo
            }
        }
        (Some(lo), None) => lo,
        (None, Some(hi)) => hi,
        (None, None) => unreachable!("comb has at least one mode"),
    }
}

/// Spacing of the splitting minima along a scan, averaged by least squares.
///
/// Near a minimum the squared splitting is exactly quadratic in the pair
/// center (detuning and center both advance linearly with mode index), so a
/// three-point parabola locates each minimum below the mode spacing.
pub fn observed_period(pairs: &[HybridPair]) -> Option<AngularFrequency> {
    let mut minima = Vec::new();
    for i in 1..pairs.len().saturating_sub(1) {
        let s = |j: usize| pairs[j].splitting.rad_per_s();
        if s(i) < s(i - 1) && s(i) <= s(i + 1) {
            let x = [
                pairs[i - 1].center().rad_per_s(),
                pairs[i].center().rad_per_s(),
                pairs[i + 1].center().rad_per_s(),
            ];
            let y = [s(i - 1).powi(2), s(i).powi(2), s(i + 1).powi(2)];
            minima.push(parabola_vertex(x, y).unwrap_or(x[1]));
        }
    }
    if minima.len() < 2 {
        return None;
    }
    // Least-squares slope of minimum position against its ordinal.
    let n = minima.len() as f64;
    let mean_k = (n - 1.0) / 2.0;
    let mean_x = minima.iter().sum::<f64>() / n;
    let (num, den) = minima
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(num, den), (k, x)| {
            let dk = k as f64 - mean_k;
            (num + dk * (x - mean_x), den + dk * dk)
        });
    Some(AngularFrequency::from_rad_per_s(num / den))
}

fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
    // Work relative to the middle abscissa to keep the arithmetic well scaled.
    let (x0, x2) = (x[0] - x[1], x[2] - x[1]);
    let (d0, d2) = (y[0] - y[1], y[2] - y[1]);
    let denom = x0 * d2 - x2 * d0;
    let curvature = (d0 / x0 - d2 / x2) / (x0 - x2);
    if denom == 0.0 || !(curvature > 0.0) {
        return None;
    }
    Some(x[1] + 0.5 * (x0 * x0 * d2 - x2 * x2 * d0) / denom)
}

/// A hybrid pair that can be biased onto the microwave resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleResonanceCandidate {
    pub pair: HybridPair,
    pub bias_v: f64,
}

/// DC bias needed to move `pair`'s splitting onto `omega_m`.
///
/// Uses the linear bias model `splitting(V) = splitting(0) + tune_rate·V`.
pub fn required_bias(
    pair: &HybridPair,
    omega_m: AngularFrequency,
    tune_rate_per_v: AngularFrequency,
) -> Result<f64, VernierError> {
    if tune_rate_per_v.rad_per_s() == 0.0 {
        return Err(VernierError::ZeroTuneRate);
    }
    Ok((omega_m - pair.splitting) / tune_rate_per_v)
}

pub fn find_triple_resonance(
    pairs: &[HybridPair],
    omega_m: AngularFrequency,
    tune_rate_per_v: AngularFrequency,
    v_max: f64,
) -> Result<Vec<TripleResonanceCandidate>, VernierError> {
    let mut out = Vec::new();
    for pair in pairs {
        let bias_v = required_bias(pair, omega_m, tune_rate_per_v)?;
        if bias_v.abs() <= v_max {
            out.push(TripleResonanceCandidate { pair: *pair, bias_v });
        }
    }
    Ok(out)
}

/// Local slope of the splitting when a bias shifts the two rings in opposite
/// directions by `susceptibility` (frequency per volt) each.
///
/// This vanishes at the anti-crossing itself, where the splitting is only
/// quadratically sensitive to detuning.
pub fn differential_tune_rate(
    susceptibility_per_v: AngularFrequency,
    bare_detuning: AngularFrequency,
    coupling: AngularFrequency,
) -> AngularFrequency {
    let d = bare_detuning.rad_per_s();
    let s = (4.0 * coupling.rad_per_s().powi(2) + d * d).sqrt();
    if s == 0.0 {
        return AngularFrequency::ZERO;
    }
    susceptibility_per_v * (2.0 * d.abs() / s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ghz(x: f64) -> AngularFrequency {
        AngularFrequency::from_hz(x * 1e9)
    }

    #[test]
    fn degenerate_modes_split_by_twice_coupling() {
        let p = hybridize(ghz(195_000.0), ghz(195_000.0), ghz(1.75)).unwrap();
        assert_relative_eq!(p.splitting.hz(), 3.5e9, max_relative = 1e-12);
        assert_eq!(p.participation, 0.5);
    }

    #[test]
    fn uncoupled_limit() {
        let p = hybridize(ghz(10.0), ghz(7.0), AngularFrequency::ZERO).unwrap();
        assert_relative_eq!(p.splitting.hz(), 3e9, max_relative = 1e-12);
        assert_eq!(p.participation, 1.0);
        assert_relative_eq!(p.omega_plus.hz(), 10e9, max_relative = 1e-12);
    }

    #[test]
    fn detuning_equal_to_twice_coupling() {
        let mu = ghz(1.0);
        let p = hybridize(ghz(2.0), ghz(0.0), mu).unwrap();
        assert_relative_eq!(p.splitting.hz(), 2.0 * 2f64.sqrt() * 1e9, max_relative = 1e-12);
        assert!(hybridize(ghz(1.0), ghz(1.0), -mu).is_err());
    }

    #[test]
    fn vernier_examples() {
        let p = vernier_period(ghz(50.6), ghz(46.6)).unwrap();
        assert_relative_eq!(p.hz(), 50.6e9 * 46.6e9 / 4e9, max_relative = 1e-12);
        let nm = frequency_span_to_wavelength(p, AngularFrequency::from_wavelength(1530e-9).unwrap()) * 1e9;
        assert!((nm - 5.0).abs() / 5.0 < 0.1, "{nm} nm");

        let harmonic = vernier_period(ghz(40.0), ghz(20.0)).unwrap();
        assert_relative_eq!(harmonic.hz(), 40e9, max_relative = 1e-12);
        assert_eq!(vernier_period(ghz(46.6), ghz(50.6)).unwrap(), p);
        assert_eq!(vernier_period(ghz(1.0), ghz(1.0)), Err(VernierError::EqualFsr));
    }

    #[test]
    fn scan_edge_cases() {
        let a = RingComb::new(ghz(50.6), ghz(193_000.0), 10).unwrap();
        let b = RingComb::new(ghz(46.6), ghz(193_000.0), 12).unwrap();
        let empty = spectrum_scan(&a, &b, ghz(1.75), (ghz(194_000.0), ghz(193_000.0))).unwrap();
        assert!(empty.is_empty());

        let bare = spectrum_scan(&a, &b, AngularFrequency::ZERO, (ghz(192_000.0), ghz(194_000.0))).unwrap();
        let b_modes: Vec<_> = b.modes().collect();
        for (k, pair) in bare.iter().enumerate() {
            let a_mode = a.anchor + a.fsr * k as f64;
            let nearest_b = b_modes
                .iter()
                .min_by(|x, y| (**x - a_mode).abs().partial_cmp(&(**y - a_mode).abs()).unwrap())
                .unwrap();
            assert_relative_eq!(pair.splitting.rad_per_s(), (a_mode - *nearest_b).abs().rad_per_s(), max_relative = 1e-9);
        }

        let single_a = RingComb::new(ghz(50.6), ghz(193_000.0), 1).unwrap();
        let single_b = RingComb::new(ghz(46.6), ghz(193_001.0), 1).unwrap();
        let one = spectrum_scan(&single_a, &single_b, ghz(1.75), (ghz(192_000.0), ghz(194_000.0))).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn tie_break_prefers_lower_mode() {
        let b = [ghz(0.0), ghz(2.0)];
        assert_eq!(nearest(&b, ghz(1.0)), ghz(0.0));
    }

    #[test]
    fn parabola_vertex_exact_for_quadratic() {
        let f = |x: f64| 3.0 * (x - 1.7).powi(2) + 0.4;
        let v = parabola_vertex([0.0, 1.0, 2.5], [f(0.0), f(1.0), f(2.5)]).unwrap();
        assert_relative_eq!(v, 1.7, max_relative = 1e-12);
    }

    #[test]
    fn operating_pair_needs_about_35_volts() {
        let pair = hybridize(ghz(195_000.0), ghz(195_000.0), ghz(1.75)).unwrap();
        let omega_m = ghz(3.71);
        let rate = AngularFrequency::from_hz(6e6);
        let found = find_triple_resonance(&[pair], omega_m, rate, 50.0).unwrap();
        assert_eq!(found.len(), 1);
        assert_relative_eq!(found[0].bias_v, 35.0, max_relative = 1e-9);

        let flipped = find_triple_resonance(&[pair], omega_m, -rate, 50.0).unwrap();
        assert_relative_eq!(flipped[0].bias_v, -35.0, max_relative = 1e-9);

        let already = hybridize(ghz(195_000.0), ghz(195_000.0), ghz(1.855)).unwrap();
        assert!(required_bias(&already, omega_m, rate).unwrap().abs() < 1e-6);
        assert!(find_triple_resonance(&[pair], omega_m, AngularFrequency::ZERO, 50.0).is_err());
        assert!(find_triple_resonance(&[pair], omega_m, rate, 10.0).unwrap().is_empty());
    }

    #[test]
    fn differential_rate_vanishes_at_anticrossing() {
        let g = AngularFrequency::from_hz(10e6);
        assert_eq!(differential_tune_rate(g, AngularFrequency::ZERO, ghz(1.75)).rad_per_s(), 0.0);
        let far = differential_tune_rate(g, ghz(1000.0), ghz(1.75));
        assert_relative_eq!(far.hz(), 20e6, max_relative = 1e-5);
    }

    proptest! {
        #[test]
        fn trace_preserved(a in 1e14f64..2e14, d in -1e11f64..1e11, mu in 0.0f64..1e10) {
            let pa = AngularFrequency::from_hz(a);
            let pb = AngularFrequency::from_hz(a + d);
            let p = hybridize(pa, pb, AngularFrequency::from_hz(mu)).unwrap();
            let sum = p.omega_plus.rad_per_s() + p.omega_minus.rad_per_s();
            let bare = pa.rad_per_s() + pb.rad_per_s();
            prop_assert!((sum - bare).abs() <= 1e-12 * bare);
            prop_assert!(p.omega_plus >= p.omega_minus);
        }

        #[test]
        fn splitting_even_and_bounded_below(d in -1e11f64..1e11, mu in 0.0f64..1e10) {
            let center = 1.9e14;
            let mu = AngularFrequency::from_hz(mu);
            let up = hybridize(AngularFrequency::from_hz(center + d), AngularFrequency::from_hz(center), mu).unwrap();
            let down = hybridize(AngularFrequency::from_hz(center - d), AngularFrequency::from_hz(center), mu).unwrap();
            prop_assert!((up.splitting.rad_per_s() - down.splitting.rad_per_s()).abs() <= 1e-9 * up.splitting.rad_per_s().max(1.0));
            prop_assert!(up.splitting.rad_per_s() >= 2.0 * mu.rad_per_s() * (1.0 - 1e-12));
        }
    }
}

use moqt_core::fitting::dominant_frequency;
use moqt_core::fitting::synthetic::linspace;
use moqt_core::qubit::{chevron_map, detuned_rabi};
use moqt_core::transduction::{
    resonant_efficiency, scattering_matrix, scattering_matrix_with_coupling, EfficiencyProfile, MicrowaveModeParams,
    OpticalModeParams, PumpDrive, TransducerState,
};
use moqt_core::vernier::{observed_period, spectrum_scan, vernier_period, RingComb};
use moqt_core::{AngularFrequency, Power};
use proptest::prelude::*;

fn hz(x: f64) -> AngularFrequency {
    AngularFrequency::from_hz(x)
}

fn make_state(kappa_i: f64, kappa_e: f64, kappa_m: f64, ratio_m: f64, g_eo: f64, power: f64, mismatch: f64) -> TransducerState {
    let red_omega = AngularFrequency::from_wavelength(1530e-9).unwrap();
    let omega_m = hz(3.71e9);
    let red = OpticalModeParams::new(red_omega, hz(kappa_i), hz(kappa_e)).unwrap();
    let blue = OpticalModeParams { omega: red_omega + omega_m + hz(mismatch), ..red };
    TransducerState {
        red,
        blue,
        microwave: MicrowaveModeParams::from_total(omega_m, hz(kappa_m), ratio_m).unwrap(),
        g_eo: hz(g_eo),
        pump: PumpDrive::cw(Power::from_watts(power).unwrap(), 1530e-9),
    }
}

prop_compose! {
    fn valid_state()(
        kappa_i in 1e6..1e8f64,
        kappa_e in 1e6..1e8f64,
        kappa_m in 1e5..5e7f64,
        ratio_m in 0.0..=1.0f64,
        g_eo in 10.0..1e4f64,
        power in 0.0..1e-3f64,
        mismatch in -5e7..5e7f64,
    ) -> TransducerState {
        make_state(kappa_i, kappa_e, kappa_m, ratio_m, g_eo, power, mismatch)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conversion_is_passive_and_reciprocal(s in valid_state(), delta in -5e8..5e8f64) {
        let m = scattering_matrix(&s, hz(delta)).unwrap();
        let (om, mo) = (m.s_om().norm_sqr(), m.s_mo().norm_sqr());
        prop_assert!(om <= 1.0 + 1e-12);
        prop_assert!((om - mo).abs() <= 1e-12 * om.max(f64::MIN_POSITIVE));
        // Energy conservation per column never exceeds unity.
        prop_assert!(m.s_oo().norm_sqr() + mo <= 1.0 + 1e-9);
    }

    #[test]
    fn efficiency_decays_far_from_resonance(s in valid_state()) {
        let p = EfficiencyProfile::new(&s).unwrap();
        let far = p.at(hz(1e12));
        prop_assert!(far <= 1e-6 * p.peak().eta_peak.max(1e-300) + 1e-30);
    }
}

#[test]
fn weak_cooperativity_matches_closed_form() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let s = make_state(
            rng.random_range(5e6..5e7),
            rng.random_range(5e6..5e7),
            rng.random_range(2e6..3e7),
            rng.random_range(0.05..0.95),
            945.0,
            0.0,
            0.0,
        );
        let c_target = rng.random_range(1e-6..1e-3);
        let kappa_o = s.blue.kappa().rad_per_s();
        let kappa_m = s.microwave.kappa().rad_per_s();
        let g = AngularFrequency::from_rad_per_s((c_target * kappa_o * kappa_m / 4.0).sqrt());
        let eta = scattering_matrix_with_coupling(&s, g, hz(0.0)).s_om().norm_sqr();
        let expected = resonant_efficiency(s.blue.external_ratio(), s.microwave.external_ratio(), c_target);
        assert!((eta - expected).abs() <= 1e-6 * expected, "{eta} vs {expected}");
    }
}

#[test]
fn chevron_fringes_follow_generalized_rabi() {
    let omega_r = hz(2.27e6);
    let widths = linspace(0.0, 4.4e-6, 2201);
    let detunings: Vec<_> = [0.0, 1e6, 2e6, 4e6].iter().map(|&d| hz(d)).collect();
    let grid = chevron_map(&widths, &detunings, omega_r, None).unwrap();
    for (d, row) in detunings.iter().zip(&grid.values) {
        let f = dominant_frequency(&widths, row).unwrap();
        let expected = detuned_rabi(omega_r, *d).hz();
        assert!((f - expected).abs() / expected < 0.01, "{} Hz: {f} vs {expected}", d.hz());
    }
    let f0 = dominant_frequency(&widths, &grid.values[0]).unwrap();
    assert!((1.0 / f0 - 440e-9).abs() / 440e-9 < 0.01);
}

#[test]
fn scan_period_matches_vernier_formula() {
    let a = RingComb::new(hz(50.6e9), hz(193e12), 400).unwrap();
    let b = RingComb::new(hz(46.6e9), hz(193e12), 440).unwrap();
    let period = vernier_period(a.fsr, b.fsr).unwrap();
    let lo = hz(193e12 + 1e9);
    let hi = lo + period * 4.0;
    let pairs = spectrum_scan(&a, &b, hz(1.75e9), (lo, hi)).unwrap();
    let observed = observed_period(&pairs).unwrap();
    assert!((observed / period - 1.0).abs() < 0.01, "{} vs {}", observed.hz(), period.hz());
}

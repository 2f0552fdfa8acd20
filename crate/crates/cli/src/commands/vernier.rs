use anyhow::{anyhow, Context as _};
use moqt_core::vernier::{
    find_triple_resonance, frequency_span_to_wavelength, observed_period, required_bias, spectrum_scan, vernier_period,
};
use moqt_core::AngularFrequency;
use serde::Serialize;

use crate::output::{parse_grid, Csv};
use crate::{CmdResult, Context, Failure};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Optical scan window `lo,hi` in Hz; the config window when absent.
    #[arg(long)]
    pub window: Option<String>,
}

#[derive(Serialize)]
struct Candidate {
    omega_minus_hz: f64,
    omega_plus_hz: f64,
    splitting_hz: f64,
    vdc_required_v: f64,
}

#[derive(Serialize)]
struct Report {
    window_hz: [f64; 2],
    pairs: usize,
    period_hz: f64,
    period_observed_hz: Option<f64>,
    period_wavelength_m: f64,
    omega_m_hz: f64,
    tune_rate_hz_per_v: f64,
    v_max: f64,
    candidates: Vec<Candidate>,
}

pub fn run(ctx: &Context, args: Args) -> CmdResult {
    let cfg = ctx.config()?;
    let v = &cfg.device.vernier;
    let window = match &args.window {
        Some(w) => {
            let g = parse_grid(w).context("--window").map_err(Failure::config)?;
            if g.len() != 2 {
                return Err(Failure::config(anyhow!("--window expects `lo,hi`, got {} values", g.len())));
            }
            [g[0], g[1]]
        }
        None => v.window_hz,
    };
    if !(window[1] > window[0]) {
        return Err(Failure::config(anyhow!("scan window [{}, {}] is empty", window[0], window[1])));
    }
    let (a, b) = cfg.combs().map_err(Failure::config)?;
    let coupling = AngularFrequency::from_hz(v.coupling_hz);
    let pairs = spectrum_scan(&a, &b, coupling, (AngularFrequency::from_hz(window[0]), AngularFrequency::from_hz(window[1])))?;
    if pairs.is_empty() {
        return Err(Failure::runtime(anyhow!("no ring-A resonances fall inside the scan window")));
    }
    let omega_m = cfg.omega_m();
    let rate = AngularFrequency::from_hz(v.tune_rate_hz_per_v);
    let mut csv = Csv::new(&["omega_minus_hz", "omega_plus_hz", "splitting_hz", "vdc_required_v"]);
    for p in &pairs {
        csv.row(&[p.omega_minus.hz(), p.omega_plus.hz(), p.splitting.hz(), required_bias(p, omega_m, rate)?]);
    }
    ctx.out.write("vernier_scan.csv", &csv.into_bytes())?;

    let period = vernier_period(a.fsr, b.fsr)?;
    let carrier = AngularFrequency::from_hz(0.5 * (window[0] + window[1]));
    let candidates: Vec<Candidate> = find_triple_resonance(&pairs, omega_m, rate, v.v_max)?
        .into_iter()
        .map(|c| Candidate {
            omega_minus_hz: c.pair.omega_minus.hz(),
            omega_plus_hz: c.pair.omega_plus.hz(),
            splitting_hz: c.pair.splitting.hz(),
            vdc_required_v: c.bias_v,
        })
        .collect();
    if candidates.is_empty() {
        ctx.warn(&format!("no hybrid pair reaches the microwave resonance within ±{} V", v.v_max));
    }
    let report = Report {
        window_hz: window,
        pairs: pairs.len(),
        period_hz: period.hz(),
        period_observed_hz: observed_period(&pairs).map(|p| p.hz()),
        period_wavelength_m: frequency_span_to_wavelength(period, carrier),
        omega_m_hz: omega_m.hz(),
        tune_rate_hz_per_v: v.tune_rate_hz_per_v,
        v_max: v.v_max,
        candidates,
    };
    ctx.out.write_json("vernier_report.json", &report)?;
    if !ctx.quiet {
        println!("vernier period {:.4e} Hz ({:.3} nm), {} candidate(s)", report.period_hz, report.period_wavelength_m * 1e9, report.candidates.len());
    }
    Ok(())
}

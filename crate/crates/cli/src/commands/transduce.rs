use anyhow::Context as _;
use moqt_core::transduction::{
    calibrate_heating, efficiency_sweep, heated_state, low_power_slope, EfficiencyProfile, HeatingCoefficients, SweepRow,
};
use moqt_core::Power;
use serde::Serialize;

use crate::output::{parse_grid, Csv};
use crate::{CmdResult, Context, Failure};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Peak pump powers in W, as `a,b,c` or `start:stop:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub power_sweep: Option<String>,
    /// Duty cycles in (0, 1]; 1 is continuous wave.
    #[arg(long)]
    pub duty: Option<String>,
    /// Fit the heating coefficients to the two anchors in the config first.
    #[arg(long)]
    pub calibrate_heating: bool,
    /// Upper peak power (W) of the linear-regime slope fit.
    #[arg(long, default_value_t = 10e-6)]
    pub slope_max_w: f64,
}

#[derive(Serialize)]
struct OperatingPoint {
    p_peak_w: f64,
    duty: f64,
    p_avg_w: f64,
    n_pump: f64,
    g_hz: f64,
    cooperativity: f64,
    eta_peak: f64,
    delta_at_peak_hz: f64,
    bw_3db_hz: f64,
    triple_resonant: bool,
}

#[derive(Serialize)]
struct Heating {
    beta_loss_hz_per_w: f64,
    beta_shift_hz_per_w: f64,
    calibrated: bool,
}

#[derive(Serialize)]
struct Slope {
    duty: f64,
    eta_per_w: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    g_eo_hz: f64,
    eta_peak: f64,
    cooperativity: f64,
    g_hz: f64,
    bw_3db_hz: f64,
    operating_point: OperatingPoint,
    heating: Heating,
    low_power_slopes: Vec<Slope>,
    rows: usize,
    warnings: Vec<String>,
}

pub fn run(ctx: &Context, args: Args) -> CmdResult {
    let cfg = ctx.config()?;
    let template = cfg.transducer_state().map_err(Failure::config)?;
    let powers = match &args.power_sweep {
        Some(s) => parse_grid(s).context("--power-sweep").map_err(Failure::config)?,
        None => cfg.sweep.powers_w.clone(),
    };
    let duties = match &args.duty {
        Some(s) => parse_grid(s).context("--duty").map_err(Failure::config)?,
        None => cfg.sweep.duties.clone(),
    };
    if powers.is_empty() || duties.is_empty() {
        return Err(Failure::config(anyhow::anyhow!("sweep needs at least one power and one duty cycle")));
    }
    let powers: Vec<Power> = powers
        .iter()
        .map(|p| Power::from_watts(*p))
        .collect::<Result<_, _>>()
        .context("--power-sweep")
        .map_err(Failure::config)?;
    if let Some(d) = duties.iter().find(|d| !(**d > 0.0 && **d <= 1.0)) {
        return Err(Failure::config(anyhow::anyhow!("--duty: {d} is outside (0, 1]")));
    }

    let mut heating = cfg.heating().map_err(Failure::config)?;
    if args.calibrate_heating {
        let anchors = cfg.anchors().map_err(Failure::config)?;
        heating = calibrate_heating(&template, anchors).context("heating calibration")?;
    }

    let rows = efficiency_sweep(&template, &powers, &duties, &heating)?;
    let mut csv = Csv::new(&SweepRow::HEADER);
    for r in &rows {
        csv.row(&r.values());
    }
    ctx.out.write("efficiency_sweep.csv", &csv.into_bytes())?;

    let op = operating_point(&template, &heating)?;
    let slope_max = Power::from_watts(args.slope_max_w).context("--slope-max-w").map_err(Failure::config)?;
    let low_power_slopes = duties
        .iter()
        .map(|&d| {
            let subset: Vec<SweepRow> = rows.iter().filter(|r| r.duty == d).copied().collect();
            Slope { duty: d, eta_per_w: low_power_slope(&subset, slope_max) }
        })
        .collect();
    let mut warnings = Vec::new();
    if !op.triple_resonant {
        warnings.push("blue-mode detuning from triple resonance exceeds kappa_m/10".to_string());
    }
    for w in &warnings {
        ctx.warn(w);
    }
    let summary = Summary {
        g_eo_hz: template.g_eo.hz(),
        eta_peak: op.eta_peak,
        cooperativity: op.cooperativity,
        g_hz: op.g_hz,
        bw_3db_hz: op.bw_3db_hz,
        operating_point: op,
        heating: Heating {
            beta_loss_hz_per_w: heating.beta_loss.hz(),
            beta_shift_hz_per_w: heating.beta_shift.hz(),
            calibrated: args.calibrate_heating,
        },
        low_power_slopes,
        rows: rows.len(),
        warnings,
    };
    ctx.out.write_json("transduce_summary.json", &summary)?;
    if !ctx.quiet {
        println!(
            "eta_peak = {:.4e}  C = {:.4e}  g/2pi = {:.4e} Hz  bw_3db = {:.4e} Hz",
            summary.eta_peak, summary.cooperativity, summary.g_hz, summary.bw_3db_hz
        );
    }
    Ok(())
}

fn operating_point(
    template: &moqt_core::transduction::TransducerState,
    heating: &HeatingCoefficients,
) -> Result<OperatingPoint, Failure> {
    let duty = template.pump.duty();
    let state = heated_state(template, template.pump.power_peak, duty, heating)?;
    let profile = EfficiencyProfile::new(&state)?;
    let peak = profile.peak();
    Ok(OperatingPoint {
        p_peak_w: template.pump.power_peak.watts(),
        duty,
        p_avg_w: template.pump.power_peak.watts() * duty,
        n_pump: state.pump_photons()?,
        g_hz: state.enhanced_coupling()?.hz(),
        cooperativity: state.cooperativity()?,
        eta_peak: peak.eta_peak,
        delta_at_peak_hz: peak.delta_at_peak.hz(),
        bw_3db_hz: profile.bandwidth_3db().hz(),
        triple_resonant: state.is_triple_resonant(),
    })
}

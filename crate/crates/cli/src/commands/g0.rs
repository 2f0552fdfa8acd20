use anyhow::anyhow;
use moqt_core::eo_coupling::{coupling_chain, solve_geometry, DeviceGeometry, GeometryParam};
use moqt_core::AngularFrequency;
use serde::Serialize;

use crate::output::json_text;
use crate::{CmdResult, Context, Failure};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Geometry field to solve for: v_over_e, capacitance, alpha, r33 or gamma.
    #[arg(long, requires = "target_g0")]
    pub solve_for: Option<String>,
    /// Target single-photon coupling g_eo/2π in Hz.
    #[arg(long, requires = "solve_for")]
    pub target_g0: Option<f64>,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct Report {
    /// Susceptibility G/2π in Hz per volt.
    G_per_volt: f64,
    V_zpf: f64,
    /// g_eo/2π in Hz.
    g_eo: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    solved: Option<Solved>,
    geometry: DeviceGeometry,
}

#[derive(Serialize)]
struct Solved {
    param: &'static str,
    value: f64,
    target_g0_hz: f64,
}

pub fn run(ctx: &Context, args: Args) -> CmdResult {
    let cfg = ctx.config()?;
    let omega_m = cfg.omega_m();
    let mut geometry = cfg.device.geometry;
    let mut solved = None;
    if let (Some(name), Some(target)) = (&args.solve_for, args.target_g0) {
        let param = GeometryParam::parse(name)
            .ok_or_else(|| Failure::config(anyhow!("--solve-for: unknown parameter `{name}`; expected v_over_e, capacitance, alpha, r33 or gamma")))?;
        if !(target >= 0.0 && target.is_finite()) {
            return Err(Failure::config(anyhow!("--target-g0 must be a non-negative frequency, got {target}")));
        }
        geometry = solve_geometry(&geometry, omega_m, param, AngularFrequency::from_hz(target))?;
        let value = match param {
            GeometryParam::VOverE => geometry.v_over_e_m,
            GeometryParam::Capacitance => geometry.capacitance_f,
            GeometryParam::Alpha => geometry.alpha,
            GeometryParam::R33 => geometry.r33_m_per_v,
            GeometryParam::Gamma => geometry.gamma,
        };
        solved = Some(Solved { param: param.name(), value, target_g0_hz: target });
    }
    let chain = coupling_chain(&geometry, omega_m)?;
    let report = Report {
        G_per_volt: chain.susceptibility_hz_per_v,
        V_zpf: chain.v_zpf,
        g_eo: chain.g_eo.hz(),
        solved,
        geometry,
    };
    let text = json_text(&report)?;
    ctx.out.write("g0.json", text.as_bytes())?;
    if !ctx.quiet {
        print!("{text}");
    }
    Ok(())
}

use anyhow::Context as _;
use moqt_core::qubit::chevron_map;
use moqt_core::AngularFrequency;

use crate::output::{parse_grid, Csv};
use crate::{CmdResult, Context, Failure};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Pulse widths in s, as `a,b,c` or `start:stop:count`.
    #[arg(long, default_value = "0:2e-6:201", allow_hyphen_values = true)]
    pub widths: String,
    /// Drive detunings in Hz, as `a,b,c` or `start:stop:count`.
    #[arg(long, default_value = "-4e6:4e6:9", allow_hyphen_values = true)]
    pub detunings: String,
    /// Ignore the configured Rabi decay time.
    #[arg(long)]
    pub no_decay: bool,
}

pub fn run(ctx: &Context, args: Args) -> CmdResult {
    let cfg = ctx.config()?;
    let widths = parse_grid(&args.widths).context("--widths").map_err(Failure::config)?;
    let detunings: Vec<AngularFrequency> = parse_grid(&args.detunings)
        .context("--detunings")
        .map_err(Failure::config)?
        .into_iter()
        .map(AngularFrequency::from_hz)
        .collect();
    if let Some(w) = widths.iter().find(|w| **w < 0.0) {
        return Err(Failure::config(anyhow::anyhow!("--widths: negative pulse width {w}")));
    }
    let tau = if args.no_decay { None } else { cfg.qubit.rabi_tau_s };
    let grid = chevron_map(&widths, &detunings, AngularFrequency::from_hz(cfg.qubit.rabi_hz), tau)?;
    let mut csv = Csv::new(&["width_s", "detuning_hz", "population"]);
    for (w, d, p) in grid.rows() {
        csv.row(&[w, d, p]);
    }
    ctx.out.write("chevron.csv", &csv.into_bytes())?;
    Ok(())
}

use moqt_core::fitting::synthetic::SyntheticSpec;
use moqt_core::fitting::ModelKind;

use crate::{CmdResult, Context, Failure};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// lorentzian, time_rabi, power_rabi, t1 or ramsey.
    pub model: String,
    /// Override the reference noise standard deviation.
    #[arg(long)]
    pub noise: Option<f64>,
}

pub fn run(ctx: &Context, args: Args) -> CmdResult {
    let kind = ModelKind::parse(&args.model).map_err(Failure::config)?;
    let mut spec = SyntheticSpec::reference(kind);
    if let Some(n) = args.noise {
        if !(n >= 0.0 && n.is_finite()) {
            return Err(Failure::config(anyhow::anyhow!("--noise must be non-negative, got {n}")));
        }
        spec.noise = n;
    }
    let data = spec.generate(ctx.seed);
    let mut bytes = format!("# synthetic {} trace, seed {}, noise {}\n", kind.name(), ctx.seed, spec.noise).into_bytes();
    data.write_csv(&mut bytes)?;
    ctx.out.write(&format!("{}.csv", kind.name()), &bytes)?;
    Ok(())
}

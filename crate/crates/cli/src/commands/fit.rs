use std::path::PathBuf;

use anyhow::anyhow;
use moqt_core::fitting::{Dataset, DatasetError, FitError, ModelKind};

use crate::output::json_text;
use crate::{CmdResult, Context, Failure};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// lorentzian, time_rabi, power_rabi, t1 or ramsey.
    pub model: String,
    /// CSV with header `x,y` or `x,y,sigma`.
    pub dataset: PathBuf,
}

pub fn run(ctx: &Context, args: Args) -> CmdResult {
    let kind = ModelKind::parse(&args.model).map_err(Failure::config)?;
    let shown = args.dataset.display().to_string();
    let data = Dataset::from_path(&args.dataset).map_err(|e| match e {
        DatasetError::Io(io) => Failure::runtime(anyhow!("{shown}: {io}")),
        other => Failure::config(anyhow!("{shown}: {other}")),
    })?;
    let fit = kind.fit(&data).map_err(|e| match e {
        FitError::Dataset(d) => Failure::config(anyhow!("{shown}: {d}")),
        other => Failure::runtime(anyhow!("{shown}: {other}")),
    })?;
    if !fit.converged {
        ctx.warn(&format!("{} fit did not converge after {} iterations", kind.name(), fit.iterations));
    }
    for note in &fit.notes {
        ctx.warn(note);
    }
    let text = json_text(&fit)?;
    ctx.out.write(&format!("fit_{}.json", kind.name()), text.as_bytes())?;
    print!("{text}");
    Ok(())
}

use std::path::PathBuf;

use anyhow::{anyhow, Context as _};
use moqt_core::network::{evaluate_scenario, EntanglementScenario};

use crate::output::Csv;
use crate::{CmdResult, Context, Failure};

pub const BUNDLED: [(&str, &str); 3] = [
    ("current.json", include_str!("../../data/scenarios/current.json")),
    ("low-loss-chip.json", include_str!("../../data/scenarios/low-loss-chip.json")),
    ("tapered-fiber.json", include_str!("../../data/scenarios/tapered-fiber.json")),
];

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Scenario JSON files; the three bundled scenarios when none are given.
    pub scenarios: Vec<PathBuf>,
}

fn parse(origin: &str, text: &str) -> Result<EntanglementScenario, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Failure::config(anyhow!("{origin}: field `{path}`: {}", e.into_inner()))
    })
}

pub fn run(ctx: &Context, args: Args) -> CmdResult {
    let mut scenarios = Vec::new();
    if args.scenarios.is_empty() {
        for (name, text) in BUNDLED {
            scenarios.push(parse(name, text)?);
        }
    } else {
        for path in &args.scenarios {
            let shown = path.display().to_string();
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {shown}")).map_err(Failure::config)?;
            scenarios.push(parse(&shown, &text)?);
        }
    }
    let mut results = Vec::new();
    for s in &scenarios {
        let r = evaluate_scenario(s).map_err(|e| Failure::config(anyhow!("scenario `{}`: {e}", s.name)))?;
        for w in &r.warnings {
            ctx.warn(&format!("{}: {w}", r.scenario));
        }
        results.push(r);
    }
    let mut csv = Csv::new(&["scenario", "p_pair", "r_ent_hz", "fidelity", "fidelity_clamped"]);
    for r in &results {
        if r.scenario.contains([',', '"', '\n']) {
            return Err(Failure::config(anyhow!("scenario name `{}` may not contain commas, quotes or newlines", r.scenario)));
        }
        csv.labelled_row(&r.scenario, &[r.p_pair, r.r_ent_hz, r.fidelity, r.fidelity_clamped]);
    }
    ctx.out.write("budget.csv", &csv.into_bytes())?;
    ctx.out.write_json("budget.json", &results)?;
    if !ctx.quiet {
        println!("{:<16} {:>12} {:>12} {:>10}", "scenario", "p_pair", "r_ent_hz", "fidelity");
        for r in &results {
            println!("{:<16} {:>12.4e} {:>12.4e} {:>10.4}", r.scenario, r.p_pair, r.r_ent_hz, r.fidelity_clamped);
        }
    }
    Ok(())
}

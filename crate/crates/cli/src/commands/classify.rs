use serde::Serialize;
use triad_core::regimes::{classify_point, RegimeLabel};
use triad_core::{classify, find_equilibrium, Equilibrium, Thresholds};

use super::{println_json, runtime, usage};
use crate::args::ClassifyArgs;
use crate::config::{self, FileConfig};
use crate::error::CliResult;

#[derive(Serialize)]
struct Report<'a> {
    regime: String,
    label: &'a RegimeLabel,
    delta_mu: f64,
    thresholds: &'a Thresholds,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    equilibrium: Option<&'a Equilibrium>,
}

pub fn run(args: &ClassifyArgs, file: &FileConfig) -> CliResult<()> {
    let pt = config::point(&args.point, file)?;
    let dmu = pt.params.delta_mu();
    if !(dmu > 0.0) {
        return Err(usage(format!(
            "classification needs delta_mu > 0, got {dmu}"
        )));
    }
    if let Some(x) = args.state {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(usage("state must be finite"));
        }
        let label = classify_point(&x, dmu, &pt.thresholds);
        println_json(&Report {
            regime: label.short(),
            label: &label,
            delta_mu: dmu,
            thresholds: &pt.thresholds,
            state: Some(x),
            equilibrium: None,
        });
        return Ok(());
    }
    let eq = find_equilibrium(&pt.params, &pt.x_init, &pt.cfg).map_err(runtime)?;
    let label = classify(&eq, dmu, &pt.thresholds);
    println_json(&Report {
        regime: label.short(),
        label: &label,
        delta_mu: dmu,
        thresholds: &pt.thresholds,
        state: None,
        equilibrium: Some(&eq),
    });
    Ok(())
}

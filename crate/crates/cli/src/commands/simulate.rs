use std::path::{Path, PathBuf};

use serde::Serialize;
use triad_core::model::to_rsx;
use triad_core::regimes::RegimeLabel;
use triad_core::{classify, find_equilibrium, integrate, Equilibrium, IntegrateError, RegimeKind};

use super::{println_json, runtime, usage, Meta};
use crate::args::{Format, SimulateArgs};
use crate::config::{self, FileConfig};
use crate::error::CliResult;
use crate::output::{fmt_g, json_string, write, Table};
use crate::svg::{line_plot, Series};

#[derive(Serialize)]
struct Sample {
    t: f64,
    x1: f64,
    x2: f64,
    x3: f64,
    r: f64,
    s: f64,
    xbar: f64,
}

#[derive(Serialize)]
struct Document<'a> {
    #[serde(flatten)]
    meta: Meta<'a>,
    name: &'a str,
    x_init: [f64; 3],
    converged: bool,
    final_residual: f64,
    steps: usize,
    regime: String,
    label: &'a RegimeLabel,
    equilibrium: &'a Equilibrium,
    samples: Vec<Sample>,
}

#[derive(Serialize)]
struct Report<'a> {
    name: &'a str,
    regime: String,
    label: &'a RegimeLabel,
    equilibrium: &'a Equilibrium,
    trajectory_converged: bool,
    output: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    plot: Option<PathBuf>,
}

fn integrate_err(e: IntegrateError) -> crate::error::CliError {
    match e {
        IntegrateError::InvalidConfig(_) => usage(e),
        _ => runtime(e),
    }
}

pub fn run(args: &SimulateArgs, file: &FileConfig, out_dir: &Path) -> CliResult<()> {
    let pt = config::point(&args.point, file)?;
    let from_ext = args
        .out
        .as_ref()
        .and_then(|o| o.extension())
        .filter(|e| *e == "json")
        .map(|_| Format::Json);
    let format = args
        .format
        .or(file.format)
        .or(from_ext)
        .unwrap_or(Format::Csv);
    let traj = integrate(&pt.params, &pt.x_init, &pt.cfg).map_err(integrate_err)?;
    let eq = find_equilibrium(&pt.params, &pt.x_init, &pt.cfg).map_err(integrate_err)?;
    let dmu = pt.params.delta_mu();
    let label = if dmu > 0.0 {
        classify(&eq, dmu, &pt.thresholds)
    } else {
        RegimeLabel::unresolved(Some(&eq.x_star))
    };
    if label.kind == RegimeKind::Unresolved {
        if let Some(d) = &eq.diagnostic {
            eprintln!("warning: {d}");
        }
    }

    let meta = Meta {
        command: "simulate",
        params: &pt.params,
        convention: Default::default(),
        solver: Some(&pt.cfg),
        thresholds: Some(&pt.thresholds),
    };
    let samples: Vec<Sample> = traj
        .samples
        .iter()
        .map(|s| {
            let x = [s.x[0], s.x[1], s.x[2]];
            let q = to_rsx(&x);
            Sample {
                t: s.t,
                x1: x[0],
                x2: x[1],
                x3: x[2],
                r: q.r,
                s: q.s,
                xbar: q.xbar,
            }
        })
        .collect();

    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| out_dir.join(format!("{}.{ext}", pt.name)));
    let contents = match format {
        Format::Csv => {
            let mut table = Table::new(&["t", "x1", "x2", "x3", "r", "s", "xbar"]);
            meta.stamp(&mut table);
            table.comment("name", &pt.name);
            table.comment("x_init", &pt.x_init);
            table.comment("converged", &traj.converged);
            table.comment("final_residual", &traj.final_residual);
            table.comment("equilibrium_converged", &eq.converged);
            table.comment("regime", &label.short());
            table.comment("x_star", &eq.x_star);
            for s in &samples {
                table.row(
                    [s.t, s.x1, s.x2, s.x3, s.r, s.s, s.xbar]
                        .iter()
                        .map(|&v| fmt_g(v))
                        .collect(),
                );
            }
            table.render()
        }
        Format::Json => json_string(&Document {
            meta,
            name: &pt.name,
            x_init: pt.x_init,
            converged: traj.converged,
            final_residual: traj.final_residual,
            steps: traj.steps,
            regime: label.short(),
            label: &label,
            equilibrium: &eq,
            samples,
        }),
    };
    let output = write(&out, &contents)?;

    let plot = if args.plot {
        let names = ["x1", "x2", "x3"];
        let colors = ["#4c72b0", "#dd8452", "#55a868"];
        let series: Vec<Series> = (0..3)
            .map(|i| Series {
                name: names[i],
                color: colors[i],
                points: traj.samples.iter().map(|s| (s.t, s.x[i])).collect(),
            })
            .collect();
        let title = format!("{}: {}", pt.name, label.short());
        let svg = line_plot(&title, "t", "opinion", &series);
        Some(write(&out.with_extension("svg"), &svg)?)
    } else {
        None
    };

    println_json(&Report {
        name: &pt.name,
        regime: label.short(),
        label: &label,
        equilibrium: &eq,
        trajectory_converged: traj.converged,
        output,
        plot,
    });
    Ok(())
}

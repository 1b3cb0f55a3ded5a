use std::path::Path;

use serde::Serialize;
use triad_core::bifurcation::{boundary_curves, BoundaryCurve, GridRange};
use triad_core::regimes::{stability_diagram_with, DiagramGrid, DiagramSpec};
use triad_core::{RegimeError, RegimeKind, SolverConfig};

use super::{runtime, usage, Meta};
use crate::args::DiagramArgs;
use crate::config::{self, FileConfig};
use crate::error::CliResult;
use crate::output::{fmt_g, json_string, write, Table};
use crate::svg::{heatmap, Series};

const OVERLAY_POINTS: usize = 101;

#[derive(Serialize)]
struct Document<'a> {
    #[serde(flatten)]
    meta: Meta<'a>,
    grid: &'a DiagramGrid,
    counts: Vec<(&'static str, usize)>,
    overlays: &'a [BoundaryCurve],
}

fn overlay_color(i: usize) -> &'static str {
    ["#000000", "#8b008b", "#b22222"][i % 3]
}

pub fn run(args: &DiagramArgs, file: &FileConfig, out_dir: &Path) -> CliResult<()> {
    let p = config::apply_coupling(config::default_params(), &args.coupling, file)?;
    p.validate().map_err(usage)?;
    let dmu = config::dmu_range(args.dmu, file, GridRange::new(4.0, 7.0, 20))?;
    let kappa = config::kappa_range(args.kappa, file, GridRange::new(0.2, 16.0, 20))?;
    let conv = config::convention(args.convention, file)?;
    let cfg = config::solver(&args.solver, file, SolverConfig::default())?;
    let thresholds = config::thresholds(&args.thresholds, file)?;
    let spec = DiagramSpec {
        dmu_axis: dmu.points(),
        kappa_axis: kappa.points(),
        ic_policy: Some(config::ic_policy(args.ic_policy, file, &p)),
        thresholds,
    };
    let grid = stability_diagram_with(&spec, &p, &cfg, !args.serial).map_err(|e| match e {
        RegimeError::Invalid(_) | RegimeError::Model(_) => usage(e),
        _ => runtime(e),
    })?;

    // analytical curves drawn over the heatmap; skipped when they do not apply
    let overlays = if dmu.hi > dmu.lo && p.is_pull_push() {
        boundary_curves(&GridRange::new(dmu.lo, dmu.hi, OVERLAY_POINTS), &p, conv)
            .unwrap_or_default()
    } else {
        Vec::new()
    };

    let meta = Meta {
        command: "diagram",
        params: &p,
        convention: conv,
        solver: Some(&cfg),
        thresholds: Some(&thresholds),
    };
    let mut table = Table::new(&["dmu", "kappa", "label"]);
    meta.stamp(&mut table);
    table.comment("ic_policy", &grid.ic_policy);
    for (i, row) in grid.labels.iter().enumerate() {
        for (j, label) in row.iter().enumerate() {
            table.row(vec![
                fmt_g(grid.dmu_axis[i]),
                fmt_g(grid.kappa_axis[j]),
                label.kind.as_str().to_string(),
            ]);
        }
    }
    let csv_path = write(&out_dir.join("diagram.csv"), &table.render())?;

    let series: Vec<Series> = overlays
        .iter()
        .enumerate()
        .map(|(i, c)| Series {
            name: c.kind.file_stem(),
            color: overlay_color(i),
            points: c.points.clone(),
        })
        .collect();
    let title = format!(
        "Regimes, C = {}, x0 = {}, nu = {}",
        fmt_g(p.c1),
        fmt_g(p.x0),
        fmt_g(p.nu)
    );
    write(
        &out_dir.join("diagram.svg"),
        &heatmap(&title, &grid, &series),
    )?;

    let kinds = [
        RegimeKind::Shd,
        RegimeKind::Mr,
        RegimeKind::Sld,
        RegimeKind::Unresolved,
    ];
    let counts: Vec<(&'static str, usize)> =
        kinds.iter().map(|&k| (k.as_str(), grid.count(k))).collect();
    write(
        &out_dir.join("diagram.json"),
        &json_string(&Document {
            meta,
            grid: &grid,
            counts: counts.clone(),
            overlays: &overlays,
        }),
    )?;
    for (name, n) in &counts {
        println!("{name:<10} {n}");
    }
    println!("wrote {}", csv_path.display());
    Ok(())
}

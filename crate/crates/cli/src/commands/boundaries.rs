use std::path::Path;

use serde::Serialize;
use triad_core::bifurcation::{
    boundary_curves, kappa1, kappa2, kappa3, BoundaryCurve, BoundaryKind, GridRange,
};
use triad_core::regimes::{kappa4_table, KAPPA4_DEFAULT_TOL};
use triad_core::{BifurcationError, DerivConvention, ModelParams, SolverConfig};

use super::{runtime, usage, Meta};
use crate::args::BoundariesArgs;
use crate::config::{self, FileConfig};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_g, json_string, write, Table};

#[derive(Serialize)]
struct Kappa4Row {
    delta_mu: f64,
    kappa4: Option<f64>,
    bracket: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct Document<'a> {
    #[serde(flatten)]
    meta: Meta<'a>,
    dmu: &'a GridRange,
    curves: &'a [BoundaryCurve],
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa4_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa4: Option<&'a [Kappa4Row]>,
    /// Names relative to the output directory, so the document does not
    /// depend on where it was written.
    files: &'a [String],
}

pub fn file_name(kind: BoundaryKind, conv: DerivConvention) -> String {
    match kind {
        BoundaryKind::K1 => format!("{}_{}.csv", kind.file_stem(), conv.as_str()),
        _ => format!("{}.csv", kind.file_stem()),
    }
}

fn bifurcation_err(e: BifurcationError) -> CliError {
    match e {
        BifurcationError::Model(_) | BifurcationError::InvalidRange(_) => usage(e),
        _ => runtime(e),
    }
}

/// First failure of each boundary on the grid, for the all-failed report.
fn diagnose(grid: &GridRange, p: &ModelParams, conv: DerivConvention) -> String {
    let points = grid.points();
    let first = |f: &dyn Fn(f64) -> Result<f64, BifurcationError>| {
        points
            .iter()
            .find_map(|&m| f(m).err().map(|e| format!("dmu={m}: {e}")))
            .unwrap_or_else(|| "no error".into())
    };
    let c = p.c1;
    [
        format!(
            "kappa1: {}",
            first(&|m| kappa1(m, &p.with_delta_mu(m), conv))
        ),
        format!("kappa2: {}", first(&|m| kappa2(m, c, p.x0))),
        format!("kappa3: {}", first(&|m| kappa3(m, c, p.x0, p.nu))),
    ]
    .join("; ")
}

pub fn run(args: &BoundariesArgs, file: &FileConfig, out_dir: &Path) -> CliResult<()> {
    let p = config::apply_coupling(config::default_params(), &args.coupling, file)?;
    p.validate().map_err(usage)?;
    let grid = config::dmu_range(args.dmu, file, GridRange::new(3.5, 7.0, 50))?;
    let conv = config::convention(args.convention, file)?;
    let cfg = config::solver(&args.solver, file, SolverConfig::default())?;
    let tol = args.tol.or(file.tol).unwrap_or(KAPPA4_DEFAULT_TOL);
    if !(tol > 0.0) {
        return Err(usage(format!("tol must be > 0, got {tol}")));
    }

    let curves = match boundary_curves(&grid, &p, conv) {
        Ok(c) => c,
        Err(BifurcationError::EmptyCurves) => {
            return Err(runtime(format!(
                "every boundary failed: {}",
                diagnose(&grid, &p, conv)
            )))
        }
        Err(e) => return Err(bifurcation_err(e)),
    };

    let meta = Meta {
        command: "boundaries",
        params: &p,
        convention: conv,
        solver: args.with_kappa4.then_some(&cfg),
        thresholds: None,
    };
    let mut files = Vec::new();
    for curve in &curves {
        for (m, why) in &curve.omitted {
            eprintln!(
                "{} omitted at dmu={}: {why}",
                curve.kind.file_stem(),
                fmt_g(*m)
            );
        }
        let mut table = Table::new(&["dmu", "kappa"]);
        meta.stamp(&mut table);
        table.comment("boundary", curve.kind.file_stem());
        for &(m, k) in &curve.points {
            table.row(vec![fmt_g(m), fmt_g(k)]);
        }
        files.push(write(
            &out_dir.join(file_name(curve.kind, conv)),
            &table.render(),
        )?);
        println!(
            "{:<7} {:>4} points, {:>3} omitted",
            curve.kind.file_stem(),
            curve.points.len(),
            curve.omitted.len()
        );
    }

    let kappa4_rows = if args.with_kappa4 {
        let dmus = grid.points();
        let rows: Vec<Kappa4Row> = kappa4_table(&dmus, &p, &cfg, tol)
            .into_iter()
            .zip(&dmus)
            .map(|(r, &m)| match r {
                Ok(k) => Kappa4Row {
                    delta_mu: m,
                    kappa4: Some(k.kappa4),
                    bracket: Some(k.bracket),
                    error: None,
                },
                Err(e) => {
                    eprintln!("kappa4 unavailable at dmu={}: {e}", fmt_g(m));
                    Kappa4Row {
                        delta_mu: m,
                        kappa4: None,
                        bracket: None,
                        error: Some(e.to_string()),
                    }
                }
            })
            .collect();
        let mut table = Table::new(&["dmu", "kappa"]);
        meta.stamp(&mut table);
        table.comment("boundary", BoundaryKind::K4.file_stem());
        table.comment("tol", &tol);
        for r in &rows {
            table.row(vec![fmt_g(r.delta_mu), fmt_g(r.kappa4.unwrap_or(f64::NAN))]);
        }
        files.push(write(
            &out_dir.join(file_name(BoundaryKind::K4, conv)),
            &table.render(),
        )?);
        let ok = rows.iter().filter(|r| r.kappa4.is_some()).count();
        println!(
            "{:<7} {:>4} points, {:>3} omitted",
            "kappa4",
            ok,
            rows.len() - ok
        );
        Some(rows)
    } else {
        None
    };

    let json_path = out_dir.join("boundaries.json");
    let mut listed: Vec<String> = files
        .iter()
        .chain(std::iter::once(&json_path))
        .filter_map(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    listed.dedup();
    let doc = Document {
        meta,
        dmu: &grid,
        curves: &curves,
        kappa4_tol: args.with_kappa4.then_some(tol),
        kappa4: kappa4_rows.as_deref(),
        files: &listed,
    };
    write(&json_path, &json_string(&doc))?;
    Ok(())
}

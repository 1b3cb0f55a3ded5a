use std::path::Path;

use serde::Serialize;
use triad_core::regimes::{kappa4_table, KAPPA4_DEFAULT_TOL};
use triad_core::SolverConfig;

use super::{runtime, usage, Meta};
use crate::args::Kappa4Args;
use crate::config::{self, FileConfig};
use crate::error::CliResult;
use crate::output::{fmt_g, json_string, write, Table};

#[derive(Serialize)]
struct Row {
    delta_mu: f64,
    kappa4: Option<f64>,
    bracket: Option<(f64, f64)>,
    scan_bracket: Option<(f64, f64)>,
    evaluations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct Document<'a> {
    #[serde(flatten)]
    meta: Meta<'a>,
    tol: f64,
    rows: &'a [Row],
}

/// Δμ = 5.0, 5.1, …, 5.9.
fn default_list() -> Vec<f64> {
    (50..60).map(|i| i as f64 / 10.0).collect()
}

pub fn run(args: &Kappa4Args, file: &FileConfig, out_dir: &Path) -> CliResult<()> {
    let p = config::apply_coupling(config::default_params(), &args.coupling, file)?;
    p.validate().map_err(usage)?;
    let dmus = config::dmu_list(args.dmu_list.clone().map(|l| l.0), file, default_list())?;
    if dmus.is_empty() {
        return Err(usage("empty delta_mu list"));
    }
    if let Some(bad) = dmus.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
        return Err(usage(format!("delta_mu values must be > 0, got {bad}")));
    }
    let tol = args.tol.or(file.tol).unwrap_or(KAPPA4_DEFAULT_TOL);
    if !(tol > 0.0) {
        return Err(usage(format!("tol must be > 0, got {tol}")));
    }
    let cfg = config::solver(&args.solver, file, SolverConfig::default())?;

    let rows: Vec<Row> = kappa4_table(&dmus, &p, &cfg, tol)
        .into_iter()
        .zip(&dmus)
        .map(|(r, &m)| match r {
            Ok(k) => Row {
                delta_mu: m,
                kappa4: Some(k.kappa4),
                bracket: Some(k.bracket),
                scan_bracket: Some(k.scan_bracket),
                evaluations: Some(k.evaluations),
                error: None,
            },
            Err(e) => Row {
                delta_mu: m,
                kappa4: None,
                bracket: None,
                scan_bracket: None,
                evaluations: None,
                error: Some(e.to_string()),
            },
        })
        .collect();

    println!("{:>8}  {:>10}", "dmu", "kappa4");
    for r in &rows {
        let k = r.kappa4.map_or("NA".to_string(), |k| format!("{k:.4}"));
        println!("{:>8}  {:>10}", fmt_g(r.delta_mu), k);
        if let Some(e) = &r.error {
            eprintln!("dmu={}: {e}", fmt_g(r.delta_mu));
        }
    }

    let meta = Meta {
        command: "kappa4",
        params: &p,
        convention: Default::default(),
        solver: Some(&cfg),
        thresholds: None,
    };
    let mut table = Table::new(&["dmu", "kappa4"]);
    meta.stamp(&mut table);
    table.comment("tol", &tol);
    for r in &rows {
        table.row(vec![fmt_g(r.delta_mu), fmt_g(r.kappa4.unwrap_or(f64::NAN))]);
    }
    write(&out_dir.join("kappa4.csv"), &table.render())?;
    write(
        &out_dir.join("kappa4.json"),
        &json_string(&Document {
            meta,
            tol,
            rows: &rows,
        }),
    )?;

    if rows.iter().all(|r| r.kappa4.is_none()) {
        return Err(runtime("no delta_mu produced a kappa4 value"));
    }
    Ok(())
}

//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion.
//!
//! Runs without the libtest harness so the report is always printed; the
//! process exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triad_core::bifurcation::{
    cubic_discriminant, kappa1, kappa1_residual, kappa2, kappa3, pitchfork_cubic, pitchfork_r,
    pitchfork_residuals, saddle_node_residuals, saddle_node_s,
};
use triad_core::model::{from_rsx, jacobian_chain3, rhs_chain3, rsx_rhs, to_rsx};
use triad_core::regimes::{
    kappa4_table, preset, stability_diagram_with, DiagramSpec, MajorityPair, KAPPA4_DEFAULT_TOL,
};
use triad_core::{
    classify, find_equilibrium, integrate, DerivConvention, ModelParams, RegimeKind, RegimeLabel,
    SolverConfig, Thresholds,
};

type Outcome = Result<String, String>;

const TABLE1_DMU: [f64; 10] = [5.0, 5.1, 5.2, 5.3, 5.4, 5.5, 5.6, 5.7, 5.8, 5.9];
const TABLE1: [f64; 10] = [
    7.19, 9.08, 11.51, 14.63, 18.65, 23.84, 30.58, 39.33, 50.76, 65.72,
];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ac1_table() -> Outcome {
    let start = Instant::now();
    let p = ModelParams::leader_pull_push(5.0, 1.0, 0.0, 0.05, 4.0);
    let rows = kappa4_table(
        &TABLE1_DMU,
        &p,
        &SolverConfig::default(),
        KAPPA4_DEFAULT_TOL,
    );
    let mut values = Vec::new();
    for (row, dmu) in rows.into_iter().zip(TABLE1_DMU) {
        values.push(row.map_err(|e| format!("dmu {dmu}: {e}"))?.kappa4);
    }
    let elapsed = start.elapsed();
    let mut worst: f64 = 0.0;
    for ((got, want), dmu) in values.iter().zip(TABLE1).zip(TABLE1_DMU) {
        let rel = (got - want).abs() / want;
        worst = worst.max(rel);
        ensure(rel <= 0.05, || {
            format!("dmu {dmu}: {got:.3} vs {want} ({:.2}%)", 100.0 * rel)
        })?;
    }
    ensure(values.windows(2).all(|w| w[1] > w[0]), || {
        format!("not strictly increasing: {values:?}")
    })?;
    ensure(elapsed < Duration::from_secs(300), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "10 rows within {:.3}% of the table, increasing, {:.2}s",
        100.0 * worst,
        elapsed.as_secs_f64()
    ))
}

fn preset_label(name: &str) -> Result<(RegimeLabel, [f64; 3]), String> {
    let sc = preset(name).ok_or(format!("missing preset {name}"))?;
    let eq = find_equilibrium(&sc.params, &sc.x_init, &sc.cfg).map_err(|e| e.to_string())?;
    ensure(eq.converged, || {
        format!("{name} unconverged: {:?}", eq.diagnostic)
    })?;
    Ok((
        classify(&eq, sc.params.delta_mu(), &Thresholds::default()),
        eq.x_star,
    ))
}

fn expect_regimes(cases: &[(&str, RegimeKind)]) -> Result<Vec<(RegimeLabel, [f64; 3])>, String> {
    let mut out = Vec::new();
    for &(name, kind) in cases {
        let (label, x) = preset_label(name)?;
        ensure(label.kind == kind, || {
            format!("{name}: got {} expected {}", label.short(), kind.as_str())
        })?;
        out.push((label, x));
    }
    Ok(out)
}

fn ac2_figure1() -> Outcome {
    use RegimeKind::*;
    expect_regimes(&[("fig1a", Shd), ("fig1b", Mr), ("fig1c", Sld)])?;
    Ok("kappa 1 / 1.5 / 3 give SHD / MR / SLD".into())
}

fn ac3_figure2() -> Outcome {
    use RegimeKind::*;
    let found = expect_regimes(&[("fig2a", Shd), ("fig2b", Mr), ("fig2c", Sld)])?;
    let pair = found[1].0.majority_pair;
    ensure(pair == Some(MajorityPair::OneTwo), || {
        format!("majority pair {pair:?}")
    })?;
    Ok("kappa 0.5 / 1.5 / 14 give SHD / MR(1,2) / SLD".into())
}

fn ac4_figure4() -> Outcome {
    use RegimeKind::*;
    let found = expect_regimes(&[("fig4a", Shd), ("fig4b", Mr), ("fig4c", Sld)])?;
    let means: Vec<f64> = found
        .iter()
        .map(|(_, x)| (x[0] + x[1] + x[2]) / 3.0)
        .collect();
    ensure(means.iter().all(|m| *m > 0.0), || {
        format!("means {means:?}")
    })?;
    Ok(format!(
        "SHD / MR / SLD with mean opinions {:.3}, {:.3}, {:.3}",
        means[0], means[1], means[2]
    ))
}

fn ac5_transient() -> Outcome {
    let sc = preset("fig5b").ok_or("missing preset fig5b")?;
    let traj = integrate(&sc.params, &sc.x_init, &sc.cfg).map_err(|e| e.to_string())?;
    let (peak, t_peak) = traj
        .samples
        .iter()
        .map(|s| ((s.x[2] - 2.0 * s.x[1] + s.x[0]).abs(), s.t))
        .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    ensure(peak >= 1.5, || format!("peak |s| = {peak}"))?;
    let (label, _) = preset_label("fig5b")?;
    ensure(label.kind == RegimeKind::Sld, || {
        format!("final {}", label.short())
    })?;
    Ok(format!(
        "|s| peaks at {peak:.3} (t = {t_peak:.2}), final SLD"
    ))
}

fn random_pull_push(rng: &mut ChaCha8Rng) -> ModelParams {
    let kappa = rng.gen_range(0.0..5.0);
    let mut p = ModelParams::leader_pull_push(
        rng.gen_range(0.5..8.0),
        kappa,
        rng.gen_range(-kappa..=kappa),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-6.0..6.0),
    );
    p.mu2 = rng.gen_range(-1.0..1.0);
    p
}

fn ac6_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    let mut round_trip: f64 = 0.0;
    for _ in 0..10_000 {
        let x: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-10.0..10.0));
        let q = to_rsx(&x);
        let back = from_rsx(q.r, q.s, q.xbar);
        round_trip = (0..3)
            .map(|i| (back[i] - x[i]).abs())
            .fold(round_trip, f64::max);
    }
    ensure(round_trip < 1e-14, || {
        format!("(a) round trip {round_trip:e}")
    })?;

    let mut push: f64 = 0.0;
    for _ in 0..1_000 {
        let p = random_pull_push(&mut rng);
        let x: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-6.0..6.0));
        let f = rhs_chain3(&x, &p).map_err(|e| e.to_string())?;
        let want = [
            f[2] - f[0],
            f[2] - 2.0 * f[1] + f[0],
            (f[0] + f[1] + f[2]) / 3.0,
        ];
        let got = rsx_rhs(&to_rsx(&x), &p).map_err(|e| e.to_string())?;
        push = (0..3)
            .map(|i| (got[i] - want[i]).abs())
            .fold(push, f64::max);
    }
    ensure(push < 1e-10, || format!("(b) push-forward {push:e}"))?;

    let mut jac_rel: f64 = 0.0;
    let step = 1e-6;
    for _ in 0..100 {
        let p = random_pull_push(&mut rng);
        let x: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let jac = jacobian_chain3(&x, &p);
        let scale = jac.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        for j in 0..3 {
            let (mut xp, mut xm) = (x, x);
            xp[j] += step;
            xm[j] -= step;
            let fp = rhs_chain3(&xp, &p).map_err(|e| e.to_string())?;
            let fm = rhs_chain3(&xm, &p).map_err(|e| e.to_string())?;
            for i in 0..3 {
                let fd = (fp[i] - fm[i]) / (2.0 * step);
                jac_rel = jac_rel.max((fd - jac[i][j]).abs() / scale);
            }
        }
    }
    ensure(jac_rel < 1e-6, || format!("(c) jacobian {jac_rel:e}"))?;

    let mut sym: f64 = 0.0;
    for _ in 0..10 {
        let kappa = rng.gen_range(0.0..6.0);
        let p = ModelParams::leaderless(
            rng.gen_range(1.0..8.0),
            kappa,
            rng.gen_range(-kappa..=kappa),
        );
        let a = rng.gen_range(0.0..5.0);
        let traj =
            integrate(&p, &[-a, 0.0, a], &SolverConfig::default()).map_err(|e| e.to_string())?;
        for s in &traj.samples {
            sym = sym.max(s.x[1].abs()).max((s.x[0] + s.x[2]).abs());
        }
    }
    ensure(sym <= 1e-9, || format!("(d) symmetry {sym:e}"))?;
    Ok(format!(
        "round trip {round_trip:.1e}, push-forward {push:.1e}, jacobian {jac_rel:.1e}, symmetry {sym:.1e}"
    ))
}

/// Distinct real roots of `a x³ + b x² + c x + d` via a Sturm sequence.
fn sturm_count(k: [f64; 4]) -> usize {
    fn rem(num: &[f64], den: &[f64]) -> Vec<f64> {
        let mut r = num.to_vec();
        while r.len() >= den.len() {
            let f = r[0] / den[0];
            for (i, d) in den.iter().enumerate() {
                r[i] -= f * d;
            }
            r.remove(0);
        }
        while r.len() > 1 && r[0].abs() < 1e-13 {
            r.remove(0);
        }
        r
    }
    let eval = |p: &[f64], x: f64| p.iter().fold(0.0, |acc, c| acc * x + c);
    let p0 = k.to_vec();
    let p1 = vec![3.0 * k[0], 2.0 * k[1], k[2]];
    let p2: Vec<f64> = rem(&p0, &p1).iter().map(|v| -v).collect();
    let p3: Vec<f64> = rem(&p1, &p2).iter().map(|v| -v).collect();
    let chain = [p0, p1, p2, p3];
    let bound = 1.0 + k[1..].iter().map(|c| (c / k[0]).abs()).fold(0.0, f64::max);
    let changes = |x: f64| {
        let s: Vec<f64> = chain
            .iter()
            .map(|p| eval(p, x))
            .filter(|v| *v != 0.0)
            .collect();
        s.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
    };
    changes(-bound) - changes(bound)
}

fn ac7_discriminant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut checked, mut skipped) = (0, 0);
    while checked < 1000 {
        let k: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
        if k[0].abs() < 0.05 {
            continue;
        }
        let d = cubic_discriminant(k[0], k[1], k[2], k[3]).map_err(|e| e.to_string())?;
        if d.abs() < 1e-9 {
            skipped += 1;
            continue;
        }
        let want = if d > 0.0 { 3 } else { 1 };
        let got = sturm_count(k);
        ensure(got == want, || format!("{k:?}: disc {d}, {got} real roots"))?;
        checked += 1;
    }
    Ok(format!(
        "1000 cubics agree ({skipped} near-degenerate skipped)"
    ))
}

fn ac8_boundaries() -> Outcome {
    let (c, x0) = (0.05, 4.0);
    let mut worst: f64 = 0.0;
    for conv in [
        DerivConvention::PaperComposite,
        DerivConvention::TrueDerivative,
    ] {
        for i in 0..=30 {
            let m = 4.0 + 0.1 * i as f64;
            let p = ModelParams::leader_pull_push(m, 1.0, 0.0, c, x0);
            let k = kappa1(m, &p, conv).map_err(|e| format!("(a) dmu {m} {conv}: {e}"))?;
            let r = kappa1_residual(m, k, &p, conv).map_err(|e| e.to_string())?;
            worst = worst.max(r.abs());
        }
    }
    ensure(worst < 1e-10, || format!("(a) kappa1 residual {worst:e}"))?;

    let mut reduction: f64 = 0.0;
    for i in 1..=120 {
        let m = 0.1 * i as f64;
        let k2 = m / (6.0 * (m + 1.0))
            * (m - 2.0 / m - 2.0)
            * ((2.0 / 9.0) * (1.5 + 3.0 / (2.0 * m)).powi(2)).exp();
        let k3 = (3.0 * m * m - 6.0 * m - 4.0) * ((2.0 + 4.0 / (3.0 * m)).powi(2) / 8.0).exp()
            / (2.0 * (2.0 + 3.0 * m));
        let a = kappa2(m, 0.0, x0).map_err(|e| e.to_string())?;
        let b = kappa3(m, 0.0, x0, 0.0).map_err(|e| e.to_string())?;
        reduction = reduction.max((a - k2).abs()).max((b - k3).abs());
    }
    ensure(reduction < 1e-12, || {
        format!("(b) leaderless reduction {reduction:e}")
    })?;

    let grid = [6.0, 8.0, 10.0, 12.0];
    let mut sn = Vec::new();
    let mut pf = Vec::new();
    let mut cubic = Vec::new();
    for m in grid {
        let k2 = kappa2(m, c, x0).map_err(|e| e.to_string())?;
        let k3 = kappa3(m, c, x0, 0.0).map_err(|e| e.to_string())?;
        let a = saddle_node_residuals(m, c, x0, saddle_node_s(m, c), k2);
        let b = pitchfork_residuals(m, c, x0, 0.0, pitchfork_r(m), k3);
        sn.push(a[0].abs().max(a[1].abs()));
        pf.push(b[0].abs().max(b[1].abs()));
        cubic.push((pitchfork_cubic(m, c, x0, pitchfork_r(m)) / m).abs());
    }
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    ensure(decreasing(&sn), || {
        format!("(c) saddle-node residuals {sn:?}")
    })?;
    ensure(decreasing(&pf), || {
        format!("(c) pitchfork residuals {pf:?}")
    })?;
    ensure(decreasing(&cubic), || {
        format!("(c) cubic residuals {cubic:?}")
    })?;
    Ok(format!(
        "kappa1 residual {worst:.1e}, reductions {reduction:.1e}, residuals fall to {:.1e} / {:.1e}",
        sn[3], pf[3]
    ))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_triad"))
        .current_dir(dir)
        .env_remove("TRIAD_OUT_DIR")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn same_tree(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<_> = std::fs::read_dir(a)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for n in &names {
        let x = std::fs::read(a.join(n)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.join(n)).map_err(|e| format!("{}: {e}", n.to_string_lossy()))?;
        ensure(x == y, || format!("{} differs", n.to_string_lossy()))?;
    }
    Ok(names.len())
}

fn ac9_determinism() -> Outcome {
    let p = ModelParams::leader_pull_push(5.0, 1.0, 0.0, 0.05, 4.0);
    let spec = DiagramSpec {
        dmu_axis: (0..12).map(|i| 4.0 + 0.25 * i as f64).collect(),
        kappa_axis: (0..12).map(|j| 0.2 + 1.3 * j as f64).collect(),
        ic_policy: None,
        thresholds: Thresholds::default(),
    };
    let cfg = SolverConfig::default();
    let serial = stability_diagram_with(&spec, &p, &cfg, false).map_err(|e| e.to_string())?;
    for _ in 0..2 {
        let parallel = stability_diagram_with(&spec, &p, &cfg, true).map_err(|e| e.to_string())?;
        ensure(format!("{serial:?}") == format!("{parallel:?}"), || {
            "serial and parallel diagrams differ".into()
        })?;
    }

    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [&[&str]; 5] = [
        &["simulate", "--preset", "fig2b", "--plot"],
        &["simulate", "--preset", "fig1a", "--format", "json"],
        &["boundaries", "--dmu", "4.5:6.5:9", "--with-kappa4"],
        &["diagram", "--dmu", "4:7:10", "--kappa", "0.2:16:10"],
        &["kappa4", "--dmu-list", "5,5.3,5.6"],
    ];
    let mut files = 0;
    for (tag, extra) in [("a", None), ("b", None), ("c", Some("--serial"))] {
        let dir = tmp.path().join(tag);
        let out = dir.to_str().ok_or("non-utf8 temp path")?.to_string();
        for args in runs {
            let mut v: Vec<&str> = args.to_vec();
            v.extend(["--out-dir", &out]);
            if let (Some(flag), "diagram") = (extra, args[0]) {
                v.push(flag);
            }
            run_cli(tmp.path(), &v)?;
        }
        if tag != "a" {
            files = same_tree(&tmp.path().join("a"), &dir)?;
        }
    }
    Ok(format!(
        "diagram identical across schedules; {files} CLI files byte-identical across 3 runs"
    ))
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 9] = [
        ("AC1", "Table 1 kappa4 reproduction", ac1_table),
        ("AC2", "Figure 1 regimes", ac2_figure1),
        ("AC3", "Figure 2 regimes and majority pair", ac3_figure2),
        ("AC4", "Figure 4 regimes and upward mean", ac4_figure4),
        ("AC5", "Figure 5(b) transient majority", ac5_transient),
        ("AC6", "structural identities", ac6_structure),
        ("AC7", "discriminant oracle", ac7_discriminant),
        ("AC8", "boundary self-consistency", ac8_boundaries),
        ("AC9", "determinism", ac9_determinism),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let outcome =
            std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {id} {name}: {detail} ({secs:.2}s)"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {why} ({secs:.2}s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

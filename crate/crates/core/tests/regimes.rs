use triad_core::bifurcation::{kappa1, kappa2};
use triad_core::model::to_rsx;
use triad_core::regimes::{
    bistability_probe, kappa4_search, kappa4_table, preset, stability_diagram,
    stability_diagram_with, DiagramSpec, IcPolicy, MajorityPair, KAPPA4_DEFAULT_TOL,
};
use triad_core::{
    classify, find_equilibrium, integrate, DerivConvention, ModelParams, RegimeKind, RegimeLabel,
    SolverConfig, Thresholds,
};

const TABLE1: [f64; 10] = [
    7.19, 9.08, 11.51, 14.63, 18.65, 23.84, 30.58, 39.33, 50.76, 65.72,
];

fn fig2(kappa: f64) -> ModelParams {
    ModelParams::leader_pull_push(5.0, kappa, 0.0, 0.05, 4.0)
}

fn label_of(name: &str) -> (RegimeLabel, [f64; 3]) {
    let sc = preset(name).unwrap();
    let eq = find_equilibrium(&sc.params, &sc.x_init, &sc.cfg).unwrap();
    assert!(eq.converged, "{name}: {:?}", eq.diagnostic);
    (
        classify(&eq, sc.params.delta_mu(), &Thresholds::default()),
        eq.x_star,
    )
}

#[test]
fn figure_panels_reach_their_regimes() {
    use RegimeKind::*;
    for (name, kind) in [
        ("fig1a", Shd),
        ("fig1b", Mr),
        ("fig1c", Sld),
        ("fig2a", Shd),
        ("fig2b", Mr),
        ("fig2c", Sld),
        ("fig4a", Shd),
        ("fig4b", Mr),
        ("fig4c", Sld),
    ] {
        assert_eq!(label_of(name).0.kind, kind, "{name}");
    }
}

#[test]
fn leader_selects_node_one() {
    let (label, x) = label_of("fig2b");
    assert_eq!(label.majority_pair, Some(MajorityPair::OneTwo));
    assert!((x[1] - x[0]).abs() < (x[2] - x[1]).abs());
}

#[test]
fn uniform_upward_pull_raises_the_mean() {
    for name in ["fig4a", "fig4b", "fig4c"] {
        let (_, x) = label_of(name);
        assert!(to_rsx(&x).xbar > 0.0, "{name}: {x:?}");
    }
}

#[test]
fn opposite_end_controls_give_transient_majority() {
    let sc = preset("fig5b").unwrap();
    let traj = integrate(&sc.params, &sc.x_init, &sc.cfg).unwrap();
    let peak = traj
        .samples
        .iter()
        .map(|s| to_rsx(&[s.x[0], s.x[1], s.x[2]]).s.abs())
        .fold(0.0, f64::max);
    assert!(peak >= 0.3 * 5.0, "peak |s| = {peak}");
    assert_eq!(label_of("fig5b").0.kind, RegimeKind::Sld);
}

#[test]
fn single_cell_diagrams() {
    for (kappa, kind) in [(0.5, RegimeKind::Shd), (14.0, RegimeKind::Sld)] {
        let spec = DiagramSpec {
            dmu_axis: vec![5.0],
            kappa_axis: vec![kappa],
            ic_policy: None,
            thresholds: Thresholds::default(),
        };
        let grid = stability_diagram(&spec, &fig2(1.0), &SolverConfig::default()).unwrap();
        assert_eq!(grid.labels[0][0].kind, kind);
        assert_eq!(grid.ic_policy, IcPolicy::BiasStart);
    }
}

#[test]
fn diagram_is_schedule_independent() {
    let spec = DiagramSpec {
        dmu_axis: (0..6).map(|i| 4.0 + 0.6 * i as f64).collect(),
        kappa_axis: (0..8).map(|j| 0.2 + 2.0 * j as f64).collect(),
        ic_policy: None,
        thresholds: Thresholds::default(),
    };
    let cfg = SolverConfig::default();
    let p = fig2(1.0);
    let serial = stability_diagram_with(&spec, &p, &cfg, false).unwrap();
    let parallel = stability_diagram_with(&spec, &p, &cfg, true).unwrap();
    let again = stability_diagram(&spec, &p, &cfg).unwrap();
    assert_eq!(format!("{serial:?}"), format!("{parallel:?}"));
    assert_eq!(serial, again);
    for kind in [RegimeKind::Shd, RegimeKind::Mr, RegimeKind::Sld] {
        assert!(serial.count(kind) > 0, "{kind:?} missing");
    }
}

#[test]
fn kappa4_matches_the_table_and_increases() {
    let dmus: Vec<f64> = (0..10).map(|i| 5.0 + 0.1 * i as f64).collect();
    let rows = kappa4_table(
        &dmus,
        &fig2(1.0),
        &SolverConfig::default(),
        KAPPA4_DEFAULT_TOL,
    );
    let values: Vec<f64> = rows.into_iter().map(|r| r.unwrap().kappa4).collect();
    for (got, want) in values.iter().zip(TABLE1) {
        assert!((got - want).abs() <= 0.05 * want, "{got} vs {want}");
    }
    assert!(values.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn kappa4_bracket_survives_resimulation() {
    let cfg = SolverConfig::default();
    let tol = KAPPA4_DEFAULT_TOL;
    for dmu in [5.0, 5.5] {
        let p = fig2(1.0).with_delta_mu(dmu);
        let k4 = kappa4_search(dmu, &p, &cfg, tol).unwrap();
        assert!(k4.bracket.1 - k4.bracket.0 <= tol);
        let label = |kappa: f64| {
            let q = p.with_kappa(kappa);
            let eq = find_equilibrium(&q, &q.biases(), &cfg).unwrap();
            classify(&eq, dmu, &Thresholds::default())
        };
        assert!(label(k4.kappa4 - 2.0 * tol).is_mr());
        assert!(!label(k4.kappa4 + 2.0 * tol).is_mr());
    }
}

#[test]
fn halving_the_tolerance_moves_kappa4_below_reporting_precision() {
    let cfg = SolverConfig::default();
    let a = kappa4_search(5.0, &fig2(1.0), &cfg, 0.005).unwrap().kappa4;
    let b = kappa4_search(5.0, &fig2(1.0), &cfg, 0.0025).unwrap().kappa4;
    assert!((a - b).abs() < 0.005);
}

#[test]
fn simulated_majority_sits_between_kappa2_and_kappa4() {
    let cfg = SolverConfig::default();
    let k2 = kappa2(5.0, 0.05, 4.0).unwrap();
    let k4 = kappa4_search(5.0, &fig2(1.0), &cfg, KAPPA4_DEFAULT_TOL)
        .unwrap()
        .kappa4;
    for j in 0..=80 {
        let kappa = 0.1 * j as f64;
        let q = fig2(kappa);
        let eq = find_equilibrium(&q, &q.biases(), &cfg).unwrap();
        if classify(&eq, 5.0, &Thresholds::default()).is_mr() {
            assert!(
                kappa >= k2 && kappa <= k4 + KAPPA4_DEFAULT_TOL,
                "MR at {kappa}"
            );
        }
    }
}

#[test]
fn weak_coupling_has_a_single_equilibrium() {
    let ics = [
        [-2.5, 0.0, 2.5],
        [-2.5, -2.5, 2.5],
        [-2.5, 2.5, 2.5],
        [0.0, 0.0, 0.0],
        [-2.5, 0.0, 2.5],
    ];
    let found = bistability_probe(5.0, 0.3, &fig2(1.0), &ics, &SolverConfig::default()).unwrap();
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].1.kind, RegimeKind::Shd);
}

#[test]
fn high_discord_and_majority_coexist() {
    let dmu = 6.5;
    let p = fig2(1.0).with_delta_mu(dmu);
    let k2 = kappa2(dmu, 0.05, 4.0).unwrap();
    let k1 = kappa1(dmu, &p, DerivConvention::TrueDerivative).unwrap();
    let kappa = 0.5 * (k1 + k2);
    let h = dmu / 2.0;
    let ics = [[-h, 0.0, h], [-h, -h, h], [-h, h, h]];
    let found = bistability_probe(dmu, kappa, &p, &ics, &SolverConfig::default()).unwrap();
    let kinds: Vec<RegimeKind> = found.iter().map(|(_, l)| l.kind).collect();
    assert!(
        kinds.contains(&RegimeKind::Shd),
        "{kinds:?} at kappa {kappa}"
    );
    assert!(
        kinds.contains(&RegimeKind::Mr),
        "{kinds:?} at kappa {kappa}"
    );
}

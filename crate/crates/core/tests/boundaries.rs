use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triad_core::bifurcation::{
    boundary_curves, cubic_discriminant, kappa1, kappa1_residual, kappa2, kappa3, normal_form,
    pitchfork_cubic, pitchfork_r, pitchfork_residuals, saddle_node_residuals, saddle_node_s,
    BoundaryKind, GridRange, KAPPA1_RESIDUAL_TOL,
};
use triad_core::linalg::monic_cubic_roots;
use triad_core::{DerivConvention, ModelParams};

const CONVENTIONS: [DerivConvention; 2] = [
    DerivConvention::PaperComposite,
    DerivConvention::TrueDerivative,
];

fn fig3(dmu: f64) -> ModelParams {
    ModelParams::leader_pull_push(dmu, 1.0, 0.0, 0.05, 4.0)
}

/// Number of distinct real roots by a Sturm sequence on a Cauchy-bounded interval.
fn sturm_real_roots(coeffs: [f64; 4]) -> usize {
    fn rem(num: &[f64], den: &[f64]) -> Vec<f64> {
        // highest degree first
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
    let p0 = coeffs.to_vec();
    let p1 = vec![3.0 * coeffs[0], 2.0 * coeffs[1], coeffs[2]];
    let p2: Vec<f64> = rem(&p0, &p1).iter().map(|v| -v).collect();
    let p3: Vec<f64> = rem(&p1, &p2).iter().map(|v| -v).collect();
    let chain = [p0, p1, p2, p3];
    let bound = 1.0
        + coeffs[1..]
            .iter()
            .map(|c| (c / coeffs[0]).abs())
            .fold(0.0, f64::max);
    let changes = |x: f64| {
        let signs: Vec<f64> = chain
            .iter()
            .map(|p| eval(p, x))
            .filter(|v| *v != 0.0)
            .collect();
        signs.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
    };
    changes(-bound) - changes(bound)
}

#[test]
fn discriminant_sign_matches_root_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    while checked < 1000 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
        if c[0].abs() < 0.05 {
            continue;
        }
        let disc = cubic_discriminant(c[0], c[1], c[2], c[3]).unwrap();
        if disc.abs() < 1e-9 {
            continue;
        }
        let want = if disc > 0.0 { 3 } else { 1 };
        assert_eq!(sturm_real_roots(c), want, "cubic {c:?}, disc {disc}");
        checked += 1;
    }
}

#[test]
fn kappa1_satisfies_its_condition_across_the_range() {
    for conv in CONVENTIONS {
        for i in 0..=30 {
            let dmu = 4.0 + 0.1 * i as f64;
            let k = kappa1(dmu, &fig3(dmu), conv).unwrap();
            let res = kappa1_residual(dmu, k, &fig3(dmu), conv).unwrap();
            assert!(res.abs() < KAPPA1_RESIDUAL_TOL, "dmu {dmu} {conv}: {res:e}");
        }
    }
}

#[test]
fn kappa1_exists_under_both_conventions_on_the_figure_grid() {
    let grid = GridRange::new(3.5, 7.0, 50);
    for conv in CONVENTIONS {
        for dmu in grid.points() {
            assert!(kappa1(dmu, &fig3(dmu), conv).is_ok(), "dmu {dmu} {conv}");
        }
    }
}

/// Leaderless threshold `1 + 3κ(h' + h''θ/2) = 0` with the composite
/// derivatives of `h(d) = d exp(-d²/2)` at `d = Δμ/2`, solved by bisection.
fn leaderless_threshold(dmu: f64) -> f64 {
    let u = dmu / 2.0;
    let e = (-u * u / 2.0).exp();
    let h0 = u * e;
    let h1 = 0.5 * (1.0 - u * u) * e;
    let h2 = 0.25 * (u * u * u - 3.0 * u) * e;
    let g = |k: f64| {
        let theta = -2.0 * k * h0 / (1.0 + k * h1);
        1.0 + 3.0 * k * (h1 + h2 * theta / 2.0)
    };
    let (mut lo, mut hi) = (0.05, 0.05);
    while g(hi).signum() == g(lo).signum() {
        lo = hi;
        hi *= 1.01;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid).signum() == g(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn kappa1_approaches_the_leaderless_threshold() {
    for dmu in [4.0, 5.0, 6.0] {
        let p = ModelParams::leader_pull_push(dmu, 1.0, 0.0, 1e-8, 4.0);
        let k = kappa1(dmu, &p, DerivConvention::PaperComposite).unwrap();
        let want = leaderless_threshold(dmu);
        assert!((k - want).abs() < 1e-3, "dmu {dmu}: {k} vs {want}");
    }
}

#[test]
fn kappa1_is_the_first_discriminant_sign_change() {
    let dmu: f64 = 5.0;
    let (c, x0) = (0.05, 4.0);
    // independent evaluation of 4R³ - 27A² for -s³ + Rs + A
    let u = dmu / 2.0;
    let e = (-u * u / 2.0).exp();
    let d = [
        u * e,
        0.5 * (1.0 - u * u) * e,
        0.25 * (u.powi(3) - 3.0 * u) * e,
        0.125 * (-u.powi(4) + 6.0 * u * u - 3.0) * e,
        0.0625 * (u.powi(5) - 10.0 * u.powi(3) + 15.0 * u) * e,
    ];
    let disc = |k: f64| {
        let theta = -(2.0 * c * x0 + 2.0 * k * d[0]) / (1.0 + k * d[1]);
        let h1 = d[1] + d[2] * theta / 2.0;
        let h3 = d[3] + d[4] * theta / 2.0;
        let scale = 3.0 * k * h3 / 24.0;
        let a = c * (dmu + theta) / scale;
        let r = -(1.0 + 3.0 * k * h1) / scale;
        (4.0 * r.powi(3) - 27.0 * a * a, scale)
    };
    // sign flips where the time scale itself crosses zero are poles of the
    // reduction, not roots of the discriminant
    let mut prev = disc(0.1);
    let mut found = None;
    for i in 1..=199_000 {
        let k = 0.1 + 1e-4 * i as f64;
        let cur = disc(k);
        if cur.0.signum() != prev.0.signum() && cur.1.signum() == prev.1.signum() {
            found = Some(k);
            break;
        }
        prev = cur;
    }
    let scan = found.expect("discriminant changes sign");
    let k1 = kappa1(dmu, &fig3(dmu), DerivConvention::PaperComposite).unwrap();
    assert!((scan - k1).abs() <= 1e-4, "scan {scan} vs kappa1 {k1}");
}

#[test]
fn leaderless_reductions_of_kappa2_and_kappa3() {
    for i in 1..=120 {
        let m = 0.1 * i as f64;
        let k2 = m / (6.0 * (m + 1.0))
            * (m - 2.0 / m - 2.0)
            * (2.0 / 9.0 * (1.5 + 3.0 / (2.0 * m)).powi(2)).exp();
        let k3 = (3.0 * m * m - 6.0 * m - 4.0) * ((2.0 + 4.0 / (3.0 * m)).powi(2) / 8.0).exp()
            / (2.0 * (2.0 + 3.0 * m));
        assert!(
            (kappa2(m, 0.0, 4.0).unwrap() - k2).abs() < 1e-12,
            "kappa2 at {m}"
        );
        assert!(
            (kappa3(m, 0.0, 4.0, 0.0).unwrap() - k3).abs() < 1e-12,
            "kappa3 at {m}"
        );
    }
}

#[test]
fn kappa2_agrees_with_a_second_evaluation_path() {
    // expanded form: with k = (8+11C)Δμ, the prefactor is k/(6(k+8)) and the
    // bracket is (k/8) - 16/k - 2Cx₀ - 2
    let (m, c, x0) = (5.0f64, 0.05f64, 4.0f64);
    let k = 8.0 * m + 11.0 * c * m;
    let s = (3.0 * k + 24.0) / (2.0 * k);
    let want = k * (k * k - 128.0 - 16.0 * k * (c * x0 + 1.0)) / (48.0 * k * (k + 8.0))
        * (2.0 * s * s / 9.0).exp();
    assert!((kappa2(m, c, x0).unwrap() - want).abs() < 1e-12);
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

#[test]
fn asymptotic_residuals_shrink_with_the_gap() {
    let (c, x0) = (0.05, 4.0);
    let grid = [6.0, 8.0, 10.0, 12.0];
    let sn: Vec<f64> = grid
        .iter()
        .map(|&m| {
            let r = saddle_node_residuals(m, c, x0, saddle_node_s(m, c), kappa2(m, c, x0).unwrap());
            r[0].abs().max(r[1].abs())
        })
        .collect();
    let pf: Vec<f64> = grid
        .iter()
        .map(|&m| {
            let r = pitchfork_residuals(
                m,
                c,
                x0,
                0.0,
                pitchfork_r(m),
                kappa3(m, c, x0, 0.0).unwrap(),
            );
            r[0].abs().max(r[1].abs())
        })
        .collect();
    let cubic: Vec<f64> = grid
        .iter()
        .map(|&m| (pitchfork_cubic(m, c, x0, pitchfork_r(m)) / m).abs())
        .collect();
    assert!(strictly_decreasing(&sn), "saddle-node residuals {sn:?}");
    assert!(strictly_decreasing(&pf), "pitchfork residuals {pf:?}");
    assert!(
        strictly_decreasing(&cubic),
        "scaled cubic residuals {cubic:?}"
    );
}

#[test]
fn normal_form_reproduces_the_taylor_rhs() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..500 {
        let r = rng.gen_range(0.5..8.0);
        let kappa = rng.gen_range(0.1..6.0);
        let nu = rng.gen_range(-1.0..1.0);
        let c = rng.gen_range(-1.0..1.0);
        let p = ModelParams::leader_pull_push(5.0, kappa, nu, c, 4.0);
        for conv in CONVENTIONS {
            let Ok(nf) = normal_form(r, &p, conv) else {
                continue;
            };
            let g = 3.0 * kappa - nu;
            let d1 = conv.derivative(r / 2.0, 1.0, 1).unwrap();
            let d3 = conv.derivative(r / 2.0, 1.0, 3).unwrap();
            for s in [-1.3, -0.2, 0.0, 0.7, 2.1] {
                let taylor = c * r - (1.0 + g * d1) * s - g * d3 / 24.0 * s * s * s;
                let back = nf.tau_scale * nf.rhs(s);
                assert!((back - taylor).abs() <= 1e-9 * (1.0 + taylor.abs()));
            }
        }
    }
}

#[test]
fn leaderless_normal_form_is_a_pitchfork() {
    for r in [0.1, 0.3, 0.5] {
        let p = ModelParams::leader_pull_push(5.0, 3.0, 0.0, 0.0, 4.0);
        let nf = normal_form(r, &p, DerivConvention::TrueDerivative).unwrap();
        assert_eq!(nf.a, 0.0);
        assert!(nf.r_coeff > 0.0, "r = {r}: R = {}", nf.r_coeff);
        // s³ - Rs = 0
        let mut roots: Vec<f64> = monic_cubic_roots(0.0, -nf.r_coeff, 0.0)
            .iter()
            .map(|z| {
                assert!(z.im.abs() < 1e-12);
                z.re
            })
            .collect();
        roots.sort_by(f64::total_cmp);
        let sq = nf.r_coeff.sqrt();
        for (got, want) in roots.iter().zip([-sq, 0.0, sq]) {
            assert!((got - want).abs() < 1e-10);
            assert!(nf.rhs(*got).abs() < 1e-9);
        }
    }
}

#[test]
fn closed_form_boundaries_are_continuous() {
    let grid = GridRange::new(3.5, 7.0, 50);
    let curves = boundary_curves(&grid, &fig3(5.0), DerivConvention::PaperComposite).unwrap();
    for curve in curves
        .iter()
        .filter(|c| matches!(c.kind, BoundaryKind::K2 | BoundaryKind::K3))
    {
        assert!(curve.omitted.is_empty());
        let jumps: Vec<f64> = curve
            .points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1).abs())
            .collect();
        for i in 0..jumps.len() {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(jumps.len() - 1);
            let local = (jumps[lo] + jumps[hi]) / 2.0;
            assert!(jumps[i] <= 10.0 * local, "{:?} jump at {i}", curve.kind);
        }
    }
}

#[test]
fn kappa2_and_kappa3_do_not_depend_on_convention() {
    let grid = GridRange::new(3.5, 7.0, 12);
    let a = boundary_curves(&grid, &fig3(5.0), DerivConvention::PaperComposite).unwrap();
    let b = boundary_curves(&grid, &fig3(5.0), DerivConvention::TrueDerivative).unwrap();
    assert_eq!(a[1].points, b[1].points);
    assert_eq!(a[2].points, b[2].points);
    assert_ne!(a[0].points, b[0].points);
}

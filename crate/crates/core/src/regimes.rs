//! Regime classification, the simulated boundary κ4, stability diagrams and
//! the named figure scenarios.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::RegimeError;
use crate::integrate::{find_equilibrium, Equilibrium, SolverConfig};
use crate::model::{to_rsx, ModelParams};

/// Offset given to the center node by [`IcPolicy::PerturbedCenter`].
pub const CENTER_PERTURBATION: f64 = 1e-6;
/// Two equilibria closer than this in the sup norm are the same point.
pub const DISTINCT_RADIUS: f64 = 1e-4;
pub const KAPPA4_DEFAULT_TOL: f64 = 0.005;
/// Largest coupling probed by the upward κ4 scan.
pub const KAPPA4_SCAN_MAX: f64 = 1024.0;
/// How many times an unresolved κ4 probe is retried with a 4× longer horizon.
pub const KAPPA4_HORIZON_RETRIES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeKind {
    #[serde(rename = "SHD")]
    Shd,
    #[serde(rename = "MR")]
    Mr,
    #[serde(rename = "SLD")]
    Sld,
    #[serde(rename = "UNRESOLVED")]
    Unresolved,
}

impl RegimeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeKind::Shd => "SHD",
            RegimeKind::Mr => "MR",
            RegimeKind::Sld => "SLD",
            RegimeKind::Unresolved => "UNRESOLVED",
        }
    }
}

/// The two nodes that agree in a majority-rule state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MajorityPair {
    #[serde(rename = "1-2")]
    OneTwo,
    #[serde(rename = "2-3")]
    TwoThree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub kind: RegimeKind,
    pub majority_pair: Option<MajorityPair>,
    pub r_star: f64,
    pub s_star: f64,
}

impl RegimeLabel {
    pub fn unresolved(x: Option<&[f64; 3]>) -> Self {
        let (r_star, s_star) = x.map_or((f64::NAN, f64::NAN), |x| {
            let q = to_rsx(x);
            (q.r, q.s)
        });
        RegimeLabel {
            kind: RegimeKind::Unresolved,
            majority_pair: None,
            r_star,
            s_star,
        }
    }

    pub fn is_mr(&self) -> bool {
        self.kind == RegimeKind::Mr
    }

    /// `SHD`, `MR(1,2)`, `MR(2,3)`, `SLD` or `UNRESOLVED`.
    pub fn short(&self) -> String {
        match self.majority_pair {
            Some(MajorityPair::OneTwo) => "MR(1,2)".into(),
            Some(MajorityPair::TwoThree) => "MR(2,3)".into(),
            None => self.kind.as_str().into(),
        }
    }
}

/// Classification thresholds as fractions of Δμ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `|s*| ≥ sigma_frac·Δμ` means majority rule.
    pub sigma_frac: f64,
    /// Otherwise `r* ≥ r_frac·Δμ` means high discord.
    pub r_frac: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            sigma_frac: 0.3,
            r_frac: 0.6,
        }
    }
}

/// Labels an equilibrium from its discord and asymmetry.
pub fn classify(eq: &Equilibrium, delta_mu: f64, thresholds: &Thresholds) -> RegimeLabel {
    if !eq.converged || !(delta_mu > 0.0) {
        return RegimeLabel::unresolved(Some(&eq.x_star));
    }
    classify_point(&eq.x_star, delta_mu, thresholds)
}

/// Labels a profile regardless of how it was obtained.
pub fn classify_point(x: &[f64; 3], delta_mu: f64, thresholds: &Thresholds) -> RegimeLabel {
    let q = to_rsx(x);
    let (kind, majority_pair) = if q.s.abs() >= thresholds.sigma_frac * delta_mu {
        // s > 0 when x₂ sits near x₁
        let pair = if q.s > 0.0 {
            MajorityPair::OneTwo
        } else {
            MajorityPair::TwoThree
        };
        (RegimeKind::Mr, Some(pair))
    } else if q.r >= thresholds.r_frac * delta_mu {
        (RegimeKind::Shd, None)
    } else {
        (RegimeKind::Sld, None)
    };
    RegimeLabel {
        kind,
        majority_pair,
        r_star: q.r,
        s_star: q.s,
    }
}

/// Initial condition used by scans and diagrams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IcPolicy {
    /// `xᵢ(0) = μᵢ`.
    BiasStart,
    /// `xᵢ(0) = μᵢ` with the center nudged by [`CENTER_PERTURBATION`].
    PerturbedCenter,
}

impl IcPolicy {
    /// Bias start when a leader breaks the symmetry, perturbed center otherwise.
    pub fn for_params(p: &ModelParams) -> Self {
        if p.has_leader() {
            IcPolicy::BiasStart
        } else {
            IcPolicy::PerturbedCenter
        }
    }

    pub fn initial_state(&self, p: &ModelParams) -> [f64; 3] {
        let mut x = p.biases();
        if *self == IcPolicy::PerturbedCenter {
            x[1] += CENTER_PERTURBATION;
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kappa4Result {
    pub delta_mu: f64,
    pub kappa4: f64,
    /// Final `(last MR, first non-MR)` bracket.
    pub bracket: (f64, f64),
    /// Bracket found by the doubling scan, before bisection.
    pub scan_bracket: (f64, f64),
    pub evaluations: usize,
}

fn label_at(
    p: &ModelParams,
    x_init: &[f64; 3],
    cfg: &SolverConfig,
    thresholds: &Thresholds,
) -> Result<(Equilibrium, RegimeLabel), RegimeError> {
    let mut cfg = *cfg;
    let mut eq = find_equilibrium(p, x_init, &cfg)?;
    for _ in 0..KAPPA4_HORIZON_RETRIES {
        if eq.converged {
            break;
        }
        cfg.t_max *= 4.0;
        eq = find_equilibrium(p, x_init, &cfg)?;
    }
    let label = classify(&eq, p.delta_mu(), thresholds);
    Ok((eq, label))
}

/// Coupling above which majority rule no longer appears from the standard
/// initial condition, located by an upward doubling scan and bisection.
pub fn kappa4_search(
    delta_mu: f64,
    p: &ModelParams,
    cfg: &SolverConfig,
    tol: f64,
) -> Result<Kappa4Result, RegimeError> {
    if !(delta_mu > 0.0) || !(tol > 0.0) {
        return Err(RegimeError::Invalid(format!(
            "need delta_mu > 0 and tol > 0, got {delta_mu} and {tol}"
        )));
    }
    let base = p.with_delta_mu(delta_mu);
    let policy = IcPolicy::for_params(&base);
    let thresholds = Thresholds::default();
    let mut evaluations = 0usize;
    let mut is_mr = |kappa: f64| -> Result<bool, RegimeError> {
        let q = base.with_kappa(kappa);
        evaluations += 1;
        let (eq, label) = label_at(&q, &policy.initial_state(&q), cfg, &thresholds)?;
        if label.kind == RegimeKind::Unresolved {
            return Err(RegimeError::Unresolved {
                kappa,
                detail: eq.diagnostic.unwrap_or_default(),
            });
        }
        Ok(label.is_mr())
    };

    let mut probed = Vec::new();
    let mut last_mr = None;
    let mut first_after = None;
    let mut kappa = 1.0;
    while kappa <= KAPPA4_SCAN_MAX {
        probed.push(kappa);
        let mr = is_mr(kappa)?;
        match (mr, last_mr) {
            (true, _) => last_mr = Some(kappa),
            (false, Some(_)) => {
                first_after = Some(kappa);
                break;
            }
            (false, None) => {}
        }
        kappa *= 2.0;
    }
    let (Some(mut lo), Some(mut hi)) = (last_mr, first_after) else {
        return Err(RegimeError::NoMajorityRule { delta_mu, probed });
    };
    let scan_bracket = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if is_mr(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Kappa4Result {
        delta_mu,
        kappa4: 0.5 * (lo + hi),
        bracket: (lo, hi),
        scan_bracket,
        evaluations,
    })
}

/// κ4 for each Δμ, evaluated concurrently and returned in input order.
pub fn kappa4_table(
    delta_mus: &[f64],
    p: &ModelParams,
    cfg: &SolverConfig,
    tol: f64,
) -> Vec<Result<Kappa4Result, RegimeError>> {
    delta_mus
        .par_iter()
        .map(|&m| kappa4_search(m, p, cfg, tol))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramSpec {
    pub dmu_axis: Vec<f64>,
    pub kappa_axis: Vec<f64>,
    /// Defaults to [`IcPolicy::for_params`].
    pub ic_policy: Option<IcPolicy>,
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramGrid {
    pub dmu_axis: Vec<f64>,
    pub kappa_axis: Vec<f64>,
    /// `labels[i][j]` is the regime at `(dmu_axis[i], kappa_axis[j])`.
    pub labels: Vec<Vec<RegimeLabel>>,
    pub ic_policy: IcPolicy,
    pub thresholds: Thresholds,
}

impl DiagramGrid {
    pub fn count(&self, kind: RegimeKind) -> usize {
        self.labels
            .iter()
            .flatten()
            .filter(|l| l.kind == kind)
            .count()
    }
}

fn diagram_cell(
    dmu: f64,
    kappa: f64,
    p: &ModelParams,
    cfg: &SolverConfig,
    policy: IcPolicy,
    thresholds: &Thresholds,
) -> RegimeLabel {
    let q = p.with_delta_mu(dmu).with_kappa(kappa);
    match find_equilibrium(&q, &policy.initial_state(&q), cfg) {
        Ok(eq) => classify(&eq, dmu, thresholds),
        Err(_) => RegimeLabel::unresolved(None),
    }
}

/// Regime of every `(Δμ, κ)` cell, computed concurrently.
pub fn stability_diagram(
    spec: &DiagramSpec,
    p: &ModelParams,
    cfg: &SolverConfig,
) -> Result<DiagramGrid, RegimeError> {
    stability_diagram_with(spec, p, cfg, true)
}

/// As [`stability_diagram`], optionally on the calling thread only. Both
/// schedules produce identical grids.
pub fn stability_diagram_with(
    spec: &DiagramSpec,
    p: &ModelParams,
    cfg: &SolverConfig,
    parallel: bool,
) -> Result<DiagramGrid, RegimeError> {
    if spec.dmu_axis.is_empty() || spec.kappa_axis.is_empty() {
        return Err(RegimeError::Invalid("empty diagram axis".into()));
    }
    let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
    if !sorted(&spec.dmu_axis) || !sorted(&spec.kappa_axis) {
        return Err(RegimeError::Invalid(
            "axes must be strictly increasing".into(),
        ));
    }
    if spec.dmu_axis.iter().any(|&m| !(m > 0.0)) || spec.kappa_axis.iter().any(|&k| k < 0.0) {
        return Err(RegimeError::Invalid(
            "delta_mu must be > 0 and kappa >= 0".into(),
        ));
    }
    p.validate()?;
    cfg.validate()?;
    let policy = spec.ic_policy.unwrap_or_else(|| IcPolicy::for_params(p));
    let nk = spec.kappa_axis.len();
    let cells: Vec<(usize, usize)> = (0..spec.dmu_axis.len())
        .flat_map(|i| (0..nk).map(move |j| (i, j)))
        .collect();
    let eval = |&(i, j): &(usize, usize)| {
        diagram_cell(
            spec.dmu_axis[i],
            spec.kappa_axis[j],
            p,
            cfg,
            policy,
            &spec.thresholds,
        )
    };
    let flat: Vec<RegimeLabel> = if parallel {
        cells.par_iter().map(eval).collect()
    } else {
        cells.iter().map(eval).collect()
    };
    let labels = flat.chunks(nk).map(|row| row.to_vec()).collect();
    Ok(DiagramGrid {
        dmu_axis: spec.dmu_axis.clone(),
        kappa_axis: spec.kappa_axis.clone(),
        labels,
        ic_policy: policy,
        thresholds: spec.thresholds,
    })
}

/// Equilibria reached from each initial condition, deduplicated.
pub fn bistability_probe(
    delta_mu: f64,
    kappa: f64,
    p: &ModelParams,
    ic_set: &[[f64; 3]],
    cfg: &SolverConfig,
) -> Result<Vec<(Equilibrium, RegimeLabel)>, RegimeError> {
    if ic_set.is_empty() {
        return Err(RegimeError::Invalid("empty initial-condition set".into()));
    }
    let q = p.with_delta_mu(delta_mu).with_kappa(kappa);
    let thresholds = Thresholds::default();
    let runs: Vec<_> = ic_set
        .par_iter()
        .map(|x| find_equilibrium(&q, x, cfg))
        .collect();
    let mut found: Vec<(Equilibrium, RegimeLabel)> = Vec::new();
    let mut last_issue = None;
    for run in runs {
        match run {
            Ok(eq) if eq.converged => {
                let dup = found.iter().any(|(e, _)| {
                    (0..3)
                        .map(|i| (e.x_star[i] - eq.x_star[i]).abs())
                        .fold(0.0, f64::max)
                        <= DISTINCT_RADIUS
                });
                if !dup {
                    let label = classify(&eq, delta_mu, &thresholds);
                    found.push((eq, label));
                }
            }
            Ok(eq) => last_issue = eq.diagnostic,
            Err(e) => last_issue = Some(e.to_string()),
        }
    }
    if found.is_empty() {
        return Err(RegimeError::Unresolved {
            kappa,
            detail: last_issue.unwrap_or_else(|| "every run unresolved".into()),
        });
    }
    Ok(found)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub params: ModelParams,
    pub x_init: [f64; 3],
    pub cfg: SolverConfig,
}

/// Parameter bundles behind every figure panel, `fig1a` … `fig5b`.
pub fn scenario_presets() -> Vec<Scenario> {
    let cfg = SolverConfig::default();
    let mut out = Vec::new();
    let perturbed = [-2.5, CENTER_PERTURBATION, 2.5];
    let bias = [-2.5, 0.0, 2.5];
    for (name, description, kappa) in [
        ("fig1a", "leaderless chain, kappa = 1 (SHD)", 1.0),
        ("fig1b", "leaderless chain, kappa = 1.5 (MR)", 1.5),
        ("fig1c", "leaderless chain, kappa = 3 (SLD)", 3.0),
    ] {
        out.push(Scenario {
            name,
            description,
            params: ModelParams::leaderless(5.0, kappa, 0.0),
            x_init: perturbed,
            cfg,
        });
    }
    for (name, description, kappa) in [
        (
            "fig2a",
            "leader pulls node 1, pushes node 3; kappa = 0.5 (SHD)",
            0.5,
        ),
        (
            "fig2b",
            "leader pulls node 1, pushes node 3; kappa = 1.5 (MR)",
            1.5,
        ),
        (
            "fig2c",
            "leader pulls node 1, pushes node 3; kappa = 14 (SLD)",
            14.0,
        ),
    ] {
        out.push(Scenario {
            name,
            description,
            params: ModelParams::leader_pull_push(5.0, kappa, 0.0, 0.05, 4.0),
            x_init: bias,
            cfg,
        });
    }
    for (name, description, kappa) in [
        ("fig4a", "leader pulls every node, kappa = 1", 1.0),
        ("fig4b", "leader pulls every node, kappa = 1.5", 1.5),
        ("fig4c", "leader pulls every node, kappa = 4", 4.0),
    ] {
        out.push(Scenario {
            name,
            description,
            params: ModelParams::leaderless(5.0, kappa, 0.0).with_leadership([0.2; 3], 8.0),
            x_init: bias,
            cfg,
        });
    }
    out.push(Scenario {
        name: "fig5a",
        description: "strong leader on both end nodes, kappa = 14",
        params: ModelParams::leaderless(5.0, 14.0, 0.0).with_leadership([4.0, 0.0, 4.0], 4.0),
        x_init: bias,
        cfg,
    });
    out.push(Scenario {
        name: "fig5b",
        description: "end nodes controlled with opposite signs, kappa = 1.5 (MR then SLD)",
        params: ModelParams::leader_pull_push(5.0, 1.5, 0.0, 0.19, 4.0),
        x_init: bias,
        cfg,
    });
    out
}

pub fn preset(name: &str) -> Option<Scenario> {
    scenario_presets().into_iter().find(|s| s.name == name)
}

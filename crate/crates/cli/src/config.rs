//! Option resolution: explicit flags, then the `--config` file, then defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use triad_core::bifurcation::GridRange;
use triad_core::regimes::{preset, scenario_presets, IcPolicy, Scenario};
use triad_core::{DerivConvention, Method, ModelParams, SolverConfig, Thresholds};

use crate::args::{
    parse_list, parse_range, CouplingArgs, Format, IcArg, MethodArg, PointArgs, SolverArgs,
    ThresholdArgs,
};
use crate::error::{CliError, CliResult};

pub const OUT_DIR_ENV: &str = "TRIAD_OUT_DIR";

/// Contents of a `--config` JSON file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<String>,
    pub kappa: Option<f64>,
    pub delta_mu: Option<f64>,
    pub mu: Option<[f64; 3]>,
    pub x_init: Option<[f64; 3]>,
    pub nu: Option<f64>,
    pub c: Option<f64>,
    pub leadership: Option<[f64; 3]>,
    pub x0: Option<f64>,
    pub lambda: Option<f64>,
    pub gamma: Option<[f64; 3]>,
    pub method: Option<MethodArg>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub eq_tol: Option<f64>,
    pub stride: Option<usize>,
    pub sigma_frac: Option<f64>,
    pub r_frac: Option<f64>,
    pub convention: Option<String>,
    pub tol: Option<f64>,
    pub format: Option<Format>,
    pub ic_policy: Option<IcArg>,
    /// Δμ grid `lo:hi:n` for `boundaries` and `diagram`.
    pub dmu: Option<String>,
    /// κ axis `lo:hi:n` for `diagram`.
    pub kappa_range: Option<String>,
    /// Δμ list for `kappa4`, in the same syntax as the flag.
    pub dmu_list: Option<String>,
    pub out_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

/// Parameters of the Figure 2 and 3 studies: Δμ = 5, κ = 1, C = 0.05, x₀ = 4.
pub fn default_params() -> ModelParams {
    ModelParams::leader_pull_push(5.0, 1.0, 0.0, 0.05, 4.0)
}

pub fn apply_coupling(
    mut p: ModelParams,
    flags: &CouplingArgs,
    file: &FileConfig,
) -> CliResult<ModelParams> {
    if let Some(nu) = flags.nu.or(file.nu) {
        p.nu = nu;
    }
    let x0 = flags.x0.or(file.x0).unwrap_or(p.x0);
    // an explicit triple beats a pull-push strength from the same source
    let leadership = match (flags.leadership, flags.c, file.leadership, file.c) {
        (Some(l), ..) => Some(l),
        (None, Some(c), ..) => Some([c, 0.0, -c]),
        (None, None, Some(l), _) => Some(l),
        (None, None, None, Some(c)) => Some([c, 0.0, -c]),
        _ => None,
    };
    p = p.with_leadership(leadership.unwrap_or(p.leadership()), x0);
    if let Some(l) = flags.lambda.or(file.lambda) {
        p.lambda = l;
    }
    if let Some([g1, g2, g3]) = flags.gamma.or(file.gamma) {
        (p.gamma1, p.gamma2, p.gamma3) = (g1, g2, g3);
    }
    Ok(p)
}

fn set_biases(mut p: ModelParams, delta_mu: Option<f64>, mu: Option<[f64; 3]>) -> ModelParams {
    if let Some(m) = delta_mu {
        p = p.with_delta_mu(m);
    }
    if let Some([a, b, c]) = mu {
        (p.mu1, p.mu2, p.mu3) = (a, b, c);
    }
    p
}

pub fn solver(
    flags: &SolverArgs,
    file: &FileConfig,
    base: SolverConfig,
) -> CliResult<SolverConfig> {
    let mut cfg = base;
    if let Some(m) = flags.method.or(file.method) {
        cfg.method = match m {
            MethodArg::Rk45 => Method::Rk45Adaptive,
            MethodArg::Rk4 => Method::Rk4Fixed,
        };
    }
    cfg.dt = flags.dt.or(file.dt).unwrap_or(cfg.dt);
    cfg.t_max = flags.t_max.or(file.t_max).unwrap_or(cfg.t_max);
    cfg.eq_tol = flags.eq_tol.or(file.eq_tol).unwrap_or(cfg.eq_tol);
    cfg.sample_stride = flags.stride.or(file.stride).unwrap_or(cfg.sample_stride);
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

pub fn thresholds(flags: &ThresholdArgs, file: &FileConfig) -> CliResult<Thresholds> {
    let d = Thresholds::default();
    let th = Thresholds {
        sigma_frac: flags.sigma_frac.or(file.sigma_frac).unwrap_or(d.sigma_frac),
        r_frac: flags.r_frac.or(file.r_frac).unwrap_or(d.r_frac),
    };
    if !(th.sigma_frac > 0.0 && th.r_frac > 0.0) {
        return Err(CliError::Usage(format!(
            "thresholds must be positive, got sigma_frac {} and r_frac {}",
            th.sigma_frac, th.r_frac
        )));
    }
    Ok(th)
}

pub fn convention(flag: Option<DerivConvention>, file: &FileConfig) -> CliResult<DerivConvention> {
    match (flag, &file.convention) {
        (Some(c), _) => Ok(c),
        (None, Some(s)) => s.parse().map_err(usage),
        (None, None) => Ok(DerivConvention::default()),
    }
}

pub fn ic_policy(flag: Option<IcArg>, file: &FileConfig, p: &ModelParams) -> IcPolicy {
    match flag.or(file.ic_policy) {
        Some(IcArg::Bias) => IcPolicy::BiasStart,
        Some(IcArg::Perturbed) => IcPolicy::PerturbedCenter,
        None => IcPolicy::for_params(p),
    }
}

pub fn dmu_range(
    flag: Option<GridRange>,
    file: &FileConfig,
    default: GridRange,
) -> CliResult<GridRange> {
    match (flag, &file.dmu) {
        (Some(r), _) => Ok(r),
        (None, Some(s)) => parse_range(s).map_err(usage),
        (None, None) => Ok(default),
    }
}

pub fn kappa_range(
    flag: Option<GridRange>,
    file: &FileConfig,
    default: GridRange,
) -> CliResult<GridRange> {
    match (flag, &file.kappa_range) {
        (Some(r), _) => Ok(r),
        (None, Some(s)) => parse_range(s).map_err(usage),
        (None, None) => Ok(default),
    }
}

pub fn dmu_list(
    flag: Option<Vec<f64>>,
    file: &FileConfig,
    default: Vec<f64>,
) -> CliResult<Vec<f64>> {
    match (flag, &file.dmu_list) {
        (Some(v), _) => Ok(v),
        (None, Some(s)) => parse_list(s).map_err(usage),
        (None, None) => Ok(default),
    }
}

pub fn out_dir(flag: Option<&Path>, file: &FileConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| file.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// A fully resolved operating point.
#[derive(Debug, Clone)]
pub struct Point {
    pub name: String,
    pub params: ModelParams,
    pub x_init: [f64; 3],
    pub cfg: SolverConfig,
    pub thresholds: Thresholds,
}

pub fn point(flags: &PointArgs, file: &FileConfig) -> CliResult<Point> {
    let scenario: Option<Scenario> = match flags.preset.as_ref().or(file.preset.as_ref()) {
        Some(name) => Some(preset(name).ok_or_else(|| {
            let names: Vec<&str> = scenario_presets().iter().map(|s| s.name).collect();
            CliError::Usage(format!(
                "unknown preset {name:?}; available: {}",
                names.join(", ")
            ))
        })?),
        None => None,
    };
    let (name, base, base_x, base_cfg) = match &scenario {
        Some(s) => (s.name.to_string(), s.params, Some(s.x_init), s.cfg),
        None => (
            "trajectory".to_string(),
            default_params(),
            None,
            SolverConfig::default(),
        ),
    };
    let mut p = set_biases(base, file.delta_mu, file.mu);
    p = set_biases(p, flags.delta_mu, flags.mu);
    if let Some(k) = flags.kappa.or(file.kappa) {
        p.kappa = k;
    }
    p = apply_coupling(p, &flags.coupling, file)?;
    p.validate().map_err(usage)?;
    let biases_changed =
        flags.delta_mu.or(file.delta_mu).is_some() || flags.mu.or(file.mu).is_some();
    let x_init = flags
        .x_init
        .or(file.x_init)
        .or(if biases_changed { None } else { base_x })
        .unwrap_or_else(|| p.biases());
    if x_init.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Usage("initial state must be finite".into()));
    }
    Ok(Point {
        name,
        params: p,
        x_init,
        cfg: solver(&flags.solver, file, base_cfg)?,
        thresholds: thresholds(&flags.thresholds, file)?,
    })
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use triad_core::bifurcation::GridRange;
use triad_core::DerivConvention;

#[derive(Debug, Parser)]
#[command(
    name = "triad",
    version,
    about = "Opinion dynamics of a three-agent chain with a leader",
    allow_negative_numbers = true
)]
pub struct Cli {
    /// JSON file supplying values for any option; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory. Falls back to the config file, then $TRIAD_OUT_DIR, then `.`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory and report its equilibrium and regime.
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Sample the analytical boundaries κ1, κ2, κ3 (and optionally κ4) over Δμ.
    #[command(allow_negative_numbers = true)]
    Boundaries(BoundariesArgs),
    /// Classify every cell of a (Δμ, κ) grid and render a heatmap.
    #[command(allow_negative_numbers = true)]
    Diagram(DiagramArgs),
    /// Locate the simulated majority-rule threshold κ4 for a list of Δμ.
    #[command(allow_negative_numbers = true)]
    Kappa4(Kappa4Args),
    /// Label an equilibrium, either supplied with --state or found by simulation.
    #[command(allow_negative_numbers = true)]
    Classify(ClassifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Rk45,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IcArg {
    /// Start every node at its bias.
    Bias,
    /// Bias start with the center node nudged by 1e-6.
    Perturbed,
}

/// Coupling, leader and bias options shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CouplingArgs {
    /// Asymmetric coupling ν.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Leader strength C for the pull-push pattern (C, 0, -C).
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// Explicit leader strengths `c1,c2,c3`; overrides --c.
    #[arg(long, value_parser = parse_triple, value_name = "C1,C2,C3")]
    pub leadership: Option<[f64; 3]>,
    /// Leader opinion x₀.
    #[arg(long)]
    pub x0: Option<f64>,
    /// Width λ of the coupling kernel.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Self-bias rates `g1,g2,g3`.
    #[arg(long, value_parser = parse_triple, value_name = "G1,G2,G3")]
    pub gamma: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Fixed step (rk4) or initial trial step (rk45).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Integration horizon.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Stop once ‖rhs‖∞ falls below this.
    #[arg(long)]
    pub eq_tol: Option<f64>,
    /// Keep every n-th step of the trajectory.
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ThresholdArgs {
    /// |s*| ≥ sigma_frac·Δμ counts as majority rule.
    #[arg(long)]
    pub sigma_frac: Option<f64>,
    /// r* ≥ r_frac·Δμ counts as high discord.
    #[arg(long)]
    pub r_frac: Option<f64>,
}

/// Options fixing a single operating point.
#[derive(Debug, Clone, Default, Args)]
pub struct PointArgs {
    /// Named figure preset (fig1a … fig5b) used as the starting bundle.
    #[arg(long)]
    pub preset: Option<String>,
    /// Coupling strength κ.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Bias gap Δμ; biases become (-Δμ/2, 0, Δμ/2).
    #[arg(long)]
    pub delta_mu: Option<f64>,
    /// Explicit biases `mu1,mu2,mu3`; overrides --delta-mu.
    #[arg(long, value_parser = parse_triple, value_name = "M1,M2,M3")]
    pub mu: Option<[f64; 3]>,
    /// Initial state `x1,x2,x3` (default: the preset's, else the biases).
    #[arg(long, value_parser = parse_triple, value_name = "X1,X2,X3")]
    pub x_init: Option<[f64; 3]>,
    #[command(flatten)]
    pub coupling: CouplingArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Trajectory file (default: `<preset or trajectory>.<format>` in the output directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write an SVG plot of x1, x2, x3 against time.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Classify this state directly instead of simulating.
    #[arg(long, value_parser = parse_triple, value_name = "X1,X2,X3")]
    pub state: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundariesArgs {
    /// Δμ grid as `lo:hi:n`.
    #[arg(long, value_parser = parse_range, value_name = "LO:HI:N")]
    pub dmu: Option<GridRange>,
    /// Derivative convention for κ1: `paper` or `true-derivative`.
    #[arg(long, value_parser = parse_convention)]
    pub convention: Option<DerivConvention>,
    /// Also simulate κ4 on the same grid.
    #[arg(long)]
    pub with_kappa4: bool,
    /// Bisection width for κ4.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub coupling: CouplingArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DiagramArgs {
    /// Δμ axis as `lo:hi:n`.
    #[arg(long, value_parser = parse_range, value_name = "LO:HI:N")]
    pub dmu: Option<GridRange>,
    /// κ axis as `lo:hi:n`.
    #[arg(long, value_parser = parse_range, value_name = "LO:HI:N")]
    pub kappa: Option<GridRange>,
    /// Convention for the overlaid κ1 curve.
    #[arg(long, value_parser = parse_convention)]
    pub convention: Option<DerivConvention>,
    #[arg(long, value_enum)]
    pub ic_policy: Option<IcArg>,
    /// Evaluate cells on one thread.
    #[arg(long)]
    pub serial: bool,
    #[command(flatten)]
    pub coupling: CouplingArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Kappa4Args {
    /// Δμ values: `5,5.1,5.2` or `lo:hi:n`.
    #[arg(long, value_parser = parse_dmu_list, value_name = "LIST")]
    pub dmu_list: Option<DmuList>,
    /// Bisection width.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub coupling: CouplingArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part
            .parse()
            .map_err(|_| format!("{part:?} is not a number"))?;
    }
    Ok(out)
}

/// `lo:hi:n`, or a single number for a one-point axis.
pub fn parse_range(s: &str) -> Result<GridRange, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let num = |p: &str| {
        p.parse::<f64>()
            .map_err(|_| format!("{p:?} is not a number"))
    };
    let range = match parts.as_slice() {
        [v] => {
            let v = num(v)?;
            GridRange::new(v, v, 1)
        }
        [lo, hi, n] => {
            let n = n
                .parse::<usize>()
                .map_err(|_| format!("{n:?} is not a point count"))?;
            GridRange::new(num(lo)?, num(hi)?, n)
        }
        _ => return Err(format!("expected lo:hi:n, got {s:?}")),
    };
    range.validate().map_err(|e| e.to_string())?;
    Ok(range)
}

/// Comma list or `lo:hi:n`; never empty.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty list".into());
    }
    if s.contains(':') {
        return Ok(parse_range(s)?.points());
    }
    s.split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<f64>()
                .map_err(|_| format!("{p:?} is not a number"))
        })
        .collect()
}

/// Parsed `--dmu-list`; a newtype so clap treats it as one value.
#[derive(Debug, Clone, PartialEq)]
pub struct DmuList(pub Vec<f64>);

fn parse_dmu_list(s: &str) -> Result<DmuList, String> {
    parse_list(s).map(DmuList)
}

pub fn parse_convention(s: &str) -> Result<DerivConvention, String> {
    s.parse().map_err(|e: triad_core::ModelError| e.to_string())
}

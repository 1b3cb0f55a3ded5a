//! Analytic bifurcation boundaries of the chain triad under a `(C, 0, -C)` leader.
//!
//! In the high-discord state the asymmetry `s` obeys, to cubic order,
//!
//! ```text
//! ds/dt ≈ C r - (1 + (3κ-ν) h'(r/2)) s - (1/24)(3κ-ν) h'''(r/2) s³
//! ```
//!
//! which after rescaling time is the imperfect pitchfork `ds/dτ = A + R s - s³`.
//! κ1 is where that cubic's discriminant vanishes at `r ≈ Δμ + θ`. κ2 (saddle
//! node of the majority-rule branch) and κ3 (lower edge of low discord) are
//! closed forms built on asymptotic roots; their residual helpers measure how
//! well those roots satisfy the underlying systems.

use serde::{Deserialize, Serialize};

use crate::error::{BifurcationError, ModelError};
use crate::model::{h, DerivConvention, ModelParams};

/// Smallest admissible `|1 + (κ+ν)h'(Δμ/2)|` in the discord expansion.
pub const THETA_DENOMINATOR_MIN: f64 = 1e-8;
/// Residual a κ1 root must reach in its defining equation.
pub const KAPPA1_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    /// Constant (imperfection) term.
    pub a: f64,
    /// Linear coefficient.
    pub r_coeff: f64,
    /// `(1/24)(3κ-ν) h'''(r/2)`; `τ = tau_scale · t`.
    pub tau_scale: f64,
    pub r_used: f64,
    pub convention: DerivConvention,
}

impl NormalForm {
    /// `A + R s - s³`.
    pub fn rhs(&self, s: f64) -> f64 {
        self.a + self.r_coeff * s - s * s * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundaryKind {
    K1,
    K2,
    K3,
    K4,
}

impl BoundaryKind {
    pub fn file_stem(&self) -> &'static str {
        match self {
            BoundaryKind::K1 => "kappa1",
            BoundaryKind::K2 => "kappa2",
            BoundaryKind::K3 => "kappa3",
            BoundaryKind::K4 => "kappa4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    pub c: f64,
    pub x0: f64,
    pub nu: f64,
    pub convention: DerivConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub kind: BoundaryKind,
    /// `(Δμ, κ)` pairs, Δμ strictly increasing.
    pub points: Vec<(f64, f64)>,
    /// Grid points where the boundary could not be evaluated, with the reason.
    pub omitted: Vec<(f64, String)>,
    pub params: CurveParams,
}

/// Inclusive evenly spaced grid `lo..=hi` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridRange {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        GridRange { lo, hi, n }
    }

    pub fn validate(&self) -> Result<(), BifurcationError> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(BifurcationError::InvalidRange("non-finite bounds".into()));
        }
        if self.n == 1 && self.lo == self.hi {
            return Ok(());
        }
        if self.lo >= self.hi || self.n < 2 {
            return Err(BifurcationError::InvalidRange(format!(
                "need lo < hi and n >= 2, got {}:{}:{}",
                self.lo, self.hi, self.n
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect()
    }
}

fn require_pull_push(p: &ModelParams) -> Result<f64, BifurcationError> {
    if p.is_pull_push() {
        Ok(p.c1)
    } else {
        Err(ModelError::LeadershipPattern { c: p.leadership() }.into())
    }
}

/// First-order correction `θ` to the high-discord estimate `r ≈ Δμ + θ`.
pub fn theta_shd(
    delta_mu: f64,
    p: &ModelParams,
    conv: DerivConvention,
) -> Result<f64, BifurcationError> {
    let c = require_pull_push(p)?;
    let half = delta_mu / 2.0;
    let end = p.kappa + p.nu;
    let num = 2.0 * c * p.x0 + 2.0 * end * h(half, p.lambda);
    let den = 1.0 + end * conv.derivative(half, p.lambda, 1)?;
    if den.abs() <= THETA_DENOMINATOR_MIN {
        return Err(BifurcationError::Singular {
            what: "discord expansion",
            detail: format!("1 + (kappa+nu) h'(dmu/2) = {den:e}"),
        });
    }
    Ok(-num / den)
}

/// Imperfect-pitchfork normal form of the asymmetry equation at discord `r`.
pub fn normal_form(
    r: f64,
    p: &ModelParams,
    conv: DerivConvention,
) -> Result<NormalForm, BifurcationError> {
    let c = require_pull_push(p)?;
    let g = 3.0 * p.kappa - p.nu;
    let d1 = conv.derivative(r / 2.0, p.lambda, 1)?;
    let d3 = conv.derivative(r / 2.0, p.lambda, 3)?;
    let tau_scale = g * d3 / 24.0;
    if tau_scale.abs() < 1e-14 || !tau_scale.is_finite() {
        return Err(BifurcationError::Singular {
            what: "normal-form time scale",
            detail: format!("(3kappa-nu) h'''(r/2)/24 = {tau_scale:e}"),
        });
    }
    Ok(NormalForm {
        a: c * r / tau_scale,
        r_coeff: -(1.0 + g * d1) / tau_scale,
        tau_scale,
        r_used: r,
        convention: conv,
    })
}

/// Discriminant of `a x³ + b x² + c x + d`.
pub fn cubic_discriminant(a: f64, b: f64, c: f64, d: f64) -> Result<f64, BifurcationError> {
    if a == 0.0 {
        return Err(BifurcationError::NotCubic);
    }
    Ok(
        b * b * c * c - 4.0 * a * c * c * c - 4.0 * b * b * b * d - 27.0 * a * a * d * d
            + 18.0 * a * b * c * d,
    )
}

/// Left side minus right side of the κ1 condition
/// `-32(1+(3κ-ν)H₁)³ = 9C²(Δμ+θ)²(3κ-ν)H₃`, with `θ` evaluated at `kappa`.
pub fn kappa1_residual(
    delta_mu: f64,
    kappa: f64,
    p: &ModelParams,
    conv: DerivConvention,
) -> Result<f64, BifurcationError> {
    let c = require_pull_push(p)?;
    let q = p.with_kappa(kappa);
    let theta = theta_shd(delta_mu, &q, conv)?;
    let half = delta_mu / 2.0;
    let d = |order| conv.derivative(half, p.lambda, order);
    let h1 = d(1)? + d(2)? * theta / 2.0;
    let h3 = d(3)? + d(4)? * theta / 2.0;
    let g = 3.0 * kappa - p.nu;
    let lin = 1.0 + g * h1;
    let r = delta_mu + theta;
    Ok(-32.0 * lin * lin * lin - 9.0 * c * c * r * r * g * h3)
}

/// Probe settings for the κ1 root search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa1Search {
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    /// Number of log-spaced probe points.
    pub probes: usize,
}

impl Default for Kappa1Search {
    fn default() -> Self {
        Kappa1Search {
            kappa_lo: 0.05,
            kappa_hi: 50.0,
            probes: 200,
        }
    }
}

/// Upper boundary of high discord: smallest κ solving the κ1 condition.
pub fn kappa1(
    delta_mu: f64,
    p: &ModelParams,
    conv: DerivConvention,
) -> Result<f64, BifurcationError> {
    kappa1_with(delta_mu, p, conv, &Kappa1Search::default())
}

pub fn kappa1_with(
    delta_mu: f64,
    p: &ModelParams,
    conv: DerivConvention,
    search: &Kappa1Search,
) -> Result<f64, BifurcationError> {
    require_pull_push(p)?;
    let (lo, hi) = (search.kappa_lo, search.kappa_hi);
    if !(lo > 0.0 && hi > lo && search.probes >= 2) {
        return Err(BifurcationError::InvalidRange(format!(
            "kappa probe [{lo}, {hi}] with {} points",
            search.probes
        )));
    }
    let f = |k: f64| {
        kappa1_residual(delta_mu, k, p, conv)
            .ok()
            .filter(|v| v.is_finite())
    };
    let ratio = (hi / lo).powf(1.0 / (search.probes - 1) as f64);
    let grid: Vec<f64> = (0..search.probes)
        .map(|i| {
            if i + 1 == search.probes {
                hi
            } else {
                lo * ratio.powi(i as i32)
            }
        })
        .collect();
    let values: Vec<Option<f64>> = grid.iter().map(|&k| f(k)).collect();

    for i in 0..grid.len() - 1 {
        let (Some(fa), Some(fb)) = (values[i], values[i + 1]) else {
            continue;
        };
        if fa == 0.0 {
            return Ok(grid[i]);
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        if let Some(root) = refine_root(&f, grid[i], grid[i + 1], fa, fb) {
            if let Some(r) = f(root) {
                if r.abs() < KAPPA1_RESIDUAL_TOL {
                    return Ok(root);
                }
            }
        }
    }
    Err(BifurcationError::NoRoot { lo, hi })
}

/// Bisection down to machine resolution followed by a guarded secant polish.
fn refine_root<F>(f: &F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Option<f64>
where
    F: Fn(f64) -> Option<f64>,
{
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    let (mut best, mut fbest) = if fa.abs() < fb.abs() {
        (a, fa)
    } else {
        (b, fb)
    };
    let (mut x0, mut f0, mut x1, mut f1) = (a, fa, b, fb);
    for _ in 0..4 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !(x2 >= a.min(b) && x2 <= a.max(b)) {
            break;
        }
        let f2 = f(x2)?;
        if f2.abs() < fbest.abs() {
            best = x2;
            fbest = f2;
        }
        (x0, f0, x1, f1) = (x1, f1, x2, f2);
    }
    Some(best)
}

/// Asymptotic root `s̃ = 3/2 + 12/((8+11C)Δμ)` of the saddle-node system.
pub fn saddle_node_s(delta_mu: f64, c: f64) -> f64 {
    1.5 + 12.0 / ((8.0 + 11.0 * c) * delta_mu)
}

/// Saddle-node (MR/SHD) boundary κ2.
pub fn kappa2(delta_mu: f64, c: f64, x0: f64) -> Result<f64, BifurcationError> {
    if !(delta_mu > 0.0) {
        return Err(BifurcationError::NonPositiveDeltaMu(delta_mu));
    }
    let k = (8.0 + 11.0 * c) * delta_mu;
    if k == 0.0 || k + 8.0 == 0.0 {
        return Err(BifurcationError::Singular {
            what: "kappa2",
            detail: format!("(8+11C)dmu = {k}"),
        });
    }
    let s = 1.5 + 12.0 / k;
    Ok(k / (6.0 * (k + 8.0))
        * (delta_mu + 11.0 * c / 8.0 * delta_mu - 16.0 / k - 2.0 * c * x0 - 2.0)
        * (2.0 / 9.0 * s * s).exp())
}

/// Residuals of the saddle-node pair (fixed-point equation, tangency) for the
/// reduced `s̃` dynamics `ds̃/dt = -4s̃/3 + (1+11C/8)Δμ - 2Cx₀ - 4κ h(2s̃/3)`.
pub fn saddle_node_residuals(delta_mu: f64, c: f64, x0: f64, s: f64, kappa: f64) -> [f64; 2] {
    let e = (-2.0 / 9.0 * s * s).exp();
    [
        4.0 / 3.0 * s - (1.0 + 11.0 * c / 8.0) * delta_mu + 2.0 * c * x0 + 4.0 * kappa * s * e,
        4.0 / 3.0 + 4.0 * kappa * (1.0 - 4.0 / 9.0 * s * s) * e,
    ]
}

/// Asymptotic discord `r ≈ 2 + 4/(3Δμ)` at the SLD/MR pitchfork.
pub fn pitchfork_r(delta_mu: f64) -> f64 {
    2.0 + 4.0 / (3.0 * delta_mu)
}

/// The cubic in `r` obtained by dividing the two pitchfork conditions (ν = 0).
pub fn pitchfork_cubic(delta_mu: f64, c: f64, x0: f64, r: f64) -> f64 {
    r * r * r - delta_mu * r * r + 2.0 * c * x0 * r * r - 4.0 / 3.0 * r - 8.0 * c * x0
        + 4.0 * delta_mu
}

/// Residuals of the pitchfork pair: discord equilibrium and vanishing linear
/// coefficient of the asymmetry equation (true derivatives, λ = 1).
pub fn pitchfork_residuals(
    delta_mu: f64,
    c: f64,
    x0: f64,
    nu: f64,
    r: f64,
    kappa: f64,
) -> [f64; 2] {
    let e = (-r * r / 8.0).exp();
    [
        r + 2.0 * c * x0 - delta_mu + (kappa + nu) * r * e,
        1.0 + 0.5 * (3.0 * kappa - nu) * (1.0 - r * r / 4.0) * e,
    ]
}

/// Lower boundary κ3 of the low-discord state.
pub fn kappa3(delta_mu: f64, c: f64, x0: f64, nu: f64) -> Result<f64, BifurcationError> {
    if !(delta_mu > 0.0) {
        return Err(BifurcationError::NonPositiveDeltaMu(delta_mu));
    }
    let m = delta_mu;
    let r = pitchfork_r(m);
    Ok((-4.0 * nu - 6.0 * nu * m
        + (3.0 * m * m - 6.0 * (1.0 + c * x0) * m - 4.0) * (r * r / 8.0).exp())
        / (2.0 * (2.0 + 3.0 * m)))
}

/// Samples κ1, κ2 and κ3 over a Δμ grid. Points where a boundary cannot be
/// evaluated are listed in [`BoundaryCurve::omitted`].
pub fn boundary_curves(
    dmu: &GridRange,
    p: &ModelParams,
    conv: DerivConvention,
) -> Result<Vec<BoundaryCurve>, BifurcationError> {
    dmu.validate()?;
    let c = require_pull_push(p)?;
    let params = CurveParams {
        c,
        x0: p.x0,
        nu: p.nu,
        convention: conv,
    };
    let grid = dmu.points();
    let sample = |kind: BoundaryKind| {
        let mut curve = BoundaryCurve {
            kind,
            points: Vec::new(),
            omitted: Vec::new(),
            params,
        };
        for &m in &grid {
            let value = match kind {
                BoundaryKind::K1 => kappa1(m, &p.with_delta_mu(m), conv),
                BoundaryKind::K2 => kappa2(m, c, p.x0),
                BoundaryKind::K3 => kappa3(m, c, p.x0, p.nu),
                BoundaryKind::K4 => unreachable!("kappa4 is simulated"),
            };
            match value {
                Ok(k) if k.is_finite() => curve.points.push((m, k)),
                Ok(k) => curve.omitted.push((m, format!("non-finite value {k}"))),
                Err(e) => curve.omitted.push((m, e.to_string())),
            }
        }
        curve
    };
    let curves: Vec<BoundaryCurve> = [BoundaryKind::K1, BoundaryKind::K2, BoundaryKind::K3]
        .into_iter()
        .map(sample)
        .collect();
    if curves.iter().all(|c| c.points.is_empty()) {
        return Err(BifurcationError::EmptyCurves);
    }
    Ok(curves)
}

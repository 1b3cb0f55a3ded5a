//! Time integration, equilibrium detection and linear stability.
//!
//! Integration stops as soon as the sup-norm of the vector field drops below
//! `eq_tol`; otherwise it runs to `t_max`. The endpoint of a converged run is
//! then polished by damped Newton iterations on the triad field.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::IntegrateError;
use crate::linalg::{eigenvalues3, solve3};
use crate::model::{
    chain3_field, jacobian_chain3, rhs_general, AgentParams, ModelParams, OpinionState, Topology,
};

/// Any coordinate larger than this in magnitude aborts the run.
pub const BLOW_UP_LIMIT: f64 = 1e6;
pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_MAX_HALVINGS: usize = 8;
/// Largest endpoint residual, and largest Newton displacement, for which an
/// unconverged run may still be settled by Newton.
pub const NEWTON_HANDOFF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rk4Fixed,
    Rk45Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    /// Fixed step, or first trial step in adaptive mode.
    pub dt: f64,
    pub t_max: f64,
    pub eq_tol: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Record every `sample_stride`-th step (the endpoints are always kept).
    pub sample_stride: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Rk45Adaptive,
            dt: 0.01,
            t_max: 500.0,
            eq_tol: 1e-9,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            sample_stride: 1,
        }
    }
}

impl SolverConfig {
    pub fn rk4(dt: f64, t_max: f64) -> Self {
        SolverConfig {
            method: Method::Rk4Fixed,
            dt,
            t_max,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let bad = |msg: String| Err(IntegrateError::InvalidConfig(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max must be > 0, got {}", self.t_max));
        }
        if self.dt >= self.t_max {
            return bad(format!(
                "dt ({}) must be below t_max ({})",
                self.dt, self.t_max
            ));
        }
        for (name, v) in [
            ("eq_tol", self.eq_tol),
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be > 0, got {v}"));
            }
        }
        if self.sample_stride == 0 {
            return bad("sample_stride must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<OpinionState>,
    /// Triad parameters; `None` for general-network runs.
    pub params: Option<ModelParams>,
    pub converged: bool,
    pub final_residual: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &OpinionState {
        self.samples
            .last()
            .expect("trajectory always holds the initial state")
    }

    /// Final state of a triad run.
    pub fn final_triad(&self) -> Option<[f64; 3]> {
        let x = &self.last().x;
        (x.len() == 3).then(|| [x[0], x[1], x[2]])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub x_star: [f64; 3],
    pub residual: f64,
    pub eigenvalues: [Complex64; 3],
    pub stable: bool,
    /// False when the integrator hit `t_max` before the residual test passed.
    pub converged: bool,
    /// False when Newton polishing was skipped (singular Jacobian or unconverged run).
    pub refined: bool,
    pub t_end: f64,
    pub diagnostic: Option<String>,
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct RunOutcome {
    x: Vec<f64>,
    t: f64,
    converged: bool,
    residual: f64,
    steps: usize,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sup_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

fn check_state(x: &[f64], t: f64) -> Result<(), IntegrateError> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(IntegrateError::NonFinite { t });
    }
    if x.iter().any(|v| v.abs() > BLOW_UP_LIMIT) {
        let mut head = [f64::NAN; 3];
        for (dst, src) in head.iter_mut().zip(x) {
            *dst = *src;
        }
        return Err(IntegrateError::BlowUp { t, x: head });
    }
    Ok(())
}

/// Steps between two calls of the early-exit check.
const SETTLE_EVERY: usize = 16;

/// Integrates `field` from `x_init` at `t = 0`. `record` receives every
/// `stride`-th accepted state plus both endpoints. While the residual is below
/// [`NEWTON_HANDOFF`] but above `eq_tol`, `settle` is offered the state every
/// [`SETTLE_EVERY`] steps and may end the run.
fn run<F, R>(
    field: F,
    x_init: &[f64],
    cfg: &SolverConfig,
    mut record: R,
    settle: Option<&dyn Fn(&[f64]) -> bool>,
) -> Result<RunOutcome, IntegrateError>
where
    F: Fn(&[f64], &mut [f64]),
    R: FnMut(f64, &[f64]),
{
    cfg.validate()?;
    let n = x_init.len();
    let mut x = x_init.to_vec();
    check_state(&x, 0.0)?;
    let mut t = 0.0;
    let mut f0 = vec![0.0; n];
    field(&x, &mut f0);
    record(t, &x);
    let mut residual = sup_norm(&f0);
    if residual < cfg.eq_tol {
        return Ok(RunOutcome {
            x,
            t,
            converged: true,
            residual,
            steps: 0,
        });
    }

    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut steps = 0usize;
    let mut since_record = 0usize;
    let mut last_recorded = true;
    let mut since_settle = 0usize;
    let mut try_settle = |x: &[f64], residual: f64| -> bool {
        let Some(check) = settle else { return false };
        if residual >= NEWTON_HANDOFF {
            return false;
        }
        since_settle += 1;
        if since_settle < SETTLE_EVERY {
            return false;
        }
        since_settle = 0;
        check(x)
    };

    match cfg.method {
        Method::Rk4Fixed => {
            while t < cfg.t_max {
                let h = cfg.dt.min(cfg.t_max - t);
                k[0].copy_from_slice(&f0);
                for i in 0..n {
                    tmp[i] = x[i] + 0.5 * h * k[0][i];
                }
                field(&tmp, &mut k[1]);
                for i in 0..n {
                    tmp[i] = x[i] + 0.5 * h * k[1][i];
                }
                field(&tmp, &mut k[2]);
                for i in 0..n {
                    tmp[i] = x[i] + h * k[2][i];
                }
                field(&tmp, &mut k[3]);
                for i in 0..n {
                    x[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
                }
                t = if cfg.t_max - t <= cfg.dt {
                    cfg.t_max
                } else {
                    t + h
                };
                steps += 1;
                check_state(&x, t)?;
                field(&x, &mut f0);
                residual = sup_norm(&f0);
                since_record += 1;
                last_recorded = false;
                if since_record == cfg.sample_stride {
                    record(t, &x);
                    since_record = 0;
                    last_recorded = true;
                }
                if residual < cfg.eq_tol {
                    break;
                }
                if try_settle(&x, residual) {
                    break;
                }
            }
        }
        Method::Rk45Adaptive => {
            let mut h = cfg.dt.min(cfg.t_max);
            let min_step = |t: f64| 1e-13 * t.abs().max(1.0);
            k[0].copy_from_slice(&f0);
            while t < cfg.t_max {
                if t + h > cfg.t_max {
                    h = cfg.t_max - t;
                }
                let stage = |k: &mut Vec<Vec<f64>>,
                             tmp: &mut Vec<f64>,
                             out: usize,
                             coeffs: &[(usize, f64)]| {
                    for i in 0..n {
                        let mut acc = x[i];
                        for &(j, a) in coeffs {
                            acc += h * a * k[j][i];
                        }
                        tmp[i] = acc;
                    }
                    field(tmp, &mut k[out]);
                };
                stage(&mut k, &mut tmp, 1, &[(0, A21)]);
                stage(&mut k, &mut tmp, 2, &[(0, A31), (1, A32)]);
                stage(&mut k, &mut tmp, 3, &[(0, A41), (1, A42), (2, A43)]);
                stage(
                    &mut k,
                    &mut tmp,
                    4,
                    &[(0, A51), (1, A52), (2, A53), (3, A54)],
                );
                stage(
                    &mut k,
                    &mut tmp,
                    5,
                    &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)],
                );
                for i in 0..n {
                    x_new[i] = x[i]
                        + h * (B1 * k[0][i]
                            + B3 * k[2][i]
                            + B4 * k[3][i]
                            + B5 * k[4][i]
                            + B6 * k[5][i]);
                }
                field(&x_new, &mut k[6]);
                let mut err = 0.0f64;
                for i in 0..n {
                    let e = h
                        * (E1 * k[0][i]
                            + E3 * k[2][i]
                            + E4 * k[3][i]
                            + E5 * k[4][i]
                            + E6 * k[5][i]
                            + E7 * k[6][i]);
                    let sc = cfg.abs_tol + cfg.rel_tol * x[i].abs().max(x_new[i].abs());
                    err = err.max((e / sc).abs());
                }
                if !err.is_finite() {
                    h *= 0.2;
                    if h < min_step(t) {
                        return Err(IntegrateError::StepUnderflow { t, h });
                    }
                    continue;
                }
                if err <= 1.0 {
                    t = if cfg.t_max - t <= h { cfg.t_max } else { t + h };
                    x.copy_from_slice(&x_new);
                    let (head, tail) = k.split_at_mut(6);
                    head[0].copy_from_slice(&tail[0]);
                    steps += 1;
                    check_state(&x, t)?;
                    residual = sup_norm(&k[0]);
                    since_record += 1;
                    last_recorded = false;
                    if since_record == cfg.sample_stride {
                        record(t, &x);
                        since_record = 0;
                        last_recorded = true;
                    }
                    if residual < cfg.eq_tol {
                        break;
                    }
                    if try_settle(&x, residual) {
                        break;
                    }
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    h *= factor;
                } else {
                    h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                    if h < min_step(t) {
                        return Err(IntegrateError::StepUnderflow { t, h });
                    }
                }
            }
        }
    }
    if !last_recorded {
        record(t, &x);
    }
    Ok(RunOutcome {
        converged: residual < cfg.eq_tol,
        x,
        t,
        residual,
        steps,
    })
}

fn triad_field(p: &ModelParams) -> impl Fn(&[f64], &mut [f64]) + '_ {
    move |x: &[f64], out: &mut [f64]| {
        let f = chain3_field(&[x[0], x[1], x[2]], p);
        out.copy_from_slice(&f);
    }
}

/// Integrates the chain triad from `x_init`.
pub fn integrate(
    p: &ModelParams,
    x_init: &[f64; 3],
    cfg: &SolverConfig,
) -> Result<Trajectory, IntegrateError> {
    p.validate()?;
    let mut samples = Vec::new();
    let out = run(
        triad_field(p),
        x_init,
        cfg,
        |t, x| samples.push(OpinionState { t, x: x.to_vec() }),
        None,
    )?;
    Ok(Trajectory {
        samples,
        params: Some(*p),
        converged: out.converged,
        final_residual: out.residual,
        steps: out.steps,
    })
}

/// Integrates the general `N`-agent field.
pub fn integrate_network(
    agents: &[AgentParams],
    topology: &Topology,
    x0: f64,
    x_init: &[f64],
    cfg: &SolverConfig,
) -> Result<Trajectory, IntegrateError> {
    // validates dimensions once; the hot loop below skips the checks
    rhs_general(x_init, agents, topology, x0)?;
    let n = x_init.len();
    let field = |x: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let a = &agents[i];
            let mut acc = -a.gamma * (x[i] - a.mu) + a.c * (x0 - x[i]);
            for j in 0..n {
                if topology.adjacent(i, j) {
                    acc += topology.weight(i, j) * crate::model::h(x[j] - x[i], a.lambda);
                }
            }
            out[i] = acc;
        }
    };
    let mut samples = Vec::new();
    let out = run(
        field,
        x_init,
        cfg,
        |t, x| samples.push(OpinionState { t, x: x.to_vec() }),
        None,
    )?;
    Ok(Trajectory {
        samples,
        params: None,
        converged: out.converged,
        final_residual: out.residual,
        steps: out.steps,
    })
}

/// Damped Newton on the triad field. `None` when the Jacobian is singular.
pub fn newton_refine(p: &ModelParams, x_start: &[f64; 3]) -> Option<([f64; 3], f64)> {
    let mut x = *x_start;
    let mut f = chain3_field(&x, p);
    let mut res = sup_norm(&f);
    for _ in 0..NEWTON_MAX_ITER {
        if res < NEWTON_TOL {
            break;
        }
        let j = jacobian_chain3(&x, p);
        let dx = solve3(&j, &f)?;
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..=NEWTON_MAX_HALVINGS {
            let trial = [
                x[0] - alpha * dx[0],
                x[1] - alpha * dx[1],
                x[2] - alpha * dx[2],
            ];
            let ft = chain3_field(&trial, p);
            let rt = sup_norm(&ft);
            if rt < res {
                x = trial;
                f = ft;
                res = rt;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Some((x, res))
}

/// Newton from a near-rest state, accepted only if it reaches `eq_tol`
/// within [`NEWTON_HANDOFF`] of the start and the limit is linearly stable.
fn settle_by_newton(p: &ModelParams, x: &[f64; 3], eq_tol: f64) -> Option<([f64; 3], f64)> {
    let (y, r) = newton_refine(p, x)?;
    let stable = || {
        eigenvalues3(&jacobian_chain3(&y, p))
            .iter()
            .all(|z| z.re < 0.0)
    };
    (r < eq_tol && sup_dist(&y, x) < NEWTON_HANDOFF && stable()).then_some((y, r))
}

/// Integrates to rest, polishes with Newton and evaluates linear stability.
///
/// A run that never meets `eq_tol` comes back with `converged = false` and the
/// integrator endpoint; it is the caller's job to treat that as unresolved.
pub fn find_equilibrium(
    p: &ModelParams,
    x_init: &[f64; 3],
    cfg: &SolverConfig,
) -> Result<Equilibrium, IntegrateError> {
    p.validate()?;
    let settle = |x: &[f64]| settle_by_newton(p, &[x[0], x[1], x[2]], cfg.eq_tol).is_some();
    let out = run(triad_field(p), x_init, cfg, |_, _| {}, Some(&settle))?;
    let endpoint = [out.x[0], out.x[1], out.x[2]];

    let (x_star, residual, converged, refined, diagnostic) = if out.converged {
        match newton_refine(p, &endpoint) {
            Some((x, r)) if r <= out.residual => (x, r, true, true, None),
            Some(_) => (
                endpoint,
                out.residual,
                true,
                false,
                Some("newton did not improve".into()),
            ),
            None => (
                endpoint,
                out.residual,
                true,
                false,
                Some("singular jacobian; kept integrator endpoint".into()),
            ),
        }
    } else {
        let unresolved = Some(format!(
            "not at rest by t = {} (residual {:.3e} >= eq_tol {:.1e})",
            out.t, out.residual, cfg.eq_tol
        ));
        // The adaptive controller leaves a noise floor of order rel_tol on the
        // residual; Newton settles such endpoints if it barely moves them onto
        // a stable point.
        match settle_by_newton(p, &endpoint, cfg.eq_tol) {
            Some((x, r)) => (
                x,
                r,
                true,
                true,
                Some(format!(
                    "integrator residual {:.3e} at t = {}; settled by newton",
                    out.residual, out.t
                )),
            ),
            _ => (endpoint, out.residual, false, false, unresolved),
        }
    };
    let eigenvalues = eigenvalues3(&jacobian_chain3(&x_star, p));
    let stable = eigenvalues.iter().all(|z| z.re < 0.0);
    Ok(Equilibrium {
        x_star,
        residual,
        eigenvalues,
        stable,
        converged,
        refined,
        t_end: out.t,
        diagnostic,
    })
}

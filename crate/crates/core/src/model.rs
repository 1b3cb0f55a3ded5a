//! Parameters, state types and vector fields for the leader-driven opinion model.
//!
//! Every agent feels three forces: a restoring pull `-γᵢ(xᵢ - μᵢ)` toward its
//! natural bias, the group influence `Σⱼ κᵢⱼ h(xⱼ - xᵢ)` through the Gaussian
//! damped coupling `h(d) = d·exp(-d²/2λ²)`, and a leadership force
//! `Cᵢ(x₀ - xᵢ)` from a stubborn leader sitting at `x₀`.
//!
//! The bifurcation machinery works on the three-agent chain `1 - 2 - 3` with
//! end-node coupling `κ + ν` and center-node coupling `κ - ν`. The general
//! `N`-agent field is kept for simulation and for cross-checking the chain.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Scalar parameters of the chain triad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kappa: f64,
    pub nu: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub x0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub lambda: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            kappa: 0.0,
            nu: 0.0,
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            x0: 0.0,
            mu1: 0.0,
            mu2: 0.0,
            mu3: 0.0,
            gamma1: 1.0,
            gamma2: 1.0,
            gamma3: 1.0,
            lambda: 1.0,
        }
    }
}

impl ModelParams {
    /// Leaderless triad with symmetric biases `(-Δμ/2, 0, Δμ/2)`.
    pub fn leaderless(delta_mu: f64, kappa: f64, nu: f64) -> Self {
        ModelParams {
            kappa,
            nu,
            ..Default::default()
        }
        .with_delta_mu(delta_mu)
    }

    /// The main leader configuration: node 1 is pulled toward `x0` with
    /// strength `c`, node 3 is pushed away from it, the center node is free.
    pub fn leader_pull_push(delta_mu: f64, kappa: f64, nu: f64, c: f64, x0: f64) -> Self {
        ModelParams {
            kappa,
            nu,
            c1: c,
            c2: 0.0,
            c3: -c,
            x0,
            ..Default::default()
        }
        .with_delta_mu(delta_mu)
    }

    /// Replaces the biases by the canonical symmetric triple `(-Δμ/2, 0, Δμ/2)`.
    pub fn with_delta_mu(mut self, delta_mu: f64) -> Self {
        self.mu1 = -delta_mu / 2.0;
        self.mu2 = 0.0;
        self.mu3 = delta_mu / 2.0;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_leadership(mut self, c: [f64; 3], x0: f64) -> Self {
        self.c1 = c[0];
        self.c2 = c[1];
        self.c3 = c[2];
        self.x0 = x0;
        self
    }

    /// Initial disagreement `μ₃ - μ₁`.
    pub fn delta_mu(&self) -> f64 {
        self.mu3 - self.mu1
    }

    pub fn leadership(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }

    pub fn biases(&self) -> [f64; 3] {
        [self.mu1, self.mu2, self.mu3]
    }

    pub fn gammas(&self) -> [f64; 3] {
        [self.gamma1, self.gamma2, self.gamma3]
    }

    pub fn has_leader(&self) -> bool {
        self.leadership().iter().any(|&c| c != 0.0)
    }

    /// True when the leadership triple has the form `(C, 0, -C)`.
    pub fn is_pull_push(&self) -> bool {
        self.c2 == 0.0 && self.c3 == -self.c1
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let all = [
            self.kappa,
            self.nu,
            self.c1,
            self.c2,
            self.c3,
            self.x0,
            self.mu1,
            self.mu2,
            self.mu3,
            self.gamma1,
            self.gamma2,
            self.gamma3,
            self.lambda,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidParams("non-finite parameter".into()));
        }
        if self.kappa < 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "kappa must be >= 0, got {}",
                self.kappa
            )));
        }
        if self.lambda <= 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "lambda must be > 0, got {}",
                self.lambda
            )));
        }
        if self.gammas().iter().any(|&g| g <= 0.0) {
            return Err(ModelError::InvalidParams("gamma_i must be > 0".into()));
        }
        Ok(())
    }
}

/// Opinion vector at a time instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionState {
    pub t: f64,
    pub x: Vec<f64>,
}

/// Discord `r`, asymmetry `s` and mean opinion of a triad state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsxState {
    pub r: f64,
    pub s: f64,
    pub xbar: f64,
    pub t: f64,
}

/// Weighted directed graph; `weights[i][j]` is the influence of `j` on `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    n: usize,
    adjacency: Vec<f64>,
    weights: Vec<f64>,
}

impl Topology {
    pub fn new(adjacency: Vec<Vec<f64>>, weights: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let n = adjacency.len();
        if weights.len() != n
            || adjacency.iter().any(|row| row.len() != n)
            || weights.iter().any(|row| row.len() != n)
        {
            return Err(ModelError::Dimension(
                "adjacency and weights must both be square and of equal size".into(),
            ));
        }
        for i in 0..n {
            if adjacency[i][i] != 0.0 || weights[i][i] != 0.0 {
                return Err(ModelError::InvalidTopology(format!(
                    "non-zero diagonal at node {i}"
                )));
            }
            for j in 0..n {
                let (a, w) = (adjacency[i][j], weights[i][j]);
                if a != 0.0 && a != 1.0 {
                    return Err(ModelError::InvalidTopology(format!(
                        "adjacency[{i}][{j}] = {a} is not 0/1"
                    )));
                }
                if !w.is_finite() || w < 0.0 {
                    return Err(ModelError::InvalidTopology(format!(
                        "weight[{i}][{j}] = {w} must be finite and >= 0"
                    )));
                }
                if a == 0.0 && w != 0.0 {
                    return Err(ModelError::InvalidTopology(format!(
                        "weight[{i}][{j}] = {w} on a missing edge"
                    )));
                }
            }
        }
        Ok(Topology {
            n,
            adjacency: adjacency.into_iter().flatten().collect(),
            weights: weights.into_iter().flatten().collect(),
        })
    }

    /// Chain `1 - 2 - 3`: end nodes listen to the center with `κ + ν`, the
    /// center listens to both ends with `κ - ν`.
    pub fn chain3(kappa: f64, nu: f64) -> Result<Self, ModelError> {
        let (end, center) = (kappa + nu, kappa - nu);
        Topology::new(
            vec![
                vec![0.0, 1.0, 0.0],
                vec![1.0, 0.0, 1.0],
                vec![0.0, 1.0, 0.0],
            ],
            vec![
                vec![0.0, end, 0.0],
                vec![center, 0.0, center],
                vec![0.0, end, 0.0],
            ],
        )
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j] != 0.0
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }
}

/// Per-agent constants of the general `N`-agent field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentParams {
    pub gamma: f64,
    pub mu: f64,
    pub c: f64,
    pub lambda: f64,
}

/// How `h⁽ⁿ⁾` is evaluated inside the bifurcation formulas.
///
/// `PaperComposite` is the derivative of `Δμ ↦ h(Δμ/2)` with respect to `Δμ`,
/// i.e. `(1/2)ⁿ h⁽ⁿ⁾(Δμ/2)`; this is what the printed closed forms evaluate to.
/// `TrueDerivative` uses `h⁽ⁿ⁾` with respect to its own argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivConvention {
    TrueDerivative,
    PaperComposite,
}

impl Default for DerivConvention {
    fn default() -> Self {
        DerivConvention::PaperComposite
    }
}

impl DerivConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            DerivConvention::TrueDerivative => "true-derivative",
            DerivConvention::PaperComposite => "paper",
        }
    }

    /// `order`-th derivative of `h` at `u` under this convention.
    pub fn derivative(&self, u: f64, lambda: f64, order: u32) -> Result<f64, ModelError> {
        let d = coupling_deriv(u, lambda, order)?;
        Ok(match self {
            DerivConvention::TrueDerivative => d,
            DerivConvention::PaperComposite => d * 0.5f64.powi(order as i32),
        })
    }
}

impl std::fmt::Display for DerivConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DerivConvention {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "true-derivative" | "true" => Ok(DerivConvention::TrueDerivative),
            "paper" | "paper-composite" => Ok(DerivConvention::PaperComposite),
            other => Err(ModelError::InvalidParams(format!(
                "unknown derivative convention {other:?} (expected `paper` or `true-derivative`)"
            ))),
        }
    }
}

#[inline]
pub(crate) fn h(d: f64, lambda: f64) -> f64 {
    d * (-d * d / (2.0 * lambda * lambda)).exp()
}

#[inline]
pub(crate) fn h_prime(d: f64, lambda: f64) -> f64 {
    let v = d / lambda;
    (1.0 - v * v) * (-0.5 * v * v).exp()
}

/// Coupling function `h(d) = d·exp(-d²/(2λ²))`.
pub fn coupling(d: f64, lambda: f64) -> Result<f64, ModelError> {
    check_lambda(lambda)?;
    if !d.is_finite() {
        return Err(ModelError::NonFinite("coupling argument".into()));
    }
    Ok(h(d, lambda))
}

/// Derivative of order 1 to 4 of the coupling function.
///
/// With `v = d/λ`, `h⁽ⁿ⁾(d) = λ¹⁻ⁿ (-1)ⁿ Heₙ₊₁(v) e^{-v²/2}` where `He` are the
/// probabilists' Hermite polynomials.
pub fn coupling_deriv(d: f64, lambda: f64, order: u32) -> Result<f64, ModelError> {
    check_lambda(lambda)?;
    if !d.is_finite() {
        return Err(ModelError::NonFinite("coupling argument".into()));
    }
    let v = d / lambda;
    let v2 = v * v;
    let poly = match order {
        1 => 1.0 - v2,
        2 => v * (v2 - 3.0),
        3 => -(v2 * v2) + 6.0 * v2 - 3.0,
        4 => v * (v2 * v2 - 10.0 * v2 + 15.0),
        _ => return Err(ModelError::UnsupportedOrder(order)),
    };
    Ok(lambda.powi(1 - order as i32) * poly * (-0.5 * v2).exp())
}

/// The printed closed forms for `h⁽ⁿ⁾(Δμ/2)` at `λ = 1`, orders 1, 3 and 4.
pub fn paper_deriv(delta_mu: f64, order: u32) -> Result<f64, ModelError> {
    if !delta_mu.is_finite() {
        return Err(ModelError::NonFinite("delta_mu".into()));
    }
    let m = delta_mu;
    let m2 = m * m;
    let e = (-m2 / 8.0).exp();
    match order {
        1 => Ok(0.5 * (1.0 - m2 / 4.0) * e),
        3 => Ok((-6.0 + 3.0 * m2 - m2 * m2 / 8.0) * e / 16.0),
        4 => Ok((30.0 * m - 5.0 * m * m2 + m2 * m2 * m / 8.0) * e / 64.0),
        _ => Err(ModelError::UnsupportedOrder(order)),
    }
}

fn check_lambda(lambda: f64) -> Result<(), ModelError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ModelError::InvalidParams(format!(
            "lambda must be finite and > 0, got {lambda}"
        )));
    }
    Ok(())
}

fn check_finite(x: &[f64]) -> Result<(), ModelError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ModelError::NonFinite(format!("state {x:?}")))
    }
}

/// One Friedkin–Johnsen update `xᵢ ← aᵢ Σⱼ wᵢⱼ xⱼ + (1 - aᵢ) xᵢ(0)`.
pub fn fj_step(
    x: &[f64],
    x_init: &[f64],
    sensitivities: &[f64],
    weights: &[Vec<f64>],
) -> Result<Vec<f64>, ModelError> {
    let n = x.len();
    if x_init.len() != n || sensitivities.len() != n || weights.len() != n {
        return Err(ModelError::Dimension(format!(
            "state has {n} entries but initial/sensitivity/weight sizes are {}/{}/{}",
            x_init.len(),
            sensitivities.len(),
            weights.len()
        )));
    }
    if let Some(row) = weights.iter().position(|r| r.len() != n) {
        return Err(ModelError::Dimension(format!(
            "weight row {row} has {} entries, expected {n}",
            weights[row].len()
        )));
    }
    if let Some(&a) = sensitivities.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(ModelError::InvalidParams(format!(
            "sensitivity {a} outside [0, 1]"
        )));
    }
    Ok(weights
        .iter()
        .zip(sensitivities)
        .zip(x_init)
        .map(|((row, &a), &xi0)| {
            let pooled: f64 = row.iter().zip(x).map(|(w, xj)| w * xj).sum();
            a * pooled + (1.0 - a) * xi0
        })
        .collect())
}

/// General `N`-agent field `dxᵢ/dt = -γᵢ(xᵢ-μᵢ) + Σⱼ κᵢⱼ h(xⱼ-xᵢ) + Cᵢ(x₀-xᵢ)`.
pub fn rhs_general(
    x: &[f64],
    agents: &[AgentParams],
    topology: &Topology,
    x0: f64,
) -> Result<Vec<f64>, ModelError> {
    let n = x.len();
    if agents.len() != n || topology.len() != n {
        return Err(ModelError::Dimension(format!(
            "state has {n} entries, {} agents, topology of size {}",
            agents.len(),
            topology.len()
        )));
    }
    check_finite(x)?;
    if !x0.is_finite() {
        return Err(ModelError::NonFinite("leader opinion".into()));
    }
    for a in agents {
        check_lambda(a.lambda)?;
    }
    Ok((0..n)
        .map(|i| {
            let a = &agents[i];
            let influence: f64 = (0..n)
                .filter(|&j| topology.adjacent(i, j))
                .map(|j| topology.weight(i, j) * h(x[j] - x[i], a.lambda))
                .sum();
            -a.gamma * (x[i] - a.mu) + influence + a.c * (x0 - x[i])
        })
        .collect())
}

/// Chain triad field without input checks; used on hot paths.
#[inline]
pub(crate) fn chain3_field(x: &[f64; 3], p: &ModelParams) -> [f64; 3] {
    let l = p.lambda;
    let end = p.kappa + p.nu;
    let center = p.kappa - p.nu;
    [
        -p.gamma1 * (x[0] - p.mu1) + end * h(x[1] - x[0], l) + p.c1 * (p.x0 - x[0]),
        -p.gamma2 * (x[1] - p.mu2)
            + center * (h(x[0] - x[1], l) + h(x[2] - x[1], l))
            + p.c2 * (p.x0 - x[1]),
        -p.gamma3 * (x[2] - p.mu3) + end * h(x[1] - x[2], l) + p.c3 * (p.x0 - x[2]),
    ]
}

/// Right-hand side of the chain triad.
pub fn rhs_chain3(x: &[f64; 3], p: &ModelParams) -> Result<[f64; 3], ModelError> {
    check_finite(x)?;
    Ok(chain3_field(x, p))
}

/// Analytic Jacobian of [`rhs_chain3`].
pub fn jacobian_chain3(x: &[f64; 3], p: &ModelParams) -> [[f64; 3]; 3] {
    let l = p.lambda;
    let end = p.kappa + p.nu;
    let center = p.kappa - p.nu;
    let d21 = end * h_prime(x[1] - x[0], l);
    let d23 = end * h_prime(x[1] - x[2], l);
    let d12 = center * h_prime(x[0] - x[1], l);
    let d32 = center * h_prime(x[2] - x[1], l);
    [
        [-p.gamma1 - d21 - p.c1, d21, 0.0],
        [d12, -p.gamma2 - d12 - d32 - p.c2, d32],
        [0.0, d23, -p.gamma3 - d23 - p.c3],
    ]
}

pub fn to_rsx(x: &[f64; 3]) -> RsxState {
    RsxState {
        r: x[2] - x[0],
        s: x[2] - 2.0 * x[1] + x[0],
        xbar: (x[0] + x[1] + x[2]) / 3.0,
        t: 0.0,
    }
}

pub fn from_rsx(r: f64, s: f64, xbar: f64) -> [f64; 3] {
    [
        xbar + s / 6.0 - r / 2.0,
        xbar - s / 3.0,
        xbar + s / 6.0 + r / 2.0,
    ]
}

/// Field of the `(r, s, x̄)` coordinates under a `(C, 0, -C)` leader.
///
/// Requires unit self-bias strengths. A non-zero center bias `μ₂` is carried
/// through (`-2μ₂` in `ds`, `μ₂/3` in `dx̄`).
pub fn rsx_rhs(state: &RsxState, p: &ModelParams) -> Result<[f64; 3], ModelError> {
    if !p.is_pull_push() {
        return Err(ModelError::LeadershipPattern { c: p.leadership() });
    }
    if p.gammas() != [1.0; 3] {
        return Err(ModelError::InvalidParams(
            "the (r, s, xbar) field assumes gamma_i = 1".into(),
        ));
    }
    check_finite(&[state.r, state.s, state.xbar])?;
    let RsxState { r, s, xbar, .. } = *state;
    let c = p.c1;
    let l = p.lambda;
    let hp = h((r + s) / 2.0, l);
    let hm = h((r - s) / 2.0, l);
    let dr = -r + 2.0 * c * xbar + c / 3.0 * s - 2.0 * c * p.x0 + p.mu3
        - p.mu1
        - (p.kappa + p.nu) * (hp + hm);
    let ds = -s + c * r + p.mu3 + p.mu1 - 2.0 * p.mu2 - (3.0 * p.kappa - p.nu) * (hp - hm);
    let dxbar = -xbar + c / 3.0 * r + (p.mu3 + p.mu1 + p.mu2) / 3.0 - 2.0 * p.nu / 3.0 * (hp - hm);
    Ok([dr, ds, dxbar])
}

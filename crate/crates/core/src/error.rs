use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("derivative order {0} is not supported")]
    UnsupportedOrder(u32),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("leadership triple {c:?} is not of the form (C, 0, -C)")]
    LeadershipPattern { c: [f64; 3] },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("state blew up at t = {t}: {x:?}")]
    BlowUp { t: f64, x: [f64; 3] },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BifurcationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{what} is singular at this point ({detail})")]
    Singular { what: &'static str, detail: String },
    #[error("not a cubic: leading coefficient is zero")]
    NotCubic,
    #[error("delta_mu must be > 0, got {0}")]
    NonPositiveDeltaMu(f64),
    #[error("no root of the kappa1 condition for kappa in [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("no boundary curve could be evaluated on the requested grid")]
    EmptyCurves,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegimeError {
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no majority-rule equilibrium found at delta_mu = {delta_mu} for kappa in {probed:?}")]
    NoMajorityRule { delta_mu: f64, probed: Vec<f64> },
    #[error("unresolved equilibrium at kappa = {kappa}: {detail}")]
    Unresolved { kappa: f64, detail: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

//! Opinion dynamics of a three-agent chain under a leadership force.
//!
//! * [`model`]: parameters, coupling function, vector fields and Jacobian.
//! * [`integrate`]: ODE integration, equilibrium refinement, linear stability.
//! * [`bifurcation`]: discord expansion, imperfect-pitchfork normal form and
//!   the analytic boundaries κ1, κ2, κ3.
//! * [`regimes`]: SHD / MR / SLD classification, the simulated boundary κ4,
//!   stability diagrams and figure presets.

pub mod bifurcation;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod model;
pub mod regimes;

pub use error::{BifurcationError, IntegrateError, ModelError, RegimeError};
pub use integrate::{find_equilibrium, integrate, Equilibrium, Method, SolverConfig, Trajectory};
pub use model::{DerivConvention, ModelParams, OpinionState, RsxState, Topology};
pub use regimes::{classify, RegimeKind, RegimeLabel, Thresholds};

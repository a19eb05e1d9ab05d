//! ρ-trigonometric convexity: sine-inequality sweeps, defect measures,
//! homogeneous extensions, Lipschitz bounds, polar Riesz densities and
//! complementability thresholds.

mod complement;
mod convexity;
mod defect;
mod extension;
mod profile;

use thiserror::Error;

use crate::fields::{EvalError, ParseError};

pub use complement::{
    complementable, q_threshold, verify_bullet_conditions, Bullet, BulletReport, ComplementReport, QThreshold,
};
pub use convexity::{is_rho_trig_convex, ConvexityReport, Triple, DEFAULT_TOL, KINK_TOL, MAX_TRIPLES};
pub use defect::{defect_measure, DefectMeasure, MIN_SAMPLES};
pub use extension::{extend, lipschitz_bound_check, riesz_density_polar, LipschitzReport, PolarDensity};
pub use profile::{PeriodicProfile, DEFAULT_SAMPLES, NAMED_PROFILES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TcError {
    #[error("{n} samples, at least {min} required")]
    TooFewSamples { n: usize, min: usize },
    #[error("profiles have different sample counts ({0} vs {1})")]
    SampleMismatch(usize, usize),
    #[error("atom classification near θ = {angle} is unstable under refinement (mass ratio {ratio})")]
    ResolutionInsufficient { angle: f64, ratio: f64 },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("profile evaluation failed at θ = {theta}: {err}")]
    Eval { theta: f64, err: EvalError },
    #[error("rho must be positive and finite, got {0}")]
    InvalidRho(f64),
    #[error("threshold denominator ρ²·min g − c = {0} is not positive")]
    Denominator(f64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

//! Numerical certificates for the inequality chains relating zero sets,
//! weights and their lifts, driven by witness fields or scenario files.
//!
//! Existence of witnesses is never decided here: every check takes the
//! witness as input and certifies the inequalities it must satisfy.

mod nodes;
mod props;
mod report;
mod scenario;
mod theorem1;
mod theorem2;

use thiserror::Error;

use crate::averaging::AverageError;
use crate::fields::FieldError;
use crate::lifting::LiftError;
use crate::trigconvex::TcError;
use crate::zeros::ZerosError;

pub use props::{check_prop1_bound, check_prop2_bound};
pub use report::{CheckReport, MarginMap, Stage, Table};
pub use scenario::{resolve_field, resolve_profile, run_scenario, CheckKind, Scenario, ScenarioReport};
pub use theorem1::{check_converse_inequality, check_forward};
pub use theorem2::{check_theorem2_measure, SECTOR_ABS_FLOOR};

use crate::averaging::QuadratureSpec;
use crate::zeros::SubharmonicityOptions;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("node {z} is indeterminate: {msg}")]
    Indeterminate { z: num_complex::Complex64, msg: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Average(#[from] AverageError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Zeros(#[from] ZerosError),
    #[error(transparent)]
    Tc(#[from] TcError),
}

/// Tolerances and numerical knobs shared by the checks.
#[derive(Debug, Clone)]
pub struct CheckOptions {
    /// Pointwise inequalities hold when the deficit is at most `const + tol`.
    pub tol: f64,
    /// Cellwise tolerance for measure comparisons.
    pub measure_tol: f64,
    /// Fixed additive constant; `None` solves for the smallest admissible one.
    pub constant: Option<f64>,
    /// Partition cells for measure comparisons, in grid steps.
    pub cell_stride: usize,
    pub quadrature: QuadratureSpec,
    pub subharmonicity: SubharmonicityOptions,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            tol: 1e-9,
            measure_tol: 1e-3,
            constant: None,
            cell_stride: 8,
            quadrature: QuadratureSpec::default(),
            subharmonicity: SubharmonicityOptions::default(),
        }
    }
}

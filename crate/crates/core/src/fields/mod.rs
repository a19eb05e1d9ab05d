//! Domains, weight fields, grids, zero sequences and discrete measures.

mod domain;
pub mod expr;
mod extreal;
mod field;
mod grid;
pub mod io;
mod measure;
mod sequence;

use num_complex::Complex64;
use thiserror::Error;

pub use domain::{Domain, Region, Sector, Shape};
pub use expr::{EvalError, ParseError};
pub use extreal::ExtReal;
pub use field::{parse_field, Feature, GridSamples, LogTerm, Provenance, ScalarField};
pub use grid::GridSpec;
pub use measure::{measure_geq, DiscreteMeasure, MeasureComparison, CELLWISE_NOTE};
pub use sequence::{counting_measure, ZeroSequence};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("point {0} lies outside the domain")]
    OutsideDomain(Complex64),
    #[error("no grid data around {0}")]
    NoData(Complex64),
    #[error("evaluation failed at {z}: {err}")]
    Eval { z: Complex64, err: EvalError },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("incompatible domains: {0}")]
    DomainMismatch(String),
    #[error("invalid zero sequence: {0}")]
    InvalidSequence(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("{0}")]
    Io(String),
}

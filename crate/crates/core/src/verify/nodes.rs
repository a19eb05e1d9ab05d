//! Node scans for pointwise inequalities `lhs ≤ rhs + const`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::report::{MarginMap, Stage};
use super::VerifyError;
use crate::fields::{Domain, EvalError, FieldError, GridSpec, ScalarField};

pub(crate) fn fmt_z(z: Complex64) -> String {
    format!("({}, {})", z.re, z.im)
}

/// Value of `f` at `z` in the extended reals. Logarithmic terms sitting on
/// `z` are resolved by their net coefficient, so `ln|z| − ln|z|` is finite
/// at the origin while `2ln|z| − ln|z|` is `−∞`.
pub(crate) fn node_value(f: &ScalarField, z: Complex64) -> Result<f64, VerifyError> {
    let c = f.log_coeff_at(z);
    if c > 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if c < 0.0 {
        return Ok(f64::INFINITY);
    }
    match f.raw(z) {
        Ok(v) => Ok(v),
        Err(FieldError::Eval { err: EvalError::PlusInfinity, .. }) => Ok(f64::INFINITY),
        Err(FieldError::Eval { err: EvalError::Undefined, .. }) => {
            // singular terms cancelled in the merge: the regular value is the limit
            let v = f.value_without_logs_at(z, z)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(VerifyError::Indeterminate { z, msg: "opposite infinities do not cancel".into() })
            }
        }
        Err(e) => Err(e.into()),
    }
}

/// Deficits over the active nodes, `NaN` elsewhere, in grid order.
pub(crate) struct Scan {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl Scan {
    pub fn run<F>(grid: &GridSpec, domain: Domain, f: F) -> Result<Scan, VerifyError>
    where
        F: Fn(Complex64) -> Result<f64, VerifyError> + Sync,
    {
        let values: Vec<Result<f64, VerifyError>> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let z = grid.node_at(k);
                if domain.contains(z) {
                    f(z)
                } else {
                    Ok(f64::NAN)
                }
            })
            .collect();
        Ok(Scan { grid: *grid, values: values.into_iter().collect::<Result<_, _>>()? })
    }

    /// Largest deficit and its node; `−∞` when every active node is `−∞`.
    pub fn max(&self) -> (f64, Option<Complex64>) {
        let mut best = (f64::NEG_INFINITY, None);
        for (k, v) in self.values.iter().enumerate() {
            if !v.is_nan() && (*v > best.0 || best.1.is_none()) {
                best = (*v, Some(self.grid.node_at(k)));
            }
        }
        best
    }

    /// Smallest constant making every finite node admissible; `+∞` nodes
    /// stay violations whatever the constant.
    pub fn solve_constant(&self) -> f64 {
        self.values.iter().filter(|v| v.is_finite()).cloned().fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v)))).unwrap_or(0.0)
    }

    /// Stage verdict for `deficit ≤ constant + tol`.
    pub fn stage(&self, name: &'static str, constant: f64, tol: f64) -> Stage {
        let (max, at) = self.max();
        let margin = if max == f64::NEG_INFINITY { f64::INFINITY } else { constant - max };
        let bad: Vec<usize> =
            (0..self.values.len()).filter(|&k| self.values[k] == f64::INFINITY || self.values[k] > constant + tol).collect();
        let mut stage = Stage::new(name, bad.is_empty(), margin).witness(at.map(fmt_z));
        stage.map = Some(MarginMap { grid: self.grid, values: self.values.iter().map(|v| constant - v).collect() });
        let active = self.values.iter().filter(|v| !v.is_nan()).count();
        stage = stage.detail(format!("{active} nodes"));
        if let Some(&k) = bad.first() {
            stage = stage.detail(format!(
                "{} violating nodes; first {} with deficit {} over const {constant}",
                bad.len(),
                fmt_z(self.grid.node_at(k)),
                self.values[k]
            ));
        }
        stage
    }
}

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::TcError;
use crate::fields::expr::{self, BinOp, EvalError, Expr, VarSet};

/// Default sample count for profiles built from expressions.
pub const DEFAULT_SAMPLES: usize = 1024;

/// Named profiles: `(name, expression in theta, description)`.
pub const NAMED_PROFILES: &[(&str, &str, &str)] = &[
    ("cos", "cos(theta)", "cos θ"),
    ("sin", "sin(theta)", "sin θ"),
    ("abssin", "abs(sin(theta))", "|sin θ|, kinks at 0 and π"),
    ("abscos", "abs(cos(theta))", "|cos θ|, kinks at ±π/2"),
    ("negabssin", "-abs(sin(theta))", "−|sin θ|"),
    ("cosplus", "max(cos(theta), 0)", "max(cos θ, 0)"),
    ("cos2", "cos(2*theta)", "cos 2θ"),
    ("2+0.5cos", "2 + 0.5*cos(theta)", "2 + cos θ / 2"),
    ("1+0.2cos3", "1 + 0.2*cos(3*theta)", "1 + cos 3θ / 5"),
    ("zero", "0", "≡ 0"),
];

/// 2π-periodic function sampled at `θₖ = 2πk/n`. When built from an
/// expression the source is kept: extensions and refinement evaluate it
/// exactly, while the samples drive all discrete tests.
#[derive(Clone)]
pub struct PeriodicProfile {
    samples: Arc<Vec<f64>>,
    source: Option<Arc<Expr>>,
    label: String,
    kinks: Arc<Vec<f64>>,
}

impl fmt::Debug for PeriodicProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicProfile")
            .field("label", &self.label)
            .field("n", &self.n())
            .field("analytic", &self.source.is_some())
            .finish()
    }
}

impl PeriodicProfile {
    pub fn from_samples(samples: Vec<f64>, label: impl Into<String>) -> Result<Self, TcError> {
        if samples.len() < 4 {
            return Err(TcError::TooFewSamples { n: samples.len(), min: 4 });
        }
        if let Some(k) = samples.iter().position(|v| !v.is_finite()) {
            return Err(TcError::Eval { theta: TAU * k as f64 / samples.len() as f64, err: EvalError::Undefined });
        }
        let kinks = super::defect::kink_angles(&samples, None);
        Ok(PeriodicProfile { samples: Arc::new(samples), source: None, label: label.into(), kinks: Arc::new(kinks) })
    }

    pub fn from_expr(e: Expr, n: usize, label: impl Into<String>) -> Result<Self, TcError> {
        if n < 4 {
            return Err(TcError::TooFewSamples { n, min: 4 });
        }
        let samples = sample_expr(&e, n, 0.0)?;
        let half = sample_expr(&e, n, 0.5 * TAU / n as f64)?;
        let kinks = super::defect::kink_angles(&samples, Some(&half));
        Ok(PeriodicProfile {
            samples: Arc::new(samples),
            source: Some(Arc::new(e)),
            label: label.into(),
            kinks: Arc::new(kinks),
        })
    }

    /// Expression in `theta` (alias `t`).
    pub fn parse(src: &str, n: usize) -> Result<Self, TcError> {
        let e = expr::parse_real(src, VarSet::Angle)?;
        PeriodicProfile::from_expr(e, n, src.trim())
    }

    pub fn constant(c: f64, n: usize) -> Self {
        PeriodicProfile::from_expr(Expr::Num(c), n, format!("const:{c}")).expect("constant profile")
    }

    /// `const:R` or an entry of [`NAMED_PROFILES`].
    pub fn named(name: &str, n: usize) -> Option<Self> {
        if let Some(v) = name.strip_prefix("const:") {
            return v.trim().parse::<f64>().ok().filter(|c| c.is_finite()).map(|c| PeriodicProfile::constant(c, n));
        }
        let (_, src, _) = NAMED_PROFILES.iter().find(|p| p.0 == name)?;
        let e = expr::parse_real(src, VarSet::Angle).expect("catalog expressions parse");
        Some(PeriodicProfile::from_expr(e, n, name).expect("catalog expressions are finite"))
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn step(&self) -> f64 {
        TAU / self.n() as f64
    }

    pub fn theta(&self, k: usize) -> f64 {
        TAU * k as f64 / self.n() as f64
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn source(&self) -> Option<&Expr> {
        self.source.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Sample with periodic index.
    pub fn at(&self, k: isize) -> f64 {
        self.samples[k.rem_euclid(self.n() as isize) as usize]
    }

    /// Periodic linear interpolation of the samples.
    pub fn value(&self, theta: f64) -> f64 {
        let x = theta.rem_euclid(TAU) / self.step();
        let k = x.floor();
        let t = x - k;
        let k = k as isize;
        (1.0 - t) * self.at(k) + t * self.at(k + 1)
    }

    /// The source expression when there is one, else [`value`](Self::value).
    pub fn value_exact(&self, theta: f64) -> Result<f64, EvalError> {
        match &self.source {
            Some(e) => e.eval_real(Complex64::new(0.0, 0.0), theta),
            None => Ok(self.value(theta)),
        }
    }

    /// Angles where the profile has a derivative jump.
    pub fn kink_angles(&self) -> Vec<f64> {
        self.kinks.to_vec()
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// The same profile at twice the resolution; needs a source.
    pub fn refined(&self) -> Option<Self> {
        let e = self.source.as_deref()?;
        PeriodicProfile::from_expr(e.clone(), 2 * self.n(), self.label.clone()).ok()
    }

    /// Samples of the source (or of the interpolant) shifted by `offset`.
    pub(crate) fn shifted_samples(&self, offset: f64) -> Result<Vec<f64>, TcError> {
        match &self.source {
            Some(e) => sample_expr(e, self.n(), offset),
            None => Ok((0..self.n()).map(|k| self.value(self.theta(k) + offset)).collect()),
        }
    }

    /// `a·self + b·other`; the source survives when both have one.
    pub fn combine(&self, a: f64, other: &PeriodicProfile, b: f64) -> Result<Self, TcError> {
        if self.n() != other.n() {
            return Err(TcError::SampleMismatch(self.n(), other.n()));
        }
        let label = format!("{a}*({}) + {b}*({})", self.label, other.label);
        match (&self.source, &other.source) {
            (Some(x), Some(y)) => {
                let e = Expr::Bin(
                    BinOp::Add,
                    Box::new(Expr::Bin(BinOp::Mul, Box::new(Expr::Num(a)), Box::new((**x).clone()))),
                    Box::new(Expr::Bin(BinOp::Mul, Box::new(Expr::Num(b)), Box::new((**y).clone()))),
                );
                PeriodicProfile::from_expr(e, self.n(), label)
            }
            _ => {
                let s = self.samples.iter().zip(other.samples.iter()).map(|(x, y)| a * x + b * y).collect();
                PeriodicProfile::from_samples(s, label)
            }
        }
    }

    pub fn minus(&self, other: &PeriodicProfile) -> Result<Self, TcError> {
        Ok(self.combine(1.0, other, -1.0)?.with_label(format!("{} - ({})", self.label, other.label)))
    }

    pub fn scaled(&self, q: f64) -> Self {
        let zero = PeriodicProfile::constant(0.0, self.n());
        self.combine(q, &zero, 0.0).expect("same sample count").with_label(format!("{q}*({})", self.label))
    }
}

fn sample_expr(e: &Expr, n: usize, offset: f64) -> Result<Vec<f64>, TcError> {
    (0..n)
        .map(|k| {
            let theta = TAU * k as f64 / n as f64 + offset;
            match e.eval_real(Complex64::new(0.0, 0.0), theta) {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err(TcError::Eval { theta, err: EvalError::Undefined }),
                Err(err) => Err(TcError::Eval { theta, err }),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_periodic() {
        let p = PeriodicProfile::named("cos", 64).unwrap();
        assert!((p.value(0.0) - 1.0).abs() < 1e-15);
        assert!((p.value(TAU) - 1.0).abs() < 1e-15);
        assert!((p.value(-0.5 * p.step()) - p.value(TAU - 0.5 * p.step())).abs() < 1e-15);
        assert!((p.value_exact(1.0).unwrap() - 1f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn named_constants() {
        let p = PeriodicProfile::named("const:-1", 64).unwrap();
        assert!(p.samples().iter().all(|v| *v == -1.0));
        assert!(PeriodicProfile::named("const:x", 64).is_none());
        assert!(PeriodicProfile::named("nosuch", 64).is_none());
    }

    #[test]
    fn kinks_of_abssin_are_found() {
        let p = PeriodicProfile::named("abssin", 256).unwrap();
        let k = p.kink_angles();
        assert_eq!(k.len(), 2);
        assert!(k[0].abs() < 1e-9);
        assert!((k[1] - std::f64::consts::PI).abs() < 1e-9);
        assert!(PeriodicProfile::named("cos", 256).unwrap().kink_angles().is_empty());
    }

    #[test]
    fn off_node_kinks_are_located() {
        let p = PeriodicProfile::parse("abs(sin(theta - 0.01))", 256).unwrap();
        let k = p.kink_angles();
        assert_eq!(k.len(), 2);
        assert!((k[0] - 0.01).abs() < 1e-4, "{k:?}");
    }

    #[test]
    fn combination_keeps_source() {
        let a = PeriodicProfile::named("cos", 64).unwrap();
        let b = PeriodicProfile::named("abssin", 64).unwrap();
        let c = a.combine(1.0, &b, 1.0).unwrap();
        assert!(c.source().is_some());
        assert!((c.value_exact(0.3).unwrap() - (0.3f64.cos() + 0.3f64.sin())).abs() < 1e-15);
        assert!(a.combine(1.0, &PeriodicProfile::constant(1.0, 32), 1.0).is_err());
    }
}

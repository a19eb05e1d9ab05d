//! Gauges `d(z)` and the weight lifts
//! `N↑(z) = B(z, d(z); N) + ln(1/d(z))` (bounded domains) and
//! `N↑(z) = B(z, (1+|z|)^{−P}; N)` (whole plane).

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::averaging::{average_field, AverageError, QuadratureSpec};
use crate::fields::{Domain, FieldError, GridSamples, GridSpec, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gauge {
    /// `d(z) = min(1, dist(z, ∂D)) / 2`.
    HalfDistance,
    /// `d(z) = (1 + |z|)^{−P}`.
    PlanePower(f64),
}

impl Default for Gauge {
    fn default() -> Self {
        Gauge::HalfDistance
    }
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gauge::HalfDistance => write!(f, "half"),
            Gauge::PlanePower(p) => write!(f, "plane:{p}"),
        }
    }
}

impl std::str::FromStr for Gauge {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "half" {
            return Ok(Gauge::HalfDistance);
        }
        let p = s
            .strip_prefix("plane:")
            .ok_or_else(|| format!("unknown gauge `{s}` (half | plane:P)"))?
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("bad P: {e}"))?;
        if p > 0.0 && p.is_finite() {
            Ok(Gauge::PlanePower(p))
        } else {
            Err(format!("P must be positive, got {p}"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LiftError {
    #[error("point {0} lies outside the domain")]
    OutsideDomain(Complex64),
    #[error("gauge {gauge} is not admissible on {domain}")]
    Inadmissible { gauge: Gauge, domain: Domain },
    #[error("P must be positive, got {0}")]
    InvalidPower(f64),
    #[error(transparent)]
    Average(#[from] AverageError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub fn gauge_value(g: Gauge, domain: Domain, z: Complex64) -> Result<f64, LiftError> {
    if !domain.contains(z) {
        return Err(LiftError::OutsideDomain(z));
    }
    match g {
        Gauge::HalfDistance => {
            if !domain.is_bounded() {
                return Err(LiftError::Inadmissible { gauge: g, domain });
            }
            Ok(0.5 * domain.boundary_distance(z).min(1.0))
        }
        Gauge::PlanePower(p) => {
            if !(p > 0.0 && p.is_finite()) {
                return Err(LiftError::InvalidPower(p));
            }
            let d = (1.0 + z.norm()).powf(-p);
            if d >= domain.boundary_distance(z) {
                return Err(LiftError::Inadmissible { gauge: g, domain });
            }
            Ok(d)
        }
    }
}

/// Per-node radii for a lift; `NaN` off the domain.
fn radii(g: Gauge, domain: Domain, grid: &GridSpec) -> Result<Vec<f64>, LiftError> {
    grid.nodes()
        .map(|z| if domain.contains(z) { gauge_value(g, domain, z) } else { Ok(f64::NAN) })
        .collect()
}

fn lift(
    n: &ScalarField,
    domain: Domain,
    g: Gauge,
    grid: &GridSpec,
    q: &QuadratureSpec,
    log_term: bool,
) -> Result<ScalarField, LiftError> {
    let f = n.with_domain(domain);
    let r = radii(g, domain, grid)?;
    let avg = average_field(&f, |z| gauge_value(g, domain, z).unwrap_or(f64::NAN), grid, q)?;
    let base = avg.grid_samples().expect("average_field yields grid samples");
    let values = base
        .values
        .iter()
        .zip(&r)
        .map(|(v, d)| if log_term { v - d.ln() } else { *v })
        .collect();
    Ok(ScalarField::from_grid(GridSamples::new(*grid, values)?, domain))
}

/// `B(z, d(z); N) + ln(1/d(z))` on the grid nodes inside a bounded domain.
pub fn lift_bounded(
    n: &ScalarField,
    domain: Domain,
    g: Gauge,
    grid: &GridSpec,
    q: &QuadratureSpec,
) -> Result<ScalarField, LiftError> {
    if !domain.is_bounded() {
        return Err(LiftError::Inadmissible { gauge: g, domain });
    }
    lift(n, domain, g, grid, q, true)
}

/// `B(z, (1+|z|)^{−P}; N)` on the whole plane; no logarithmic term.
pub fn lift_plane(n: &ScalarField, p: f64, grid: &GridSpec, q: &QuadratureSpec) -> Result<ScalarField, LiftError> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(LiftError::InvalidPower(p));
    }
    lift(n, Domain::WholePlane, Gauge::PlanePower(p), grid, q, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::parse_field;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gauge_examples() {
        assert_eq!(gauge_value(Gauge::HalfDistance, Domain::UnitDisk, c(0.0, 0.0)).unwrap(), 0.5);
        assert!((gauge_value(Gauge::HalfDistance, Domain::UnitDisk, c(0.9, 0.0)).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(gauge_value(Gauge::PlanePower(1.0), Domain::WholePlane, c(3.0, 0.0)).unwrap(), 0.25);
        assert!(gauge_value(Gauge::HalfDistance, Domain::UnitDisk, c(1.0, 0.0)).is_err());
        assert!(gauge_value(Gauge::HalfDistance, Domain::WholePlane, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn bounded_lift_examples() {
        let grid = GridSpec::new(-0.5, 0.5, -0.5, 0.5, 11, 11).unwrap();
        let q = QuadratureSpec::default();
        let at = |f: &ScalarField, z| f.grid_samples().unwrap().interpolate(z).unwrap();
        let zero = parse_field("0", Domain::UnitDisk).unwrap();
        let l = lift_bounded(&zero, Domain::UnitDisk, Gauge::HalfDistance, &grid, &q).unwrap();
        assert!((at(&l, c(0.0, 0.0)) - 2f64.ln()).abs() < 1e-12);
        let re = parse_field("re(z)", Domain::UnitDisk).unwrap();
        let l = lift_bounded(&re, Domain::UnitDisk, Gauge::HalfDistance, &grid, &q).unwrap();
        assert!((at(&l, c(0.3, 0.0)) - (0.3 + (1.0f64 / 0.35).ln())).abs() < 1e-12);
        let lg = parse_field("log(abs(z))", Domain::UnitDisk).unwrap();
        let l = lift_bounded(&lg, Domain::UnitDisk, Gauge::HalfDistance, &grid, &q).unwrap();
        assert!((at(&l, c(0.0, 0.0)) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn plane_lift_examples() {
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 5, 5).unwrap();
        let q = QuadratureSpec::default();
        let sq = parse_field("pow(abs(z),2)", Domain::WholePlane).unwrap();
        let l = lift_plane(&sq, 1.0, &grid, &q).unwrap();
        assert!((l.grid_samples().unwrap().value(2, 2) - 0.5).abs() < 1e-12);
        assert!(lift_plane(&sq, 0.0, &grid, &q).is_err());
    }

    #[test]
    fn gauge_parses() {
        assert_eq!("half".parse::<Gauge>().unwrap(), Gauge::HalfDistance);
        assert_eq!("plane:2".parse::<Gauge>().unwrap(), Gauge::PlanePower(2.0));
        assert!("plane:-1".parse::<Gauge>().is_err());
    }
}

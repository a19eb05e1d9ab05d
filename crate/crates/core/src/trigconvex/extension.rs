use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{defect_measure, is_rho_trig_convex, DefectMeasure, PeriodicProfile, TcError, DEFAULT_TOL};
use crate::fields::ScalarField;

/// `H(re^{iθ}) = h(θ) r^ρ`.
pub fn extend(h: &PeriodicProfile, rho: f64) -> ScalarField {
    ScalarField::homogeneous(h.clone(), rho)
}

/// Maximum of `h`: samples plus an 8× denser pass over the source.
pub(crate) fn profile_max(h: &PeriodicProfile) -> f64 {
    dense_values(h).fold(h.max(), f64::max)
}

pub(crate) fn profile_min(h: &PeriodicProfile) -> f64 {
    dense_values(h).fold(h.min(), f64::min)
}

fn dense_values(h: &PeriodicProfile) -> impl Iterator<Item = f64> + '_ {
    let m = if h.source().is_some() { 8 * h.n() } else { 0 };
    (0..m).filter_map(move |k| h.value_exact(TAU * k as f64 / m as f64).ok())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzReport {
    pub plane_pairs: usize,
    pub angle_pairs: usize,
    pub violations: usize,
    /// Smallest `bound − |difference|` over all pairs.
    pub margin: f64,
    pub worst_plane: Option<(Complex64, Complex64)>,
    pub worst_angle: Option<(f64, f64)>,
}

/// Checks the plane bound
/// `|H(z)−H(w)| ≤ ρ·max h·max(|z|,|w|)^{ρ−1}·|z−w|` and the angular bound
/// `|h(θ)−h(ϑ)| ≤ ρ·max h·|θ−ϑ|` on the given pairs.
pub fn lipschitz_bound_check(
    h: &PeriodicProfile,
    rho: f64,
    plane_pairs: &[(Complex64, Complex64)],
    angle_pairs: &[(f64, f64)],
    tol: f64,
) -> Result<LipschitzReport, TcError> {
    let conv = is_rho_trig_convex(h, rho, DEFAULT_TOL)?;
    if !conv.holds {
        return Err(TcError::PreconditionViolated(format!(
            "profile `{}` is not {rho}-trigonometrically convex (margin {:e})",
            h.label(),
            conv.margin
        )));
    }
    let hmax = profile_max(h);
    let ext = extend(h, rho);
    let eval = |z: Complex64| {
        ext.raw(z).map_err(|e| TcError::PreconditionViolated(format!("extension not finite at {z}: {e}")))
    };
    let mut report = LipschitzReport {
        plane_pairs: plane_pairs.len(),
        angle_pairs: angle_pairs.len(),
        violations: 0,
        margin: f64::INFINITY,
        worst_plane: None,
        worst_angle: None,
    };
    for &(z, w) in plane_pairs {
        let dist = (z - w).norm();
        let bound = if dist == 0.0 { 0.0 } else { rho * hmax * z.norm().max(w.norm()).powf(rho - 1.0) * dist };
        let slack = bound - (eval(z)? - eval(w)?).abs();
        if slack < -tol {
            report.violations += 1;
        }
        if slack < report.margin {
            report.margin = slack;
            report.worst_plane = Some((z, w));
        }
    }
    for &(a, b) in angle_pairs {
        let value = |t: f64| {
            h.value_exact(t).map_err(|err| TcError::Eval { theta: t, err })
        };
        let slack = rho * hmax * (a - b).abs() - (value(a)? - value(b)?).abs();
        if slack < -tol {
            report.violations += 1;
        }
        if slack < report.margin {
            report.margin = slack;
            report.worst_angle = Some((a, b));
        }
    }
    Ok(report)
}

/// `dν = r^{ρ−1} dr ⊗ (1/2π)(h″ + ρ²h) dθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarDensity {
    pub rho: f64,
    pub radial_exponent: f64,
    /// Angular factor, already divided by 2π.
    pub angular: DefectMeasure,
}

impl PolarDensity {
    /// Mass of `{r₁ ≤ r ≤ r₂, θ ∈ [a, b]}`.
    pub fn sector_mass(&self, r1: f64, r2: f64, a: f64, b: f64) -> f64 {
        (r2.powf(self.rho) - r1.powf(self.rho)) / self.rho * self.angular.mass_on(a, b)
    }
}

pub fn riesz_density_polar(h: &PeriodicProfile, rho: f64) -> Result<PolarDensity, TcError> {
    let d = defect_measure(h, rho)?;
    Ok(PolarDensity { rho, radial_exponent: rho - 1.0, angular: d.scaled(1.0 / TAU) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn extension_examples() {
        let one = extend(&PeriodicProfile::constant(1.0, 64), 2.0);
        assert!((one.raw(Complex64::new(3.0, 0.0)).unwrap() - 9.0).abs() < 1e-12);
        assert_eq!(one.raw(Complex64::new(0.0, 0.0)).unwrap(), 0.0);
        let cos = extend(&PeriodicProfile::named("cos", 64).unwrap(), 1.0);
        let z = Complex64::new(-0.7, 1.3);
        assert!((cos.raw(z).unwrap() - z.re).abs() < 1e-14);
    }

    #[test]
    fn lipschitz_arithmetic_example() {
        let r = lipschitz_bound_check(
            &PeriodicProfile::constant(1.0, 64),
            2.0,
            &[(Complex64::new(1.0, 0.0), Complex64::new(1.1, 0.0))],
            &[(0.0, 0.0)],
            DEFAULT_TOL,
        )
        .unwrap();
        assert_eq!(r.violations, 0);
        assert!((r.margin - 0.0).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_requires_convexity() {
        let r = lipschitz_bound_check(&PeriodicProfile::constant(-1.0, 64), 1.0, &[], &[], DEFAULT_TOL);
        assert!(matches!(r, Err(TcError::PreconditionViolated(_))));
    }

    #[test]
    fn polar_masses() {
        let d = riesz_density_polar(&PeriodicProfile::constant(1.0, 256), 2.0).unwrap();
        assert!((d.sector_mass(0.0, 1.5, 0.0, TAU) - 2.0 * 1.5 * 1.5).abs() < 1e-9);
        let a = riesz_density_polar(&PeriodicProfile::named("abssin", 256).unwrap(), 1.0).unwrap();
        assert!((a.sector_mass(1.0, 2.0, -0.1, 0.1) - 1.0 / PI).abs() < 1e-3);
        let c = riesz_density_polar(&PeriodicProfile::named("cos", 256).unwrap(), 1.0).unwrap();
        assert!(c.sector_mass(0.0, 1.0, 0.0, TAU).abs() < 1e-9);
    }
}

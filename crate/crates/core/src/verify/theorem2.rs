//! Sector-by-sector comparison of the polar density of `h₂ − h₁` with the
//! grid Riesz measure of the difference of the extensions.

use std::f64::consts::TAU;

use super::report::{CheckReport, Stage, Table};
use super::VerifyError;
use crate::fields::{GridSpec, Sector};
use crate::trigconvex::{complementable, extend, riesz_density_polar, PeriodicProfile, DEFAULT_TOL};
use crate::zeros::discrete_riesz;

/// Absolute slack added to the relative sector tolerance, for sectors of
/// zero mass.
pub const SECTOR_ABS_FLOOR: f64 = 1e-9;

/// Certifies `ν(S) ≈ μ_grid(S)` within `tol` (relative) on each sector,
/// where `ν = r^{ρ−1}dr ⊗ (1/2π)((h₂−h₁)″ + ρ²(h₂−h₁))`.
pub fn check_theorem2_measure(
    h1: &PeriodicProfile,
    h2: &PeriodicProfile,
    rho: f64,
    sectors: &[Sector],
    grid: &GridSpec,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    let mut report = CheckReport::new("theorem2");
    let comp = complementable(h1, h2, rho, DEFAULT_TOL)?;
    let worst = comp.min_atom.filter(|a| a.1 < comp.min_density.1).unwrap_or(comp.min_density);
    report.stages.push(
        Stage::new("complementable", comp.holds, worst.1).witness(Some(format!("θ = {}", worst.0))),
    );
    if !comp.holds {
        report.notes.push("h₂ − h₁ is not ρ-trigonometrically convex; sectors not compared".into());
        return Ok(report);
    }

    let polar = riesz_density_polar(&h2.minus(h1)?, rho)?;
    let field = extend(h2, rho).minus(&extend(h1, rho))?;
    let riesz = discrete_riesz(&field, grid)?;
    let (x0, x1, y0, y1) = grid.bounds();
    let reach = x0.abs().min(x1).min(y0.abs()).min(y1);

    let mut rows = Vec::with_capacity(sectors.len());
    let mut margin = f64::INFINITY;
    let mut witness = None;
    let mut failures = 0;
    for (k, s) in sectors.iter().enumerate() {
        let nu = polar.sector_mass(s.r_inner, s.r_outer, s.theta_start, s.theta_end);
        let mu = riesz.mass_in(s);
        let slack = tol * nu.abs() + SECTOR_ABS_FLOOR - (mu - nu).abs();
        if slack < 0.0 {
            failures += 1;
        }
        if slack < margin {
            margin = slack;
            witness = Some(format!(
                "sector {k}: r ∈ [{}, {}], θ ∈ [{}, {}]",
                s.r_inner, s.r_outer, s.theta_start, s.theta_end
            ));
        }
        let rel = (mu - nu).abs() / (nu.abs() + SECTOR_ABS_FLOOR);
        rows.push(vec![s.r_inner, s.r_outer, s.theta_start, s.theta_end, nu, mu, rel]);
    }
    if sectors.is_empty() {
        margin = 0.0;
    }
    let mut st = Stage::new("sector masses", failures == 0, margin)
        .witness(witness)
        .detail(format!("{} sectors, relative tol {tol}, {failures} outside", sectors.len()));
    if let Some(s) = sectors.iter().find(|s| s.r_outer >= reach) {
        st = st.detail(format!("warning: sector reaching r = {} leaves the grid box", s.r_outer));
    }
    st.table = Some(Table { header: vec!["r_inner", "r_outer", "theta_start", "theta_end", "nu", "grid", "rel_err"], rows });
    report.stages.push(st);
    report.notes.push(format!(
        "the measure compared is the polar density of h₂ − h₁ (total angular mass {})",
        polar.angular.mass_on(0.0, TAU)
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(name: &str) -> PeriodicProfile {
        PeriodicProfile::named(name, 512).unwrap()
    }

    #[test]
    fn identical_profiles_carry_no_mass() {
        let grid = GridSpec::centered(1.1, 1.0 / 32.0).unwrap();
        let s = [Sector::new(0.0, 1.0, 0.0, TAU)];
        let r = check_theorem2_measure(&p("cos"), &p("cos"), 1.0, &s, &grid, 0.03).unwrap();
        assert!(r.holds(), "{r}");
    }

    #[test]
    fn constant_profiles_at_rho_two() {
        let grid = GridSpec::centered(1.1, 1.0 / 64.0).unwrap();
        let s = [Sector::new(0.0, 1.0, 0.0, TAU)];
        let r = check_theorem2_measure(&p("const:1"), &p("const:2"), 2.0, &s, &grid, 0.03).unwrap();
        assert!(r.holds(), "{r}");
        let row = &r.stage("sector masses").unwrap().table.as_ref().unwrap().rows[0];
        assert!((row[4] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn kink_atom_sector() {
        let grid = GridSpec::centered(1.1, 1.0 / 64.0).unwrap();
        let h2 = p("cos").combine(1.0, &p("abssin"), 1.0).unwrap();
        // wide enough that axis cells near the origin lie inside it
        let s = [Sector::new(0.0, 1.0, -0.3, 0.3)];
        let r = check_theorem2_measure(&p("cos"), &h2, 1.0, &s, &grid, 0.05).unwrap();
        let row = &r.stage("sector masses").unwrap().table.as_ref().unwrap().rows[0];
        assert!(r.holds(), "{r} {row:?}");
        assert!((row[4] - 1.0 / PI).abs() < 0.05 / PI);
    }

    #[test]
    fn non_complementable_pair_stops() {
        let grid = GridSpec::centered(1.1, 1.0 / 16.0).unwrap();
        let r = check_theorem2_measure(&p("const:2"), &p("const:1"), 1.0, &[], &grid, 0.03).unwrap();
        assert!(!r.holds());
        assert_eq!(r.stages.len(), 1);
    }
}

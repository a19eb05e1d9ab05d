//! Witness bounds `ln|h(z)| ≤ B(z, d(z); v) + ln(1/d(z))` on bounded
//! domains and `ln|h(z)| ≤ B(z, (1+|z|)^{−P}; v)` on the plane.

use super::nodes::{node_value, Scan};
use super::report::CheckReport;
use super::theorem1::subharmonic_stage;
use super::{CheckOptions, VerifyError};
use crate::averaging::disk_average;
use crate::fields::{Domain, GridSpec, ScalarField};
use crate::lifting::{gauge_value, Gauge, LiftError};

fn bound(
    check: &'static str,
    log_h: &ScalarField,
    v: &ScalarField,
    domain: Domain,
    gauge: Gauge,
    grid: &GridSpec,
    opts: &CheckOptions,
) -> Result<CheckReport, VerifyError> {
    let log_h = log_h.with_domain(domain);
    let v = v.with_domain(domain);
    let mut report = CheckReport::new(check);
    let pre = subharmonic_stage("h subharmonic", &log_h, grid, opts)?;
    let ok = pre.holds;
    report.stages.push(pre);
    if !ok {
        report.notes.push("ln|h| is not subharmonic on the grid; the bound was not checked".into());
        return Ok(report);
    }
    let with_log = domain.is_bounded();
    let scan = Scan::run(grid, domain, |z| {
        let d = gauge_value(gauge, domain, z)?;
        let b = disk_average(&v, z, d, &opts.quadrature)?.value;
        let penalty = if with_log { (1.0 / d).ln() } else { 0.0 };
        Ok(node_value(&log_h, z)? - b - penalty)
    })?;
    report.stages.push(scan.stage("bound", 0.0, opts.tol));
    report.notes.push("validates a supplied witness; no witness is constructed".into());
    Ok(report)
}

/// Bounded-domain witness bound with the gauge `d`.
pub fn check_prop1_bound(
    log_h: &ScalarField,
    v: &ScalarField,
    domain: Domain,
    gauge: Gauge,
    grid: &GridSpec,
    opts: &CheckOptions,
) -> Result<CheckReport, VerifyError> {
    if !domain.is_bounded() {
        return Err(LiftError::Inadmissible { gauge, domain }.into());
    }
    bound("prop1", log_h, v, domain, gauge, grid, opts)
}

/// Whole-plane witness bound with radius `(1+|z|)^{−P}`.
pub fn check_prop2_bound(
    log_h: &ScalarField,
    v: &ScalarField,
    p: f64,
    grid: &GridSpec,
    opts: &CheckOptions,
) -> Result<CheckReport, VerifyError> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(LiftError::InvalidPower(p).into());
    }
    bound("prop2", log_h, v, Domain::WholePlane, Gauge::PlanePower(p), grid, opts)
}

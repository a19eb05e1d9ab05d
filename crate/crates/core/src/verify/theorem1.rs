//! Both directions of the zero-set criterion: a witness `h` with
//! `ln|f_Λ| + ln|h| ≤ N` certifies the submeasure chain, and a witness `v`
//! with `ln|f_Λ| + v ≤ N` certifies the averaged membership bound.

use num_complex::Complex64;
use rayon::prelude::*;

use super::nodes::{fmt_z, node_value, Scan};
use super::report::{CheckReport, Stage};
use super::{CheckOptions, Scenario, VerifyError};
use crate::averaging::disk_average;
use crate::fields::{
    measure_geq, DiscreteMeasure, Domain, GridSpec, Region, ScalarField, ZeroSequence, CELLWISE_NOTE,
};
use crate::lifting::{gauge_value, lift_bounded, lift_plane, Gauge, LiftError};
use crate::zeros::{default_radii, discrete_riesz, subharmonicity_check};

fn need<'a>(f: &'a Option<ScalarField>, what: &str, check: &str) -> Result<&'a ScalarField, VerifyError> {
    f.as_ref().ok_or_else(|| VerifyError::Scenario(format!("{check} check needs {what}")))
}

fn combo(terms: &[(f64, &ScalarField)]) -> Result<ScalarField, VerifyError> {
    Ok(ScalarField::linear_combination(terms.iter().map(|(a, f)| (*a, (*f).clone())).collect(), 0.0)?)
}

pub(crate) fn subharmonic_stage(
    name: &'static str,
    f: &ScalarField,
    grid: &GridSpec,
    opts: &CheckOptions,
) -> Result<Stage, VerifyError> {
    // centres on the measure partition, radii scaled to the fine step
    let mut sub = opts.subharmonicity.clone();
    if sub.radii.is_none() {
        sub.radii = Some(default_radii(grid));
    }
    let centres = partition(grid, opts.cell_stride)?;
    let r = subharmonicity_check(f, &centres, &sub)?;
    Ok(Stage::new(name, r.holds, r.margin)
        .witness(r.worst.map(|(z, rad)| format!("{} radius {rad}", fmt_z(z))))
        .detail(format!("{} disks, {} clipped, tol {:e}, centres on {}", r.disks, r.clipped, r.tol, centres)))
}

/// Largest divisor of the grid's cell counts not above `stride`.
pub(crate) fn partition(grid: &GridSpec, stride: usize) -> Result<GridSpec, VerifyError> {
    let s = (1..=stride.max(1)).rev().find(|s| grid.coarsened(*s).is_ok()).unwrap_or(1);
    Ok(grid.coarsened(s)?)
}

fn counting_atoms(zeros: &ZeroSequence, domain: Domain, grid: &GridSpec) -> DiscreteMeasure {
    let (x0, x1, y0, y1) = grid.bounds();
    let atoms = zeros
        .entries()
        .iter()
        .filter(|(p, _)| domain.contains(*p) && p.re >= x0 && p.re <= x1 && p.im >= y0 && p.im <= y1)
        .map(|&(p, m)| (p, m as f64))
        .collect();
    DiscreteMeasure::signed(Vec::new(), atoms)
}

fn cell_name(c: Region) -> String {
    let (x0, x1, y0, y1) = c.bbox();
    format!("cell [{x0}, {x1}]×[{y0}, {y1}]")
}

/// Forward direction: given `ln|h|` with `ln|f_Λ| + ln|h| ≤ N + const`,
/// certifies `ln|f_Λ| + (M−N) + ln|h| ≤ M + const` on the nodes and
/// `ν(ln|f_Λ h| + M − N) ≥ n_Λ + ν_{M−N}` cellwise.
pub fn check_forward(sc: &Scenario) -> Result<CheckReport, VerifyError> {
    let (domain, grid, opts) = (sc.domain, &sc.grid, &sc.options);
    let n = need(&sc.n, "N", "forward")?;
    let m = need(&sc.m, "M", "forward")?;
    let log_h = need(&sc.log_h, "a witness h", "forward")?;
    let pot = ScalarField::potential(&sc.zeros, domain);
    let s = m.minus(n)?;
    let mut report = CheckReport::new("forward");

    let pre = subharmonic_stage("M-N subharmonic", &s, grid, opts)?;
    let ok = pre.holds;
    report.stages.push(pre);
    if !ok {
        report.notes.push("M − N is not subharmonic on the grid; later stages skipped".into());
        return Ok(report);
    }

    let d1 = combo(&[(1.0, &pot), (1.0, log_h), (-1.0, n)])?;
    let hyp = Scan::run(grid, domain, |z| node_value(&d1, z))?;
    let constant = opts.constant.unwrap_or_else(|| hyp.solve_constant());
    report.constant = Some(constant);
    let st = hyp.stage("hypothesis", constant, opts.tol);
    let ok = st.holds && constant.is_finite();
    report.stages.push(st);
    if !ok {
        report.notes.push("ln|f_Λ| + ln|h| ≤ N + const fails; later stages skipped".into());
        return Ok(report);
    }

    let d2 = combo(&[(1.0, &pot), (1.0, m), (-1.0, n), (1.0, log_h), (-1.0, m)])?;
    let chain = Scan::run(grid, domain, |z| node_value(&d2, z))?;
    report.stages.push(chain.stage("pointwise chain", constant, opts.tol));

    let lhs = combo(&[(1.0, &pot), (1.0, log_h), (1.0, &s)])?;
    let nu = discrete_riesz(&lhs, grid)?;
    let target = counting_atoms(&sc.zeros, domain, grid).plus(&discrete_riesz(&s, grid)?);
    let part = partition(grid, opts.cell_stride)?;
    let cmp = measure_geq(&nu, &target, &part, opts.measure_tol);
    let mut st = Stage::new("submeasure", cmp.holds, cmp.margin)
        .witness(cmp.worst_cell.map(cell_name))
        .detail(format!("{} cells compared on a {}-node partition", cmp.cells_compared, part.len()));
    for w in &cmp.warnings {
        st = st.detail(format!("warning: {w}"));
    }
    report.stages.push(st);
    report.notes.push(CELLWISE_NOTE.to_string());
    Ok(report)
}

/// Largest jump of `f` between neighbouring finite nodes.
fn grid_oscillation(f: &ScalarField, grid: &GridSpec) -> f64 {
    let domain = f.domain();
    let vals: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let z = grid.node_at(k);
            if domain.contains(z) {
                f.raw(z).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            }
        })
        .collect();
    let mut osc: f64 = 0.0;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let a = vals[grid.index(i, j)];
            let next = [(i + 1 < grid.nx()).then(|| grid.index(i + 1, j)), (j + 1 < grid.ny()).then(|| grid.index(i, j + 1))];
            for b in next.into_iter().flatten().map(|k| vals[k]) {
                if a.is_finite() && b.is_finite() {
                    osc = osc.max((a - b).abs());
                }
            }
        }
    }
    osc
}

struct Averages {
    pot: f64,
    b_pot: f64,
    b_v: f64,
    b_n: f64,
    d: f64,
}

/// Converse direction: given `v` with `ln|f_Λ| + v ≤ N + const`, certifies
/// the disk-averaged inequality and the bound by the lifted weight,
/// `ln|f_Λ(z)| + B(z, d(z); v) ≤ N↑(z) + const − ln(1/d(z))`.
pub fn check_converse_inequality(sc: &Scenario) -> Result<CheckReport, VerifyError> {
    let (domain, grid, opts) = (sc.domain, &sc.grid, &sc.options);
    let n = need(&sc.n, "N", "converse")?;
    let v = need(&sc.v, "a witness v", "converse")?;
    let pot = ScalarField::potential(&sc.zeros, domain);
    let mut report = CheckReport::new("converse");

    let vs = Scan::run(grid, domain, |z| node_value(v, z))?;
    if vs.values.iter().all(|x| x.is_nan() || *x == f64::NEG_INFINITY) {
        return Err(VerifyError::Precondition("witness v is identically −∞ on the grid".into()));
    }
    let pre = subharmonic_stage("v subharmonic", v, grid, opts)?;
    let ok = pre.holds;
    report.stages.push(pre);
    report.notes.push(format!(
        "N varies by at most {} between neighbouring nodes; continuity of N is not certified",
        grid_oscillation(n, grid)
    ));
    if !ok {
        report.notes.push("v is not subharmonic on the grid; later stages skipped".into());
        return Ok(report);
    }

    let d1 = combo(&[(1.0, &pot), (1.0, v), (-1.0, n)])?;
    let ineq = Scan::run(grid, domain, |z| node_value(&d1, z))?;
    let constant = opts.constant.unwrap_or_else(|| ineq.solve_constant());
    report.constant = Some(constant);
    let st = ineq.stage("inequality", constant, opts.tol);
    let ok = st.holds && constant.is_finite();
    report.stages.push(st);
    if !ok {
        report.notes.push("ln|f_Λ| + v ≤ N + const fails; later stages skipped".into());
        return Ok(report);
    }

    let gauge = sc.gauge;
    let q = &opts.quadrature;
    let per_node: Vec<Result<Option<Averages>, VerifyError>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let z: Complex64 = grid.node_at(k);
            if !domain.contains(z) {
                return Ok(None);
            }
            let d = gauge_value(gauge, domain, z)?;
            Ok(Some(Averages {
                pot: node_value(&pot, z)?,
                b_pot: disk_average(&pot, z, d, q)?.value,
                b_v: disk_average(v, z, d, q)?.value,
                b_n: disk_average(n, z, d, q)?.value,
                d,
            }))
        })
        .collect();
    let per_node: Vec<Option<Averages>> = per_node.into_iter().collect::<Result<_, _>>()?;
    let scan = |f: &dyn Fn(&Averages) -> f64| Scan {
        grid: *grid,
        values: per_node.iter().map(|a| a.as_ref().map_or(f64::NAN, f)).collect(),
    };
    let averaged = scan(&|a| a.b_pot + a.b_v - a.b_n);
    report.stages.push(averaged.stage("averaged", constant, opts.tol));

    let bounded = domain.is_bounded();
    let lifted = match (bounded, gauge) {
        (true, _) => lift_bounded(n, domain, gauge, grid, q)?,
        (false, Gauge::PlanePower(p)) => lift_plane(n, p, grid, q)?,
        (false, Gauge::HalfDistance) => return Err(LiftError::Inadmissible { gauge, domain }.into()),
    };
    let up = &lifted.grid_samples().expect("lifts are grid fields").values;
    let mut membership = scan(&|a| a.pot + a.b_v);
    for (k, x) in membership.values.iter_mut().enumerate() {
        if let Some(a) = &per_node[k] {
            let penalty = if bounded { (1.0 / a.d).ln() } else { 0.0 };
            *x -= up[k] - penalty;
        }
    }
    report.stages.push(membership.stage("membership", constant, opts.tol));
    report.notes.push("existence of a non-uniqueness sequence is not machine-checked".into());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::parse_field;

    fn scenario(zeros: &[(f64, f64, u32)], n: &str, m: Option<&str>) -> Scenario {
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 33, 33).unwrap();
        let mut sc = Scenario::new(Domain::UnitDisk, grid);
        sc.zeros = ZeroSequence::new(zeros.iter().map(|&(x, y, k)| (Complex64::new(x, y), k)).collect()).unwrap();
        sc.n = Some(parse_field(n, Domain::UnitDisk).unwrap());
        sc.m = m.map(|m| parse_field(m, Domain::UnitDisk).unwrap());
        sc
    }

    fn zero() -> Option<ScalarField> {
        Some(ScalarField::constant(0.0, Domain::UnitDisk))
    }

    #[test]
    fn forward_chain_is_an_identity() {
        let mut sc = scenario(&[(0.0, 0.0, 1)], "log(abs(z))", Some("log(abs(z)) + pow(abs(z),2)"));
        sc.log_h = zero();
        let r = check_forward(&sc).unwrap();
        assert!(r.holds(), "{r}");
        assert!(r.constant.unwrap().abs() < 1e-12);
        assert!(r.stage("pointwise chain").unwrap().margin.abs() < 1e-12);
        assert!(r.stage("submeasure").unwrap().margin.abs() < 1e-9);
    }

    #[test]
    fn forward_empty_case() {
        let mut sc = scenario(&[], "0", Some("0"));
        sc.log_h = zero();
        let r = check_forward(&sc).unwrap();
        assert!(r.holds(), "{r}");
        assert_eq!(r.constant, Some(0.0));
    }

    #[test]
    fn forward_excess_multiplicity_is_admissible() {
        // 2ln|z| ≤ ln|z| on the unit disk, so a double zero is allowed here
        let mut sc = scenario(&[(0.0, 0.0, 2)], "log(abs(z))", Some("log(abs(z))"));
        sc.log_h = zero();
        assert!(check_forward(&sc).unwrap().stage("hypothesis").unwrap().holds);
    }

    #[test]
    fn forward_hypothesis_violated_at_origin() {
        let mut sc = scenario(&[(0.0, 0.0, 1)], "2*log(abs(z))", Some("2*log(abs(z))"));
        sc.log_h = zero();
        let r = check_forward(&sc).unwrap();
        let st = r.stage("hypothesis").unwrap();
        assert!(!st.holds);
        assert_eq!(st.witness.as_deref(), Some("(0, 0)"));
        assert!(r.stage("submeasure").is_none());
    }

    #[test]
    fn forward_rejects_non_subharmonic_difference() {
        let mut sc = scenario(&[], "0", Some("-pow(abs(z),2)"));
        sc.log_h = zero();
        let r = check_forward(&sc).unwrap();
        assert!(!r.holds());
        assert_eq!(r.stages.len(), 1);
    }

    #[test]
    fn converse_stages_pass() {
        let mut sc = scenario(&[(0.0, 0.0, 1)], "log(abs(z)) + 1", None);
        sc.v = zero();
        let r = check_converse_inequality(&sc).unwrap();
        assert!(r.holds(), "{r}");
        assert!((r.constant.unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(r.stages.len(), 4);
    }

    #[test]
    fn converse_rejects_minus_infinity_witness() {
        let mut sc = scenario(&[(0.0, 0.0, 1)], "log(abs(z))", None);
        sc.v = Some(ScalarField::from_fn(Domain::UnitDisk, |_| f64::NEG_INFINITY));
        assert!(matches!(check_converse_inequality(&sc), Err(VerifyError::Precondition(_))));
    }

    #[test]
    fn converse_reports_first_violation() {
        let mut sc = scenario(&[(0.0, 0.0, 1)], "log(abs(z))", None);
        sc.v = Some(parse_field("pow(abs(z),2)", Domain::UnitDisk).unwrap());
        sc.options.constant = Some(0.0);
        let r = check_converse_inequality(&sc).unwrap();
        let st = r.stage("inequality").unwrap();
        assert!(!st.holds);
        assert!(st.details.iter().any(|d| d.contains("first")));
        assert!(st.margin < -0.8);
    }
}

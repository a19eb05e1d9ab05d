//! Scenario files: `key = value` lines, `#` comments.
//!
//! | key | value |
//! |-----|-------|
//! | `domain` | `disk`, `plane` or `rect:x0,x1,y0,y1` |
//! | `grid` | `x0,x1,y0,y1,nx,ny` |
//! | `zeros` | CSV path or inline `x,y,m; x,y,m` |
//! | `N`, `M`, `h`, `v` | field specs (`h` is the witness `ln|h|`) |
//! | `const` | number or `auto` |
//! | `gauge` | `half` or `plane:P` |
//! | `tol`, `measure_tol`, `subh_tol`, `sector_tol` | tolerances |
//! | `cell` | measure partition cell in grid steps |
//! | `checks` | comma list of `forward converse prop1 prop2 theorem2` |
//! | `h1`, `h2`, `rho`, `samples` | profiles for the sector comparison |
//! | `sectors` | `r1,r2,a,b; ...` or `polar:r0,r1,..:K[:offset]` |
//!
//! Field specs are a catalog name, `pot:x,y,m;...`, `ext:PROFILE:RHO`, a
//! grid CSV path or an expression in `z`. Relative paths are resolved
//! against the scenario's directory.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use super::report::CheckReport;
use super::{
    check_converse_inequality, check_forward, check_prop1_bound, check_prop2_bound, check_theorem2_measure,
    CheckOptions, VerifyError,
};
use crate::cli::catalog;
use crate::fields::expr::{parse_real, VarSet};
use crate::fields::{io, parse_field, Domain, GridSpec, ScalarField, Sector, ZeroSequence};
use crate::lifting::Gauge;
use crate::trigconvex::{PeriodicProfile, TcError, DEFAULT_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Forward,
    Converse,
    Prop1,
    Prop2,
    Theorem2,
}

impl CheckKind {
    pub const ALL: [CheckKind; 5] =
        [CheckKind::Forward, CheckKind::Converse, CheckKind::Prop1, CheckKind::Prop2, CheckKind::Theorem2];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Forward => "forward",
            CheckKind::Converse => "converse",
            CheckKind::Prop1 => "prop1",
            CheckKind::Prop2 => "prop2",
            CheckKind::Theorem2 => "theorem2",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckKind::ALL.into_iter().find(|c| c.name() == s.trim()).ok_or_else(|| format!("unknown check `{}`", s.trim()))
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub domain: Domain,
    pub grid: GridSpec,
    pub zeros: ZeroSequence,
    pub n: Option<ScalarField>,
    pub m: Option<ScalarField>,
    /// Witness `ln|h|`.
    pub log_h: Option<ScalarField>,
    pub v: Option<ScalarField>,
    pub gauge: Gauge,
    pub options: CheckOptions,
    pub h1: Option<PeriodicProfile>,
    pub h2: Option<PeriodicProfile>,
    pub rho: Option<f64>,
    pub sectors: Vec<Sector>,
    pub sector_tol: f64,
    /// Explicit check list; empty means every check the inputs allow.
    pub checks: Vec<CheckKind>,
}

fn default_grid(domain: Domain) -> GridSpec {
    let (x0, x1, y0, y1) = match domain {
        Domain::UnitDisk => (-1.0, 1.0, -1.0, 1.0),
        Domain::Rectangle { x0, x1, y0, y1 } => (x0, x1, y0, y1),
        Domain::WholePlane => (-2.0, 2.0, -2.0, 2.0),
    };
    GridSpec::new(x0, x1, y0, y1, 65, 65).expect("default grid is valid")
}

fn bad(key: &str, e: impl fmt::Display) -> VerifyError {
    VerifyError::Scenario(format!("`{key}`: {e}"))
}

/// Inline zeros `x,y,m; x,y,m`.
fn parse_zero_list(s: &str) -> Result<ZeroSequence, String> {
    let mut entries = Vec::new();
    for item in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let parts: Vec<&str> = item.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("zero `{item}` is not x,y,m"));
        }
        let x: f64 = parts[0].parse().map_err(|e| format!("`{}`: {e}", parts[0]))?;
        let y: f64 = parts[1].parse().map_err(|e| format!("`{}`: {e}", parts[1]))?;
        let m: u32 = parts[2].parse().map_err(|e| format!("`{}`: {e}", parts[2]))?;
        entries.push((Complex64::new(x, y), m));
    }
    ZeroSequence::new(entries).map_err(|e| e.to_string())
}

pub(crate) fn resolve_zeros(spec: &str, base: &Path) -> Result<ZeroSequence, VerifyError> {
    let spec = spec.trim();
    if spec.is_empty() || spec == "none" {
        return Ok(ZeroSequence::empty());
    }
    if spec.ends_with(".csv") {
        return Ok(io::read_zeros(&base.join(spec))?);
    }
    parse_zero_list(spec).map_err(|e| bad("zeros", e))
}

/// Catalog name, `pot:...`, `ext:PROFILE:RHO`, grid CSV or expression.
pub fn resolve_field(spec: &str, domain: Domain, base: &Path) -> Result<ScalarField, VerifyError> {
    let spec = spec.trim();
    if let Some(f) = catalog::field(spec, domain) {
        return Ok(f);
    }
    if let Some(list) = spec.strip_prefix("pot:") {
        let seq = parse_zero_list(list).map_err(|e| bad("pot", e))?;
        return Ok(ScalarField::potential(&seq, domain));
    }
    if let Some(rest) = spec.strip_prefix("ext:") {
        let (profile, rho) = rest.rsplit_once(':').ok_or_else(|| bad("ext", "expected ext:PROFILE:RHO"))?;
        let rho: f64 = rho.trim().parse().map_err(|e| bad("ext", e))?;
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(TcError::InvalidRho(rho).into());
        }
        let h = resolve_profile(profile, DEFAULT_SAMPLES, base)?;
        return Ok(ScalarField::homogeneous(h, rho).with_domain(domain));
    }
    if spec.ends_with(".csv") {
        return Ok(ScalarField::from_grid(io::read_grid(&base.join(spec))?, domain));
    }
    Ok(parse_field(spec, domain)?)
}

/// Reads a `theta,value` CSV of equispaced samples starting at θ = 0.
fn read_profile_csv(path: &Path) -> Result<PeriodicProfile, VerifyError> {
    let err = |e: &dyn fmt::Display| VerifyError::Scenario(format!("{}: {e}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| err(&e))?;
    let mut samples = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| err(&e))?;
        if rec.len() != 2 {
            return Err(err(&format!("row {}: expected theta,value", k + 2)));
        }
        let v: f64 = rec[1].parse().map_err(|e| err(&format!("row {}: {e}", k + 2)))?;
        samples.push(v);
    }
    let label = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(PeriodicProfile::from_samples(samples, label)?)
}

/// `const:R`, a catalog profile, `expr:...`, a `theta,value` CSV or an
/// expression in `theta`.
pub fn resolve_profile(spec: &str, n: usize, base: &Path) -> Result<PeriodicProfile, VerifyError> {
    let spec = spec.trim();
    if let Some(p) = PeriodicProfile::named(spec, n) {
        return Ok(p);
    }
    if spec.starts_with("const:") {
        return Err(bad("profile", format!("bad constant `{spec}`")));
    }
    if let Some(e) = spec.strip_prefix("expr:") {
        return Ok(PeriodicProfile::parse(e, n)?);
    }
    if spec.ends_with(".csv") {
        return read_profile_csv(&base.join(spec));
    }
    Ok(PeriodicProfile::parse(spec, n)?)
}

/// A number or constant expression such as `pi/10`.
fn parse_number(s: &str) -> Result<f64, String> {
    let e = parse_real(s, VarSet::Angle).map_err(|e| e.to_string())?;
    if !e.is_constant() {
        return Err(format!("`{s}` is not a constant"));
    }
    e.eval_real(Complex64::new(0.0, 0.0), 0.0).map_err(|e| e.to_string())
}

fn sector(r1: f64, r2: f64, a: f64, b: f64) -> Result<Sector, String> {
    if !(0.0 <= r1 && r1 < r2 && r2.is_finite()) {
        return Err(format!("radii [{r1}, {r2}] are not increasing and nonnegative"));
    }
    if !(b > a && b - a <= TAU + 1e-12) {
        return Err(format!("angles [{a}, {b}] do not span (0, 2π]"));
    }
    Ok(Sector::new(r1, r2, a, b))
}

/// `r1,r2,a,b; ...` or `polar:r0,r1,..:K[:offset]`: every band between
/// consecutive radii times `K` equal angular sectors starting at `offset`.
pub(crate) fn parse_sectors(s: &str) -> Result<Vec<Sector>, String> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("polar:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err("expected polar:r0,r1,..:K[:offset]".into());
        }
        let radii = parts[0].split(',').map(parse_number).collect::<Result<Vec<_>, _>>()?;
        let k: usize = parts[1].trim().parse().map_err(|e| format!("sector count: {e}"))?;
        let offset = parts.get(2).map(|p| parse_number(p)).transpose()?.unwrap_or(0.0);
        if radii.len() < 2 || k == 0 {
            return Err("need at least two radii and one angular sector".into());
        }
        let w = TAU / k as f64;
        let mut out = Vec::new();
        for band in radii.windows(2) {
            for j in 0..k {
                let a = offset + j as f64 * w;
                out.push(sector(band[0], band[1], a, a + w)?);
            }
        }
        return Ok(out);
    }
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|item| {
            let v = item.split(',').map(parse_number).collect::<Result<Vec<_>, _>>()?;
            if v.len() != 4 {
                return Err(format!("sector `{item}` is not r1,r2,a,b"));
            }
            sector(v[0], v[1], v[2], v[3])
        })
        .collect()
}

const KEYS: &[&str] = &[
    "domain", "grid", "zeros", "N", "M", "h", "v", "const", "gauge", "tol", "measure_tol", "subh_tol", "sector_tol",
    "cell", "checks", "h1", "h2", "rho", "samples", "sectors",
];

impl Scenario {
    pub fn new(domain: Domain, grid: GridSpec) -> Self {
        Scenario {
            domain,
            grid,
            zeros: ZeroSequence::empty(),
            n: None,
            m: None,
            log_h: None,
            v: None,
            gauge: if domain.is_bounded() { Gauge::HalfDistance } else { Gauge::PlanePower(1.0) },
            options: CheckOptions::default(),
            h1: None,
            h2: None,
            rho: None,
            sectors: Vec::new(),
            sector_tol: 0.03,
            checks: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, VerifyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| VerifyError::Field(crate::fields::FieldError::Io(format!("{}: {e}", path.display()))))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Scenario::parse(&text, &base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, VerifyError> {
        let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| VerifyError::Scenario(format!("line {}: expected key = value", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(VerifyError::Scenario(format!("line {}: unknown key `{k}`", no + 1)));
            }
            if kv.insert(k, v).is_some() {
                return Err(VerifyError::Scenario(format!("line {}: duplicate key `{k}`", no + 1)));
            }
        }
        let domain: Domain = kv.get("domain").map_or(Ok(Domain::UnitDisk), |s| s.parse()).map_err(|e| bad("domain", e))?;
        let grid = match kv.get("grid") {
            Some(s) => s.parse::<GridSpec>().map_err(|e| bad("grid", e))?,
            None => default_grid(domain),
        };
        let mut sc = Scenario::new(domain, grid);
        if let Some(s) = kv.get("zeros") {
            sc.zeros = resolve_zeros(s, base)?;
        }
        let field = |key: &str| kv.get(key).map(|s| resolve_field(s, domain, base).map(|f| f.with_domain(domain))).transpose();
        sc.n = field("N")?;
        sc.m = field("M")?;
        sc.log_h = field("h")?;
        sc.v = field("v")?;
        if let Some(s) = kv.get("gauge") {
            sc.gauge = s.parse().map_err(|e| bad("gauge", e))?;
        }
        let num = |key: &str| kv.get(key).map(|s| parse_number(s).map_err(|e| bad(key, e))).transpose();
        let positive = |key: &str| -> Result<Option<f64>, VerifyError> {
            match num(key)? {
                Some(x) if !(x > 0.0 && x.is_finite()) => Err(bad(key, format!("{x} is not positive"))),
                other => Ok(other),
            }
        };
        if let Some(x) = positive("tol")? {
            sc.options.tol = x;
        }
        if let Some(x) = positive("measure_tol")? {
            sc.options.measure_tol = x;
        }
        if let Some(x) = positive("subh_tol")? {
            sc.options.subharmonicity.tol = x;
        }
        if let Some(x) = positive("sector_tol")? {
            sc.sector_tol = x;
        }
        match kv.get("const") {
            None | Some(&"auto") => {}
            Some(s) => sc.options.constant = Some(parse_number(s).map_err(|e| bad("const", e))?),
        }
        if let Some(s) = kv.get("cell") {
            sc.options.cell_stride = s.parse::<usize>().ok().filter(|c| *c > 0).ok_or_else(|| bad("cell", "expected a positive integer"))?;
        }
        if let Some(s) = kv.get("checks") {
            sc.checks = s.split(',').map(|c| c.parse::<CheckKind>()).collect::<Result<_, _>>().map_err(|e| bad("checks", e))?;
        }
        let samples = match kv.get("samples") {
            Some(s) => s.parse::<usize>().map_err(|e| bad("samples", e))?,
            None => DEFAULT_SAMPLES,
        };
        sc.h1 = kv.get("h1").map(|s| resolve_profile(s, samples, base)).transpose()?;
        sc.h2 = kv.get("h2").map(|s| resolve_profile(s, samples, base)).transpose()?;
        sc.rho = positive("rho")?;
        if let Some(s) = kv.get("sectors") {
            sc.sectors = parse_sectors(s).map_err(|e| bad("sectors", e))?;
        }
        Ok(sc)
    }

    /// The explicit list, or every check whose inputs are present.
    pub fn planned_checks(&self) -> Vec<CheckKind> {
        if !self.checks.is_empty() {
            return self.checks.clone();
        }
        let mut out = Vec::new();
        if self.n.is_some() && self.m.is_some() && self.log_h.is_some() {
            out.push(CheckKind::Forward);
        }
        if self.n.is_some() && self.v.is_some() {
            out.push(CheckKind::Converse);
        }
        if self.log_h.is_some() && self.v.is_some() {
            out.push(if self.domain.is_bounded() { CheckKind::Prop1 } else { CheckKind::Prop2 });
        }
        if self.h1.is_some() && self.h2.is_some() && self.rho.is_some() {
            out.push(CheckKind::Theorem2);
        }
        out
    }

    fn run_check(&self, kind: CheckKind) -> Result<CheckReport, VerifyError> {
        let missing = |what: &str| VerifyError::Scenario(format!("{kind} check needs {what}"));
        match kind {
            CheckKind::Forward => check_forward(self),
            CheckKind::Converse => check_converse_inequality(self),
            CheckKind::Prop1 | CheckKind::Prop2 => {
                let h = self.log_h.as_ref().ok_or_else(|| missing("a witness h"))?;
                let v = self.v.as_ref().ok_or_else(|| missing("v"))?;
                if kind == CheckKind::Prop1 {
                    check_prop1_bound(h, v, self.domain, self.gauge, &self.grid, &self.options)
                } else {
                    let p = match self.gauge {
                        Gauge::PlanePower(p) => p,
                        Gauge::HalfDistance => return Err(missing("gauge = plane:P")),
                    };
                    check_prop2_bound(h, v, p, &self.grid, &self.options)
                }
            }
            CheckKind::Theorem2 => {
                let h1 = self.h1.as_ref().ok_or_else(|| missing("h1"))?;
                let h2 = self.h2.as_ref().ok_or_else(|| missing("h2"))?;
                let rho = self.rho.ok_or_else(|| missing("rho"))?;
                check_theorem2_measure(h1, h2, rho, &self.sectors, &self.grid, self.sector_tol)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub reports: Vec<CheckReport>,
}

impl ScenarioReport {
    pub fn holds(&self) -> bool {
        self.reports.iter().all(CheckReport::holds)
    }
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.reports {
            write!(f, "{r}")?;
        }
        writeln!(f, "scenario: {}", if self.holds() { "PASS" } else { "FAIL" })
    }
}

/// Runs the planned checks concurrently; reports keep the planned order.
pub fn run_scenario(sc: &Scenario) -> Result<ScenarioReport, VerifyError> {
    let plan = sc.planned_checks();
    if plan.is_empty() {
        return Err(VerifyError::Scenario("no check has all of its inputs".into()));
    }
    let reports: Vec<Result<CheckReport, VerifyError>> = plan.par_iter().map(|k| sc.run_check(*k)).collect();
    Ok(ScenarioReport { reports: reports.into_iter().collect::<Result<_, _>>()? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_infers_checks() {
        let text = "# forward chain\ndomain = disk\nzeros = 0,0,1\nN = log(abs(z))\nM = log(abs(z)) + pow(abs(z),2)\nh = 0\ngrid = -1,1,-1,1,33,33\n";
        let sc = Scenario::parse(text, Path::new(".")).unwrap();
        assert_eq!(sc.zeros.total_multiplicity(), 1);
        assert_eq!(sc.planned_checks(), vec![CheckKind::Forward]);
        assert_eq!(sc.grid.nx(), 33);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(Scenario::parse("colour = red", Path::new(".")).is_err());
        assert!(Scenario::parse("tol = 1\ntol = 2", Path::new(".")).is_err());
        assert!(Scenario::parse("no equals sign", Path::new(".")).is_err());
    }

    #[test]
    fn polar_sectors() {
        let s = parse_sectors("polar:0.2,0.6,1.0:10:-pi/10").unwrap();
        assert_eq!(s.len(), 20);
        assert!((s[0].theta_start + TAU / 20.0).abs() < 1e-15);
        assert!(parse_sectors("0.5,0.2,0,1").is_err());
    }

    #[test]
    fn field_specs_resolve() {
        let base = Path::new(".");
        let z = Complex64::new(0.3, 0.4);
        let re = resolve_field("re", Domain::UnitDisk, base).unwrap();
        assert_eq!(re.raw(z).unwrap(), 0.3);
        let pot = resolve_field("pot:0,0,2", Domain::UnitDisk, base).unwrap();
        assert!((pot.raw(z).unwrap() - 2.0 * 0.5f64.ln()).abs() < 1e-15);
        let ext = resolve_field("ext:const:1:2", Domain::WholePlane, base).unwrap();
        assert!((ext.raw(z).unwrap() - 0.25).abs() < 1e-15);
        let e = resolve_field("pow(abs(z),2)", Domain::UnitDisk, base).unwrap();
        assert!((e.raw(z).unwrap() - 0.25).abs() < 1e-15);
    }
}

//! Command-line front end. Exit codes: 0 when every check passes, 1 when a
//! mathematical check fails, 2 on usage or input errors.

pub mod catalog;
mod report;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

pub use report::{RunReport, StageLine};

use crate::averaging::{disk_average, QuadratureSpec};
use crate::fields::{io, Domain, GridSamples, GridSpec, ScalarField};
use crate::lifting::{lift_bounded, lift_plane, Gauge};
use crate::trigconvex::{
    complementable, defect_measure, extend, is_rho_trig_convex, lipschitz_bound_check, q_threshold,
    verify_bullet_conditions, PeriodicProfile, DEFAULT_SAMPLES, DEFAULT_TOL,
};
use crate::verify::{resolve_field, resolve_profile, run_scenario, Scenario};
use crate::zeros::{discrete_riesz_stats, subharmonicity_check, SubharmonicityOptions};

const CSV_HELP: &str = "\
CSV outputs (--out):
  lift       grid file: `# grid x0 x1 y0 y1 nx ny`, then re,im,value per node (row-major)
  riesz      kind,params...,mass with rows cell,x0,x1,y0,y1,mass and atom,re,im,mass
  tc-defect  kind,theta,value with rows density,θ,(h''+ρ²h)(θ) and atom,θ,mass
  tc-extend  grid file of the extension, as for lift
  verify     directory of <check>-<stage>.csv margin maps (re,im,margin; NaN off the domain)
             and sector tables (r_inner,r_outer,theta_start,theta_end,nu,grid,rel_err)

Field specs: catalog name, pot:x,y,m;..., ext:PROFILE:RHO, grid CSV path, or an expression in z.
Profile specs: const:R, catalog name, expr:..., theta,value CSV path, or an expression in theta.";

#[derive(Debug, Parser)]
#[command(name = "zeroweight", version, about = "Subharmonic weights, zero sets and trigonometric convexity", after_help = CSV_HELP)]
struct Cli {
    /// Tolerance for the command's pass/fail decision.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sampling grid `x0,x1,y0,y1,nx,ny`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
    /// CSV artifact path (a directory for `verify`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Append wall time to the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Disk average B(z, r; N).
    Avg {
        #[arg(long, allow_hyphen_values = true)]
        field: String,
        #[arg(long, default_value = "plane")]
        domain: String,
        /// Centre `x,y`.
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long)]
        radius: f64,
    },
    /// Weight lift on the grid.
    Lift {
        #[arg(long, allow_hyphen_values = true)]
        field: String,
        #[arg(long, default_value = "disk")]
        domain: String,
        /// `half` or `plane:P`.
        #[arg(long, default_value = "half")]
        gauge: String,
    },
    /// Discrete Riesz measure (1/2π)Δ on the grid.
    Riesz {
        #[arg(long, allow_hyphen_values = true)]
        field: String,
        #[arg(long, default_value = "plane")]
        domain: String,
        /// Also report the mass in the closed disk `x,y,r`.
        #[arg(long, allow_hyphen_values = true)]
        disk: Option<String>,
    },
    /// Sub-mean-value test over grid nodes.
    Checksubh {
        #[arg(long, allow_hyphen_values = true)]
        field: String,
        #[arg(long, default_value = "plane")]
        domain: String,
        /// Radii `r1,r2,...`; default 2h, 8h, 32h.
        #[arg(long)]
        radii: Option<String>,
    },
    /// Three-point sine inequality sweep.
    TcCheck {
        #[arg(long, allow_hyphen_values = true)]
        profile: String,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Defect measure h'' + ρ²h.
    TcDefect {
        #[arg(long, allow_hyphen_values = true)]
        profile: String,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Homogeneous extension: subharmonicity and Lipschitz bounds.
    TcExtend {
        #[arg(long, allow_hyphen_values = true)]
        profile: String,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Number of deterministic point pairs for each Lipschitz bound.
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
    },
    /// Complementability threshold for q·g and its sufficient conditions.
    TcQbound {
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        /// Constant in h′(ψ) − h′(φ) ≤ C(ψ − φ); estimated when absent.
        #[arg(long = "C")]
        big_c: Option<f64>,
        /// Values of q to test, `q1,q2,...`.
        #[arg(long)]
        q: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Run a scenario file.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Built-in fields and profiles.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
enum CatalogAction {
    List,
    Show { name: String },
}

/// A finished command: its standard output and exit code.
struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn report(r: &RunReport) -> Self {
        Outcome { text: r.to_string(), code: if r.holds() { 0 } else { 1 } }
    }
}

type CliResult = Result<Outcome, String>;

fn floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{what}: bad number `{}`: {e}", t.trim())))
        .collect::<Result<Vec<_>, _>>()?;
    if n > 0 && v.len() != n {
        return Err(format!("{what}: expected {n} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

/// Rounds to 12 significant digits for display.
fn sig(v: f64) -> f64 {
    format!("{v:.11e}").parse().unwrap_or(v)
}

fn fmt_z(z: Complex64) -> String {
    format!("({}, {})", z.re, z.im)
}

struct Ctx {
    tol: Option<f64>,
    grid: Option<String>,
    out: Option<PathBuf>,
    echo: String,
}

impl Ctx {
    fn grid(&self, domain: Domain) -> Result<GridSpec, String> {
        match &self.grid {
            Some(s) => s.parse().map_err(|e| format!("--grid: {e}")),
            None => {
                let (a, b) = if domain.is_bounded() { (-1.0, 1.0) } else { (-2.0, 2.0) };
                let (x0, x1, y0, y1) = match domain {
                    Domain::Rectangle { x0, x1, y0, y1 } => (x0, x1, y0, y1),
                    _ => (a, b, a, b),
                };
                GridSpec::new(x0, x1, y0, y1, 65, 65).map_err(|e| e.to_string())
            }
        }
    }

    fn report(&self) -> RunReport {
        RunReport::new(self.echo.clone())
    }
}

fn domain(s: &str) -> Result<Domain, String> {
    s.parse().map_err(|e| format!("--domain: {e}"))
}

fn field(spec: &str, d: Domain) -> Result<ScalarField, String> {
    resolve_field(spec, d, Path::new(".")).map_err(|e| e.to_string())
}

fn profile(spec: &str, n: usize) -> Result<PeriodicProfile, String> {
    resolve_profile(spec, n, Path::new(".")).map_err(|e| e.to_string())
}

fn cmd_avg(field_spec: &str, d: &str, center: &str, radius: f64) -> CliResult {
    let d = domain(d)?;
    let f = field(field_spec, d)?;
    let c = floats(center, 2, "--center")?;
    let a = disk_average(&f, Complex64::new(c[0], c[1]), radius, &QuadratureSpec::default()).map_err(|e| e.to_string())?;
    Ok(Outcome { text: format!("{}\n", sig(a.value)), code: 0 })
}

fn grid_summary(r: &mut RunReport, g: &GridSamples) {
    let mut lo = (f64::INFINITY, None);
    let mut hi = (f64::NEG_INFINITY, None);
    for (k, v) in g.values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if *v < lo.0 {
            lo = (*v, Some(g.spec.node_at(k)));
        }
        if *v > hi.0 {
            hi = (*v, Some(g.spec.node_at(k)));
        }
    }
    let at = |p: Option<Complex64>| p.map(fmt_z).unwrap_or_else(|| "-".into());
    r.value("nodes", g.values.iter().filter(|v| !v.is_nan()).count());
    r.value("min", format!("{} at {}", lo.0, at(lo.1)));
    r.value("max", format!("{} at {}", hi.0, at(hi.1)));
}

fn cmd_lift(ctx: &Ctx, field_spec: &str, d: &str, gauge: &str) -> CliResult {
    let d = domain(d)?;
    let f = field(field_spec, d)?;
    let gauge: Gauge = gauge.parse().map_err(|e| format!("--gauge: {e}"))?;
    let grid = ctx.grid(d)?;
    let q = QuadratureSpec::default();
    let lifted = match (d.is_bounded(), gauge) {
        (true, g) => lift_bounded(&f, d, g, &grid, &q),
        (false, Gauge::PlanePower(p)) => lift_plane(&f, p, &grid, &q),
        (false, Gauge::HalfDistance) => return Err("the half-distance gauge needs a bounded domain".into()),
    }
    .map_err(|e| e.to_string())?;
    let g = lifted.grid_samples().expect("lifts are grid fields");
    let mut r = ctx.report();
    r.value("gauge", gauge);
    grid_summary(&mut r, g);
    if let Some(p) = &ctx.out {
        io::write_grid(p, g).map_err(|e| e.to_string())?;
        r.value("written", p.display());
    }
    Ok(Outcome::report(&r))
}

fn cmd_riesz(ctx: &Ctx, field_spec: &str, d: &str, disk: Option<&str>) -> CliResult {
    let d = domain(d)?;
    let f = field(field_spec, d)?;
    let grid = ctx.grid(d)?;
    let m = discrete_riesz_stats(&f, &grid).map_err(|e| e.to_string())?;
    let mut r = ctx.report();
    r.value("grid", grid);
    r.value("stencils", m.stencils);
    r.value("masked", m.masked);
    r.value("total mass", m.measure.total());
    for (p, mass) in m.measure.atoms() {
        r.value("atom", format!("{mass} at {}", fmt_z(*p)));
    }
    if let Some(s) = disk {
        let v = floats(s, 3, "--disk")?;
        let disk = crate::fields::Region::disk(Complex64::new(v[0], v[1]), v[2]);
        r.value("disk mass", m.measure.mass_in(&disk));
    }
    if let Some(p) = &ctx.out {
        io::write_measure(p, &m.measure).map_err(|e| e.to_string())?;
        r.value("written", p.display());
    }
    Ok(Outcome::report(&r))
}

fn cmd_checksubh(ctx: &Ctx, field_spec: &str, d: &str, radii: Option<&str>) -> CliResult {
    let d = domain(d)?;
    let f = field(field_spec, d)?;
    let grid = ctx.grid(d)?;
    let mut opts = SubharmonicityOptions::default();
    if let Some(t) = ctx.tol {
        opts.tol = t;
    }
    opts.radii = radii.map(|s| floats(s, 0, "--radii")).transpose()?;
    let s = subharmonicity_check(&f, &grid, &opts).map_err(|e| e.to_string())?;
    let mut r = ctx.report();
    r.tol("tol", s.tol);
    r.value("radii", s.radii.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
    r.value("disks", s.disks);
    r.value("clipped", s.clipped);
    r.stage("sub-mean-value", s.holds, s.margin, s.worst.map(|(z, rad)| format!("{} radius {rad}", fmt_z(z))));
    Ok(Outcome::report(&r))
}

fn convexity_stage(r: &mut RunReport, h: &PeriodicProfile, rho: f64, tol: f64) -> Result<bool, String> {
    let c = is_rho_trig_convex(h, rho, tol).map_err(|e| e.to_string())?;
    r.value("triples", c.triples);
    let w = c.worst.map(|t| format!("θ₁ = {}, θ = {}, θ₂ = {}", t.theta1, t.theta, t.theta2));
    r.stage("rho-trig-convex", c.holds, c.margin, w);
    r.notes.extend(c.warnings);
    Ok(c.holds)
}

fn cmd_tc_check(ctx: &Ctx, spec: &str, rho: f64, n: usize) -> CliResult {
    let h = profile(spec, n)?;
    let tol = ctx.tol.unwrap_or(DEFAULT_TOL);
    let mut r = ctx.report();
    r.tol("tol", tol);
    convexity_stage(&mut r, &h, rho, tol)?;
    Ok(Outcome::report(&r))
}

fn cmd_tc_defect(ctx: &Ctx, spec: &str, rho: f64, n: usize) -> CliResult {
    let h = profile(spec, n)?;
    let tol = ctx.tol.unwrap_or(DEFAULT_TOL);
    let d = defect_measure(&h, rho).map_err(|e| e.to_string())?;
    let mut r = ctx.report();
    r.tol("tol", tol);
    r.value("total mass", d.total());
    for (t, m) in &d.atoms {
        r.value("atom", format!("{m} at θ = {t}"));
    }
    let (at, min) = d.min_density();
    r.value("min density", format!("{min} at θ = {at}"));
    let worst = match d.min_atom() {
        Some((t, m)) if m < min => (t, m),
        _ => (at, min),
    };
    r.stage("defect nonnegative", d.is_nonnegative(tol), worst.1, Some(format!("θ = {}", worst.0)));
    if let Some(p) = &ctx.out {
        write_defect(p, &d).map_err(|e| format!("{}: {e}", p.display()))?;
        r.value("written", p.display());
    }
    Ok(Outcome::report(&r))
}

fn write_defect(p: &Path, d: &crate::trigconvex::DefectMeasure) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(p)?;
    w.write_record(["kind", "theta", "value"])?;
    for (k, v) in d.density.iter().enumerate() {
        w.write_record(["density".to_string(), (k as f64 * d.step()).to_string(), v.to_string()])?;
    }
    for (t, m) in &d.atoms {
        w.write_record(["atom".to_string(), t.to_string(), m.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Deterministic point pairs from additive recurrences.
fn weyl_pairs(k: usize) -> (Vec<(Complex64, Complex64)>, Vec<(f64, f64)>) {
    let frac = |x: f64| x - x.floor();
    let (a1, a2, a3, a4) = (0.618_033_988_749_894_9, 0.414_213_562_373_095_1, 0.732_050_807_568_877_3, 0.236_067_977_499_789_7);
    let tau = std::f64::consts::TAU;
    let mut plane = Vec::with_capacity(k);
    let mut angle = Vec::with_capacity(k);
    for j in 1..=k {
        let j = j as f64;
        let z = Complex64::from_polar(2.0 * frac(j * a1), tau * frac(j * a2));
        let w = Complex64::from_polar(2.0 * frac(j * a3), tau * frac(j * a4));
        plane.push((z, w));
        angle.push((tau * frac(j * a1), tau * frac(j * a3)));
    }
    (plane, angle)
}

fn cmd_tc_extend(ctx: &Ctx, spec: &str, rho: f64, n: usize, pairs: usize) -> CliResult {
    let h = profile(spec, n)?;
    let grid = ctx.grid(Domain::WholePlane)?;
    let mut r = ctx.report();
    let convex = convexity_stage(&mut r, &h, rho, DEFAULT_TOL)?;
    let ext = extend(&h, rho);
    let mut opts = SubharmonicityOptions::default();
    if let Some(t) = ctx.tol {
        opts.tol = t;
    }
    r.tol("subharmonicity tol", opts.tol);
    let s = subharmonicity_check(&ext, &grid, &opts).map_err(|e| e.to_string())?;
    r.stage("extension subharmonic", s.holds, s.margin, s.worst.map(|(z, rad)| format!("{} radius {rad}", fmt_z(z))));
    if convex {
        let (plane, angle) = weyl_pairs(pairs);
        let l = lipschitz_bound_check(&h, rho, &plane, &angle, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let w = l
            .worst_plane
            .map(|(a, b)| format!("{} and {}", fmt_z(a), fmt_z(b)))
            .or(l.worst_angle.map(|(a, b)| format!("θ = {a} and {b}")));
        r.value("lipschitz pairs", l.plane_pairs + l.angle_pairs);
        r.stage("lipschitz", l.violations == 0, l.margin, w);
    } else {
        r.notes.push("Lipschitz bounds need a ρ-trigonometrically convex profile; skipped".into());
    }
    if let Some(p) = &ctx.out {
        let values = grid.nodes().map(|z| ext.raw(z).unwrap_or(f64::NAN)).collect();
        let g = GridSamples::new(grid, values).map_err(|e| e.to_string())?;
        io::write_grid(p, &g).map_err(|e| e.to_string())?;
        r.value("written", p.display());
    }
    Ok(Outcome::report(&r))
}

#[allow(clippy::too_many_arguments)]
fn cmd_tc_qbound(
    ctx: &Ctx,
    g: &str,
    h: &str,
    rho: f64,
    c: f64,
    big_c: Option<f64>,
    qs: Option<&str>,
    n: usize,
) -> CliResult {
    let g = profile(g, n)?;
    let h = profile(h, n)?;
    let tol = ctx.tol.unwrap_or(DEFAULT_TOL);
    let t = q_threshold(&g, &h, rho, c, big_c).map_err(|e| e.to_string())?;
    let b = verify_bullet_conditions(&g, &h, rho, c, big_c).map_err(|e| e.to_string())?;
    let mut r = ctx.report();
    r.tol("tol", tol);
    r.value("threshold", t.value);
    r.value("C", format!("{}{}", t.big_c, if t.big_c_estimated { " (estimated)" } else { "" }));
    r.value("min g", t.min_g);
    r.value("max h", t.max_h);
    for (k, bullet) in [&b.bullet1, &b.bullet2, &b.bullet3].into_iter().enumerate() {
        r.value(format!("condition {}", k + 1), if bullet.holds { "holds".to_string() } else { bullet.failures.join("; ") });
    }
    r.notes.extend(b.notes.iter().cloned());
    r.value("licensed by", b.licensed.map(|k| format!("condition {k}")).unwrap_or_else(|| "none".into()));
    if let Some(qs) = qs {
        for q in floats(qs, 0, "--q")? {
            if q <= t.value {
                r.notes.push(format!("q = {q} is not above the threshold; no claim is made"));
                continue;
            }
            let comp = complementable(&h, &g.scaled(q), rho, tol).map_err(|e| e.to_string())?;
            let worst = match comp.min_atom {
                Some(a) if a.1 < comp.min_density.1 => a,
                _ => comp.min_density,
            };
            r.stage(format!("complementable q={q}"), comp.holds, worst.1, Some(format!("θ = {}", worst.0)));
        }
    }
    Ok(Outcome::report(&r))
}

fn cmd_verify(ctx: &Ctx, path: &Path) -> CliResult {
    let mut sc = Scenario::load(path).map_err(|e| e.to_string())?;
    if let Some(t) = ctx.tol {
        sc.options.tol = t;
    }
    if let Some(g) = &ctx.grid {
        sc.grid = g.parse().map_err(|e| format!("--grid: {e}"))?;
    }
    let res = run_scenario(&sc).map_err(|e| e.to_string())?;
    let mut r = ctx.report();
    r.tol("tol", sc.options.tol);
    r.tol("measure_tol", sc.options.measure_tol);
    r.tol("subh_tol", sc.options.subharmonicity.tol);
    r.value("grid", sc.grid);
    r.value("domain", sc.domain);
    if let Some(dir) = &ctx.out {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        for c in &res.reports {
            for s in &c.stages {
                let stem = format!("{}-{}", c.check, s.name.replace(' ', "-"));
                if let Some(m) = &s.map {
                    m.write_csv(&dir.join(format!("{stem}.csv"))).map_err(|e| e.to_string())?;
                }
                if let Some(t) = &s.table {
                    t.write_csv(&dir.join(format!("{stem}.csv"))).map_err(|e| e.to_string())?;
                }
            }
        }
        r.value("written", dir.display());
    }
    r.checks = res.reports;
    Ok(Outcome::report(&r))
}

fn cmd_catalog(action: &CatalogAction) -> CliResult {
    match action {
        CatalogAction::List => Ok(Outcome { text: catalog::list(), code: 0 }),
        CatalogAction::Show { name } => {
            catalog::show(name).map(|s| Outcome { text: s + "\n", code: 0 }).ok_or_else(|| format!("unknown catalog entry `{name}`"))
        }
    }
}

fn dispatch(cli: Cli, echo: String) -> CliResult {
    let ctx = Ctx { tol: cli.tol, grid: cli.grid, out: cli.out, echo };
    if let Some(t) = ctx.tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(format!("--tol must be a nonnegative number, got {t}"));
        }
    }
    match &cli.command {
        Command::Avg { field, domain, center, radius } => cmd_avg(field, domain, center, *radius),
        Command::Lift { field, domain, gauge } => cmd_lift(&ctx, field, domain, gauge),
        Command::Riesz { field, domain, disk } => cmd_riesz(&ctx, field, domain, disk.as_deref()),
        Command::Checksubh { field, domain, radii } => cmd_checksubh(&ctx, field, domain, radii.as_deref()),
        Command::TcCheck { profile, rho, samples } => cmd_tc_check(&ctx, profile, *rho, *samples),
        Command::TcDefect { profile, rho, samples } => cmd_tc_defect(&ctx, profile, *rho, *samples),
        Command::TcExtend { profile, rho, samples, pairs } => cmd_tc_extend(&ctx, profile, *rho, *samples, *pairs),
        Command::TcQbound { g, h, rho, c, big_c, q, samples } => {
            cmd_tc_qbound(&ctx, g, h, *rho, *c, *big_c, q.as_deref(), *samples)
        }
        Command::Verify { scenario } => cmd_verify(&ctx, scenario),
        Command::Catalog { action } => cmd_catalog(action),
    }
}

/// Runs the command line `args` (program name first), writing to
/// `stdout`/`stderr`, and returns the exit code.
pub fn run_with<I, W, E>(args: I, stdout: &mut W, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = OsString>,
    W: std::io::Write,
    E: std::io::Write,
{
    let args: Vec<OsString> = args.into_iter().collect();
    let echo = args.iter().skip(1).map(|a| a.to_string_lossy()).collect::<Vec<_>>().join(" ");
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let timing = cli.timing;
    let start = Instant::now();
    match dispatch(cli, echo) {
        Ok(mut out) => {
            if timing {
                let _ = writeln!(out.text, "wall time: {:.3} s", start.elapsed().as_secs_f64());
            }
            let _ = stdout.write_all(out.text.as_bytes());
            out.code
        }
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
    }
}

pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

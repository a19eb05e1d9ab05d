//! Disk averages `B(z, r; N) = (1/πr²) ∬_{|w−z|≤r} N(w) dA(w)`.
//!
//! Logarithmic terms of a field are averaged in closed form; the regular
//! remainder is integrated in polar coordinates about `z` with composite
//! Gauss–Legendre panels in the radius and the periodic trapezoid rule in
//! the angle. Panels are split where the field reports a non-smooth feature.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::fields::{Feature, FieldError, GridSamples, GridSpec, ScalarField};

/// Points per Gauss–Legendre panel.
pub const GL_ORDER: usize = 4;
/// Doublings attempted by [`disk_average`] before giving up on the tolerance.
pub const MAX_DOUBLINGS: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AverageError {
    #[error("disk of radius {r} at {z} exceeds the domain (boundary distance {dist})")]
    DiskExceedsDomain { z: Complex64, r: f64, dist: f64 },
    #[error("integrand is not integrable near {at}")]
    NonIntegrable { at: Complex64 },
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("invalid quadrature: {0}")]
    InvalidSpec(String),
    #[error("at node {node}: {source}")]
    AtNode { node: Complex64, source: Box<AverageError> },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    radial_panels: usize,
    angular_nodes: usize,
    tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { radial_panels: 8, angular_nodes: 64, tol: 1e-8 }
    }
}

impl QuadratureSpec {
    pub fn new(radial_panels: usize, angular_nodes: usize, tol: f64) -> Result<Self, AverageError> {
        if radial_panels < 4 || angular_nodes < 8 {
            return Err(AverageError::InvalidSpec(format!(
                "need at least 4 radial panels and 8 angular nodes, got {radial_panels} and {angular_nodes}"
            )));
        }
        if !(tol > 0.0 && tol <= 1e-2) {
            return Err(AverageError::InvalidSpec(format!("tolerance {tol} outside (0, 1e-2]")));
        }
        Ok(QuadratureSpec { radial_panels, angular_nodes, tol })
    }

    /// The cheapest admissible rule; used for grid sweeps.
    pub fn sweep(tol: f64) -> Self {
        QuadratureSpec { radial_panels: 2, angular_nodes: 8, tol: tol.clamp(f64::MIN_POSITIVE, 1e-2) }
    }

    pub fn radial_panels(&self) -> usize {
        self.radial_panels
    }

    pub fn angular_nodes(&self) -> usize {
        self.angular_nodes
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_tol(self, tol: f64) -> Self {
        QuadratureSpec { tol, ..self }
    }

    pub fn doubled(&self) -> Self {
        QuadratureSpec { radial_panels: 2 * self.radial_panels, angular_nodes: 2 * self.angular_nodes, tol: self.tol }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Average {
    pub value: f64,
    /// Difference between the last two rule levels (0 when exact).
    pub error_estimate: f64,
    pub converged: bool,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `Pₙ`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn gl() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Exact average of `ln|w − λ|` over the disk `|w − z| ≤ r`.
pub fn log_average(lambda: Complex64, z: Complex64, r: f64) -> f64 {
    let a = (lambda - z).norm();
    if a < r {
        r.ln() - 0.5 + a * a / (2.0 * r * r)
    } else {
        a.ln()
    }
}

fn push_panels(out: &mut Vec<(f64, f64)>, a: f64, b: f64, panels: usize) {
    let (x, w) = gl();
    let h = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
}

/// Panels in `u ∈ [0, 1]` mapped by `t = a + (b − a)u²` (`b < a` allowed), so that endpoint
/// terms `(t − a)^{k+1/2}` become polynomials in `u`.
fn push_graded_panels(out: &mut Vec<(f64, f64)>, a: f64, b: f64, panels: usize) {
    let start = out.len();
    push_panels(out, 0.0, 1.0, panels);
    for node in &mut out[start..] {
        let u = node.0;
        *node = (a + (b - a) * u * u, node.1 * 2.0 * (b - a).abs() * u);
    }
}

struct Geometry {
    /// `(angle of p − z, |p − z|)` for point features near the disk.
    points: Vec<(f64, f64)>,
    /// `(α, s₀, d)`: ray direction and `z e^{−iα} = s₀ + i d`.
    rays: Vec<(f64, f64, f64)>,
    breaks: Vec<f64>,
}

fn geometry(features: &[Feature], z: Complex64, r: f64) -> Geometry {
    let mut g = Geometry { points: Vec::new(), rays: Vec::new(), breaks: vec![0.0, r] };
    for f in features {
        match *f {
            Feature::Point(p) => {
                let v = p - z;
                let d = v.norm();
                if d < 1.5 * r {
                    g.points.push((v.im.atan2(v.re), d));
                    if d > 0.0 && d < r {
                        g.breaks.push(d);
                    }
                }
            }
            Feature::Ray(alpha) => {
                let u = z * Complex64::from_polar(1.0, -alpha);
                let d = if u.re >= 0.0 { u.im.abs() } else { z.norm() };
                if d < r {
                    g.rays.push((alpha, u.re, u.im));
                    if d > 0.0 {
                        g.breaks.push(d);
                    }
                }
            }
        }
    }
    g.breaks.sort_by(f64::total_cmp);
    g.breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * r);
    g
}

/// Angles where the ring `|w − z| = t` meets a feature, flagged when the
/// angle points at a point feature.
fn angular_breaks(g: &Geometry, z: Complex64, t: f64, out: &mut Vec<(f64, bool)>) {
    out.clear();
    for &(theta, _) in &g.points {
        out.push((theta.rem_euclid(TAU), true));
    }
    for &(alpha, s0, d) in &g.rays {
        let disc = t * t - d * d;
        if disc < 0.0 {
            continue;
        }
        let root = disc.sqrt();
        for s in [s0 - root, s0 + root] {
            if s >= 0.0 {
                let v = Complex64::from_polar(s, alpha) - z;
                out.push((v.im.atan2(v.re).rem_euclid(TAU), false));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out.dedup_by(|a, b| {
        let same = (a.0 - b.0).abs() <= 1e-13;
        if same {
            b.1 |= a.1;
        }
        same
    });
}

/// GL panels on `[a, b]`, graded towards the flagged ends.
fn push_graded(out: &mut Vec<(f64, f64)>, (a, pa): (f64, bool), (b, pb): (f64, bool), k: usize) {
    match (pa, pb) {
        (false, false) => push_panels(out, a, b, k),
        (true, false) => push_graded_panels(out, a, b, k),
        (false, true) => push_graded_panels(out, b, a, k),
        (true, true) => {
            let mid = 0.5 * (a + b);
            push_graded_panels(out, a, mid, k.div_ceil(2));
            push_graded_panels(out, b, mid, k.div_ceil(2));
        }
    }
}

/// `∬` of the regular part over the disk, with a fixed rule.
fn integrate_regular(f: &ScalarField, z: Complex64, r: f64, panels: usize, m: usize) -> Result<f64, AverageError> {
    let g = geometry(f.features(), z, r);
    let mut radial = Vec::new();
    for pair in g.breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let k = ((panels as f64 * (b - a) / r).ceil() as usize).max(1);
        // ring integrals are only piecewise smooth in t across feature radii
        push_graded(&mut radial, (a, a > 0.0), (b, b < r), k);
    }
    let mut breaks = Vec::new();
    let mut arc_nodes = Vec::new();
    let mut total = 0.0;
    let eval = |w: Complex64| -> Result<f64, AverageError> {
        let v = f.regular(w)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(AverageError::NonIntegrable { at: w })
        }
    };
    for &(t, wt) in &radial {
        angular_breaks(&g, z, t, &mut breaks);
        let mut ring = 0.0;
        if breaks.is_empty() {
            let h = TAU / m as f64;
            for k in 0..m {
                ring += eval(z + Complex64::from_polar(t, k as f64 * h))?;
            }
            ring *= h;
        } else {
            arc_nodes.clear();
            for (i, &a) in breaks.iter().enumerate() {
                let b = if i + 1 < breaks.len() { breaks[i + 1] } else { (breaks[0].0 + TAU, breaks[0].1) };
                let k = ((m as f64 * (b.0 - a.0) / (TAU * GL_ORDER as f64)).ceil() as usize).max(1);
                push_graded(&mut arc_nodes, a, b, k);
            }
            for &(theta, w) in &arc_nodes {
                ring += w * eval(z + Complex64::from_polar(t, theta))?;
            }
        }
        total += wt * t * ring;
    }
    Ok(total)
}

fn check_disk(f: &ScalarField, z: Complex64, r: f64) -> Result<(), AverageError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(AverageError::InvalidRadius(r));
    }
    let dist = f.domain().boundary_distance(z);
    if r >= dist {
        return Err(AverageError::DiskExceedsDomain { z, r, dist });
    }
    Ok(())
}

fn log_part(f: &ScalarField, z: Complex64, r: f64) -> f64 {
    f.log_terms().iter().map(|t| t.coeff * log_average(t.point, z, r)).sum()
}

/// Average with one fixed rule and no error control.
pub fn average_with_rule(f: &ScalarField, z: Complex64, r: f64, q: &QuadratureSpec) -> Result<f64, AverageError> {
    check_disk(f, z, r)?;
    let regular = if f.regular_is_zero() {
        0.0
    } else {
        integrate_regular(f, z, r, q.radial_panels, q.angular_nodes)? / (PI * r * r)
    };
    Ok(log_part(f, z, r) + regular)
}

/// Adaptive average: the rule is doubled until two successive levels agree
/// to `q.tol` (relative, absolute below 1).
pub fn disk_average(f: &ScalarField, z: Complex64, r: f64, q: &QuadratureSpec) -> Result<Average, AverageError> {
    check_disk(f, z, r)?;
    let logs = log_part(f, z, r);
    if f.regular_is_zero() {
        return Ok(Average { value: logs, error_estimate: 0.0, converged: true });
    }
    let area = PI * r * r;
    let mut spec = *q;
    let mut prev = integrate_regular(f, z, r, spec.radial_panels, spec.angular_nodes)? / area;
    let mut err = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        spec = spec.doubled();
        let cur = integrate_regular(f, z, r, spec.radial_panels, spec.angular_nodes)? / area;
        err = (cur - prev).abs();
        prev = cur;
        let value = logs + cur;
        if err <= q.tol * value.abs().max(1.0) {
            return Ok(Average { value, error_estimate: err, converged: true });
        }
    }
    Ok(Average { value: logs + prev, error_estimate: err, converged: false })
}

/// Grid of disk averages with node-dependent radius. Nodes outside the
/// field's domain carry no data.
pub fn average_field(
    f: &ScalarField,
    radius: impl Fn(Complex64) -> f64 + Sync,
    grid: &GridSpec,
    q: &QuadratureSpec,
) -> Result<ScalarField, AverageError> {
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let z = grid.node_at(k);
            if !f.domain().contains(z) {
                return Ok(f64::NAN);
            }
            disk_average(f, z, radius(z), q)
                .map(|a| a.value)
                .map_err(|e| AverageError::AtNode { node: z, source: Box::new(e) })
        })
        .collect::<Result<_, _>>()?;
    let samples = GridSamples::new(*grid, values)?;
    Ok(ScalarField::from_grid(samples, f.domain()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{parse_field, Domain, ZeroSequence};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 4, 7, 8] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            let deg = 2 * n - 1;
            let exact = if deg % 2 == 0 { 2.0 / (deg + 1) as f64 } else { 0.0 };
            let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
            assert!((got - exact).abs() < 1e-14);
            let even = 2.0 / (2 * n - 1) as f64;
            let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(2 * n as i32 - 2)).sum();
            assert!((got - even).abs() < 1e-14);
        }
    }

    #[test]
    fn log_average_is_continuous_across_the_rim() {
        let z = c(0.1, 0.2);
        let r = 0.3;
        let inside = log_average(z + Complex64::from_polar(r * (1.0 - 1e-12), 0.4), z, r);
        let outside = log_average(z + Complex64::from_polar(r * (1.0 + 1e-12), 0.4), z, r);
        assert!((inside - outside).abs() < 1e-10);
        assert!((log_average(z, z, r) - (r.ln() - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn examples() {
        let q = QuadratureSpec::default();
        let re = parse_field("re(z)", Domain::UnitDisk).unwrap();
        let a = disk_average(&re, c(0.3, 0.1), 0.2, &q).unwrap();
        assert!((a.value - 0.3).abs() < 1e-12);
        let sq = parse_field("pow(abs(z),2)", Domain::WholePlane).unwrap();
        assert!((disk_average(&sq, c(0.0, 0.0), 0.5, &q).unwrap().value - 0.125).abs() < 1e-12);
        let lg = parse_field("log(abs(z))", Domain::WholePlane).unwrap();
        let v = disk_average(&lg, c(0.0, 0.0), 0.7, &q).unwrap().value;
        assert!((v - (0.7f64.ln() - 0.5)).abs() < 1e-14);
    }

    #[test]
    fn parallel_axis_identity() {
        let sq = parse_field("re(z)*re(z) + im(z)*im(z)", Domain::WholePlane).unwrap();
        let z = c(0.4, -1.2);
        let v = disk_average(&sq, z, 0.3, &QuadratureSpec::default()).unwrap().value;
        assert!((v - (z.norm_sqr() + 0.045)).abs() < 1e-12);
    }

    #[test]
    fn disk_must_fit() {
        let f = parse_field("0", Domain::UnitDisk).unwrap();
        assert!(matches!(
            disk_average(&f, c(0.5, 0.0), 0.5, &QuadratureSpec::default()),
            Err(AverageError::DiskExceedsDomain { .. })
        ));
        assert!(matches!(
            disk_average(&f, c(0.0, 0.0), -1.0, &QuadratureSpec::default()),
            Err(AverageError::InvalidRadius(_))
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(3, 64, 1e-8).is_err());
        assert!(QuadratureSpec::new(4, 7, 1e-8).is_err());
        assert!(QuadratureSpec::new(4, 8, 0.1).is_err());
        assert!(QuadratureSpec::new(4, 8, 1e-2).is_ok());
    }

    #[test]
    fn potentials_average_in_closed_form() {
        let seq = ZeroSequence::new(vec![(c(0.1, 0.0), 2), (c(-0.5, 0.3), 1)]).unwrap();
        let f = ScalarField::potential(&seq, Domain::WholePlane);
        let z = c(0.0, 0.1);
        let r = 0.4;
        let want = 2.0 * log_average(c(0.1, 0.0), z, r) + log_average(c(-0.5, 0.3), z, r);
        let got = disk_average(&f, z, r, &QuadratureSpec::default()).unwrap();
        assert_eq!(got.value, want);
    }

    #[test]
    fn opaque_log_is_integrated_numerically() {
        // a closure hides the singularity; the quadrature still converges
        let f = ScalarField::from_fn(Domain::WholePlane, |w| (w - Complex64::new(0.05, 0.0)).norm().ln());
        let q = QuadratureSpec::new(16, 64, 1e-4).unwrap();
        let v = disk_average(&f, c(0.0, 0.0), 0.5, &q).unwrap().value;
        let want = log_average(c(0.05, 0.0), c(0.0, 0.0), 0.5);
        assert!((v - want).abs() < 1e-3, "{v} vs {want}");
    }

    #[test]
    fn average_field_marks_outside_nodes() {
        let f = parse_field("re(z)", Domain::UnitDisk).unwrap();
        let g = GridSpec::centered(1.0, 0.5).unwrap();
        let out = average_field(&f, |z| 0.25 * (1.0 - z.norm()), &g, &QuadratureSpec::default()).unwrap();
        let s = out.grid_samples().unwrap();
        assert!(s.value(0, 0).is_nan());
        assert!((s.value(2, 2) - 0.0).abs() < 1e-12);
        assert!((s.value(3, 2) - 0.5).abs() < 1e-12);
    }
}

use std::f64::consts::PI;

use super::extension::{profile_max, profile_min};
use super::{defect_measure, DefectMeasure, PeriodicProfile, TcError};

/// Tolerance for derivative conditions computed by differences.
const DERIV_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplementReport {
    pub holds: bool,
    /// `(θ, value)` of the smallest regular density of `h₂ − h₁`.
    pub min_density: (f64, f64),
    pub min_atom: Option<(f64, f64)>,
    pub defect: DefectMeasure,
}

/// `h₁` is complementable to `h₂` when `(h₂−h₁)″ + ρ²(h₂−h₁) ≥ 0`.
pub fn complementable(h1: &PeriodicProfile, h2: &PeriodicProfile, rho: f64, tol: f64) -> Result<ComplementReport, TcError> {
    let diff = h2.minus(h1)?;
    let defect = defect_measure(&diff, rho)?;
    Ok(ComplementReport {
        holds: defect.is_nonnegative(tol),
        min_density: defect.min_density(),
        min_atom: defect.min_atom(),
        defect,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QThreshold {
    pub value: f64,
    pub c: f64,
    pub big_c: f64,
    /// True when `C` was estimated from the samples.
    pub big_c_estimated: bool,
    pub min_g: f64,
    pub max_h: f64,
}

/// `max(0, sup h″)` over the regular part of `h`; the constant in
/// `h′(ψ) − h′(φ) ≤ C(ψ − φ)` when `h′` has no upward jumps.
fn estimate_big_c(h: &PeriodicProfile, rho: f64) -> Result<f64, TcError> {
    let (hc, _) = curvature(h, rho)?;
    Ok(hc.second.iter().cloned().fold(0.0, f64::max))
}

/// `(C + ρ² max h) / (ρ² min g − c)`.
pub fn q_threshold(
    g: &PeriodicProfile,
    h: &PeriodicProfile,
    rho: f64,
    c: f64,
    big_c: Option<f64>,
) -> Result<QThreshold, TcError> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(TcError::InvalidRho(rho));
    }
    if c < 0.0 {
        return Err(TcError::PreconditionViolated(format!("c = {c} is negative")));
    }
    let min_g = profile_min(g);
    let max_h = profile_max(h);
    let denom = rho * rho * min_g - c;
    if denom <= 0.0 {
        return Err(TcError::Denominator(denom));
    }
    let (cc, estimated) = match big_c {
        Some(v) => (v, false),
        None => (estimate_big_c(h, rho)?, true),
    };
    Ok(QThreshold {
        value: (cc + rho * rho * max_h) / denom,
        c,
        big_c: cc,
        big_c_estimated: estimated,
        min_g,
        max_h,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Bullet {
    pub holds: bool,
    pub failures: Vec<String>,
}

impl Bullet {
    fn from_failures(failures: Vec<String>) -> Self {
        Bullet { holds: failures.is_empty(), failures }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BulletReport {
    pub bullet1: Bullet,
    pub bullet2: Bullet,
    pub bullet3: Bullet,
    /// First bullet whose hypotheses all hold.
    pub licensed: Option<u8>,
    pub notes: Vec<String>,
}

/// Second-derivative data of a profile: regular `f″` at nodes plus jump atoms.
struct Curvature {
    second: Vec<f64>,
    atoms: Vec<(f64, f64)>,
}

fn curvature(p: &PeriodicProfile, rho: f64) -> Result<(Curvature, DefectMeasure), TcError> {
    let d = defect_measure(p, rho)?;
    let second = d.density.iter().zip(p.samples()).map(|(v, f)| v - rho * rho * f).collect();
    Ok((Curvature { second, atoms: d.atoms.clone() }, d))
}

fn fmt_min(v: &[f64], s: f64) -> (f64, f64) {
    v.iter().enumerate().fold((0.0, f64::INFINITY), |acc, (k, x)| if *x < acc.1 { (k as f64 * s, *x) } else { acc })
}

fn fmt_max(v: &[f64], s: f64) -> (f64, f64) {
    v.iter().enumerate().fold((0.0, f64::NEG_INFINITY), |acc, (k, x)| if *x > acc.1 { (k as f64 * s, *x) } else { acc })
}

/// Checks the hypotheses of the three sufficient conditions for the
/// threshold contract of [`q_threshold`].
pub fn verify_bullet_conditions(
    g: &PeriodicProfile,
    h: &PeriodicProfile,
    rho: f64,
    c: f64,
    big_c: Option<f64>,
) -> Result<BulletReport, TcError> {
    let s = g.step();
    let (gc, gd) = curvature(g, rho)?;
    let (hc, hd) = curvature(h, rho)?;
    let min_g = profile_min(g);
    let mut notes = Vec::new();
    let cc = match big_c {
        Some(v) => v,
        None => {
            notes.push("C not supplied; estimated as max(0, sup h″)".to_string());
            hc.second.iter().cloned().fold(0.0, f64::max)
        }
    };

    let mut common = Vec::new();
    if !gd.is_nonnegative(DERIV_TOL) {
        common.push(format!("g is not {rho}-trigonometrically convex (min density {:e})", gd.min_density().1));
    }
    if !hd.is_nonnegative(DERIV_TOL) {
        common.push(format!("h is not {rho}-trigonometrically convex (min density {:e})", hd.min_density().1));
    }

    // h′(ψ) − h′(φ) ≤ C(ψ − φ)
    let mut eq13 = Vec::new();
    let (at, hmax2) = fmt_max(&hc.second, s);
    if hmax2 > cc + DERIV_TOL {
        eq13.push(format!("h″ reaches {hmax2} > C = {cc} at θ = {at}"));
    }
    if let Some((t, m)) = hc.atoms.iter().cloned().find(|a| a.1 > 0.0) {
        eq13.push(format!("h′ jumps up by {m} at θ = {t}; no finite C works"));
    }
    // g′(ψ) − g′(φ) ≥ −c(ψ − φ)
    let mut eq12 = Vec::new();
    let (at, gmin2) = fmt_min(&gc.second, s);
    if gmin2 < -c - DERIV_TOL {
        eq12.push(format!("g″ reaches {gmin2} < −c = {} at θ = {at}", -c));
    }
    if let Some((t, m)) = gc.atoms.iter().cloned().find(|a| a.1 < 0.0) {
        eq12.push(format!("g′ jumps down by {} at θ = {t}", -m));
    }

    let mut b1 = common.clone();
    if !gc.atoms.is_empty() {
        b1.push(format!("g is not C¹: derivative jump at θ = {}", gc.atoms[0].0));
    }
    b1.extend(eq12.iter().cloned());
    if !(c > 0.0 && c < rho * rho * min_g) {
        b1.push(format!("c = {c} outside (0, ρ²·min g) = (0, {})", rho * rho * min_g));
    }
    b1.extend(eq13.iter().cloned());

    let mut b2 = common.clone();
    if c != 0.0 {
        b2.push(format!("requires c = 0, got {c}"));
    }
    if min_g <= 0.0 {
        b2.push(format!("min g = {min_g} ≤ 0: outside the threshold contract"));
    }
    let shift = PI / rho;
    let shifted = g.shifted_samples(shift)?;
    let (at, pair_min) = fmt_min(&g.samples().iter().zip(&shifted).map(|(a, b)| a + b).collect::<Vec<_>>(), s);
    if pair_min <= 0.0 {
        b2.push(format!("min g(θ) + g(θ + π/ρ) = {pair_min} ≤ 0 at θ = {at}"));
    }
    // g′ nondecreasing on [0, 2π): the wrap at node 0 is excluded
    let (at, inner_min) = fmt_min(&gc.second[1..], s);
    if inner_min < -DERIV_TOL {
        b2.push(format!("g′ decreases: g″ = {inner_min} at θ = {}", at + s));
    }
    if let Some((t, m)) = gc.atoms.iter().cloned().find(|a| a.1 < 0.0 && a.0 > 0.5 * s && a.0 < 2.0 * PI - 0.5 * s) {
        b2.push(format!("g′ jumps down by {} at θ = {t}", -m));
    }
    b2.extend(eq13.iter().cloned());

    let mut b3 = common;
    b3.extend(eq12.iter().cloned());
    if !hc.atoms.is_empty() {
        b3.push(format!("h″ is unbounded: derivative jump at θ = {}", hc.atoms[0].0));
    }
    let sup = hc.second.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sup > cc + DERIV_TOL {
        b3.push(format!("sup |h″| = {sup} exceeds C = {cc}"));
    }
    if rho * rho * min_g - c <= 0.0 {
        b3.push(format!("ρ²·min g − c = {} ≤ 0", rho * rho * min_g - c));
    }

    let bullets = [Bullet::from_failures(b1), Bullet::from_failures(b2), Bullet::from_failures(b3)];
    let licensed = bullets.iter().position(|b| b.holds).map(|i| i as u8 + 1);
    let [bullet1, bullet2, bullet3] = bullets;
    Ok(BulletReport { bullet1, bullet2, bullet3, licensed, notes })
}

use std::f64::consts::TAU;

use super::{PeriodicProfile, TcError};

/// Minimum samples for any defect computation.
pub const MIN_SAMPLES: usize = 64;

/// Spikes whose residual mass falls below this (relative to the profile
/// scale) are left in the regular density.
const ATOM_MASS_FLOOR: f64 = 1e-4;
/// A node is an atom candidate when its residual exceeds this multiple of
/// the median absolute second difference.
const SPIKE_FACTOR: f64 = 8.0;

/// The measure `h″ + ρ²h`: nodal regular density plus atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectMeasure {
    pub rho: f64,
    /// Density at `θₖ = 2πk/n`.
    pub density: Vec<f64>,
    /// `(angle in [0, 2π), mass)`.
    pub atoms: Vec<(f64, f64)>,
}

impl DefectMeasure {
    pub fn n(&self) -> usize {
        self.density.len()
    }

    pub fn step(&self) -> f64 {
        TAU / self.n() as f64
    }

    /// `(θ, value)` of the smallest density value.
    pub fn min_density(&self) -> (f64, f64) {
        let (k, v) = self
            .density
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, v)| if *v < acc.1 { (k, *v) } else { acc });
        (k as f64 * self.step(), v)
    }

    pub fn min_atom(&self) -> Option<(f64, f64)> {
        self.atoms.iter().cloned().reduce(|a, b| if b.1 < a.1 { b } else { a })
    }

    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.min_density().1 >= -tol && self.atoms.iter().all(|a| a.1 >= -tol)
    }

    pub fn total(&self) -> f64 {
        self.step() * self.density.iter().sum::<f64>() + self.atoms.iter().map(|a| a.1).sum::<f64>()
    }

    /// Mass of the closed arc `[a, b]` (`0 ≤ b − a ≤ 2π`); the density is
    /// integrated as its periodic piecewise-linear interpolant.
    pub fn mass_on(&self, a: f64, b: f64) -> f64 {
        debug_assert!(b >= a && b - a <= TAU + 1e-12);
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|(t, _)| (t - a).rem_euclid(TAU) <= b - a || b - a >= TAU)
            .map(|a| a.1)
            .sum();
        atoms + self.primitive(b) - self.primitive(a)
    }

    /// Antiderivative of the interpolated density from 0, extended
    /// quasi-periodically.
    fn primitive(&self, x: f64) -> f64 {
        let s = self.step();
        let n = self.n();
        let period_mass = s * self.density.iter().sum::<f64>();
        let turns = (x / TAU).floor();
        let u = (x - turns * TAU) / s;
        let k = (u.floor() as usize).min(n - 1);
        let t = u - k as f64;
        let full: f64 = s * (0..k).map(|j| 0.5 * (self.density[j] + self.density[(j + 1) % n])).sum::<f64>();
        let d0 = self.density[k];
        let d1 = self.density[(k + 1) % n];
        turns * period_mass + full + s * (d0 * t + 0.5 * (d1 - d0) * t * t)
    }

    pub fn scaled(&self, c: f64) -> Self {
        DefectMeasure {
            rho: self.rho,
            density: self.density.iter().map(|d| c * d).collect(),
            atoms: self.atoms.iter().map(|&(t, m)| (t, c * m)).collect(),
        }
    }
}

fn second_diff(v: &[f64], s: f64) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|k| (v[(k + 1) % n] - 2.0 * v[k] + v[(k + n - 1) % n]) / (s * s)).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

/// Second difference minus a robust local estimate of its regular part
/// (median over `k±2..k±6`).
fn residuals(dd: &[f64]) -> Vec<f64> {
    let n = dd.len() as isize;
    (0..n)
        .map(|k| {
            let window: Vec<f64> =
                (2..=6).flat_map(|d| [k - d, k + d]).map(|j| dd[j.rem_euclid(n) as usize]).collect();
            dd[k as usize] - median(window)
        })
        .collect()
}

struct Cluster {
    nodes: Vec<usize>,
    centroid: f64,
}

fn clusters(res: &[f64], dd: &[f64], scale: f64, s: f64) -> Vec<Cluster> {
    let n = res.len();
    let threshold = (SPIKE_FACTOR * median(dd.iter().map(|d| d.abs()).collect())).max(ATOM_MASS_FLOOR * scale / s);
    let flagged: Vec<bool> = res.iter().map(|r| r.abs() > threshold).collect();
    if flagged.iter().all(|f| *f) {
        return Vec::new();
    }
    let start = flagged.iter().position(|f| !f).expect("some node unflagged");
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for step in 1..=n {
        let k = (start + step) % n;
        if flagged[k] {
            current.push(k);
        } else if !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
    }
    out.into_iter()
        .map(|nodes| {
            let w: f64 = nodes.iter().map(|&k| res[k]).sum();
            let base = nodes[0] as f64;
            // offsets measured from the first node so wrapped clusters stay contiguous
            let off: f64 = nodes
                .iter()
                .map(|&k| res[k] * (((k + n - nodes[0]) % n) as f64))
                .sum::<f64>()
                / w;
            Cluster { centroid: ((base + off) * s).rem_euclid(TAU), nodes }
        })
        .collect()
}

/// Nodes within 1.5 steps of `centre`, as unwrapped indices.
fn window(s: f64, centre: f64) -> (isize, isize) {
    let x = centre / s;
    ((x - 1.5).ceil() as isize, (x + 1.5).floor() as isize)
}

/// Cubic through `(1, y[0])..(4, y[3])`, evaluated at `x`.
fn lagrange4(y: [f64; 4], x: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let xi = (i + 1) as f64;
        let mut w = 1.0;
        for j in (0..4).filter(|&j| j != i) {
            let xj = (j + 1) as f64;
            w *= (x - xj) / (xi - xj);
        }
        acc += w * y[i];
    }
    acc
}

/// Regular second difference inside `lo..=hi`, extrapolated by cubics from
/// the four nodes on whichever side of `split` (node units) a node lies,
/// blended within half a step of it.
fn bridge(dd: &[f64], lo: isize, hi: isize, split: f64) -> Vec<(usize, f64)> {
    let n = dd.len() as isize;
    let at = |k: isize| dd[k.rem_euclid(n) as usize];
    let left = [at(lo - 1), at(lo - 2), at(lo - 3), at(lo - 4)];
    let right = [at(hi + 1), at(hi + 2), at(hi + 3), at(hi + 4)];
    (lo..=hi)
        .map(|k| {
            // distances measured outward from each side of the window
            let l = lagrange4(left, (lo - k) as f64);
            let r = lagrange4(right, (k - hi) as f64);
            let w = (k as f64 - split + 0.5).clamp(0.0, 1.0);
            (k.rem_euclid(n) as usize, (1.0 - w) * l + w * r)
        })
        .collect()
}

fn mass_near(dd: &[f64], s: f64, centre: f64) -> f64 {
    let (lo, hi) = window(s, centre);
    s * bridge(dd, lo, hi, centre / s).into_iter().map(|(k, reg)| dd[k] - reg).sum::<f64>()
}

/// Kink position from the two one-sided secant lines around a cluster.
fn locate(v: &[f64], s: f64, c: &Cluster) -> f64 {
    let n = v.len() as isize;
    let first = c.nodes[0] as isize;
    let last = first + ((c.nodes[c.nodes.len() - 1] as isize - first).rem_euclid(n));
    let at = |k: isize| v[k.rem_euclid(n) as usize];
    let (l1, l0) = (first - 1, first - 2);
    let (r0, r1) = (last + 1, last + 2);
    let sl = at(l1) - at(l0);
    let sr = at(r1) - at(r0);
    if (sl - sr).abs() < 1e-300 {
        return c.centroid;
    }
    // at(l1) + sl (x - l1) = at(r0) + sr (x - r0), x in node units
    let x = (at(r0) - at(l1) + sl * l1 as f64 - sr * r0 as f64) / (sl - sr);
    if x < l1 as f64 || x > r0 as f64 {
        c.centroid
    } else {
        (x * s).rem_euclid(TAU)
    }
}

enum Confirmation {
    Atom,
    Smooth,
    Unstable(f64),
}

fn confirm(coarse_mass: f64, fine_mass: f64) -> Confirmation {
    let ratio = fine_mass / coarse_mass;
    if (0.75..=1.0 / 0.75).contains(&ratio) {
        Confirmation::Atom
    } else if ratio <= 0.6 {
        Confirmation::Smooth
    } else {
        Confirmation::Unstable(ratio)
    }
}

struct Level {
    values: Vec<f64>,
    step: f64,
    dd: Vec<f64>,
    res: Vec<f64>,
}

impl Level {
    fn new(values: Vec<f64>) -> Self {
        let step = TAU / values.len() as f64;
        let dd = second_diff(&values, step);
        let res = residuals(&dd);
        Level { values, step, dd, res }
    }
}

fn interleave(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).flat_map(|(x, y)| [*x, *y]).collect()
}

struct Detected {
    cluster: Cluster,
    angle: f64,
    mass: f64,
}

/// Atom detection on `base`, confirmed against a second resolution:
/// the interleaved half-step samples when given, otherwise the even
/// subsample. Returns the accepted atoms.
fn detect(base: &Level, half: Option<&[f64]>) -> Result<Vec<Detected>, TcError> {
    let scale = base.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let found = clusters(&base.res, &base.dd, scale, base.step);
    if found.is_empty() {
        return Ok(Vec::new());
    }
    let other = match half {
        Some(h) => Level::new(interleave(&base.values, h)),
        None if base.values.len() % 2 == 0 && base.values.len() >= 32 => {
            Level::new(base.values.iter().step_by(2).cloned().collect())
        }
        None => return Err(TcError::ResolutionInsufficient { angle: found[0].centroid, ratio: f64::NAN }),
    };
    let base_is_coarse = half.is_some();
    let mut out = Vec::new();
    for c in found {
        let here = mass_near(&base.dd, base.step, c.centroid);
        let there = mass_near(&other.dd, other.step, c.centroid);
        let (coarse, fine) = if base_is_coarse { (here, there) } else { (there, here) };
        match confirm(coarse, fine) {
            Confirmation::Atom => out.push(Detected { angle: locate(&base.values, base.step, &c), mass: fine, cluster: c }),
            Confirmation::Smooth => {}
            Confirmation::Unstable(ratio) => {
                return Err(TcError::ResolutionInsufficient { angle: c.centroid, ratio });
            }
        }
    }
    Ok(out)
}

/// Derivative-jump locations of a sampled profile; used to split quadrature.
pub(crate) fn kink_angles(samples: &[f64], half: Option<&[f64]>) -> Vec<f64> {
    if samples.len() < 16 {
        return Vec::new();
    }
    let mut angles: Vec<f64> =
        detect(&Level::new(samples.to_vec()), half).map(|d| d.into_iter().map(|a| a.angle).collect()).unwrap_or_default();
    angles.sort_by(f64::total_cmp);
    angles
}

/// `h″ + ρ²h` by second differences. With an analytic source the regular
/// part is Richardson-extrapolated from steps `s` and `s/2`.
pub fn defect_measure(h: &PeriodicProfile, rho: f64) -> Result<DefectMeasure, TcError> {
    let n = h.n();
    if n < MIN_SAMPLES {
        return Err(TcError::TooFewSamples { n, min: MIN_SAMPLES });
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(TcError::InvalidRho(rho));
    }
    let s = h.step();
    let base = Level::new(h.samples().to_vec());
    let half = match h.source() {
        Some(_) => Some((h.shifted_samples(0.5 * s)?, h.shifted_samples(-0.5 * s)?)),
        None => None,
    };
    let atoms = detect(&base, half.as_ref().map(|(p, _)| p.as_slice()))?;

    let mut second: Vec<f64> = match &half {
        Some((plus, minus)) => (0..n)
            .map(|k| {
                let fine = (plus[k] - 2.0 * base.values[k] + minus[k]) / (0.25 * s * s);
                (4.0 * fine - base.dd[k]) / 3.0
            })
            .collect(),
        None => base.dd.clone(),
    };
    for a in &atoms {
        // Richardson mixes the spike into the immediate neighbours
        let pad = if half.is_some() { 1 } else { 0 };
        let first = a.cluster.nodes[0] as isize;
        let last = first + (a.cluster.nodes[a.cluster.nodes.len() - 1] as isize - first).rem_euclid(n as isize);
        let split = first as f64 + (a.angle / s - first as f64 + 0.5 * n as f64).rem_euclid(n as f64) - 0.5 * n as f64;
        for (k, reg) in bridge(&second, first - pad, last + pad, split) {
            second[k] = reg;
        }
    }
    let density = (0..n).map(|k| second[k] + rho * rho * base.values[k]).collect();
    let mut atoms: Vec<(f64, f64)> = atoms.into_iter().map(|a| (a.angle, a.mass)).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(DefectMeasure { rho, density, atoms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn named(name: &str) -> PeriodicProfile {
        PeriodicProfile::named(name, 512).unwrap()
    }

    #[test]
    fn constant_has_flat_density() {
        let d = defect_measure(&PeriodicProfile::constant(1.0, 256), 2.0).unwrap();
        assert!(d.atoms.is_empty());
        assert!(d.density.iter().all(|v| (v - 4.0).abs() < 1e-9));
    }

    #[test]
    fn cosine_at_rho_one_is_null() {
        let d = defect_measure(&named("cos"), 1.0).unwrap();
        assert!(d.atoms.is_empty());
        assert!(d.density.iter().all(|v| v.abs() < 1e-9), "{:?}", d.min_density());
    }

    #[test]
    fn abs_sine_has_two_atoms_of_mass_two() {
        let d = defect_measure(&named("abssin"), 1.0).unwrap();
        assert_eq!(d.atoms.len(), 2);
        for (a, (t, m)) in d.atoms.iter().enumerate() {
            assert!((t - a as f64 * PI).abs() < 1e-9);
            assert!((m - 2.0).abs() < 1e-3, "mass {m}");
        }
        // the node on a kink is extrapolated from both sides, accurate to O(s⁵)
        assert!(d.density.iter().all(|v| v.abs() < 1e-8), "{:?}", d.min_density());
    }

    #[test]
    fn sample_only_profiles_use_coarsening() {
        let p = named("abssin");
        let raw = PeriodicProfile::from_samples(p.samples().to_vec(), "raw").unwrap();
        let d = defect_measure(&raw, 1.0).unwrap();
        assert_eq!(d.atoms.len(), 2);
        assert!((d.atoms[0].1 - 2.0).abs() < 1e-3);
    }

    #[test]
    fn arc_mass_integrates_density_and_atoms() {
        let d = defect_measure(&PeriodicProfile::constant(1.0, 256), 1.0).unwrap();
        assert!((d.mass_on(0.0, TAU) - TAU).abs() < 1e-9);
        assert!((d.mass_on(-0.1, 0.1) - 0.2).abs() < 1e-9);
        let e = defect_measure(&named("abssin"), 1.0).unwrap();
        assert!((e.mass_on(-0.1, 0.1) - 2.0).abs() < 1e-3);
        assert!(e.mass_on(0.5, 1.0).abs() < 1e-6);
    }

    #[test]
    fn resolution_floor() {
        assert!(matches!(
            defect_measure(&PeriodicProfile::constant(1.0, 32), 1.0),
            Err(TcError::TooFewSamples { .. })
        ));
    }
}

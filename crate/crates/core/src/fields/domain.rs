use std::fmt;

use num_complex::Complex64;

/// Plane regions on which weights live.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    UnitDisk,
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    WholePlane,
}

impl Domain {
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Option<Self> {
        (x0 < x1 && y0 < y1 && [x0, x1, y0, y1].iter().all(|v| v.is_finite()))
            .then_some(Domain::Rectangle { x0, x1, y0, y1 })
    }

    /// Euclidean distance from `z` to the boundary. Non-positive outside the
    /// open region; `+∞` everywhere for the whole plane.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        match *self {
            Domain::UnitDisk => 1.0 - z.norm(),
            Domain::Rectangle { x0, x1, y0, y1 } => {
                (z.re - x0).min(x1 - z.re).min(z.im - y0).min(y1 - z.im)
            }
            Domain::WholePlane => f64::INFINITY,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.boundary_distance(z) > 0.0
    }

    /// True when the complement of the closure is nonempty, which for the
    /// kinds available here means "not the whole plane".
    pub fn is_bounded(&self) -> bool {
        !matches!(self, Domain::WholePlane)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::UnitDisk => write!(f, "disk"),
            Domain::Rectangle { x0, x1, y0, y1 } => write!(f, "rect:{x0},{x1},{y0},{y1}"),
            Domain::WholePlane => write!(f, "plane"),
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "disk" | "unit-disk" => Ok(Domain::UnitDisk),
            "plane" | "whole-plane" => Ok(Domain::WholePlane),
            _ => {
                let body = s
                    .strip_prefix("rect:")
                    .ok_or_else(|| format!("unknown domain `{s}` (disk | rect:x0,x1,y0,y1 | plane)"))?;
                let v = parse_floats(body)?;
                if v.len() != 4 {
                    return Err(format!("rect needs 4 numbers, got {}", v.len()));
                }
                Domain::rectangle(v[0], v[1], v[2], v[3])
                    .ok_or_else(|| format!("degenerate rectangle `{body}`"))
            }
        }
    }
}

pub(crate) fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number `{}`: {e}", t.trim())))
        .collect()
}

/// Closed sets used for counting zeros and describing measure cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disk { center: Complex64, radius: f64 },
}

impl Region {
    pub fn disk(center: Complex64, radius: f64) -> Self {
        Region::Disk { center, radius }
    }

    pub fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Region::Rect { x0, x1, y0, y1 }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Region::Rect { x0, x1, y0, y1 } => (x1 - x0) * (y1 - y0),
            Region::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
        }
    }

    pub fn center(&self) -> Complex64 {
        match *self {
            Region::Rect { x0, x1, y0, y1 } => Complex64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1)),
            Region::Disk { center, .. } => center,
        }
    }

    /// Axis-aligned bounding box `(x0, x1, y0, y1)`.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        match *self {
            Region::Rect { x0, x1, y0, y1 } => (x0, x1, y0, y1),
            Region::Disk { center, radius } => (
                center.re - radius,
                center.re + radius,
                center.im - radius,
                center.im + radius,
            ),
        }
    }

    /// Interiors intersect (touching boundaries do not count).
    pub fn overlaps(&self, other: &Region) -> bool {
        match (*self, *other) {
            (Region::Disk { center: a, radius: ra }, Region::Disk { center: b, radius: rb }) => {
                (a - b).norm() < ra + rb
            }
            (Region::Rect { x0, x1, y0, y1 }, Region::Disk { center, radius })
            | (Region::Disk { center, radius }, Region::Rect { x0, x1, y0, y1 }) => {
                let dx = (x0 - center.re).max(center.re - x1).max(0.0);
                let dy = (y0 - center.im).max(center.im - y1).max(0.0);
                dx.hypot(dy) < radius
            }
            (a, b) => {
                let (ax0, ax1, ay0, ay1) = a.bbox();
                let (bx0, bx1, by0, by1) = b.bbox();
                ax0.max(bx0) < ax1.min(bx1) && ay0.max(by0) < ay1.min(by1)
            }
        }
    }
}

/// Point sets a measure can be evaluated on.
pub trait Shape {
    /// Closed membership.
    fn contains(&self, z: Complex64) -> bool;

    /// A lower bound on the distance from `z` to the boundary of the set.
    /// Zero is always a valid answer.
    fn clearance(&self, z: Complex64) -> f64;
}

impl Shape for Region {
    fn contains(&self, z: Complex64) -> bool {
        match *self {
            Region::Rect { x0, x1, y0, y1 } => {
                z.re >= x0 && z.re <= x1 && z.im >= y0 && z.im <= y1
            }
            Region::Disk { center, radius } => (z - center).norm() <= radius,
        }
    }

    fn clearance(&self, z: Complex64) -> f64 {
        match *self {
            Region::Rect { x0, x1, y0, y1 } => {
                if Shape::contains(self, z) {
                    (z.re - x0).min(x1 - z.re).min(z.im - y0).min(y1 - z.im)
                } else {
                    0.0
                }
            }
            Region::Disk { center, radius } => ((z - center).norm() - radius).abs(),
        }
    }
}

/// Annular sector `{r₁ ≤ |z| ≤ r₂, arg z ∈ [θa, θb]}` (angles taken modulo
/// 2π, `θb - θa` in `(0, 2π]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub r_inner: f64,
    pub r_outer: f64,
    pub theta_start: f64,
    pub theta_end: f64,
}

impl Sector {
    pub fn new(r_inner: f64, r_outer: f64, theta_start: f64, theta_end: f64) -> Self {
        debug_assert!(0.0 <= r_inner && r_inner < r_outer);
        debug_assert!(theta_end > theta_start && theta_end - theta_start <= std::f64::consts::TAU + 1e-12);
        Sector { r_inner, r_outer, theta_start, theta_end }
    }

    pub fn width(&self) -> f64 {
        self.theta_end - self.theta_start
    }

    fn angle_inside(&self, theta: f64) -> bool {
        let off = (theta - self.theta_start).rem_euclid(std::f64::consts::TAU);
        off <= self.width() || self.width() >= std::f64::consts::TAU
    }
}

impl Shape for Sector {
    fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        if r < self.r_inner || r > self.r_outer {
            return false;
        }
        r == 0.0 || self.angle_inside(z.arg())
    }

    fn clearance(&self, z: Complex64) -> f64 {
        let r = z.norm();
        let mut d = (r - self.r_inner).abs().min((r - self.r_outer).abs());
        if self.width() < std::f64::consts::TAU {
            for theta in [self.theta_start, self.theta_end] {
                // distance to the full line through the origin bounds the ray distance
                let dir = Complex64::from_polar(1.0, theta);
                d = d.min((z * dir.conj()).im.abs());
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_distance_is_exact() {
        let z = Complex64::new(0.3, -0.4);
        assert!((Domain::UnitDisk.boundary_distance(z) - 0.5).abs() < 1e-15);
        let r = Domain::rectangle(-1.0, 2.0, -0.5, 0.5).unwrap();
        assert!((r.boundary_distance(z) - 0.1).abs() < 1e-15);
        assert_eq!(Domain::WholePlane.boundary_distance(z), f64::INFINITY);
    }

    #[test]
    fn domain_round_trips_through_text() {
        for d in [Domain::UnitDisk, Domain::WholePlane, Domain::rectangle(0.0, 1.0, -2.0, 3.5).unwrap()] {
            let back: Domain = d.to_string().parse().unwrap();
            assert_eq!(back, d);
        }
        assert!("rect:1,0,0,1".parse::<Domain>().is_err());
        assert!("annulus".parse::<Domain>().is_err());
    }

    #[test]
    fn regions_are_closed() {
        let d = Region::disk(Complex64::new(0.0, 0.0), 1.0);
        assert!(Shape::contains(&d, Complex64::new(1.0, 0.0)));
        let r = Region::rect(0.0, 1.0, 0.0, 1.0);
        assert!(Shape::contains(&r, Complex64::new(1.0, 1.0)));
        assert!(!Shape::contains(&r, Complex64::new(1.0 + 1e-12, 1.0)));
    }

    #[test]
    fn sector_membership_wraps_angles() {
        let s = Sector::new(0.5, 1.0, -0.1, 0.1);
        assert!(s.contains(Complex64::from_polar(0.7, 0.05)));
        assert!(s.contains(Complex64::from_polar(0.7, -0.05)));
        assert!(!s.contains(Complex64::from_polar(0.7, 0.2)));
        assert!(!s.contains(Complex64::from_polar(0.4, 0.0)));
        let t = Sector::new(0.0, 1.0, 3.0, 3.3);
        assert!(t.contains(Complex64::from_polar(0.5, -3.1)));
    }

    #[test]
    fn sector_clearance_is_a_lower_bound() {
        let s = Sector::new(0.5, 1.0, -0.3, 0.4);
        let z = Complex64::from_polar(0.75, 0.0);
        let c = s.clearance(z);
        assert!(c > 0.0 && c <= 0.25);
        for k in 0..64 {
            let w = z + Complex64::from_polar(0.999 * c, k as f64 * 0.1);
            assert!(s.contains(w));
        }
    }

    #[test]
    fn overlap_ignores_shared_edges() {
        let a = Region::rect(0.0, 1.0, 0.0, 1.0);
        let b = Region::rect(1.0, 2.0, 0.0, 1.0);
        assert!(!a.overlaps(&b));
        assert!(a.overlaps(&Region::rect(0.5, 2.0, 0.5, 2.0)));
        assert!(a.overlaps(&Region::disk(Complex64::new(1.2, 0.5), 0.3)));
        assert!(!a.overlaps(&Region::disk(Complex64::new(1.5, 0.5), 0.3)));
    }
}

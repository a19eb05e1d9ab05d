use num_complex::Complex64;

use super::{FieldError, GridSpec, Region, Shape};

/// Cell masses plus point atoms. Measures built from user input are
/// validated (nonnegative, disjoint cells); measures produced by stencils
/// may carry small negative cell masses and are built with [`DiscreteMeasure::signed`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteMeasure {
    cells: Vec<(Region, f64)>,
    atoms: Vec<(Complex64, f64)>,
}

pub const CELLWISE_NOTE: &str =
    "cellwise comparison on the partition only; the Borel-set condition is not fully checked";

impl DiscreteMeasure {
    pub fn new(cells: Vec<(Region, f64)>, atoms: Vec<(Complex64, f64)>) -> Result<Self, FieldError> {
        for (r, m) in &cells {
            if !(m.is_finite() && *m >= 0.0) {
                return Err(FieldError::InvalidMeasure(format!("cell {r:?} has mass {m}")));
            }
        }
        for (p, m) in &atoms {
            if !(m.is_finite() && *m >= 0.0) {
                return Err(FieldError::InvalidMeasure(format!("atom at {p} has mass {m}")));
            }
        }
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.sort_by(|&a, &b| cells[a].0.bbox().0.total_cmp(&cells[b].0.bbox().0));
        for (k, &a) in order.iter().enumerate() {
            let right = cells[a].0.bbox().1;
            for &b in &order[k + 1..] {
                if cells[b].0.bbox().0 >= right {
                    break;
                }
                if cells[a].0.overlaps(&cells[b].0) {
                    return Err(FieldError::InvalidMeasure(format!(
                        "cells {:?} and {:?} overlap",
                        cells[a].0, cells[b].0
                    )));
                }
            }
        }
        Ok(DiscreteMeasure { cells, atoms })
    }

    /// No validation; masses may be negative.
    pub fn signed(cells: Vec<(Region, f64)>, atoms: Vec<(Complex64, f64)>) -> Self {
        DiscreteMeasure { cells, atoms }
    }

    pub fn zero() -> Self {
        DiscreteMeasure::default()
    }

    pub fn cells(&self) -> &[(Region, f64)] {
        &self.cells
    }

    pub fn atoms(&self) -> &[(Complex64, f64)] {
        &self.atoms
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().map(|c| c.1).sum::<f64>() + self.atoms.iter().map(|a| a.1).sum::<f64>()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.cells.iter().all(|c| c.1 >= 0.0) && self.atoms.iter().all(|a| a.1 >= 0.0)
    }

    pub fn scaled(&self, a: f64) -> Self {
        DiscreteMeasure {
            cells: self.cells.iter().map(|&(r, m)| (r, a * m)).collect(),
            atoms: self.atoms.iter().map(|&(p, m)| (p, a * m)).collect(),
        }
    }

    /// Sum; cells with identical regions and atoms at identical points merge.
    pub fn plus(&self, other: &DiscreteMeasure) -> Self {
        let mut cells = self.cells.clone();
        if cells.len() == other.cells.len() && cells.iter().zip(&other.cells).all(|(a, b)| a.0 == b.0) {
            for (c, o) in cells.iter_mut().zip(&other.cells) {
                c.1 += o.1;
            }
        } else {
            cells.extend_from_slice(&other.cells);
        }
        let mut atoms = self.atoms.clone();
        for &(p, m) in &other.atoms {
            match atoms.iter_mut().find(|a| a.0 == p) {
                Some(a) => a.1 += m,
                None => atoms.push((p, m)),
            }
        }
        DiscreteMeasure { cells, atoms }
    }

    /// Mass of `s`. Cells partly inside contribute the fraction of a 16×16
    /// midpoint subsample that falls inside.
    pub fn mass_in(&self, s: &impl Shape) -> f64 {
        let mut total = 0.0;
        for &(region, m) in &self.cells {
            if m != 0.0 {
                total += m * fraction_inside(&region, s);
            }
        }
        for &(p, m) in &self.atoms {
            if s.contains(p) {
                total += m;
            }
        }
        total
    }
}

fn fraction_inside(region: &Region, s: &impl Shape) -> f64 {
    let (x0, x1, y0, y1) = region.bbox();
    let c = region.center();
    let reach = 0.5 * (x1 - x0).hypot(y1 - y0);
    if s.clearance(c) > reach {
        return if s.contains(c) { 1.0 } else { 0.0 };
    }
    const K: usize = 16;
    let (mut hit, mut all) = (0usize, 0usize);
    for a in 0..K {
        for b in 0..K {
            let z = Complex64::new(
                x0 + (a as f64 + 0.5) / K as f64 * (x1 - x0),
                y0 + (b as f64 + 0.5) / K as f64 * (y1 - y0),
            );
            if Shape::contains(region, z) {
                all += 1;
                if s.contains(z) {
                    hit += 1;
                }
            }
        }
    }
    if all == 0 {
        0.0
    } else {
        hit as f64 / all as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureComparison {
    pub holds: bool,
    /// Minimal `ν(cell) − μ(cell)` over cells where either measure is nonzero.
    pub margin: f64,
    pub worst_cell: Option<Region>,
    pub cells_compared: usize,
    pub warnings: Vec<String>,
    pub note: &'static str,
}

struct Binned {
    mass: Vec<f64>,
    atoms: Vec<Vec<(Complex64, f64)>>,
    outside: f64,
}

fn bin(m: &DiscreteMeasure, part: &GridSpec) -> Binned {
    let (px0, px1, py0, py1) = part.bounds();
    let h = part.step();
    let (cx, cy) = (part.nx() - 1, part.ny() - 1);
    let mut out = Binned { mass: vec![0.0; cx * cy], atoms: vec![Vec::new(); cx * cy], outside: 0.0 };
    for &(region, mass) in &m.cells {
        match region {
            Region::Rect { x0, x1, y0, y1 } => {
                let area = (x1 - x0) * (y1 - y0);
                let lo_i = (((x0.max(px0) - px0) / h).floor() as usize).min(cx - 1);
                let hi_i = (((x1.min(px1) - px0) / h).ceil() as usize).min(cx);
                let lo_j = (((y0.max(py0) - py0) / h).floor() as usize).min(cy - 1);
                let hi_j = (((y1.min(py1) - py0) / h).ceil() as usize).min(cy);
                let mut placed = 0.0;
                for j in lo_j..hi_j {
                    let (b0, b1) = (part.node(0, j).im, part.node(0, j + 1).im);
                    let oy = (y1.min(b1) - y0.max(b0)).max(0.0);
                    if oy == 0.0 {
                        continue;
                    }
                    for i in lo_i..hi_i {
                        let (a0, a1) = (part.node(i, 0).re, part.node(i + 1, 0).re);
                        let ox = (x1.min(a1) - x0.max(a0)).max(0.0);
                        let w = ox * oy / area;
                        out.mass[j * cx + i] += w * mass;
                        placed += w;
                    }
                }
                out.outside += (1.0 - placed).max(0.0) * mass.abs();
            }
            Region::Disk { center, .. } => match part.cell_of(center) {
                Some((i, j)) => out.mass[j * cx + i] += mass,
                None => out.outside += mass.abs(),
            },
        }
    }
    for &(p, mass) in &m.atoms {
        match part.cell_of(p) {
            Some((i, j)) => {
                out.mass[j * cx + i] += mass;
                out.atoms[j * cx + i].push((p, mass));
            }
            None => out.outside += mass.abs(),
        }
    }
    out
}

/// Cellwise test of `ν ≥ μ` on the cells of `partition`.
pub fn measure_geq(nu: &DiscreteMeasure, mu: &DiscreteMeasure, partition: &GridSpec, tol: f64) -> MeasureComparison {
    let a = bin(nu, partition);
    let b = bin(mu, partition);
    let cx = partition.nx() - 1;
    let mut margin = f64::INFINITY;
    let mut worst = None;
    let mut compared = 0;
    let mut coarse = Vec::new();
    for k in 0..a.mass.len() {
        if a.mass[k] == 0.0 && b.mass[k] == 0.0 {
            continue;
        }
        compared += 1;
        let d = a.mass[k] - b.mass[k];
        if d < margin {
            margin = d;
            worst = Some(k);
        }
        if d >= -tol {
            for &(p, m) in &b.atoms[k] {
                let here: f64 = a.atoms[k].iter().filter(|q| q.0 == p).map(|q| q.1).sum();
                if here < m - tol {
                    coarse.push(p);
                }
            }
        }
    }
    if compared == 0 {
        margin = 0.0;
    }
    let cell_region = |k: usize| {
        let (i, j) = (k % cx, k / cx);
        let (lo, hi) = (partition.node(i, j), partition.node(i + 1, j + 1));
        Region::rect(lo.re, hi.re, lo.im, hi.im)
    };
    let mut warnings = Vec::new();
    if !coarse.is_empty() {
        warnings.push(format!(
            "partition too coarse: {} atom(s) of the smaller measure exceed the larger one pointwise, first at {}",
            coarse.len(),
            coarse[0]
        ));
    }
    if a.outside > 0.0 || b.outside > 0.0 {
        warnings.push(format!(
            "mass outside the partition box ignored ({:e} and {:e})",
            a.outside, b.outside
        ));
    }
    MeasureComparison {
        holds: margin >= -tol,
        margin,
        worst_cell: worst.map(cell_region),
        cells_compared: compared,
        warnings,
        note: CELLWISE_NOTE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn part() -> GridSpec {
        GridSpec::new(-1.0, 1.0, -1.0, 1.0, 5, 5).unwrap()
    }

    #[test]
    fn validation_rejects_negative_mass_and_overlap() {
        assert!(DiscreteMeasure::new(vec![], vec![(c(0.0, 0.0), -1.0)]).is_err());
        let a = Region::rect(0.0, 1.0, 0.0, 1.0);
        let b = Region::rect(0.5, 1.5, 0.5, 1.5);
        assert!(DiscreteMeasure::new(vec![(a, 1.0), (b, 1.0)], vec![]).is_err());
        let b = Region::rect(1.0, 2.0, 0.0, 1.0);
        assert!(DiscreteMeasure::new(vec![(a, 1.0), (b, 1.0)], vec![]).is_ok());
    }

    #[test]
    fn double_measure_margin_is_min_mass() {
        let mu = DiscreteMeasure::new(
            vec![(Region::rect(-0.5, 0.0, -0.5, 0.0), 0.3), (Region::rect(0.0, 0.5, 0.0, 0.5), 0.7)],
            vec![],
        )
        .unwrap();
        let r = measure_geq(&mu.scaled(2.0), &mu, &part(), 1e-12);
        assert!(r.holds);
        assert!((r.margin - 0.3).abs() < 1e-15);
        let r = measure_geq(&mu, &mu, &part(), 0.0);
        assert!(r.holds);
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn atom_deficit_fails_at_its_cell() {
        let nu = DiscreteMeasure::new(vec![], vec![(c(0.0, 0.0), 1.0)]).unwrap();
        let mu = DiscreteMeasure::new(vec![], vec![(c(0.0, 0.0), 2.0)]).unwrap();
        let r = measure_geq(&nu, &mu, &part(), 1e-9);
        assert!(!r.holds);
        assert_eq!(r.margin, -1.0);
        assert_eq!(r.worst_cell, Some(Region::rect(0.0, 0.5, 0.0, 0.5)));
    }

    #[test]
    fn coarse_partition_is_flagged() {
        let nu = DiscreteMeasure::new(vec![], vec![(c(0.1, 0.1), 2.0)]).unwrap();
        let mu = DiscreteMeasure::new(vec![], vec![(c(0.2, 0.2), 1.0)]).unwrap();
        let r = measure_geq(&nu, &mu, &part(), 1e-9);
        assert!(r.holds);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn straddling_cells_split_by_area() {
        let mu = DiscreteMeasure::new(vec![(Region::rect(-0.25, 0.25, 0.1, 0.2), 1.0)], vec![]).unwrap();
        let r = measure_geq(&DiscreteMeasure::zero(), &mu, &part(), 0.0);
        assert_eq!(r.cells_compared, 2);
        assert!((r.margin + 0.5).abs() < 1e-15);
    }

    #[test]
    fn sector_mass_of_uniform_cells() {
        let g = GridSpec::centered(1.0, 1.0 / 64.0).unwrap();
        let h = g.step();
        let cells = g
            .nodes()
            .map(|z| (Region::rect(z.re - h / 2.0, z.re + h / 2.0, z.im - h / 2.0, z.im + h / 2.0), h * h))
            .collect();
        let m = DiscreteMeasure::signed(cells, vec![]);
        let quarter = crate::fields::Sector::new(0.2, 0.8, 0.0, std::f64::consts::FRAC_PI_2);
        let exact = std::f64::consts::PI / 4.0 * (0.64 - 0.04);
        assert!((m.mass_in(&quarter) - exact).abs() < 2e-4);
    }
}

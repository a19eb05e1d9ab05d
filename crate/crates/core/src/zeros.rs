//! Log-modulus potentials, discrete Riesz measures and the sub-mean-value
//! certificate.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::averaging::{disk_average, AverageError, QuadratureSpec};
use crate::fields::{Domain, DiscreteMeasure, ExtReal, FieldError, GridSpec, Region, ScalarField, Shape, ZeroSequence};

/// Largest share of stencils allowed to touch a singular node.
pub const MAX_MASKED_SHARE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZerosError {
    #[error("{masked} of {total} stencils touch singular nodes")]
    TooManyMasked { masked: usize, total: usize },
    #[error(transparent)]
    Average(#[from] AverageError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `Σ m·ln|z − λ|`.
pub fn log_modulus(seq: &ZeroSequence, z: Complex64) -> ExtReal {
    seq.log_modulus(z)
}

pub fn potential_field(seq: &ZeroSequence, domain: Domain) -> ScalarField {
    ScalarField::potential(seq, domain)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RieszMeasure {
    pub measure: DiscreteMeasure,
    pub stencils: usize,
    /// Stencils dropped because a node value was singular.
    pub masked: usize,
}

/// `(1/2π)Δ` of the field. The regular part is differenced with the
/// 5-point stencil on node-centred `h × h` cells; logarithmic terms
/// contribute their coefficients as exact atoms.
pub fn discrete_riesz(field: &ScalarField, grid: &GridSpec) -> Result<DiscreteMeasure, ZerosError> {
    discrete_riesz_stats(field, grid).map(|r| r.measure)
}

pub fn discrete_riesz_stats(field: &ScalarField, grid: &GridSpec) -> Result<RieszMeasure, ZerosError> {
    let domain = field.domain();
    let (nx, ny) = (grid.nx(), grid.ny());
    let h = grid.step();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let z = grid.node_at(k);
            if !domain.contains(z) {
                return f64::NAN;
            }
            match field.regular(z) {
                Ok(v) if v.is_finite() => v,
                // a singular node the field could not split off
                _ => f64::INFINITY,
            }
        })
        .collect();
    let mut cells = Vec::new();
    let (mut stencils, mut masked) = (0usize, 0usize);
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let k = grid.index(i, j);
            let around = [values[k], values[k - 1], values[k + 1], values[k - nx], values[k + nx]];
            if around.iter().any(|v| v.is_nan()) {
                continue;
            }
            stencils += 1;
            if around.iter().any(|v| v.is_infinite()) {
                masked += 1;
                continue;
            }
            let lap = around[1] + around[2] + around[3] + around[4] - 4.0 * around[0];
            let z = grid.node(i, j);
            let cell = Region::rect(z.re - 0.5 * h, z.re + 0.5 * h, z.im - 0.5 * h, z.im + 0.5 * h);
            cells.push((cell, lap / (2.0 * PI)));
        }
    }
    if masked as f64 > MAX_MASKED_SHARE * stencils as f64 {
        return Err(ZerosError::TooManyMasked { masked, total: stencils });
    }
    let (x0, x1, y0, y1) = grid.bounds();
    let atoms = field
        .log_terms()
        .iter()
        .filter(|t| {
            let p = t.point;
            domain.contains(p) && p.re >= x0 && p.re <= x1 && p.im >= y0 && p.im <= y1
        })
        .map(|t| (t.point, t.coeff))
        .collect();
    Ok(RieszMeasure { measure: DiscreteMeasure::signed(cells, atoms), stencils, masked })
}

#[derive(Debug, Clone)]
pub struct SubharmonicityOptions {
    /// Radii to test; `None` means `{2h, 8h, 32h}`.
    pub radii: Option<Vec<f64>>,
    pub tol: f64,
    /// Restrict the test to nodes in this set.
    pub region: Option<Region>,
    pub quadrature: QuadratureSpec,
}

impl Default for SubharmonicityOptions {
    fn default() -> Self {
        SubharmonicityOptions { radii: None, tol: 1e-6, region: None, quadrature: QuadratureSpec::sweep(1e-8) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubharmonicityReport {
    pub holds: bool,
    /// Smallest `B(z, r; u) − u(z)`.
    pub margin: f64,
    pub worst: Option<(Complex64, f64)>,
    pub disks: usize,
    /// Disks skipped because they did not fit in the domain.
    pub clipped: usize,
    pub radii: Vec<f64>,
    pub tol: f64,
}

pub fn default_radii(grid: &GridSpec) -> Vec<f64> {
    let h = grid.step();
    vec![2.0 * h, 8.0 * h, 32.0 * h]
}

/// Sub-mean-value test `B(z, r; u) ≥ u(z) − tol` over grid nodes and radii.
pub fn subharmonicity_check(
    field: &ScalarField,
    grid: &GridSpec,
    opts: &SubharmonicityOptions,
) -> Result<SubharmonicityReport, ZerosError> {
    let radii = opts.radii.clone().unwrap_or_else(|| default_radii(grid));
    let domain = field.domain();
    let nodes: Vec<Complex64> = grid
        .nodes()
        .filter(|z| domain.contains(*z) && opts.region.is_none_or(|r| Shape::contains(&r, *z)))
        .collect();
    type Partial = (f64, Option<(Complex64, f64)>, usize, usize);
    let partial: Vec<Result<Partial, ZerosError>> = nodes
        .par_iter()
        .map(|&z| {
            let mut best: Partial = (f64::INFINITY, None, 0, 0);
            let u = field.evaluate(z)?;
            let Some(u) = u.finite() else {
                return Ok(best);
            };
            for &r in &radii {
                if r >= domain.boundary_distance(z) {
                    best.3 += 1;
                    continue;
                }
                let b = disk_average(field, z, r, &opts.quadrature)?.value;
                let m = b - u;
                best.2 += 1;
                if m < best.0 {
                    best.0 = m;
                    best.1 = Some((z, r));
                }
            }
            Ok(best)
        })
        .collect();
    let mut margin = f64::INFINITY;
    let mut worst = None;
    let (mut disks, mut clipped) = (0, 0);
    for p in partial {
        let (m, w, d, c) = p?;
        disks += d;
        clipped += c;
        if m < margin {
            margin = m;
            worst = w;
        }
    }
    if disks == 0 {
        margin = 0.0;
    }
    Ok(SubharmonicityReport { holds: margin >= -opts.tol, margin, worst, disks, clipped, radii, tol: opts.tol })
}

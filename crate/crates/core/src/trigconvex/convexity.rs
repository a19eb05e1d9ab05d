use std::f64::consts::PI;

use rayon::prelude::*;

use super::{PeriodicProfile, TcError};

pub const DEFAULT_TOL: f64 = 1e-9;
/// Tolerance used for triples whose middle point sits within two steps of a kink.
pub const KINK_TOL: f64 = 1e-6;
pub const MAX_TRIPLES: usize = 2_000_000;
const MAX_INTERIOR: usize = 32;
const DENSE_SPANS: usize = 24;

/// Node indices `(i₁, i, i₂)` with `i₁ ≤ i ≤ i₂` (unwrapped).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple {
    pub theta1: f64,
    pub theta: f64,
    pub theta2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub holds: bool,
    /// Smallest value of `h₁ sin ρ(θ₂−θ) + h₂ sin ρ(θ−θ₁) − h sin ρ(θ₂−θ₁)`.
    pub margin: f64,
    pub worst: Option<Triple>,
    pub triples: usize,
    pub warnings: Vec<String>,
}

fn span_list(max_span: usize) -> Vec<usize> {
    let mut spans: Vec<usize> = (2..=max_span.min(DENSE_SPANS)).collect();
    let mut s = DENSE_SPANS as f64;
    while (s as usize) < max_span {
        s *= 1.2;
        let k = (s.round() as usize).min(max_span);
        if spans.last() != Some(&k) {
            spans.push(k);
        }
    }
    spans
}

fn interior(span: usize) -> Vec<usize> {
    if span - 1 <= MAX_INTERIOR {
        (1..span).collect()
    } else {
        let mut v: Vec<usize> = (0..MAX_INTERIOR)
            .map(|j| 1 + ((span - 2) as f64 * j as f64 / (MAX_INTERIOR - 1) as f64).round() as usize)
            .collect();
        v.push(span / 2);
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Sweeps the three-point sine inequality over node triples
/// `θ₁ ≤ θ ≤ θ₂ < θ₁ + π/ρ`.
pub fn is_rho_trig_convex(h: &PeriodicProfile, rho: f64, tol: f64) -> Result<ConvexityReport, TcError> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(TcError::InvalidRho(rho));
    }
    let n = h.n();
    let s = h.step();
    let arc = PI / rho;
    let mut warnings = Vec::new();
    if arc < 2.0 * s {
        warnings.push(format!("rho too large: arc π/ρ = {arc} is shorter than two sample steps ({})", 2.0 * s));
    }
    // largest span j with j·s < π/ρ
    let mut max_span = (arc / s).floor() as usize;
    if max_span as f64 * s >= arc {
        max_span = max_span.saturating_sub(1);
    }
    if max_span < 2 {
        return Ok(ConvexityReport { holds: true, margin: 0.0, worst: None, triples: 0, warnings });
    }
    let spans: Vec<(usize, Vec<usize>)> = span_list(max_span).into_iter().map(|j| (j, interior(j))).collect();
    let per_start: usize = spans.iter().map(|(_, v)| v.len()).sum();
    let stride = per_start.saturating_mul(n).div_ceil(MAX_TRIPLES).max(1);
    if stride > 1 {
        warnings.push(format!("triple sweep thinned: every {stride}-th start node"));
    }
    let kinks = h.kink_angles();
    let near_kink = |k: usize| {
        let t = h.theta(k % n);
        kinks.iter().any(|&a| {
            let d = (t - a).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d) <= 2.0 * s
        })
    };
    let starts: Vec<usize> = (0..n).step_by(stride).collect();
    let per: Vec<(f64, Option<(usize, usize, usize)>, bool)> = starts
        .par_iter()
        .map(|&i1| {
            let mut best = (f64::INFINITY, None, true);
            for (j, mids) in &spans {
                let a2 = rho * *j as f64 * s;
                let sin_total = a2.sin();
                let h1 = h.at(i1 as isize);
                let h2 = h.at((i1 + j) as isize);
                for &m in mids {
                    let hm = h.at((i1 + m) as isize);
                    let margin = h1 * (rho * (*j - m) as f64 * s).sin() + h2 * (rho * m as f64 * s).sin() - hm * sin_total;
                    let t = if near_kink(i1 + m) { tol.max(KINK_TOL) } else { tol };
                    let ok = margin >= -t;
                    if margin < best.0 {
                        best.0 = margin;
                        best.1 = Some((i1, i1 + m, i1 + j));
                    }
                    best.2 &= ok;
                }
            }
            best
        })
        .collect();
    let triples = starts.len() * per_start;
    let mut margin = f64::INFINITY;
    let mut worst = None;
    let mut holds = true;
    for (m, w, ok) in per {
        holds &= ok;
        if m < margin {
            margin = m;
            worst = w;
        }
    }
    let worst = worst.map(|(a, b, c)| Triple {
        theta1: a as f64 * s,
        theta: b as f64 * s,
        theta2: c as f64 * s,
    });
    Ok(ConvexityReport { holds, margin, worst, triples, warnings })
}

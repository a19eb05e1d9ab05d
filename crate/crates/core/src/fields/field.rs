use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::expr::{self, EvalError, Expr, VarSet};
use super::grid::GridSpec;
use super::sequence::ZeroSequence;
use super::{Domain, ExtReal, FieldError};
use crate::trigconvex::PeriodicProfile;

/// A logarithmic singularity `coeff · ln|z − point|` carried by a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTerm {
    pub point: Complex64,
    pub coeff: f64,
}

/// Loci where a field fails to be smooth; quadrature splits its panels there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Feature {
    Point(Complex64),
    /// Ray from the origin at the given angle.
    Ray(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Expression(String),
    GridSamples { step: f64 },
    Catalog(String),
    Potential,
    Extension { rho: f64 },
    Derived,
}

/// Node values of a grid-sampled field. `NaN` marks nodes without data
/// (outside the field's domain); `-∞` is an admissible value.
#[derive(Debug, Clone)]
pub struct GridSamples {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl GridSamples {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != spec.len() {
            return Err(FieldError::InvalidGrid(format!(
                "{} values for {} nodes",
                values.len(),
                spec.len()
            )));
        }
        if values.iter().any(|v| *v == f64::INFINITY) {
            return Err(FieldError::InvalidGrid("+inf sample".into()));
        }
        Ok(GridSamples { spec, values })
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.index(i, j)]
    }

    /// Bilinear interpolation; exact on affine functions.
    pub fn interpolate(&self, z: Complex64) -> Result<f64, FieldError> {
        let (i, j) = self.spec.cell_of(z).ok_or(FieldError::OutsideDomain(z))?;
        let h = self.spec.step();
        let corner = self.spec.node(i, j);
        let tx = ((z.re - corner.re) / h).clamp(0.0, 1.0);
        let ty = ((z.im - corner.im) / h).clamp(0.0, 1.0);
        let mut acc = 0.0;
        for (di, wx) in [(0, 1.0 - tx), (1, tx)] {
            for (dj, wy) in [(0, 1.0 - ty), (1, ty)] {
                let w = wx * wy;
                if w == 0.0 {
                    continue;
                }
                let v = self.value(i + di, j + dj);
                if v.is_nan() {
                    return Err(FieldError::NoData(z));
                }
                acc += w * v;
            }
        }
        Ok(acc)
    }
}

type Closure = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;

enum Kind {
    Expr { residual: Expr, expr: Expr },
    Grid(GridSamples),
    Potential(ZeroSequence),
    Homogeneous { profile: PeriodicProfile, rho: f64 },
    Sum { terms: Vec<(f64, ScalarField)>, constant: f64 },
    Closure(Closure),
}

/// Real-valued (possibly `-∞`-valued) function on a plane region.
#[derive(Clone)]
pub struct ScalarField {
    domain: Domain,
    kind: Arc<Kind>,
    logs: Arc<Vec<LogTerm>>,
    features: Arc<Vec<Feature>>,
    provenance: Provenance,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("domain", &self.domain)
            .field("provenance", &self.provenance)
            .field("log_terms", &self.logs)
            .finish()
    }
}

/// Parses a weight expression in `z` into a field on `domain`.
pub fn parse_field(src: &str, domain: Domain) -> Result<ScalarField, FieldError> {
    let e = expr::parse_real(src, VarSet::Plane)?;
    Ok(ScalarField::from_expr(e, domain, Provenance::Expression(src.trim().to_string())))
}

fn merge_logs(mut terms: Vec<LogTerm>) -> Vec<LogTerm> {
    terms.sort_by(|a, b| {
        a.point.re.total_cmp(&b.point.re).then(a.point.im.total_cmp(&b.point.im))
    });
    let mut out: Vec<LogTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(last) if last.point == t.point => last.coeff += t.coeff,
            _ => out.push(t),
        }
    }
    out.retain(|t| t.coeff != 0.0);
    out
}

fn combine_domains(a: Domain, b: Domain) -> Result<Domain, FieldError> {
    match (a, b) {
        (Domain::WholePlane, d) | (d, Domain::WholePlane) => Ok(d),
        (a, b) if a == b => Ok(a),
        (a, b) => Err(FieldError::DomainMismatch(format!("{a} vs {b}"))),
    }
}

fn classify(v: f64) -> Result<f64, EvalError> {
    if v.is_nan() {
        Err(EvalError::Undefined)
    } else if v == f64::INFINITY {
        Err(EvalError::PlusInfinity)
    } else {
        Ok(v)
    }
}

impl ScalarField {
    fn build(domain: Domain, kind: Kind, logs: Vec<LogTerm>, features: Vec<Feature>, provenance: Provenance) -> Self {
        ScalarField {
            domain,
            kind: Arc::new(kind),
            logs: Arc::new(merge_logs(logs)),
            features: Arc::new(features),
            provenance,
        }
    }

    pub fn from_expr(e: Expr, domain: Domain, provenance: Provenance) -> Self {
        let (logs, residual) = e.split_log_terms();
        let logs = logs.into_iter().map(|(point, coeff)| LogTerm { point, coeff }).collect();
        ScalarField::build(domain, Kind::Expr { residual, expr: e }, logs, Vec::new(), provenance)
    }

    /// `Σ mult · ln|z − λ|`, the log-modulus of a function with zero set `seq`.
    pub fn potential(seq: &ZeroSequence, domain: Domain) -> Self {
        let logs = seq
            .entries()
            .iter()
            .map(|&(point, m)| LogTerm { point, coeff: m as f64 })
            .collect();
        ScalarField::build(domain, Kind::Potential(seq.clone()), logs, Vec::new(), Provenance::Potential)
    }

    /// `H(re^{iθ}) = h(θ) r^ρ` on the whole plane.
    pub fn homogeneous(profile: PeriodicProfile, rho: f64) -> Self {
        let mut features = vec![Feature::Point(Complex64::new(0.0, 0.0))];
        features.extend(profile.kink_angles().into_iter().map(Feature::Ray));
        ScalarField::build(
            Domain::WholePlane,
            Kind::Homogeneous { profile, rho },
            Vec::new(),
            features,
            Provenance::Extension { rho },
        )
    }

    pub fn from_grid(samples: GridSamples, domain: Domain) -> Self {
        let step = samples.spec.step();
        ScalarField::build(domain, Kind::Grid(samples), Vec::new(), Vec::new(), Provenance::GridSamples { step })
    }

    /// Opaque closure; no singularity or kink information is available to
    /// quadrature or Riesz extraction.
    pub fn from_fn(domain: Domain, f: impl Fn(Complex64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::build(domain, Kind::Closure(Arc::new(f)), Vec::new(), Vec::new(), Provenance::Derived)
    }

    pub fn constant(c: f64, domain: Domain) -> Self {
        ScalarField::from_expr(Expr::Num(c), domain, Provenance::Expression(c.to_string()))
    }

    /// `constant + Σ aₖ·fieldₖ`.
    pub fn linear_combination(terms: Vec<(f64, ScalarField)>, constant: f64) -> Result<Self, FieldError> {
        let mut domain = Domain::WholePlane;
        let mut logs = Vec::new();
        let mut features = Vec::new();
        for (a, f) in &terms {
            domain = combine_domains(domain, f.domain)?;
            logs.extend(f.logs.iter().map(|t| LogTerm { point: t.point, coeff: a * t.coeff }));
            for feat in f.features.iter() {
                if !features.contains(feat) {
                    features.push(*feat);
                }
            }
        }
        Ok(ScalarField::build(domain, Kind::Sum { terms, constant }, logs, features, Provenance::Derived))
    }

    pub fn plus(&self, other: &ScalarField) -> Result<Self, FieldError> {
        ScalarField::linear_combination(vec![(1.0, self.clone()), (1.0, other.clone())], 0.0)
    }

    pub fn minus(&self, other: &ScalarField) -> Result<Self, FieldError> {
        ScalarField::linear_combination(vec![(1.0, self.clone()), (-1.0, other.clone())], 0.0)
    }

    pub fn scaled(&self, a: f64) -> Self {
        ScalarField::linear_combination(vec![(a, self.clone())], 0.0).expect("single-term combination")
    }

    pub fn shifted(&self, c: f64) -> Self {
        ScalarField::linear_combination(vec![(1.0, self.clone())], c).expect("single-term combination")
    }

    pub fn with_domain(&self, domain: Domain) -> Self {
        ScalarField { domain, ..self.clone() }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn log_terms(&self) -> &[LogTerm] {
        &self.logs
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn grid_samples(&self) -> Option<&GridSamples> {
        match &*self.kind {
            Kind::Grid(g) => Some(g),
            _ => None,
        }
    }

    /// Value at an interior point of the domain.
    pub fn evaluate(&self, z: Complex64) -> Result<ExtReal, FieldError> {
        if !self.domain.contains(z) {
            return Err(FieldError::OutsideDomain(z));
        }
        let v = self.raw(z)?;
        Ok(ExtReal::from_f64(v).expect("raw() never yields +inf or NaN"))
    }

    /// Value with `-∞` as IEEE infinity; no domain check.
    pub fn raw(&self, z: Complex64) -> Result<f64, FieldError> {
        let v = match &*self.kind {
            Kind::Expr { expr, .. } => expr.eval_real(z, 0.0).map_err(|err| FieldError::Eval { z, err })?,
            Kind::Grid(g) => g.interpolate(z)?,
            Kind::Potential(seq) => seq.log_modulus(z).to_f64(),
            Kind::Homogeneous { profile, rho } => homogeneous_value(profile, *rho, z)?,
            // merged log terms, so singularities that cancel stay finite
            Kind::Sum { .. } => {
                let mut acc = self.regular(z)?;
                for t in self.logs.iter() {
                    acc += t.coeff * (z - t.point).norm().ln();
                }
                acc
            }
            Kind::Closure(f) => f(z),
        };
        classify(v).map_err(|err| FieldError::Eval { z, err })
    }

    /// The field minus its logarithmic terms; finite at every log point.
    pub fn regular(&self, z: Complex64) -> Result<f64, FieldError> {
        match &*self.kind {
            Kind::Expr { residual, .. } => residual.eval_real(z, 0.0).map_err(|err| FieldError::Eval { z, err }),
            Kind::Potential(_) => Ok(0.0),
            Kind::Sum { terms, constant } => {
                let mut acc = *constant;
                for (a, f) in terms {
                    if *a != 0.0 {
                        acc += a * f.regular(z)?;
                    }
                }
                Ok(acc)
            }
            _ => self.raw(z),
        }
    }

    /// True when the regular part vanishes identically.
    pub fn regular_is_zero(&self) -> bool {
        match &*self.kind {
            Kind::Potential(_) => true,
            Kind::Expr { residual, .. } => matches!(residual, Expr::Num(x) if *x == 0.0),
            Kind::Sum { terms, constant } => {
                *constant == 0.0 && terms.iter().all(|(a, f)| *a == 0.0 || f.regular_is_zero())
            }
            _ => false,
        }
    }

    /// Total log coefficient at `p`.
    pub fn log_coeff_at(&self, p: Complex64) -> f64 {
        self.logs.iter().filter(|t| t.point == p).map(|t| t.coeff).sum()
    }

    /// Field value with the log terms located at `p` removed; finite at `p`.
    pub fn value_without_logs_at(&self, z: Complex64, p: Complex64) -> Result<f64, FieldError> {
        let mut v = self.regular(z)?;
        for t in self.logs.iter().filter(|t| t.point != p) {
            v += t.coeff * (z - t.point).norm().ln();
        }
        classify(v).map_err(|err| FieldError::Eval { z, err })
    }
}

fn homogeneous_value(profile: &PeriodicProfile, rho: f64, z: Complex64) -> Result<f64, FieldError> {
    let r = z.norm();
    if r == 0.0 {
        return Ok(0.0);
    }
    let h = profile.value_exact(z.im.atan2(z.re)).map_err(|err| FieldError::Eval { z, err })?;
    let scale = if rho == 1.0 {
        r
    } else if rho == 2.0 {
        z.norm_sqr()
    } else {
        r.powf(rho)
    };
    Ok(h * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluate_examples() {
        let re = parse_field("re(z)", Domain::WholePlane).unwrap();
        assert_eq!(re.evaluate(c(1.0, 2.0)).unwrap(), ExtReal::Finite(1.0));
        let sq = parse_field("pow(abs(z),2)", Domain::WholePlane).unwrap();
        assert!((sq.evaluate(c(0.0, 3.0)).unwrap().finite().unwrap() - 9.0).abs() < 1e-14);
        let lg = parse_field("log(abs(z))", Domain::WholePlane).unwrap();
        assert_eq!(lg.evaluate(c(0.0, 0.0)).unwrap(), ExtReal::NegInf);
    }

    #[test]
    fn outside_domain_is_an_error() {
        let f = parse_field("re(z)", Domain::UnitDisk).unwrap();
        assert!(matches!(f.evaluate(c(1.0, 0.0)), Err(FieldError::OutsideDomain(_))));
    }

    #[test]
    fn combination_merges_log_terms() {
        let n = parse_field("log(abs(z))", Domain::UnitDisk).unwrap();
        let m = parse_field("log(abs(z)) + pow(abs(z),2)", Domain::UnitDisk).unwrap();
        let diff = m.minus(&n).unwrap();
        assert!(diff.log_terms().is_empty());
        let seq = ZeroSequence::new(vec![(c(0.0, 0.0), 1)]).unwrap();
        let total = ScalarField::potential(&seq, Domain::WholePlane).plus(&diff).unwrap();
        assert_eq!(total.log_terms(), &[LogTerm { point: c(0.0, 0.0), coeff: 1.0 }]);
        assert_eq!(total.domain(), Domain::UnitDisk);
        let z = c(0.3, 0.1);
        assert!((total.regular(z).unwrap() - z.norm_sqr()).abs() < 1e-15);
        assert!((total.value_without_logs_at(c(0.0, 0.0), c(0.0, 0.0)).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn mismatched_bounded_domains_are_rejected() {
        let a = parse_field("0", Domain::UnitDisk).unwrap();
        let b = parse_field("0", Domain::rectangle(0.0, 1.0, 0.0, 1.0).unwrap()).unwrap();
        assert!(matches!(a.plus(&b), Err(FieldError::DomainMismatch(_))));
    }

    #[test]
    fn negated_log_is_plus_infinity_at_its_point() {
        let f = parse_field("log(abs(z))", Domain::WholePlane).unwrap().scaled(-1.0);
        assert!(matches!(
            f.raw(c(0.0, 0.0)),
            Err(FieldError::Eval { err: EvalError::PlusInfinity, .. })
        ));
    }

    #[test]
    fn grid_interpolation_handles_missing_nodes() {
        let spec = GridSpec::new(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        let g = GridSamples::new(spec, vec![0.0, 1.0, f64::NAN, 1.0]).unwrap();
        assert_eq!(g.interpolate(c(1.0, 0.0)).unwrap(), 1.0);
        assert!(matches!(g.interpolate(c(0.5, 0.5)), Err(FieldError::NoData(_))));
    }
}

use num_complex::Complex64;

use super::{ExtReal, FieldError, Shape};

/// Finite multiset of points. Entries are kept sorted by `(re, im)` with
/// duplicate points merged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZeroSequence {
    entries: Vec<(Complex64, u32)>,
}

impl ZeroSequence {
    pub fn new(entries: Vec<(Complex64, u32)>) -> Result<Self, FieldError> {
        let mut entries = entries;
        for (p, m) in &entries {
            if *m == 0 {
                return Err(FieldError::InvalidSequence(format!("multiplicity 0 at {p}")));
            }
            if !(p.re.is_finite() && p.im.is_finite()) {
                return Err(FieldError::InvalidSequence(format!("non-finite point {p}")));
            }
        }
        entries.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        let mut merged: Vec<(Complex64, u32)> = Vec::with_capacity(entries.len());
        for (p, m) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == p => last.1 += m,
                _ => merged.push((p, m)),
            }
        }
        Ok(ZeroSequence { entries: merged })
    }

    pub fn empty() -> Self {
        ZeroSequence::default()
    }

    pub fn entries(&self) -> &[(Complex64, u32)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.entries.iter().map(|e| e.1 as u64).sum()
    }

    pub fn multiplicity_at(&self, p: Complex64) -> u32 {
        self.entries.iter().find(|e| e.0 == p).map_or(0, |e| e.1)
    }

    /// `Σ m·ln|z − λ|`, `-∞` exactly on the support.
    pub fn log_modulus(&self, z: Complex64) -> ExtReal {
        let mut acc = 0.0;
        for &(p, m) in &self.entries {
            let d = (z - p).norm();
            if d == 0.0 {
                return ExtReal::NegInf;
            }
            acc += m as f64 * d.ln();
        }
        ExtReal::Finite(acc)
    }
}

/// Number of points of `seq` in the closed set `s`, with multiplicity.
pub fn counting_measure(seq: &ZeroSequence, s: &impl Shape) -> u64 {
    seq.entries.iter().filter(|(p, _)| s.contains(*p)).map(|(_, m)| *m as u64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Region;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn duplicates_merge_and_zero_multiplicity_is_rejected() {
        let s = ZeroSequence::new(vec![(c(1.0, 0.0), 1), (c(0.0, 0.0), 2), (c(1.0, 0.0), 3)]).unwrap();
        assert_eq!(s.entries(), &[(c(0.0, 0.0), 2), (c(1.0, 0.0), 4)]);
        assert!(ZeroSequence::new(vec![(c(0.0, 0.0), 0)]).is_err());
    }

    #[test]
    fn log_modulus_examples() {
        let one = ZeroSequence::new(vec![(c(0.0, 0.0), 1)]).unwrap();
        assert_eq!(one.log_modulus(c(2.0, 0.0)), ExtReal::Finite(2f64.ln()));
        let pair = ZeroSequence::new(vec![(c(1.0, 0.0), 1), (c(-1.0, 0.0), 1)]).unwrap();
        assert_eq!(pair.log_modulus(c(0.0, 0.0)), ExtReal::Finite(0.0));
        let double = ZeroSequence::new(vec![(c(0.0, 0.0), 2)]).unwrap();
        assert!((double.log_modulus(c(std::f64::consts::E, 0.0)).finite().unwrap() - 2.0).abs() < 1e-15);
        assert!(double.log_modulus(c(0.0, 0.0)).is_neg_inf());
    }

    #[test]
    fn counting_examples() {
        let unit = Region::disk(c(0.0, 0.0), 1.0);
        let s = ZeroSequence::new(vec![(c(0.0, 0.0), 2)]).unwrap();
        assert_eq!(counting_measure(&s, &unit), 2);
        let s = ZeroSequence::new(vec![(c(0.0, 0.0), 1), (c(2.0, 0.0), 1)]).unwrap();
        assert_eq!(counting_measure(&s, &unit), 1);
        assert_eq!(counting_measure(&ZeroSequence::empty(), &unit), 0);
        let edge = ZeroSequence::new(vec![(c(1.0, 0.0), 1)]).unwrap();
        assert_eq!(counting_measure(&edge, &unit), 1);
    }
}

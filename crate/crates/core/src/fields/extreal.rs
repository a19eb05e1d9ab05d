use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

/// A real number or the `-∞` sentinel. `+∞` is not representable: weights
/// and potentials in this crate are bounded above on compact sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
}

impl ExtReal {
    /// Classifies an IEEE value. Returns `None` for `+∞` and NaN.
    pub fn from_f64(x: f64) -> Option<Self> {
        if x.is_nan() || x == f64::INFINITY {
            None
        } else if x == f64::NEG_INFINITY {
            Some(ExtReal::NegInf)
        } else {
            Some(ExtReal::Finite(x))
        }
    }

    pub fn is_neg_inf(self) -> bool {
        matches!(self, ExtReal::NegInf)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::NegInf => None,
        }
    }

    /// IEEE view, `-∞` mapped to `f64::NEG_INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::NegInf => f64::NEG_INFINITY,
        }
    }

    /// Multiplication by a nonnegative scalar. `0·(-∞)` is taken as `0`,
    /// the measure-theoretic convention.
    pub fn scale(self, a: f64) -> Self {
        debug_assert!(a >= 0.0);
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(a * x),
            ExtReal::NegInf if a == 0.0 => ExtReal::Finite(0.0),
            ExtReal::NegInf => ExtReal::NegInf,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::NegInf,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::Finite(rhs)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::NegInf, ExtReal::NegInf) => Some(Ordering::Equal),
            (ExtReal::NegInf, _) => Some(Ordering::Less),
            (_, ExtReal::NegInf) => Some(Ordering::Greater),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x).expect("ExtReal::from on +inf or NaN")
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neg_inf_absorbs_finite() {
        assert_eq!(ExtReal::NegInf + 3.0, ExtReal::NegInf);
        assert_eq!(ExtReal::Finite(1.0) + ExtReal::NegInf, ExtReal::NegInf);
        assert_eq!(ExtReal::Finite(1.0) + 2.0, ExtReal::Finite(3.0));
    }

    #[test]
    fn neg_inf_is_below_everything() {
        assert!(ExtReal::NegInf < ExtReal::Finite(-1e300));
        assert!(ExtReal::NegInf <= ExtReal::NegInf);
    }

    #[test]
    fn classification_rejects_plus_inf_and_nan() {
        assert_eq!(ExtReal::from_f64(f64::INFINITY), None);
        assert_eq!(ExtReal::from_f64(f64::NAN), None);
        assert_eq!(ExtReal::from_f64(f64::NEG_INFINITY), Some(ExtReal::NegInf));
    }

    #[test]
    fn zero_times_neg_inf_is_zero() {
        assert_eq!(ExtReal::NegInf.scale(0.0), ExtReal::Finite(0.0));
        assert_eq!(ExtReal::NegInf.scale(2.0), ExtReal::NegInf);
    }
}

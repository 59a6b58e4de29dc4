use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// An integer extended by `-inf` and `+inf`.
///
/// Used for valuations (`v(0) = +inf`), norm exponents (`|0| = p^-inf`) and
/// level thresholds that may be unbounded in either direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExtInt {
    NegInf,
    Finite(i64),
    PosInf,
}

impl ExtInt {
    pub fn finite(self) -> Option<i64> {
        match self {
            ExtInt::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtInt::Finite(_))
    }

    /// Unwraps a finite value; panics on an infinite one.
    pub fn expect_finite(self, what: &str) -> i64 {
        self.finite()
            .unwrap_or_else(|| panic!("{what}: expected a finite value, got {self}"))
    }
}

impl From<i64> for ExtInt {
    fn from(v: i64) -> Self {
        ExtInt::Finite(v)
    }
}

impl PartialOrd for ExtInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtInt {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtInt::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (PosInf, _) | (_, NegInf) => Ordering::Greater,
        }
    }
}

impl PartialEq<i64> for ExtInt {
    fn eq(&self, other: &i64) -> bool {
        *self == ExtInt::Finite(*other)
    }
}

impl PartialOrd<i64> for ExtInt {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.cmp(&ExtInt::Finite(*other)))
    }
}

impl Neg for ExtInt {
    type Output = ExtInt;
    fn neg(self) -> ExtInt {
        match self {
            ExtInt::NegInf => ExtInt::PosInf,
            ExtInt::PosInf => ExtInt::NegInf,
            ExtInt::Finite(v) => ExtInt::Finite(-v),
        }
    }
}

impl Add<i64> for ExtInt {
    type Output = ExtInt;
    fn add(self, rhs: i64) -> ExtInt {
        match self {
            ExtInt::Finite(v) => ExtInt::Finite(v + rhs),
            inf => inf,
        }
    }
}

impl Sub<i64> for ExtInt {
    type Output = ExtInt;
    fn sub(self, rhs: i64) -> ExtInt {
        self + (-rhs)
    }
}

/// Sum of extended integers. Mixing `+inf` and `-inf` is a logic error.
impl Add for ExtInt {
    type Output = ExtInt;
    fn add(self, rhs: ExtInt) -> ExtInt {
        use ExtInt::*;
        match (self, rhs) {
            (Finite(a), Finite(b)) => Finite(a + b),
            (NegInf, PosInf) | (PosInf, NegInf) => panic!("undefined sum -inf + +inf"),
            (NegInf, _) | (_, NegInf) => NegInf,
            (PosInf, _) | (_, PosInf) => PosInf,
        }
    }
}

impl Sub for ExtInt {
    type Output = ExtInt;
    fn sub(self, rhs: ExtInt) -> ExtInt {
        self + (-rhs)
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::NegInf => f.write_str("-inf"),
            ExtInt::PosInf => f.write_str("+inf"),
            ExtInt::Finite(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for ExtInt {
    type Err = std::num::ParseIntError;

    /// Parses the [`fmt::Display`] form: an integer, `-inf` or `+inf`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "-inf" => Ok(ExtInt::NegInf),
            "+inf" => Ok(ExtInt::PosInf),
            _ => s.parse().map(ExtInt::Finite),
        }
    }
}

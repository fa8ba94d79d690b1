//! Extended reals in `[0, +inf]`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A value in `[0, +inf]`. Finite values are non-negative and never NaN.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal(0.0);
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);

    /// Wraps a finite non-negative number. Returns `None` for negative values
    /// or NaN; `+inf` is accepted.
    pub fn new(v: f64) -> Option<ExtReal> {
        if v.is_nan() || v < 0.0 || v == f64::NEG_INFINITY {
            None
        } else {
            Some(ExtReal(v))
        }
    }

    /// Finite non-negative value. Panics on misuse; for internal arithmetic
    /// whose sign is known.
    pub fn finite(v: f64) -> ExtReal {
        debug_assert!(v.is_finite() && v >= 0.0, "bad finite ExtReal {v}");
        ExtReal(v.max(0.0))
    }

    /// Maps any non-finite or NaN input to `+inf`, clamps tiny negative
    /// rounding noise to zero.
    pub fn saturating(v: f64) -> ExtReal {
        if v.is_finite() {
            ExtReal(v.max(0.0))
        } else {
            ExtReal::INFINITY
        }
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(self) -> bool {
        !self.0.is_finite()
    }

    /// Raw value; `f64::INFINITY` for `+inf`.
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_option(self) -> Option<f64> {
        self.is_finite().then_some(self.0)
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }

    /// `c * self` for `c > 0`; `0 * inf` is short-circuited to zero, which is
    /// the convention used when a zero-weight term drops out of a sum.
    pub fn scale(self, c: f64) -> ExtReal {
        debug_assert!(c >= 0.0);
        if c == 0.0 {
            ExtReal::ZERO
        } else if self.is_infinite() {
            ExtReal::INFINITY
        } else {
            ExtReal::finite(c * self.0)
        }
    }

    /// Text form used in grid and CSV files: `inf` or the shortest
    /// round-trip decimal.
    pub fn to_text(self) -> String {
        if self.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:?}", self.0)
        }
    }

    pub fn parse_text(s: &str) -> Option<ExtReal> {
        let s = s.trim();
        if s == "inf" || s == "+inf" {
            return Some(ExtReal::INFINITY);
        }
        s.parse::<f64>().ok().and_then(ExtReal::new)
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        if self.is_infinite() || rhs.is_infinite() {
            ExtReal::INFINITY
        } else {
            ExtReal(self.0 + rhs.0)
        }
    }
}

impl Mul<f64> for ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: f64) -> ExtReal {
        self.scale(rhs)
    }
}

impl std::iter::Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> ExtReal {
        iter.fold(ExtReal::ZERO, |a, b| a + b)
    }
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "+inf")
        } else {
            write!(f, "{:?}", self.0)
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "+inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl From<ExtReal> for f64 {
    fn from(v: ExtReal) -> f64 {
        v.0
    }
}

// JSON has no infinity; +inf is written as the string "inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => ExtReal::new(v).ok_or_else(|| serde::de::Error::custom("negative value")),
            Repr::Text(t) => ExtReal::parse_text(&t).ok_or_else(|| serde::de::Error::custom("bad extended real")),
        }
    }
}

//! Fixed-point nonnegative quantities for action costs and durations.
//!
//! Values are stored in thousandths, which keeps arithmetic exact,
//! totally ordered, and identical across platforms. Three fractional
//! digits cover every cost/duration the domain generator and the
//! planner exchange; inputs with more precision are rejected at parse
//! time rather than silently rounded.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Nonnegative fixed-point quantity with 1/1000 resolution.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Num(u64);

impl Num {
    pub const ZERO: Num = Num(0);
    pub const ONE: Num = Num(1000);

    pub fn from_millis(millis: u64) -> Num {
        Num(millis)
    }

    pub fn from_int(value: u64) -> Num {
        Num(value * 1000)
    }

    pub fn millis(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    /// Converts an `f64` (e.g. from a config file) to a quantity,
    /// requiring it to be nonnegative and representable in thousandths.
    pub fn try_from_f64(value: f64) -> Result<Num, NumError> {
        if !value.is_finite() || value < 0.0 {
            return Err(NumError::Negative(value));
        }
        let scaled = value * 1000.0;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-6 {
            return Err(NumError::Precision(value));
        }
        Ok(Num(rounded as u64))
    }

    /// Parses a decimal literal (`5`, `2.5`, `0.001`) with at most
    /// three fractional digits.
    pub fn parse_decimal(text: &str) -> Result<Num, NumError> {
        let bad = || NumError::Malformed(text.to_string());
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) if !f.is_empty() => (i, f),
            Some(_) => return Err(bad()),
            None => (text, ""),
        };
        if int_part.is_empty() || frac_part.len() > 3 {
            return Err(bad());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = int_part.parse().map_err(|_| bad())?;
        let mut frac: u64 = 0;
        let mut scale = 100;
        for b in frac_part.bytes() {
            frac += u64::from(b - b'0') * scale;
            scale /= 10;
        }
        Ok(Num(int * 1000 + frac))
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NumError {
    #[error("value {0} is negative or not finite")]
    Negative(f64),
    #[error("value {0} is not representable in thousandths")]
    Precision(f64),
    #[error("malformed decimal literal `{0}`")]
    Malformed(String),
}

impl Add for Num {
    type Output = Num;
    fn add(self, rhs: Num) -> Num {
        Num(self.0 + rhs.0)
    }
}

impl AddAssign for Num {
    fn add_assign(&mut self, rhs: Num) {
        self.0 += rhs.0;
    }
}

impl Sum for Num {
    fn sum<I: Iterator<Item = Num>>(iter: I) -> Num {
        iter.fold(Num::ZERO, Add::add)
    }
}

impl fmt::Display for Num {
    /// Canonical decimal form: no trailing fractional zeros, no `.`
    /// for whole numbers (`5`, `2.5`, `0.001`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let int = self.0 / 1000;
        let frac = self.0 % 1000;
        if frac == 0 {
            write!(f, "{int}")
        } else {
            let text = format!("{frac:03}");
            write!(f, "{int}.{}", text.trim_end_matches('0'))
        }
    }
}

impl fmt::Debug for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Num({self})")
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Num, D::Error> {
        let value = f64::deserialize(deserializer)?;
        Num::try_from_f64(value).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_displays_canonically() {
        for (text, millis, shown) in [
            ("5", 5000, "5"),
            ("2.5", 2500, "2.5"),
            ("0.001", 1, "0.001"),
            ("0.250", 250, "0.25"),
            ("0", 0, "0"),
        ] {
            let n = Num::parse_decimal(text).unwrap();
            assert_eq!(n.millis(), millis);
            assert_eq!(n.to_string(), shown);
        }
    }

    #[test]
    fn rejects_excess_precision_and_garbage() {
        assert!(Num::parse_decimal("0.0001").is_err());
        assert!(Num::parse_decimal(".5").is_err());
        assert!(Num::parse_decimal("1.").is_err());
        assert!(Num::parse_decimal("-1").is_err());
        assert_eq!(
            Num::try_from_f64(-0.5),
            Err(NumError::Negative(-0.5))
        );
    }

    #[test]
    fn display_roundtrips_through_parse() {
        for millis in [0, 1, 10, 999, 1000, 1001, 12_345, 1_000_000] {
            let n = Num::from_millis(millis);
            assert_eq!(Num::parse_decimal(&n.to_string()).unwrap(), n);
        }
    }
}

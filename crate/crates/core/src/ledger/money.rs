//! Fixed-point money in hundredths of a currency unit.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An amount of money as an integer number of cents.
///
/// Serialized as a decimal string with exactly two fractional digits
/// (`"-12.05"`), so logs round-trip without float formatting drift.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_cents(cents: i64) -> Self {
        Money(cents)
    }

    pub const fn cents(self) -> i64 {
        self.0
    }

    /// Nearest cent, ties away from zero.
    pub fn from_f64(x: f64) -> Result<Self> {
        let c = (x * 100.0).round();
        if !c.is_finite() || c.abs() >= 9.0e15 {
            return Err(Error::domain(format!("{x} is not a representable amount")));
        }
        Ok(Money(c as i64))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    /// `self·factor`, rounded to the cent.
    pub fn scale(self, factor: f64) -> Result<Self> {
        let c = (self.0 as f64 * factor).round();
        if !c.is_finite() || c.abs() >= 9.0e15 {
            return Err(Error::domain("scaled amount out of range"));
        }
        Ok(Money(c as i64))
    }

    /// `self·num/den` to the nearest cent, ties away from zero. Exact.
    pub fn mul_div(self, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::domain("division by zero"));
        }
        let (mut n, mut d) = (self.0 as i128 * num as i128, den as i128);
        if d < 0 {
            n = -n;
            d = -d;
        }
        let q = if n >= 0 { (2 * n + d) / (2 * d) } else { -((-2 * n + d) / (2 * d)) };
        i64::try_from(q)
            .map(Money)
            .map_err(|_| Error::domain("amount out of range"))
    }

    pub fn times(self, count: u64) -> Self {
        Money(self.0 * count as i64)
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl FromStr for Money {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::validation("amount", format!("`{s}` is not a money amount"));
        let (neg, digits) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
        if whole.is_empty()
            || frac.len() > 2
            || !whole.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
            || (digits.contains('.') && frac.is_empty())
        {
            return Err(bad());
        }
        let whole: i64 = whole.parse().map_err(|_| bad())?;
        let frac: i64 = match frac.len() {
            0 => 0,
            1 => frac.parse::<i64>().map_err(|_| bad())? * 10,
            _ => frac.parse().map_err(|_| bad())?,
        };
        let cents = whole
            .checked_mul(100)
            .and_then(|c| c.checked_add(frac))
            .ok_or_else(bad)?;
        Ok(Money(if neg { -cents } else { cents }))
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        Money(iter.map(|m| m.0).sum())
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display() {
        assert_eq!("12.34".parse::<Money>().unwrap(), Money(1234));
        assert_eq!("12.3".parse::<Money>().unwrap(), Money(1230));
        assert_eq!("12".parse::<Money>().unwrap(), Money(1200));
        assert_eq!("-0.05".parse::<Money>().unwrap(), Money(-5));
        assert_eq!(Money(-5).to_string(), "-0.05");
        assert_eq!(Money(100_000).to_string(), "1000.00");
        for bad in ["", "1.234", "abc", "1.", ".5", "--1", "1e3", "+1"] {
            assert!(bad.parse::<Money>().is_err(), "{bad}");
        }
    }

    #[test]
    fn rounding_ties_away_from_zero() {
        assert_eq!(Money::from_f64(1086.7768).unwrap(), Money(108_678));
        assert_eq!(Money::from_cents(105).scale(0.5).unwrap(), Money(53));
        assert_eq!(Money::from_cents(-105).scale(0.5).unwrap(), Money(-53));
        assert_eq!(Money(100_000).mul_div(1, 3).unwrap(), Money(33_333));
        assert_eq!(Money(5).mul_div(1, 2).unwrap(), Money(3));
        assert_eq!(Money(-5).mul_div(1, 2).unwrap(), Money(-3));
        assert_eq!(Money(5).mul_div(-1, 2).unwrap(), Money(-3));
        assert!(Money(5).mul_div(1, 0).is_err());
    }

    proptest! {
        #[test]
        fn text_roundtrip(c in -1_000_000_000_000i64..1_000_000_000_000) {
            let m = Money(c);
            prop_assert_eq!(m.to_string().parse::<Money>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            prop_assert_eq!(serde_json::from_str::<Money>(&json).unwrap(), m);
        }
    }
}

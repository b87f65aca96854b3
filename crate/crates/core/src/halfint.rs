use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A half-integer quantum number, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(n: i32) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// `s(s + 1)`.
    pub fn casimir(self) -> f64 {
        let s = self.value();
        s * (s + 1.0)
    }

    /// Nearest non-negative half-integer `s` with `s(s + 1)` closest to `lambda`,
    /// together with the residual `|lambda - s(s + 1)|`.
    pub fn from_casimir(lambda: f64) -> (Self, f64) {
        let s = (-1.0 + (1.0 + 4.0 * lambda.max(0.0)).sqrt()) / 2.0;
        let twice = (2.0 * s).round().max(0.0) as i32;
        let h = HalfInt(twice);
        (h, (lambda - h.casimir()).abs())
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: Self) -> Self {
        HalfInt(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: Self) -> Self {
        HalfInt(self.0 - rhs.0)
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> Self {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        let twice = 2.0 * v;
        if (twice - twice.round()).abs() > 1e-9 {
            return Err(serde::de::Error::custom(format!(
                "{v} is not a half-integer"
            )));
        }
        Ok(HalfInt(twice.round() as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn casimir_rounding() {
        assert_eq!(HalfInt::from_casimir(0.0).0, HalfInt::ZERO);
        assert_eq!(HalfInt::from_casimir(0.75).0, HalfInt::from_twice(1));
        assert_eq!(HalfInt::from_casimir(2.0 + 1e-9).0, HalfInt::from_int(1));
        assert_eq!(HalfInt::from_casimir(12.0).0, HalfInt::from_int(3));
        let (s, r) = HalfInt::from_casimir(1.4);
        assert_eq!(s, HalfInt::from_twice(2));
        assert!((r - 0.6).abs() < 1e-12);
    }

    #[test]
    fn display_and_serde() {
        assert_eq!(HalfInt::from_twice(3).to_string(), "3/2");
        assert_eq!(HalfInt::from_twice(-4).to_string(), "-2");
        let json = serde_json::to_string(&HalfInt::from_twice(-1)).unwrap();
        assert_eq!(json, "-0.5");
        let back: HalfInt = serde_json::from_str(&json).unwrap();
        assert_eq!(back, HalfInt::from_twice(-1));
        assert!(serde_json::from_str::<HalfInt>("0.3").is_err());
    }
}

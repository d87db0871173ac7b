//! Exact rational numbers with overflow detection.
//!
//! Numerator and denominator are `i128`, always reduced, with a positive
//! denominator. Every arithmetic operation is checked: overflow surfaces as
//! [`PolyError::Overflow`] instead of wrapping.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, Zero};

use super::PolyError;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational(Ratio<i128>);

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    /// Builds `num/den` in lowest terms.
    pub fn new(num: i128, den: i128) -> Result<Self, PolyError> {
        if den == 0 {
            return Err(PolyError::ZeroDenominator);
        }
        if num == i128::MIN || den == i128::MIN {
            return Err(PolyError::Overflow);
        }
        Ok(Rational(Ratio::new(num, den)))
    }

    pub fn integer(n: i128) -> Self {
        Rational(Ratio::from_integer(n))
    }

    /// Convenience for literals known to be valid (nonzero denominator).
    pub fn frac(num: i128, den: i128) -> Self {
        Self::new(num, den).expect("nonzero denominator")
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn to_f64(&self) -> f64 {
        // exact whenever both parts fit in 53 bits
        self.numer() as f64 / self.denom() as f64
    }

    pub fn checked_add(&self, rhs: &Rational) -> Result<Rational, PolyError> {
        self.0.checked_add(&rhs.0).map(Rational).ok_or(PolyError::Overflow)
    }

    pub fn checked_sub(&self, rhs: &Rational) -> Result<Rational, PolyError> {
        self.0.checked_sub(&rhs.0).map(Rational).ok_or(PolyError::Overflow)
    }

    pub fn checked_mul(&self, rhs: &Rational) -> Result<Rational, PolyError> {
        self.0.checked_mul(&rhs.0).map(Rational).ok_or(PolyError::Overflow)
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, PolyError> {
        if rhs.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        self.0.checked_div(&rhs.0).map(Rational).ok_or(PolyError::Overflow)
    }

    pub fn checked_pow(&self, exp: u32) -> Result<Rational, PolyError> {
        let mut acc = Rational::ONE;
        for _ in 0..exp {
            acc = acc.checked_mul(self)?;
        }
        Ok(acc)
    }

    pub fn neg(&self) -> Rational {
        // numerators are never i128::MIN (rejected in `new`, and checked ops
        // cannot produce it without reporting overflow first)
        Rational(-self.0)
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n as i128)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::integer(n as i128)
    }
}

/// Always `num/den`, even for integers.
impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

/// Accepts `p/q`, plain integers, and decimal literals with an optional
/// exponent (`-1.05`, `2.5e-3`). Decimals are converted exactly.
impl FromStr for Rational {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || PolyError::Parse(s.to_string());
        if let Some((p, q)) = s.split_once('/') {
            let p: i128 = p.trim().parse().map_err(|_| bad())?;
            let q: i128 = q.trim().parse().map_err(|_| bad())?;
            return Rational::new(p, q);
        }
        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(i) => {
                let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
                (&s[..i], e)
            }
            None => (s, 0),
        };
        let (negative, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let joined = format!("{int_part}{frac_part}");
        let mut num: i128 = joined.parse().map_err(|_| PolyError::Overflow)?;
        if negative {
            num = -num;
        }
        let scale = exponent - frac_part.len() as i32;
        let ten = Rational::integer(10);
        let factor = ten.checked_pow(scale.unsigned_abs())?;
        let base = Rational::integer(num);
        if scale >= 0 {
            base.checked_mul(&factor)
        } else {
            base.checked_div(&factor)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_sign_and_gcd() {
        let r = Rational::new(6, -4).unwrap();
        assert_eq!((r.numer(), r.denom()), (-3, 2));
        let z = Rational::new(0, -7).unwrap();
        assert_eq!((z.numer(), z.denom()), (0, 1));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(Rational::new(1, 0), Err(PolyError::ZeroDenominator)));
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!("1.05".parse::<Rational>().unwrap(), Rational::frac(21, 20));
        assert_eq!("3.2".parse::<Rational>().unwrap(), Rational::frac(16, 5));
        assert_eq!("-1.76".parse::<Rational>().unwrap(), Rational::frac(-44, 25));
        assert_eq!("0.1".parse::<Rational>().unwrap(), Rational::frac(1, 10));
        assert_eq!("53/3".parse::<Rational>().unwrap(), Rational::frac(53, 3));
        assert_eq!("-8/3".parse::<Rational>().unwrap(), Rational::frac(-8, 3));
        assert_eq!("2.5e-3".parse::<Rational>().unwrap(), Rational::frac(1, 400));
        assert_eq!("1E2".parse::<Rational>().unwrap(), Rational::integer(100));
        assert!("abc".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
        assert!(".".parse::<Rational>().is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let big = Rational::integer(i128::MAX / 2 + 1);
        assert!(matches!(big.checked_add(&big), Err(PolyError::Overflow)));
        assert!(matches!(big.checked_mul(&big), Err(PolyError::Overflow)));
    }

    #[test]
    fn display_is_always_a_fraction() {
        assert_eq!(Rational::integer(3).to_string(), "3/1");
        assert_eq!(Rational::frac(-21, 20).to_string(), "-21/20");
    }
}

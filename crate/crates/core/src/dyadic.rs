//! Exact dyadic rationals `m / 2^e` and points with dyadic coordinates.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported binary exponent of a reduced [`Dyadic`].
pub const MAX_EXP: u32 = 60;

/// An exact rational number with a power-of-two denominator, kept reduced
/// (odd mantissa, or zero with exponent zero).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Dyadic {
    mant: i64,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { mant: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { mant: 1, exp: 0 };

    /// `mant / 2^exp`.
    pub fn new(mant: i64, exp: u32) -> Self {
        assert!(exp <= MAX_EXP, "dyadic exponent {exp} exceeds {MAX_EXP}");
        Self::reduce(mant as i128, exp)
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic { mant: v, exp: 0 }
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Self::new(1, k)
    }

    /// Builds `num / den`, failing unless `den` is a positive power of two.
    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den <= 0 || (den & (den - 1)) != 0 {
            return Err(Error::arg(format!("{num}/{den} is not a dyadic rational")));
        }
        Ok(Self::new(num, den.trailing_zeros()))
    }

    fn reduce(mut mant: i128, mut exp: u32) -> Self {
        if mant == 0 {
            return Dyadic::ZERO;
        }
        let tz = mant.trailing_zeros().min(exp);
        mant >>= tz;
        exp -= tz;
        let mant = i64::try_from(mant).expect("dyadic mantissa overflow");
        Dyadic { mant, exp }
    }

    pub fn mantissa(self) -> i64 {
        self.mant
    }

    pub fn exponent(self) -> u32 {
        self.exp
    }

    pub fn is_zero(self) -> bool {
        self.mant == 0
    }

    /// The integer `self * 2^e`. Panics if that is not an integer.
    pub fn scaled(self, e: u32) -> i128 {
        assert!(e >= self.exp, "scaling 2^{e} does not clear denominator 2^{}", self.exp);
        (self.mant as i128) << (e - self.exp)
    }

    /// `floor(self * 2^n)`.
    pub fn floor_scaled(self, n: u32) -> i128 {
        if n >= self.exp {
            (self.mant as i128) << (n - self.exp)
        } else {
            (self.mant as i128) >> (self.exp - n)
        }
    }

    pub fn to_f64(self) -> f64 {
        self.mant as f64 / (self.exp as f64).exp2()
    }

    /// Divides by a dyadic divisor when the quotient is again dyadic.
    pub fn checked_div(self, rhs: Dyadic) -> Option<Dyadic> {
        if rhs.mant == 0 {
            return None;
        }
        let abs = rhs.mant.unsigned_abs();
        if !abs.is_power_of_two() {
            return None;
        }
        let shift = abs.trailing_zeros();
        let sign = rhs.mant.signum();
        // self / (±2^shift / 2^rhs.exp) = ±self * 2^rhs.exp / 2^shift
        let mant = (self.mant as i128) * (sign as i128) << rhs.exp;
        let exp = self.exp + shift;
        if exp > MAX_EXP + 62 {
            return None;
        }
        let tz = if mant == 0 { 0 } else { mant.trailing_zeros().min(exp) };
        let (mant, exp) = (mant >> tz, exp - tz);
        if exp > MAX_EXP {
            return None;
        }
        i64::try_from(mant).ok().map(|m| Dyadic { mant: m, exp })
    }

    fn common(self, rhs: Dyadic) -> (i128, i128, u32) {
        let e = self.exp.max(rhs.exp);
        (self.scaled(e), rhs.scaled(e), e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        let (a, b, e) = self.common(rhs);
        Dyadic::reduce(a + b, e)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        let (a, b, e) = self.common(rhs);
        Dyadic::reduce(a - b, e)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        let e = self.exp + rhs.exp;
        assert!(e <= MAX_EXP, "dyadic product exponent {e} exceeds {MAX_EXP}");
        Dyadic::reduce(self.mant as i128 * rhs.mant as i128, e)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mant: -self.mant, exp: self.exp }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.common(*other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.mant)
        } else {
            write!(f, "{}/{}", self.mant, 1u64 << self.exp)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `p`, `p/q` with `q` a power of two, or a finite decimal whose
    /// value is dyadic (such as `0.375`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::arg(format!("cannot parse {s:?} as a dyadic rational"));
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            return Dyadic::from_ratio(p, q);
        }
        if let Some((int, frac)) = s.split_once('.') {
            let neg = int.starts_with('-');
            let digits = format!("{}{}", int.trim_start_matches('-'), frac);
            let num: i128 = digits.parse().map_err(|_| bad())?;
            let mut den: i128 = 10i128.checked_pow(frac.len() as u32).ok_or_else(bad)?;
            // num / 10^k is dyadic iff 5^k divides num.
            let mut num = num;
            while den % 5 == 0 {
                if num % 5 != 0 {
                    return Err(bad());
                }
                num /= 5;
                den /= 5;
            }
            let num = if neg { -num } else { num };
            let exp = den.trailing_zeros();
            if exp > MAX_EXP {
                return Err(bad());
            }
            return Ok(Dyadic::reduce(num, exp));
        }
        s.parse::<i64>().map(Dyadic::from_int).map_err(|_| bad())
    }
}

impl TryFrom<String> for Dyadic {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Dyadic> for String {
    fn from(d: Dyadic) -> String {
        d.to_string()
    }
}

/// A point of the closed unit square with exact dyadic coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point2 {
    pub x: Dyadic,
    pub y: Dyadic,
}

impl Point2 {
    pub fn new(x: Dyadic, y: Dyadic) -> Result<Self> {
        let unit = |v: Dyadic| v >= Dyadic::ZERO && v <= Dyadic::ONE;
        if !unit(x) || !unit(y) {
            return Err(Error::domain(format!("point ({x}, {y}) outside [0,1]^2")));
        }
        Ok(Point2 { x, y })
    }

    /// Convenience constructor from `num/den` pairs.
    pub fn from_ratios(xn: i64, xd: i64, yn: i64, yd: i64) -> Result<Self> {
        Point2::new(Dyadic::from_ratio(xn, xd)?, Dyadic::from_ratio(yn, yd)?)
    }

    pub fn origin() -> Self {
        Point2 { x: Dyadic::ZERO, y: Dyadic::ZERO }
    }

    /// Reflection `(x, y) -> (x, 1 - y)`, the involution pairing the duality
    /// convention with incidence.
    pub fn reflect(self) -> Self {
        Point2 { x: self.x, y: Dyadic::ONE - self.y }
    }

    pub fn to_f64(self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

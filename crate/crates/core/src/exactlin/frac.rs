use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_integer::Integer;

use crate::error::Error;

/// Exact rational number with `i64` parts, always reduced with a positive
/// denominator. Every operation is carried out in `i128` and checked on the
/// way back down; overflow panics.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Frac {
    num: i64,
    den: i64,
}

#[cold]
#[inline(never)]
fn overflow() -> ! {
    panic!("rational arithmetic overflow")
}

impl Frac {
    pub const ZERO: Frac = Frac { num: 0, den: 1 };
    pub const ONE: Frac = Frac { num: 1, den: 1 };

    /// Builds `num/den`, reducing. Panics on a zero denominator.
    pub fn new(num: i64, den: i64) -> Frac {
        Frac::from_i128(num as i128, den as i128)
    }

    pub const fn from_int(n: i64) -> Frac {
        Frac { num: n, den: 1 }
    }

    fn from_i128(num: i128, den: i128) -> Frac {
        assert!(den != 0, "zero denominator");
        let g = num.gcd(&den);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(num), Ok(den)) => Frac { num, den },
            _ => overflow(),
        }
    }

    pub fn numer(self) -> i64 {
        self.num
    }

    pub fn denom(self) -> i64 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }

    pub fn abs(self) -> Frac {
        Frac {
            num: self.num.checked_abs().unwrap_or_else(|| overflow()),
            den: self.den,
        }
    }

    /// Largest integer not exceeding `self`.
    pub fn floor(self) -> i64 {
        Integer::div_floor(&self.num, &self.den)
    }

    /// `self - floor(self)`, in `[0, 1)`.
    pub fn fract(self) -> Frac {
        self - Frac::from_int(self.floor())
    }

    pub fn recip(self) -> Frac {
        Frac::from_i128(self.den as i128, self.num as i128)
    }

    pub fn checked_div(self, rhs: Frac) -> Option<Frac> {
        if rhs.is_zero() {
            None
        } else {
            Some(self / rhs)
        }
    }
}

impl Default for Frac {
    fn default() -> Self {
        Frac::ZERO
    }
}

impl From<i64> for Frac {
    fn from(n: i64) -> Self {
        Frac::from_int(n)
    }
}

impl From<i32> for Frac {
    fn from(n: i32) -> Self {
        Frac::from_int(n as i64)
    }
}

impl Add for Frac {
    type Output = Frac;
    fn add(self, rhs: Frac) -> Frac {
        if self.den == rhs.den {
            return Frac::from_i128(self.num as i128 + rhs.num as i128, self.den as i128);
        }
        let num = self.num as i128 * rhs.den as i128 + rhs.num as i128 * self.den as i128;
        Frac::from_i128(num, self.den as i128 * rhs.den as i128)
    }
}

impl Sub for Frac {
    type Output = Frac;
    fn sub(self, rhs: Frac) -> Frac {
        self + (-rhs)
    }
}

impl Mul for Frac {
    type Output = Frac;
    fn mul(self, rhs: Frac) -> Frac {
        if self.num == 0 || rhs.num == 0 {
            return Frac::ZERO;
        }
        Frac::from_i128(
            self.num as i128 * rhs.num as i128,
            self.den as i128 * rhs.den as i128,
        )
    }
}

impl Div for Frac {
    type Output = Frac;
    fn div(self, rhs: Frac) -> Frac {
        assert!(!rhs.is_zero(), "division by zero");
        Frac::from_i128(
            self.num as i128 * rhs.den as i128,
            self.den as i128 * rhs.num as i128,
        )
    }
}

impl Neg for Frac {
    type Output = Frac;
    fn neg(self) -> Frac {
        Frac {
            num: self.num.checked_neg().unwrap_or_else(|| overflow()),
            den: self.den,
        }
    }
}

impl AddAssign for Frac {
    fn add_assign(&mut self, rhs: Frac) {
        *self = *self + rhs;
    }
}

impl SubAssign for Frac {
    fn sub_assign(&mut self, rhs: Frac) {
        *self = *self - rhs;
    }
}

impl MulAssign for Frac {
    fn mul_assign(&mut self, rhs: Frac) {
        *self = *self * rhs;
    }
}

impl Sum for Frac {
    fn sum<I: Iterator<Item = Frac>>(iter: I) -> Frac {
        iter.fold(Frac::ZERO, |a, b| a + b)
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Frac) -> Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Frac) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Always `p/q`, including integers (`0/1`, `3/1`), so serialized output has
/// a single shape.
impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Accepts `p/q` or a bare integer.
impl FromStr for Frac {
    type Err = Error;
    fn from_str(s: &str) -> Result<Frac, Error> {
        let bad = || Error::Parse(format!("not a fraction: {s:?}"));
        let s = s.trim();
        match s.split_once('/') {
            Some((p, q)) => {
                let p: i64 = p.trim().parse().map_err(|_| bad())?;
                let q: i64 = q.trim().parse().map_err(|_| bad())?;
                if q == 0 {
                    return Err(bad());
                }
                Ok(Frac::new(p, q))
            }
            None => Ok(Frac::from_int(s.parse().map_err(|_| bad())?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frac() -> impl Strategy<Value = Frac> {
        (-10_000i64..10_000, 1i64..500).prop_map(|(p, q)| Frac::new(p, q))
    }

    #[test]
    fn reduction_and_sign() {
        let f = Frac::new(6, -4);
        assert_eq!((f.numer(), f.denom()), (-3, 2));
        assert_eq!(Frac::new(0, -7), Frac::ZERO);
        assert_eq!(Frac::new(0, 5).to_string(), "0/1");
    }

    #[test]
    fn floor_and_fract() {
        assert_eq!(Frac::new(7, 3).floor(), 2);
        assert_eq!(Frac::new(7, 3).fract(), Frac::new(1, 3));
        assert_eq!(Frac::new(-1, 4).floor(), -1);
        assert_eq!(Frac::new(-1, 4).fract(), Frac::new(3, 4));
        assert_eq!(Frac::from_int(-2).fract(), Frac::ZERO);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["3/4", "-1/2", "0/1", "5/1"] {
            assert_eq!(s.parse::<Frac>().unwrap().to_string(), s);
        }
        assert_eq!("7".parse::<Frac>().unwrap(), Frac::from_int(7));
        assert!("1/0".parse::<Frac>().is_err());
        assert!("x".parse::<Frac>().is_err());
    }

    #[test]
    #[should_panic(expected = "overflow")]
    fn overflow_panics() {
        let big = Frac::from_int(i64::MAX);
        let _ = big + Frac::ONE;
    }

    proptest! {
        #[test]
        fn add_then_sub_is_identity(a in frac(), b in frac()) {
            prop_assert_eq!((a + b) - b, a);
        }

        #[test]
        fn mul_then_div_is_identity(a in frac(), b in frac()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!((a * b) / b, a);
        }

        #[test]
        fn order_matches_difference_sign(a in frac(), b in frac()) {
            prop_assert_eq!(a.cmp(&b), (a - b).numer().cmp(&0));
        }

        #[test]
        fn fract_in_unit_interval(a in frac()) {
            let f = a.fract();
            prop_assert!(f >= Frac::ZERO && f < Frac::ONE);
            prop_assert!((a - f).is_integer());
        }
    }
}

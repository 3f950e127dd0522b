//! Exact rationals with a machine-word fast path.
//!
//! Values that fit in `i64/i64` stay unboxed; anything larger is promoted to a
//! `BigRational` and demoted again as soon as it fits.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone)]
pub enum Rat {
    /// numerator, denominator; denominator > 0 and gcd = 1
    Small(i64, i64),
    Big(BigRational),
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rat {
    pub fn new(n: i64, d: i64) -> Rat {
        assert!(d != 0, "zero denominator");
        Rat::from_i128(n as i128, d as i128)
    }

    pub fn int(n: i64) -> Rat {
        Rat::Small(n, 1)
    }

    pub(crate) fn from_i128(n: i128, d: i128) -> Rat {
        let (mut n, mut d) = if d < 0 { (-n, -d) } else { (n, d) };
        if n == 0 {
            return Rat::Small(0, 1);
        }
        let g = gcd_u128(n.unsigned_abs(), d as u128) as i128;
        if g > 1 {
            n /= g;
            d /= g;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(a), Ok(b)) => Rat::Small(a, b),
            _ => Rat::Big(BigRational::new_raw(BigInt::from(n), BigInt::from(d))),
        }
    }

    /// (numerator, denominator) when both fit in an i64.
    pub(crate) fn small_parts(&self) -> Option<(i64, i64)> {
        match self {
            Rat::Small(a, b) => Some((*a, *b)),
            Rat::Big(_) => None,
        }
    }

    pub fn from_big(r: BigRational) -> Rat {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(a), Some(b)) => Rat::Small(a, b),
            _ => Rat::Big(r),
        }
    }

    pub fn from_bigint(n: BigInt) -> Rat {
        match n.to_i64() {
            Some(a) => Rat::Small(a, 1),
            None => Rat::Big(BigRational::from_integer(n)),
        }
    }

    pub fn frac(n: BigInt, d: BigInt) -> Rat {
        assert!(!d.is_zero(), "zero denominator");
        Rat::from_big(BigRational::new(n, d))
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(a, b) => BigRational::new_raw(BigInt::from(*a), BigInt::from(*b)),
            Rat::Big(r) => r.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Rat::Small(a, _) => BigInt::from(*a),
            Rat::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Rat::Small(_, b) => BigInt::from(*b),
            Rat::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rat::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Rat::Small(1, 1))
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Rat::Small(_, b) => *b == 1,
            Rat::Big(r) => r.is_integer(),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Rat::Small(a, _) => a.signum() as i32,
            Rat::Big(r) => {
                if r.is_positive() {
                    1
                } else if r.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Rat {
        match self {
            Rat::Small(a, b) => {
                assert!(*a != 0, "reciprocal of zero");
                Rat::from_i128(*b as i128, *a as i128)
            }
            Rat::Big(r) => Rat::from_big(r.recip()),
        }
    }

    pub fn pow(&self, e: i32) -> Rat {
        let base = if e < 0 { self.recip() } else { self.clone() };
        let mut acc = Rat::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    /// The integer value, if this is an integer fitting in an `i64`.
    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Rat::Small(a, 1) => Some(*a),
            _ => None,
        }
    }

    /// The integer value as a `BigInt`; panics on non-integers.
    pub fn to_bigint(&self) -> BigInt {
        assert!(self.is_integer(), "not an integer: {self}");
        self.numer()
    }

    /// Exact n-th root, if it exists in Q.
    pub fn nth_root(&self, n: u32) -> Option<Rat> {
        if n == 1 {
            return Some(self.clone());
        }
        if self.is_negative() && n % 2 == 0 {
            return None;
        }
        let root = |x: &BigInt| -> Option<BigInt> {
            let r = x.nth_root(n);
            if num_traits::pow(r.clone(), n as usize) == *x {
                Some(r)
            } else {
                None
            }
        };
        let p = root(&self.numer())?;
        let q = root(&self.denom())?;
        Some(Rat::frac(p, q))
    }

    fn binop(
        &self,
        other: &Rat,
        small: impl Fn(i128, i128, i128, i128) -> Option<(i128, i128)>,
        big: impl Fn(BigRational, BigRational) -> BigRational,
    ) -> Rat {
        if let (Rat::Small(a, b), Rat::Small(c, d)) = (self, other) {
            if let Some((n, m)) = small(*a as i128, *b as i128, *c as i128, *d as i128) {
                return Rat::from_i128(n, m);
            }
        }
        Rat::from_big(big(self.to_big(), other.to_big()))
    }
}

impl Zero for Rat {
    fn zero() -> Rat {
        Rat::Small(0, 1)
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
}

impl One for Rat {
    fn one() -> Rat {
        Rat::Small(1, 1)
    }
}

impl Default for Rat {
    fn default() -> Rat {
        Rat::zero()
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        Rat::Small(n, 1)
    }
}

impl From<i32> for Rat {
    fn from(n: i32) -> Rat {
        Rat::Small(n as i64, 1)
    }
}

impl From<BigInt> for Rat {
    fn from(n: BigInt) -> Rat {
        Rat::from_bigint(n)
    }
}

impl PartialEq for Rat {
    fn eq(&self, other: &Rat) -> bool {
        match (self, other) {
            (Rat::Small(a, b), Rat::Small(c, d)) => a == c && b == d,
            (Rat::Big(x), Rat::Big(y)) => x == y,
            // normalized representations never mix
            _ => false,
        }
    }
}

impl Eq for Rat {}

impl Hash for Rat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Rat::Small(a, b) => {
                0u8.hash(state);
                a.hash(state);
                b.hash(state);
            }
            Rat::Big(r) => {
                1u8.hash(state);
                r.hash(state);
            }
        }
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Rat) -> Ordering {
        match (self, other) {
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                ((*a as i128) * (*d as i128)).cmp(&((*c as i128) * (*b as i128)))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Rat) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn add_small(a: i128, b: i128, c: i128, d: i128) -> Option<(i128, i128)> {
    if b == d {
        return Some((a + c, b));
    }
    Some((a.checked_mul(d)?.checked_add(c.checked_mul(b)?)?, b.checked_mul(d)?))
}

fn sub_small(a: i128, b: i128, c: i128, d: i128) -> Option<(i128, i128)> {
    add_small(a, b, -c, d)
}

fn mul_small(a: i128, b: i128, c: i128, d: i128) -> Option<(i128, i128)> {
    Some((a * c, b * d))
}

fn div_small(a: i128, b: i128, c: i128, d: i128) -> Option<(i128, i128)> {
    assert!(c != 0, "division by zero");
    Some((a * d, b * c))
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $small:ident, $op:tt) => {
        impl<'a, 'b> $tr<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, o: &'b Rat) -> Rat {
                self.binop(o, $small, |x, y| x $op y)
            }
        }
        impl<'b> $tr<&'b Rat> for Rat {
            type Output = Rat;
            fn $m(self, o: &'b Rat) -> Rat {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, o: Rat) -> Rat {
                self.$m(&o)
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, o: Rat) -> Rat {
                (&self).$m(&o)
            }
        }
    };
}

forward_binop!(Add, add, add_small, +);
forward_binop!(Sub, sub, sub_small, -);
forward_binop!(Mul, mul, mul_small, *);
forward_binop!(Div, div, div_small, /);

macro_rules! forward_assign {
    ($tr:ident, $m:ident, $op:tt) => {
        impl<'b> $tr<&'b Rat> for Rat {
            fn $m(&mut self, o: &'b Rat) {
                *self = &*self $op o;
            }
        }
        impl $tr<Rat> for Rat {
            fn $m(&mut self, o: Rat) {
                *self = &*self $op &o;
            }
        }
    };
}

forward_assign!(AddAssign, add_assign, +);
forward_assign!(SubAssign, sub_assign, -);
forward_assign!(MulAssign, mul_assign, *);
forward_assign!(DivAssign, div_assign, /);

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match self {
            Rat::Small(a, b) => Rat::from_i128(-(*a as i128), *b as i128),
            Rat::Big(r) => Rat::from_big(-r),
        }
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

impl Product for Rat {
    fn product<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::one(), |a, b| a * b)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rat::Small(a, 1) => write!(f, "{a}"),
            Rat::Small(a, b) => write!(f, "{a}/{b}"),
            Rat::Big(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Rat::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse rational from {0:?}")]
pub struct ParseRatError(pub String);

impl FromStr for Rat {
    type Err = ParseRatError;
    fn from_str(s: &str) -> Result<Rat, ParseRatError> {
        let err = || ParseRatError(s.to_string());
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err())?;
        let d: BigInt = d.parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        Ok(Rat::frac(n, d))
    }
}

/// Integers serialize as JSON numbers when they fit in an `i64`, everything
/// else as a `"p/q"` string.
impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.to_i64() {
            Some(n) => s.serialize_i64(n),
            None => s.serialize_str(&self.to_string()),
        }
    }
}

struct RatVisitor;

impl Visitor<'_> for RatVisitor {
    type Value = Rat;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a string \"p/q\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rat, E> {
        Ok(Rat::int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rat, E> {
        Ok(Rat::from(BigInt::from(v)))
    }

    fn visit_f64<E: de::Error>(self, _v: f64) -> Result<Rat, E> {
        Err(E::custom("floating point numbers are not accepted; use \"p/q\""))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Rat, E> {
        v.parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        d.deserialize_any(RatVisitor)
    }
}

pub fn gcd_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

/// Least common multiple of the denominators of `xs`.
pub fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(&x.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Rat::int(i64::MAX) * Rat::int(4);
        assert!(matches!(big, Rat::Big(_)));
        let back = &big / &Rat::int(4);
        assert!(matches!(back, Rat::Small(_, _)));
        assert_eq!(back, Rat::int(i64::MAX));
    }

    #[test]
    fn normal_form() {
        assert_eq!(Rat::new(6, -4), Rat::new(-3, 2));
        assert_eq!(Rat::new(0, -5), Rat::zero());
        assert_eq!(Rat::new(6, -4).to_string(), "-3/2");
    }

    #[test]
    fn parse_and_serde() {
        let x: Rat = "-12/8".parse().unwrap();
        assert_eq!(x, Rat::new(-3, 2));
        assert!("1/0".parse::<Rat>().is_err());
        assert!("abc".parse::<Rat>().is_err());
        let j = serde_json::to_string(&vec![Rat::new(1, 2), Rat::int(3)]).unwrap();
        assert_eq!(j, r#"["1/2",3]"#);
        let v: Vec<Rat> = serde_json::from_str(r#"["1/2", 3, "7"]"#).unwrap();
        assert_eq!(v, vec![Rat::new(1, 2), Rat::int(3), Rat::int(7)]);
        assert!(serde_json::from_str::<Rat>("0.5").is_err());
    }

    #[test]
    fn roots() {
        assert_eq!(Rat::new(8, 27).nth_root(3), Some(Rat::new(2, 3)));
        assert_eq!(Rat::new(-8, 27).nth_root(3), Some(Rat::new(-2, 3)));
        assert_eq!(Rat::new(2, 1).nth_root(2), None);
        assert_eq!(Rat::new(-4, 1).nth_root(2), None);
    }

    #[test]
    fn ordering_mixed() {
        let big = Rat::int(i64::MAX) * Rat::int(2);
        assert!(big > Rat::int(1));
        assert!(-&big < Rat::int(-1));
    }
}

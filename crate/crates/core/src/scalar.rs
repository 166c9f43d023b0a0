//! Exact Gaussian-rational scalars.
//!
//! Every entry of a linear representation is an element of `Q(i)`. Most
//! representations met in practice have small integer entries, so values are
//! kept as a pair of `i64` while they fit and promoted to arbitrary-precision
//! rationals otherwise. The representation is canonical: a value is stored as
//! [`Scalar::Small`] whenever both parts are integers fitting in `i64`, which
//! makes structural equality coincide with numerical equality.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Arbitrary-precision `re + im·i` with rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    fn add(&self, o: &Self) -> Self {
        GaussRational {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    fn sub(&self, o: &Self) -> Self {
        GaussRational {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    fn mul(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRational {
                re: &self.re * &o.re,
                im: BigRational::zero(),
            };
        }
        GaussRational {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn div(&self, o: &Self) -> Option<Self> {
        if o.im.is_zero() {
            if o.re.is_zero() {
                return None;
            }
            return Some(GaussRational {
                re: &self.re / &o.re,
                im: &self.im / &o.re,
            });
        }
        let norm = &o.re * &o.re + &o.im * &o.im;
        let re = (&self.re * &o.re + &self.im * &o.im) / &norm;
        let im = (&self.im * &o.re - &self.re * &o.im) / &norm;
        Some(GaussRational { re, im })
    }
}

/// An exact element of `Q(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    /// Gaussian integer with both parts in `i64`.
    Small(i64, i64),
    /// Everything else.
    Big(Box<GaussRational>),
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::Small(0, 0)
    }
}

fn ratio_to_i64(r: &BigRational) -> Option<i64> {
    if r.is_integer() {
        r.numer().to_i64()
    } else {
        None
    }
}

impl Scalar {
    pub const ZERO: Scalar = Scalar::Small(0, 0);
    pub const ONE: Scalar = Scalar::Small(1, 0);

    pub fn zero() -> Self {
        Scalar::ZERO
    }

    pub fn one() -> Self {
        Scalar::ONE
    }

    pub fn int(n: i64) -> Self {
        Scalar::Small(n, 0)
    }

    pub fn gauss_int(re: i64, im: i64) -> Self {
        Scalar::Small(re, im)
    }

    /// `numer / denom`; panics when `denom == 0`.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Self::from_parts(
            BigRational::new(BigInt::from(numer), BigInt::from(denom)),
            BigRational::zero(),
        )
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::from_parts(BigRational::from_integer(n), BigRational::zero())
    }

    pub fn from_parts(re: BigRational, im: BigRational) -> Self {
        match (ratio_to_i64(&re), ratio_to_i64(&im)) {
            (Some(a), Some(b)) => Scalar::Small(a, b),
            _ => Scalar::Big(Box::new(GaussRational { re, im })),
        }
    }

    fn from_gauss(g: GaussRational) -> Self {
        Self::from_parts(g.re, g.im)
    }

    fn to_gauss(&self) -> GaussRational {
        match self {
            Scalar::Small(a, b) => GaussRational {
                re: BigRational::from_integer(BigInt::from(*a)),
                im: BigRational::from_integer(BigInt::from(*b)),
            },
            Scalar::Big(g) => (**g).clone(),
        }
    }

    pub fn re(&self) -> BigRational {
        self.to_gauss().re
    }

    pub fn im(&self) -> BigRational {
        self.to_gauss().im
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Scalar::Small(0, 0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Small(1, 0))
    }

    pub fn is_real(&self) -> bool {
        match self {
            Scalar::Small(_, b) => *b == 0,
            Scalar::Big(g) => g.im.is_zero(),
        }
    }

    /// Both parts are integers.
    pub fn is_gaussian_integer(&self) -> bool {
        match self {
            Scalar::Small(..) => true,
            Scalar::Big(g) => g.re.is_integer() && g.im.is_integer(),
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            Scalar::Small(a, b) => match b.checked_neg() {
                Some(nb) => Scalar::Small(*a, nb),
                None => Self::from_parts(self.re(), -self.im()),
            },
            Scalar::Big(g) => Self::from_parts(g.re.clone(), -g.im.clone()),
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Scalar::Small(a, b) => Complex64::new(*a as f64, *b as f64),
            Scalar::Big(g) => Complex64::new(
                g.re.to_f64().unwrap_or(f64::NAN),
                g.im.to_f64().unwrap_or(f64::NAN),
            ),
        }
    }

    /// Division; `None` when dividing by zero.
    pub fn checked_div(&self, rhs: &Scalar) -> Option<Scalar> {
        if rhs.is_zero() {
            return None;
        }
        if let (Scalar::Small(a, 0), Scalar::Small(c, 0)) = (self, rhs) {
            if *c != 0 && a % c == 0 {
                if let Some(q) = a.checked_div(*c) {
                    return Some(Scalar::Small(q, 0));
                }
            }
        }
        self.to_gauss().div(&rhs.to_gauss()).map(Self::from_gauss)
    }

    pub fn pow(&self, mut e: u32) -> Scalar {
        let mut base = self.clone();
        let mut acc = Scalar::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::from_parts(r, BigRational::zero())
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &'a Scalar) -> Scalar {
        if let (Scalar::Small(a, b), Scalar::Small(c, d)) = (self, rhs) {
            if let (Some(x), Some(y)) = (a.checked_add(*c), b.checked_add(*d)) {
                return Scalar::Small(x, y);
            }
        }
        Scalar::from_gauss(self.to_gauss().add(&rhs.to_gauss()))
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &'a Scalar) -> Scalar {
        if let (Scalar::Small(a, b), Scalar::Small(c, d)) = (self, rhs) {
            if let (Some(x), Some(y)) = (a.checked_sub(*c), b.checked_sub(*d)) {
                return Scalar::Small(x, y);
            }
        }
        Scalar::from_gauss(self.to_gauss().sub(&rhs.to_gauss()))
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &'a Scalar) -> Scalar {
        if let (Scalar::Small(a, b), Scalar::Small(c, d)) = (self, rhs) {
            if *b == 0 && *d == 0 {
                if let Some(x) = a.checked_mul(*c) {
                    return Scalar::Small(x, 0);
                }
            } else {
                let re = a
                    .checked_mul(*c)
                    .and_then(|ac| b.checked_mul(*d).and_then(|bd| ac.checked_sub(bd)));
                let im = a
                    .checked_mul(*d)
                    .and_then(|ad| b.checked_mul(*c).and_then(|bc| ad.checked_add(bc)));
                if let (Some(x), Some(y)) = (re, im) {
                    return Scalar::Small(x, y);
                }
            }
        }
        Scalar::from_gauss(self.to_gauss().mul(&rhs.to_gauss()))
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn div(self, rhs: &'a Scalar) -> Scalar {
        self.checked_div(rhs).expect("division by zero scalar")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        &Scalar::ZERO - self
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &'a Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = &*self * rhs;
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |a, b| a + b)
    }
}

fn fmt_ratio(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.to_gauss();
        if g.im.is_zero() {
            return write!(f, "{}", fmt_ratio(&g.re));
        }
        let im_abs = match fmt_ratio(&g.im.abs()) {
            one if one == "1" => String::new(),
            other => other,
        };
        let sign = if g.im.is_negative() { '-' } else { '+' };
        if g.re.is_zero() {
            if g.im.is_negative() {
                write!(f, "-{im_abs}i")
            } else {
                write!(f, "{im_abs}i")
            }
        } else {
            write!(f, "{}{sign}{im_abs}i", fmt_ratio(&g.re))
        }
    }
}

/// Error returned when a scalar literal cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid scalar literal `{0}`")]
pub struct ParseScalarError(pub String);

fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().ok()?;
            Some(BigRational::from_integer(n))
        }
    }
}

/// Parses `p`, `p/q`, `bi`, `a+bi`, `a-b/ci`, `i`, `-i`.
impl FromStr for Scalar {
    type Err = ParseScalarError;

    fn from_str(src: &str) -> Result<Self, Self::Err> {
        let err = || ParseScalarError(src.to_string());
        let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(err());
        }
        if let Some(body) = s.strip_suffix('i') {
            // split at the last sign that is not in leading position
            let split = body
                .char_indices()
                .skip(1)
                .filter(|(_, c)| *c == '+' || *c == '-')
                .map(|(i, _)| i)
                .last();
            let (re_str, im_str) = match split {
                Some(i) => (&body[..i], &body[i..]),
                None => ("0", body),
            };
            let im = match im_str {
                "" | "+" => BigRational::one(),
                "-" => -BigRational::one(),
                other => parse_ratio(other.strip_prefix('+').unwrap_or(other)).ok_or_else(err)?,
            };
            let re = parse_ratio(re_str).ok_or_else(err)?;
            Ok(Scalar::from_parts(re, im))
        } else {
            let re = parse_ratio(&s).ok_or_else(err)?;
            Ok(Scalar::from_parts(re, BigRational::zero()))
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(n) => Ok(Scalar::int(n)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

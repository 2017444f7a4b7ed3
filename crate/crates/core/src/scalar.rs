//! Numbers in `[0, 1]` under one of two arithmetic backends.
//!
//! Maps with rational linear or Möbius branches run on [`Scalar::Exact`]
//! (arbitrary precision rationals, no rounding anywhere). Everything else runs
//! on [`Scalar::Approx`], a plain `f64` whose comparisons treat values closer
//! than [`EPS_NUM`] as equal.
//!
//! Values of different backends never mix. The arithmetic operators panic on
//! a mixed pair; the `try_*` methods and [`Scalar::try_cmp`] return
//! [`Error::MixedBackend`] instead.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Comparison tolerance of the float backend.
pub const EPS_NUM: f64 = 1e-12;

/// Which arithmetic a value (or a whole map) lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Rational,
    Float,
}

impl Backend {
    pub fn zero(self) -> Scalar {
        self.int(0)
    }

    pub fn one(self) -> Scalar {
        self.int(1)
    }

    pub fn int(self, n: i64) -> Scalar {
        match self {
            Backend::Rational => Scalar::Exact(BigRational::from_integer(n.into())),
            Backend::Float => Scalar::Approx(n as f64),
        }
    }

    /// `num / den` in this backend. Panics when `den == 0`.
    pub fn ratio(self, num: i64, den: i64) -> Scalar {
        assert!(den != 0, "zero denominator");
        match self {
            Backend::Rational => Scalar::Exact(BigRational::new(num.into(), den.into())),
            Backend::Float => Scalar::Approx(num as f64 / den as f64),
        }
    }

    /// Parses `p/q`, an integer or a decimal literal into this backend.
    ///
    /// Decimal literals are read exactly on the rational backend
    /// (`"0.125"` is `1/8`).
    pub fn parse(self, s: &str) -> Result<Scalar, Error> {
        let s = s.trim();
        match self {
            Backend::Rational => parse_rational(s).map(Scalar::Exact),
            Backend::Float => {
                if let Some(r) = parse_fraction(s) {
                    return r.map(|q| Scalar::Approx(rational_to_f64(&q)));
                }
                s.parse::<f64>()
                    .map(Scalar::Approx)
                    .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
            }
        }
    }

    /// Explicit backend conversion. Exact to float rounds; float to exact is
    /// the exact binary value of the double.
    pub fn convert(self, x: &Scalar) -> Scalar {
        match (self, x) {
            (Backend::Rational, Scalar::Exact(_)) | (Backend::Float, Scalar::Approx(_)) => {
                x.clone()
            }
            (Backend::Float, Scalar::Exact(q)) => Scalar::Approx(rational_to_f64(q)),
            (Backend::Rational, Scalar::Approx(v)) => Scalar::Exact(
                BigRational::from_float(*v).unwrap_or_else(|| BigRational::from_integer(0.into())),
            ),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Rational => f.write_str("rational"),
            Backend::Float => f.write_str("float"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Approx(f64),
}

impl Scalar {
    pub fn backend(&self) -> Backend {
        match self {
            Scalar::Exact(_) => Backend::Rational,
            Scalar::Approx(_) => Backend::Float,
        }
    }

    pub fn ratio(num: i64, den: i64) -> Scalar {
        Backend::Rational.ratio(num, den)
    }

    pub fn float(v: f64) -> Scalar {
        Scalar::Approx(v)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => rational_to_f64(q),
            Scalar::Approx(v) => *v,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Approx(_) => None,
        }
    }

    pub fn same_backend(&self, other: &Scalar) -> Result<(), Error> {
        if self.backend() == other.backend() {
            Ok(())
        } else {
            Err(Error::MixedBackend)
        }
    }

    pub fn try_cmp(&self, other: &Scalar) -> Result<Ordering, Error> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(rational_cmp(a, b)),
            (Scalar::Approx(a), Scalar::Approx(b)) => Ok(approx_cmp(*a, *b)),
            _ => Err(Error::MixedBackend),
        }
    }

    /// Total comparison for values known to share a backend.
    pub(crate) fn cmp_same(&self, other: &Scalar) -> Ordering {
        self.try_cmp(other).expect("mixed scalar backends")
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar, Error> {
        self.same_backend(other)?;
        Ok(self + other)
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar, Error> {
        self.same_backend(other)?;
        Ok(self - other)
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar, Error> {
        self.same_backend(other)?;
        Ok(self * other)
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar, Error> {
        self.same_backend(other)?;
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self / other)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Approx(v) => v.abs() <= EPS_NUM,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_negative(),
            Scalar::Approx(v) => *v < -EPS_NUM,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_positive(),
            Scalar::Approx(v) => *v > EPS_NUM,
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q.abs()),
            Scalar::Approx(v) => Scalar::Approx(v.abs()),
        }
    }

    pub fn recip(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q.recip()),
            Scalar::Approx(v) => Scalar::Approx(1.0 / v),
        }
    }

    /// Largest integer `<= self`. Float values within `EPS_NUM` of an
    /// integer snap to it.
    pub fn floor(&self) -> BigInt {
        match self {
            Scalar::Exact(q) => q.floor().to_integer(),
            Scalar::Approx(v) => BigInt::from(snap(*v).floor() as i64),
        }
    }

    /// Smallest integer `>= self`, with the same float snapping as [`floor`](Self::floor).
    pub fn ceil(&self) -> BigInt {
        match self {
            Scalar::Exact(q) => q.ceil().to_integer(),
            Scalar::Approx(v) => BigInt::from(snap(*v).ceil() as i64),
        }
    }

    pub fn floor_i64(&self) -> Option<i64> {
        self.floor().to_i64()
    }

    pub fn ceil_i64(&self) -> Option<i64> {
        self.ceil().to_i64()
    }

    /// Fractional part `self - floor(self)`.
    pub fn fract(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q - q.floor()),
            Scalar::Approx(v) => {
                let s = snap(*v);
                Scalar::Approx((s - s.floor()).max(0.0))
            }
        }
    }

    pub fn from_int(&self, n: i64) -> Scalar {
        self.backend().int(n)
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if other.cmp_same(&self) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if other.cmp_same(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    /// Square root; float backend only.
    pub fn sqrt(&self) -> Result<Scalar, Error> {
        match self {
            Scalar::Approx(v) => Ok(Scalar::Approx(v.max(0.0).sqrt())),
            Scalar::Exact(_) => Err(Error::Unsupported("square root on the rational backend")),
        }
    }
}

/// Cross-multiplied comparison; cheaper than `Ratio::cmp`, which divides.
fn rational_cmp(a: &BigRational, b: &BigRational) -> Ordering {
    if a.denom() == b.denom() {
        return a.numer().cmp(b.numer());
    }
    let (sa, sb) = (a.numer().sign(), b.numer().sign());
    if sa != sb {
        return sa.cmp(&sb);
    }
    (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
}

fn approx_cmp(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= EPS_NUM {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= EPS_NUM * v.abs().max(1.0) {
        r
    } else {
        v
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Huge numerator/denominator pairs: shift both down first.
    let n = q.numer();
    let d = q.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = n >> shift;
    let d = d >> shift;
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if b != 0.0 => a / b,
        _ => 0.0,
    }
}

fn parse_fraction(s: &str) -> Option<Result<BigRational, Error>> {
    let (n, d) = s.split_once('/')?;
    let bad = || Error::Parse(format!("not a fraction: {s:?}"));
    let n = match BigInt::from_str(n.trim()) {
        Ok(n) => n,
        Err(_) => return Some(Err(bad())),
    };
    let d = match BigInt::from_str(d.trim()) {
        Ok(d) => d,
        Err(_) => return Some(Err(bad())),
    };
    if d.is_zero() {
        return Some(Err(Error::DivisionByZero));
    }
    Some(Ok(BigRational::new(n, d)))
}

fn parse_rational(s: &str) -> Result<BigRational, Error> {
    if let Some(r) = parse_fraction(s) {
        return r;
    }
    let bad = || Error::Parse(format!("not a rational literal: {s:?}"));
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    if neg {
        numer = -numer;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let q = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(q)
}

/// Positional decimal with 17 significant digits.
pub(crate) fn format_f64(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0.0".to_string() } else { v.to_string() };
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-20..=20).contains(&exp) {
        return format!("{:.16e}", v);
    }
    let decimals = (16 - exp).max(0) as usize;
    format!("{:.*}", decimals, v)
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{q}"),
            Scalar::Approx(v) => f.write_str(&format_f64(*v)),
        }
    }
}

/// `p/q` and integers parse as exact; anything with a decimal point or an
/// exponent parses as a float.
impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.contains('/') || s.chars().all(|c| c.is_ascii_digit() || c == '-' || c == '+') {
            Backend::Rational.parse(s)
        } else {
            Backend::Float.parse(s)
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i64),
            Float(f64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Int(n) => Ok(Backend::Rational.int(n)),
            Repr::Float(v) => Ok(Scalar::Approx(v)),
        }
    }
}

/// Mixed backends compare as unequal.
impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        matches!(self.try_cmp(other), Ok(Ordering::Equal))
    }
}

/// Mixed backends are unordered.
impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.try_cmp(other).ok()
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<'a> $trait<&'a Scalar> for &'a Scalar {
            type Output = Scalar;

            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    (Scalar::Approx(a), Scalar::Approx(b)) => Scalar::Approx(a $op b),
                    _ => panic!("mixed scalar backends"),
                }
            }
        }

        impl $trait<Scalar> for Scalar {
            type Output = Scalar;

            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }

        impl<'a> $trait<&'a Scalar> for Scalar {
            type Output = Scalar;

            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for &Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(-q),
            Scalar::Approx(v) => Scalar::Approx(-v),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        -&self
    }
}

impl From<BigRational> for Scalar {
    fn from(q: BigRational) -> Self {
        Scalar::Exact(q)
    }
}

impl Zero for Scalar {
    fn zero() -> Self {
        Backend::Rational.zero()
    }

    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
}

impl One for Scalar {
    fn one() -> Self {
        Backend::Rational.one()
    }
}

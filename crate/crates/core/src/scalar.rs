//! Scalar backends.
//!
//! Haar functions carry the factor `|I|^{-1/2} = 2^{l/2}`, so exact arithmetic
//! needs the field Q(√2) rather than Q. [`QSqrt2`] stores `a + b√2` with
//! arbitrary-precision rational parts; `f64` is the float backend.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;
    const NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    /// `2^{k/2}`.
    fn sqrt2_pow(k: i32) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    /// Exact `(a, b)` with value `a + b√2` (floats convert exactly to dyadic rationals).
    fn parts(&self) -> (BigRational, BigRational);
    fn from_parts(a: &BigRational, b: &BigRational) -> Self;

    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn add_to(&mut self, o: &Self);
    /// `self += a * b`
    fn fma(&mut self, a: &Self, b: &Self);

    fn square(&self) -> Self {
        self.times(self)
    }
    /// Equality with a tolerance for the float backend; exact otherwise.
    fn approx_eq(&self, o: &Self, tol: f64) -> bool {
        if Self::EXACT {
            self == o
        } else {
            let (a, b) = (self.to_f64(), o.to_f64());
            (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
        }
    }
    fn near_zero(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.to_f64().abs() <= tol
        }
    }
    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const NAME: &'static str = "float";

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn sqrt2_pow(k: i32) -> Self {
        let half = 2f64.powi(k.div_euclid(2));
        if k.rem_euclid(2) == 1 {
            half * std::f64::consts::SQRT_2
        } else {
            half
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn parts(&self) -> (BigRational, BigRational) {
        (BigRational::from_float(*self).unwrap_or_else(rz), rz())
    }
    fn from_parts(a: &BigRational, b: &BigRational) -> Self {
        a.to_f64().unwrap_or(f64::NAN) + b.to_f64().unwrap_or(f64::NAN) * std::f64::consts::SQRT_2
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn add_to(&mut self, o: &Self) {
        *self += *o;
    }
    fn fma(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

/// Exact element `rat + irr·√2` of Q(√2).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QSqrt2 {
    pub rat: BigRational,
    pub irr: BigRational,
}

fn rz() -> BigRational {
    BigRational::zero()
}

impl QSqrt2 {
    pub fn new(rat: BigRational, irr: BigRational) -> Self {
        QSqrt2 { rat, irr }
    }

    pub fn rational(r: BigRational) -> Self {
        QSqrt2 { rat: r, irr: rz() }
    }

    pub fn is_rational(&self) -> bool {
        self.irr.is_zero()
    }

    pub fn conj(&self) -> Self {
        QSqrt2 { rat: self.rat.clone(), irr: -self.irr.clone() }
    }

    /// Sign of `a + b√2`, decided exactly.
    pub fn signum_i(&self) -> i32 {
        let sa = sgn(&self.rat);
        let sb = sgn(&self.irr);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return if sa == 0 { sb } else { sa };
        }
        // opposite signs: compare a^2 against 2 b^2
        let a2 = &self.rat * &self.rat;
        let b2 = &self.irr * &self.irr * BigRational::from_integer(BigInt::from(2));
        match a2.cmp(&b2) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn inv(&self) -> Self {
        let two = BigRational::from_integer(BigInt::from(2));
        let norm = &self.rat * &self.rat - &two * &self.irr * &self.irr;
        assert!(!norm.is_zero(), "division by zero in Q(sqrt2)");
        QSqrt2 { rat: &self.rat / &norm, irr: -(&self.irr / &norm) }
    }
}

fn sgn(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.irr.is_zero() {
            return write!(f, "{}", fmt_rat(&self.rat));
        }
        if self.rat.is_zero() {
            return write!(f, "{}*r2", fmt_rat(&self.irr));
        }
        write!(f, "{}{}{}*r2", fmt_rat(&self.rat), if self.irr.is_negative() { "" } else { "+" }, fmt_rat(&self.irr))
    }
}

impl FromStr for QSqrt2 {
    type Err = Error;
    /// Accepts `p`, `p/q`, `p/q*r2`, and `p/q+u/v*r2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_rat = |t: &str| -> Result<BigRational> {
            let t = t.trim();
            if let Some((n, d)) = t.split_once('/') {
                let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
                let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
                if d.is_zero() {
                    return Err(Error::Parse(format!("zero denominator in {s}")));
                }
                Ok(BigRational::new(n, d))
            } else {
                let n: BigInt = t.parse().map_err(|_| Error::Parse(s.to_string()))?;
                Ok(BigRational::from_integer(n))
            }
        };
        if let Some(body) = s.strip_suffix("*r2") {
            // split at the last sign that is not leading
            let bytes = body.as_bytes();
            let mut cut = None;
            for i in (1..bytes.len()).rev() {
                if bytes[i] == b'+' || bytes[i] == b'-' {
                    cut = Some(i);
                    break;
                }
            }
            match cut {
                Some(i) => {
                    let a = parse_rat(&body[..i])?;
                    let b = parse_rat(&body[i..].trim_start_matches('+'))?;
                    Ok(QSqrt2::new(a, b))
                }
                None => Ok(QSqrt2::new(rz(), parse_rat(body)?)),
            }
        } else {
            Ok(QSqrt2::rational(parse_rat(s)?))
        }
    }
}

impl PartialOrd for QSqrt2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.minus(other).signum_i().cmp(&0))
    }
}

impl Add for QSqrt2 {
    type Output = QSqrt2;
    fn add(self, o: QSqrt2) -> QSqrt2 {
        self.plus(&o)
    }
}
impl Sub for QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, o: QSqrt2) -> QSqrt2 {
        self.minus(&o)
    }
}
impl Mul for QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, o: QSqrt2) -> QSqrt2 {
        self.times(&o)
    }
}
impl Div for QSqrt2 {
    type Output = QSqrt2;
    fn div(self, o: QSqrt2) -> QSqrt2 {
        self.times(&o.inv())
    }
}
impl Neg for QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2 { rat: -self.rat, irr: -self.irr }
    }
}

impl Scalar for QSqrt2 {
    const EXACT: bool = true;
    const NAME: &'static str = "rational";

    fn zero() -> Self {
        QSqrt2 { rat: rz(), irr: rz() }
    }
    fn one() -> Self {
        QSqrt2 { rat: BigRational::one(), irr: rz() }
    }
    fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.irr.is_zero()
    }
    fn from_i64(n: i64) -> Self {
        QSqrt2::rational(BigRational::from_integer(BigInt::from(n)))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        QSqrt2::rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
    fn from_rational(r: &BigRational) -> Self {
        QSqrt2::rational(r.clone())
    }
    fn sqrt2_pow(k: i32) -> Self {
        let e = k.div_euclid(2);
        let p = if e >= 0 {
            BigRational::from_integer(BigInt::one() << (e as usize))
        } else {
            BigRational::new(BigInt::one(), BigInt::one() << ((-e) as usize))
        };
        if k.rem_euclid(2) == 1 {
            QSqrt2 { rat: rz(), irr: p }
        } else {
            QSqrt2 { rat: p, irr: rz() }
        }
    }
    fn to_f64(&self) -> f64 {
        self.rat.to_f64().unwrap_or(f64::NAN) + self.irr.to_f64().unwrap_or(f64::NAN) * std::f64::consts::SQRT_2
    }
    fn parts(&self) -> (BigRational, BigRational) {
        (self.rat.clone(), self.irr.clone())
    }
    fn from_parts(a: &BigRational, b: &BigRational) -> Self {
        QSqrt2::new(a.clone(), b.clone())
    }
    fn abs(&self) -> Self {
        if self.signum_i() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn plus(&self, o: &Self) -> Self {
        QSqrt2 { rat: &self.rat + &o.rat, irr: &self.irr + &o.irr }
    }
    fn minus(&self, o: &Self) -> Self {
        QSqrt2 { rat: &self.rat - &o.rat, irr: &self.irr - &o.irr }
    }
    fn times(&self, o: &Self) -> Self {
        let a_irr = !self.irr.is_zero();
        let b_irr = !o.irr.is_zero();
        let a_rat = !self.rat.is_zero();
        let b_rat = !o.rat.is_zero();
        let mut rat = rz();
        let mut irr = rz();
        if a_rat && b_rat {
            rat = &self.rat * &o.rat;
        }
        if a_irr && b_irr {
            let t = &self.irr * &o.irr;
            rat = rat + &t + &t;
        }
        if a_rat && b_irr {
            irr = &self.rat * &o.irr;
        }
        if a_irr && b_rat {
            irr = irr + &self.irr * &o.rat;
        }
        QSqrt2 { rat, irr }
    }
    fn add_to(&mut self, o: &Self) {
        if !o.rat.is_zero() {
            self.rat = &self.rat + &o.rat;
        }
        if !o.irr.is_zero() {
            self.irr = &self.irr + &o.irr;
        }
    }
    fn fma(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        let p = a.times(b);
        self.add_to(&p);
    }
}

/// Exact rational for use in code that never needs √2.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> QSqrt2 {
        s.parse().unwrap()
    }

    #[test]
    fn sqrt2_powers() {
        assert_eq!(QSqrt2::sqrt2_pow(0), QSqrt2::one());
        assert_eq!(QSqrt2::sqrt2_pow(2), QSqrt2::from_i64(2));
        assert_eq!(QSqrt2::sqrt2_pow(1).square(), QSqrt2::from_i64(2));
        assert_eq!(QSqrt2::sqrt2_pow(-1).square(), QSqrt2::from_ratio(1, 2));
        assert_eq!(QSqrt2::sqrt2_pow(3).times(&QSqrt2::sqrt2_pow(-3)), QSqrt2::one());
        assert!((f64::sqrt2_pow(-3) - 2f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn ordering_is_exact() {
        // 3/2 vs sqrt2 ~ 1.41421
        assert!(q("3/2") > q("1*r2"));
        assert!(q("7/5") < q("1*r2"));
        assert!(q("-1+1*r2") > QSqrt2::zero());
        assert!(q("1-1*r2") < QSqrt2::zero());
        assert_eq!(q("0").signum_i(), 0);
    }

    #[test]
    fn inverse_and_display_roundtrip() {
        let x = q("3/4-5/7*r2");
        assert_eq!(x.clone() / x.clone(), QSqrt2::one());
        assert_eq!(q(&x.to_string()), x);
        assert_eq!(q("-2/3*r2").to_string(), "-2/3*r2");
    }
}

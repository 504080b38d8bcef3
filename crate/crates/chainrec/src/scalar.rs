//! Scalars in two arithmetic modes: exact rationals for identity checks and
//! f64 for sweeps. Complex scalars are pairs of the underlying real mode.
//!
//! The floating mode carries [`FLOAT_EPS`] as its documented machine epsilon;
//! comparisons in floating mode are only meaningful up to a few multiples of it.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::fmt;

pub type Rat = BigRational;

/// Machine epsilon of the floating mode (IEEE 754 binary64).
pub const FLOAT_EPS: f64 = f64::EPSILON;

/// Arithmetic mode of a scalar. Exact and floating values never mix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Rational(Rat),
    Float(f64),
    ComplexRational(Rat, Rat),
    ComplexFloat(f64, f64),
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses a decimal literal ("0.1", "-3", "5/4") into an exact rational.
pub fn rat_from_decimal(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Scenario(format!("bad rational literal {s:?}")))?;
        let d: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Scenario(format!("bad rational literal {s:?}")))?;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        return Ok(Rat::new(n, d));
    }
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    let negative = int_part.starts_with('-');
    let digits: String = format!("{}{}", int_part, frac_part);
    let value: BigInt = digits
        .parse()
        .map_err(|_| Error::Scenario(format!("bad decimal literal {s:?}")))?;
    let mut den = BigInt::one();
    for _ in 0..frac_part.len() {
        den *= 10;
    }
    let _ = negative;
    Ok(Rat::new(value, den))
}

/// Lossless conversion of an f64 into the rational it represents.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Scalar {
    pub fn zero(mode: Mode) -> Scalar {
        match mode {
            Mode::Exact => Scalar::Rational(Rat::zero()),
            Mode::Float => Scalar::Float(0.0),
        }
    }

    pub fn one(mode: Mode) -> Scalar {
        match mode {
            Mode::Exact => Scalar::Rational(Rat::one()),
            Mode::Float => Scalar::Float(1.0),
        }
    }

    pub fn from_int(n: i64, mode: Mode) -> Scalar {
        match mode {
            Mode::Exact => Scalar::Rational(rat_int(n)),
            Mode::Float => Scalar::Float(n as f64),
        }
    }

    pub fn from_rat(r: Rat) -> Scalar {
        Scalar::Rational(r)
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Rational(_) | Scalar::ComplexRational(_, _) => Mode::Exact,
            Scalar::Float(_) | Scalar::ComplexFloat(_, _) => Mode::Float,
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Scalar::ComplexRational(_, _) | Scalar::ComplexFloat(_, _))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Float(x) => *x == 0.0,
            Scalar::ComplexRational(re, im) => re.is_zero() && im.is_zero(),
            Scalar::ComplexFloat(re, im) => *re == 0.0 && *im == 0.0,
        }
    }

    fn as_complex_parts(&self) -> (ComplexParts, Mode) {
        match self {
            Scalar::Rational(r) => (ComplexParts::Exact(r.clone(), Rat::zero()), Mode::Exact),
            Scalar::ComplexRational(re, im) => {
                (ComplexParts::Exact(re.clone(), im.clone()), Mode::Exact)
            }
            Scalar::Float(x) => (ComplexParts::Float(*x, 0.0), Mode::Float),
            Scalar::ComplexFloat(re, im) => (ComplexParts::Float(*re, *im), Mode::Float),
        }
    }

    fn rebuild(re_im: ComplexParts) -> Scalar {
        match re_im {
            ComplexParts::Exact(re, im) => {
                if im.is_zero() {
                    Scalar::Rational(re)
                } else {
                    Scalar::ComplexRational(re, im)
                }
            }
            ComplexParts::Float(re, im) => {
                if im == 0.0 {
                    Scalar::Float(re)
                } else {
                    Scalar::ComplexFloat(re, im)
                }
            }
        }
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar> {
        let (a, ma) = self.as_complex_parts();
        let (b, mb) = other.as_complex_parts();
        if ma != mb {
            return Err(Error::MixedScalarModes);
        }
        Ok(Scalar::rebuild(match (a, b) {
            (ComplexParts::Exact(ar, ai), ComplexParts::Exact(br, bi)) => {
                ComplexParts::Exact(ar + br, ai + bi)
            }
            (ComplexParts::Float(ar, ai), ComplexParts::Float(br, bi)) => {
                ComplexParts::Float(ar + br, ai + bi)
            }
            _ => unreachable!(),
        }))
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar> {
        let (a, ma) = self.as_complex_parts();
        let (b, mb) = other.as_complex_parts();
        if ma != mb {
            return Err(Error::MixedScalarModes);
        }
        Ok(Scalar::rebuild(match (a, b) {
            (ComplexParts::Exact(ar, ai), ComplexParts::Exact(br, bi)) => ComplexParts::Exact(
                &ar * &br - &ai * &bi,
                &ar * &bi + &ai * &br,
            ),
            (ComplexParts::Float(ar, ai), ComplexParts::Float(br, bi)) => {
                ComplexParts::Float(ar * br - ai * bi, ar * bi + ai * br)
            }
            _ => unreachable!(),
        }))
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Float(x) => Scalar::Float(-x),
            Scalar::ComplexRational(re, im) => Scalar::ComplexRational(-re, -im),
            Scalar::ComplexFloat(re, im) => Scalar::ComplexFloat(-re, -im),
        }
    }

    pub fn recip(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            Scalar::Rational(r) => Scalar::Rational(r.recip()),
            Scalar::Float(x) => Scalar::Float(1.0 / x),
            Scalar::ComplexRational(re, im) => {
                let d = re * re + im * im;
                Scalar::ComplexRational(re / &d, -(im / &d))
            }
            Scalar::ComplexFloat(re, im) => {
                let d = re * re + im * im;
                Scalar::ComplexFloat(re / d, -im / d)
            }
        })
    }

    /// Integer power, negative exponents via the inverse.
    pub fn pow_i(&self, n: i64) -> Result<Scalar> {
        if n < 0 {
            return self.recip()?.pow_i(-n);
        }
        let mut acc = Scalar::one(self.mode());
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// |self|^2, exact within the scalar's mode.
    pub fn abs_sq(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(r * r),
            Scalar::Float(x) => Scalar::Float(x * x),
            Scalar::ComplexRational(re, im) => Scalar::Rational(re * re + im * im),
            Scalar::ComplexFloat(re, im) => Scalar::Float(re * re + im * im),
        }
    }

    /// |self| as an exact rational, when representable (real exact scalars).
    pub fn abs_exact(&self) -> Option<Rat> {
        match self {
            Scalar::Rational(r) => Some(r.abs()),
            Scalar::ComplexRational(re, im) if im.is_zero() => Some(re.abs()),
            _ => None,
        }
    }

    /// |self| as a rational: exact when possible, otherwise the exact rational
    /// value of the f64 modulus.
    pub fn abs_rat(&self) -> Rat {
        self.abs_exact()
            .or_else(|| rat_from_f64(self.abs_f64()))
            .unwrap_or_else(Rat::zero)
    }

    pub fn abs_f64(&self) -> f64 {
        match self {
            Scalar::Rational(r) => rat_to_f64(&r.abs()),
            Scalar::Float(x) => x.abs(),
            Scalar::ComplexRational(re, im) => {
                rat_to_f64(re).hypot(rat_to_f64(im))
            }
            Scalar::ComplexFloat(re, im) => re.hypot(*im),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(r) => rat_to_f64(r),
            Scalar::Float(x) => *x,
            Scalar::ComplexRational(re, _) => rat_to_f64(re),
            Scalar::ComplexFloat(re, _) => *re,
        }
    }

    /// Exact comparison |self| > |other| when both moduli are exactly
    /// representable (via squared moduli), falling back to f64.
    pub fn abs_gt(&self, other: &Scalar) -> bool {
        match (self.abs_sq(), other.abs_sq()) {
            (Scalar::Rational(a), Scalar::Rational(b)) => a > b,
            (a, b) => a.to_f64() > b.to_f64(),
        }
    }

    /// Parses a scenario literal into a scalar of the requested mode.
    /// Accepts decimals, fractions and "a+bi" complex forms.
    pub fn parse(s: &str, mode: Mode) -> Result<Scalar> {
        let s = s.trim();
        if let Some(body) = s.strip_suffix('i') {
            // "a+bi" / "a-bi" / "bi"
            let body = body.trim();
            let split = body
                .char_indices()
                .skip(1)
                .find(|(_, c)| *c == '+' || *c == '-')
                .map(|(i, _)| i);
            let (re_s, im_s) = match split {
                Some(i) => (&body[..i], &body[i..]),
                None => ("0", body),
            };
            let im_s = if im_s.is_empty() || im_s == "+" {
                "1".to_string()
            } else if im_s == "-" {
                "-1".to_string()
            } else {
                im_s.to_string()
            };
            let re = rat_from_decimal(re_s)?;
            let im = rat_from_decimal(&im_s)?;
            return Ok(match mode {
                Mode::Exact => Scalar::rebuild(ComplexParts::Exact(re, im)),
                Mode::Float => {
                    Scalar::rebuild(ComplexParts::Float(rat_to_f64(&re), rat_to_f64(&im)))
                }
            });
        }
        let r = rat_from_decimal(s)?;
        Ok(match mode {
            Mode::Exact => Scalar::Rational(r),
            Mode::Float => Scalar::Float(rat_to_f64(&r)),
        })
    }
}

enum ComplexParts {
    Exact(Rat, Rat),
    Float(f64, f64),
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => write!(f, "{r}"),
            Scalar::Float(x) => write!(f, "{x}"),
            Scalar::ComplexRational(re, im) => write!(f, "{re}+{im}i"),
            Scalar::ComplexFloat(re, im) => write!(f, "{re}+{im}i"),
        }
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parse_is_exact() {
        assert_eq!(rat_from_decimal("0.1").unwrap(), rat(1, 10));
        assert_eq!(rat_from_decimal("-2.5").unwrap(), rat(-5, 2));
        assert_eq!(rat_from_decimal("3/4").unwrap(), rat(3, 4));
        assert_eq!(rat_from_decimal("7").unwrap(), rat_int(7));
    }

    #[test]
    fn exact_arithmetic_has_no_rounding() {
        let a = Scalar::Rational(rat(1, 3));
        let b = Scalar::Rational(rat(1, 6));
        let sum = a.add(&b).unwrap();
        assert_eq!(sum, Scalar::Rational(rat(1, 2)));
        let p = a.mul(&b).unwrap();
        assert_eq!(p, Scalar::Rational(rat(1, 18)));
    }

    #[test]
    fn mixed_modes_rejected() {
        let a = Scalar::Rational(rat(1, 2));
        let b = Scalar::Float(0.5);
        assert!(matches!(a.add(&b), Err(Error::MixedScalarModes)));
    }

    #[test]
    fn complex_roundtrip_and_inverse() {
        let z = Scalar::parse("1+2i", Mode::Exact).unwrap();
        let inv = z.recip().unwrap();
        let one = z.mul(&inv).unwrap();
        assert_eq!(one, Scalar::Rational(rat_int(1)));
        assert_eq!(z.abs_sq(), Scalar::Rational(rat_int(5)));
    }

    #[test]
    fn pow_and_abs() {
        let mu = Scalar::Rational(rat_int(2));
        assert_eq!(mu.pow_i(5).unwrap(), Scalar::Rational(rat_int(32)));
        assert_eq!(mu.pow_i(-2).unwrap(), Scalar::Rational(rat(1, 4)));
        assert_eq!(mu.neg().abs_exact().unwrap(), rat_int(2));
    }
}

//! Exact and floating complex scalars.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;
pub type GaussQ = Complex<Q>;

/// Tolerance used for integer and zero tests on floating values.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite double.
pub fn q_from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

pub fn floor_q(x: &Q) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil_q(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

pub fn q_to_string(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `"a/b"`, `"a"` or a plain decimal such as `"0.25"` into an exact rational.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(Q::from_integer(n));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<Q> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits: BigInt = format!("0{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Q::from_integer(digits);
    if scale >= 0 {
        value *= Q::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Q::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -value } else { value })
}

/// A complex number, either an exact Gaussian rational or a pair of doubles.
#[derive(Clone, Debug, PartialEq)]
pub enum ComplexScalar {
    Exact(GaussQ),
    Float(Complex64),
}

impl Default for ComplexScalar {
    fn default() -> Self {
        ComplexScalar::zero()
    }
}

impl ComplexScalar {
    pub fn zero() -> Self {
        ComplexScalar::Exact(GaussQ::new(Q::zero(), Q::zero()))
    }

    pub fn one() -> Self {
        ComplexScalar::real(Q::one())
    }

    pub fn real(x: Q) -> Self {
        ComplexScalar::Exact(GaussQ::new(x, Q::zero()))
    }

    pub fn exact(re: Q, im: Q) -> Self {
        ComplexScalar::Exact(GaussQ::new(re, im))
    }

    pub fn int(n: i64) -> Self {
        ComplexScalar::real(qi(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        ComplexScalar::real(q(n, d))
    }

    pub fn float(re: f64, im: f64) -> Self {
        ComplexScalar::Float(Complex64::new(re, im))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ComplexScalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&GaussQ> {
        match self {
            ComplexScalar::Exact(c) => Some(c),
            ComplexScalar::Float(_) => None,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            ComplexScalar::Exact(c) => Complex64::new(q_to_f64(&c.re), q_to_f64(&c.im)),
            ComplexScalar::Float(c) => *c,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            ComplexScalar::Exact(_) => true,
            ComplexScalar::Float(c) => c.re.is_finite() && c.im.is_finite(),
        }
    }

    /// Real part as an exact rational. Floating values convert through their exact binary value.
    pub fn re_q(&self) -> Q {
        match self {
            ComplexScalar::Exact(c) => c.re.clone(),
            ComplexScalar::Float(c) => q_from_f64(c.re).unwrap_or_else(Q::zero),
        }
    }

    pub fn re(&self) -> ComplexScalar {
        match self {
            ComplexScalar::Exact(c) => ComplexScalar::real(c.re.clone()),
            ComplexScalar::Float(c) => ComplexScalar::float(c.re, 0.0),
        }
    }

    pub fn scale(&self, k: &Q) -> ComplexScalar {
        match self {
            ComplexScalar::Exact(c) => ComplexScalar::Exact(GaussQ::new(&c.re * k, &c.im * k)),
            ComplexScalar::Float(c) => ComplexScalar::Float(c * q_to_f64(k)),
        }
    }

    pub fn is_zero_tol(&self, tol: f64) -> bool {
        match self {
            ComplexScalar::Exact(c) => c.re.is_zero() && c.im.is_zero(),
            ComplexScalar::Float(c) => c.norm() < tol,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero_tol(DEFAULT_TOLERANCE)
    }

    /// The integer this value equals (within `tol` for floating values), if any.
    pub fn as_integer(&self, tol: f64) -> Option<BigInt> {
        match self {
            ComplexScalar::Exact(c) => {
                if c.im.is_zero() && c.re.is_integer() {
                    Some(c.re.to_integer())
                } else {
                    None
                }
            }
            ComplexScalar::Float(c) => {
                let n = c.re.round();
                if (c.re - n).abs() < tol && c.im.abs() < tol {
                    BigInt::from_f64_checked(n)
                } else {
                    None
                }
            }
        }
    }

    pub fn is_integer(&self, tol: f64) -> bool {
        self.as_integer(tol).is_some()
    }

    pub fn approx_eq(&self, other: &ComplexScalar, tol: f64) -> bool {
        match (self, other) {
            (ComplexScalar::Exact(a), ComplexScalar::Exact(b)) => a == b,
            _ => (self.to_c64() - other.to_c64()).norm() < tol,
        }
    }

    /// Total order used to put blocks into canonical order: exact values first.
    pub fn canonical_cmp(&self, other: &ComplexScalar) -> Ordering {
        match (self, other) {
            (ComplexScalar::Exact(a), ComplexScalar::Exact(b)) => {
                a.re.cmp(&b.re).then_with(|| a.im.cmp(&b.im))
            }
            (ComplexScalar::Exact(_), ComplexScalar::Float(_)) => Ordering::Less,
            (ComplexScalar::Float(_), ComplexScalar::Exact(_)) => Ordering::Greater,
            (ComplexScalar::Float(a), ComplexScalar::Float(b)) => {
                a.re.total_cmp(&b.re).then_with(|| a.im.total_cmp(&b.im))
            }
        }
    }
}

trait FromF64Checked: Sized {
    fn from_f64_checked(x: f64) -> Option<Self>;
}

impl FromF64Checked for BigInt {
    fn from_f64_checked(x: f64) -> Option<Self> {
        num_traits::FromPrimitive::from_f64(x)
    }
}

impl From<GaussQ> for ComplexScalar {
    fn from(c: GaussQ) -> Self {
        ComplexScalar::Exact(c)
    }
}

impl From<Complex64> for ComplexScalar {
    fn from(c: Complex64) -> Self {
        ComplexScalar::Float(c)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&ComplexScalar> for &ComplexScalar {
            type Output = ComplexScalar;
            fn $method(self, rhs: &ComplexScalar) -> ComplexScalar {
                match (self, rhs) {
                    (ComplexScalar::Exact(a), ComplexScalar::Exact(b)) => {
                        ComplexScalar::Exact(a.clone() $op b.clone())
                    }
                    _ => ComplexScalar::Float(self.to_c64() $op rhs.to_c64()),
                }
            }
        }
        impl $tr<ComplexScalar> for ComplexScalar {
            type Output = ComplexScalar;
            fn $method(self, rhs: ComplexScalar) -> ComplexScalar {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&ComplexScalar> for ComplexScalar {
            type Output = ComplexScalar;
            fn $method(self, rhs: &ComplexScalar) -> ComplexScalar {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for &ComplexScalar {
    type Output = ComplexScalar;
    fn neg(self) -> ComplexScalar {
        match self {
            ComplexScalar::Exact(a) => ComplexScalar::Exact(-a.clone()),
            ComplexScalar::Float(a) => ComplexScalar::Float(-a),
        }
    }
}

impl Neg for ComplexScalar {
    type Output = ComplexScalar;
    fn neg(self) -> ComplexScalar {
        -&self
    }
}

impl fmt::Display for ComplexScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexScalar::Exact(c) => {
                if c.im.is_zero() {
                    write!(f, "{}", q_to_string(&c.re))
                } else if c.re.is_zero() {
                    write!(f, "{}i", q_to_string(&c.im))
                } else if c.im.is_negative() {
                    write!(
                        f,
                        "{} - {}i",
                        q_to_string(&c.re),
                        q_to_string(&-c.im.clone())
                    )
                } else {
                    write!(f, "{} + {}i", q_to_string(&c.re), q_to_string(&c.im))
                }
            }
            ComplexScalar::Float(c) => write!(f, "{}", c),
        }
    }
}

/// `gcd` of two machine integers, always non-negative.
pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

//! Truncated formal series in λ over exact rationals.
//!
//! [`OrderedScalar`] models the ordered ring ℝ[[λ]] (with ℚ standing in for
//! ℝ) and [`Scalar`] its complexification by a square root of −1. Every value
//! carries its own truncation order `N`; arithmetic is modulo λ^{N+1} and
//! mixing two orders is an error for the checked entry points and a panic for
//! the operator impls.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type Gaussian = Complex<Rational>;

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 6;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn gauss(re: Rational, im: Rational) -> Gaussian {
    Complex::new(re, im)
}

pub fn gauss_int(re: i64, im: i64) -> Gaussian {
    Complex::new(rat_int(re), rat_int(im))
}

pub fn gauss_real(re: Rational) -> Gaussian {
    Complex::new(re, Rational::zero())
}

/// All series arithmetic in one computation happens modulo λ^{order+1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncationContext {
    pub order: usize,
}

impl TruncationContext {
    pub fn new(order: usize) -> Self {
        TruncationContext { order }
    }

    pub fn len(&self) -> usize {
        self.order + 1
    }
}

impl Default for TruncationContext {
    fn default() -> Self {
        TruncationContext { order: DEFAULT_ORDER }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

/// Element of the truncated ordered ring ℚ[[λ]] / λ^{N+1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderedScalar {
    coeffs: Vec<Rational>,
}

impl OrderedScalar {
    pub fn zero(ctx: TruncationContext) -> Self {
        OrderedScalar { coeffs: vec![Rational::zero(); ctx.len()] }
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>, ctx: TruncationContext) -> Self {
        coeffs.resize(ctx.len(), Rational::zero());
        OrderedScalar { coeffs }
    }

    pub fn from_ints(coeffs: &[i64], ctx: TruncationContext) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| rat_int(c)).collect(), ctx)
    }

    pub fn ctx(&self) -> TruncationContext {
        TruncationContext::new(self.coeffs.len() - 1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Sign of the first nonzero coefficient.
    pub fn sign(&self) -> Sign {
        match self.coeffs.iter().find(|c| !c.is_zero()) {
            None => Sign::Zero,
            Some(c) if c.is_positive() => Sign::Positive,
            Some(_) => Sign::Negative,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// `self >= other` in the ordered ring.
    pub fn ge(&self, other: &OrderedScalar) -> bool {
        (self.clone() - other.clone()).sign() != Sign::Negative
    }

    pub fn to_scalar(&self) -> Scalar {
        Scalar { coeffs: self.coeffs.iter().cloned().map(gauss_real).collect() }
    }
}

pub fn ordered_sign(a: &OrderedScalar) -> Sign {
    a.sign()
}

impl Add for OrderedScalar {
    type Output = OrderedScalar;
    fn add(self, rhs: OrderedScalar) -> OrderedScalar {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len(), "truncation order mismatch");
        OrderedScalar { coeffs: self.coeffs.into_iter().zip(rhs.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for OrderedScalar {
    type Output = OrderedScalar;
    fn sub(self, rhs: OrderedScalar) -> OrderedScalar {
        self + (-rhs)
    }
}

impl Neg for OrderedScalar {
    type Output = OrderedScalar;
    fn neg(self) -> OrderedScalar {
        OrderedScalar { coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl Mul for OrderedScalar {
    type Output = OrderedScalar;
    fn mul(self, rhs: OrderedScalar) -> OrderedScalar {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len(), "truncation order mismatch");
        let n = self.coeffs.len();
        let mut out = vec![Rational::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..n - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        OrderedScalar { coeffs: out }
    }
}

/// Element of the truncated ring ℚ(i)[[λ]] / λ^{N+1}; λ is real.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scalar {
    coeffs: Vec<Gaussian>,
}

impl Scalar {
    pub fn zero(ctx: TruncationContext) -> Self {
        Scalar { coeffs: vec![Gaussian::zero(); ctx.len()] }
    }

    pub fn one(ctx: TruncationContext) -> Self {
        Self::constant(Gaussian::one(), ctx)
    }

    pub fn constant(c: Gaussian, ctx: TruncationContext) -> Self {
        Self::monomial(c, 0, ctx)
    }

    pub fn from_int(n: i64, ctx: TruncationContext) -> Self {
        Self::constant(gauss_int(n, 0), ctx)
    }

    pub fn from_rational(q: Rational, ctx: TruncationContext) -> Self {
        Self::constant(gauss_real(q), ctx)
    }

    /// `c · λ^power`, zero if the power is truncated away.
    pub fn monomial(c: Gaussian, power: usize, ctx: TruncationContext) -> Self {
        let mut s = Self::zero(ctx);
        if power <= ctx.order {
            s.coeffs[power] = c;
        }
        s
    }

    pub fn lambda(ctx: TruncationContext) -> Self {
        Self::monomial(Gaussian::one(), 1, ctx)
    }

    pub fn from_coeffs(mut coeffs: Vec<Gaussian>, ctx: TruncationContext) -> Self {
        coeffs.resize(ctx.len(), Gaussian::zero());
        Scalar { coeffs }
    }

    /// Real series from integer coefficients, handy in tests.
    pub fn from_ints(coeffs: &[i64], ctx: TruncationContext) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| gauss_int(c, 0)).collect(), ctx)
    }

    pub fn ctx(&self) -> TruncationContext {
        TruncationContext::new(self.coeffs.len() - 1)
    }

    pub fn coeffs(&self) -> &[Gaussian] {
        &self.coeffs
    }

    pub fn coeff(&self, power: usize) -> Gaussian {
        self.coeffs.get(power).cloned().unwrap_or_else(Gaussian::zero)
    }

    pub fn set_coeff(&mut self, power: usize, c: Gaussian) {
        if power < self.coeffs.len() {
            self.coeffs[power] = c;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// Lowest power with a nonzero coefficient; `None` for zero.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im.is_zero())
    }

    pub fn conj(&self) -> Scalar {
        Scalar { coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    pub fn re(&self) -> OrderedScalar {
        OrderedScalar { coeffs: self.coeffs.iter().map(|c| c.re.clone()).collect() }
    }

    pub fn im(&self) -> OrderedScalar {
        OrderedScalar { coeffs: self.coeffs.iter().map(|c| c.im.clone()).collect() }
    }

    pub fn scale(&self, c: &Gaussian) -> Scalar {
        Scalar { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn scale_rational(&self, q: &Rational) -> Scalar {
        Scalar {
            coeffs: self.coeffs.iter().map(|x| Complex::new(&x.re * q, &x.im * q)).collect(),
        }
    }

    /// Multiplication by λ^k.
    pub fn shift_up(&self, k: usize) -> Scalar {
        let n = self.coeffs.len();
        let mut out = vec![Gaussian::zero(); n];
        for i in 0..n.saturating_sub(k) {
            out[i + k] = self.coeffs[i].clone();
        }
        Scalar { coeffs: out }
    }

    /// Division by λ^k, assuming the lowest k coefficients vanish; the top k
    /// slots, which are unknown after the division, are filled with zero.
    pub fn shift_down(&self, k: usize) -> Scalar {
        let n = self.coeffs.len();
        let mut out = vec![Gaussian::zero(); n];
        for i in k..n {
            out[i - k] = self.coeffs[i].clone();
        }
        Scalar { coeffs: out }
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one(self.ctx());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Reduction modulo λ: the constant coefficient.
    pub fn classical_limit(&self) -> Scalar {
        Scalar::constant(self.coeffs[0].clone(), self.ctx())
    }

    /// Same coefficients in a different truncation context.
    pub fn with_ctx(&self, ctx: TruncationContext) -> Scalar {
        Scalar::from_coeffs(self.coeffs.iter().take(ctx.len()).cloned().collect(), ctx)
    }

    /// Multiplicative inverse; the constant coefficient must be nonzero.
    pub fn invert(&self) -> Result<Scalar> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(Error::NotUnit);
        }
        let inv0 = Gaussian::one() / a0;
        let n = self.coeffs.len();
        let mut out = vec![Gaussian::zero(); n];
        out[0] = inv0.clone();
        for k in 1..n {
            let mut acc = Gaussian::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    acc += &self.coeffs[j] * &out[k - j];
                }
            }
            out[k] = -(acc * &inv0);
        }
        Ok(Scalar { coeffs: out })
    }

    /// Square root of a real series whose constant coefficient is 1.
    pub fn sqrt_one_plus(&self) -> Scalar {
        debug_assert!(self.coeffs[0].is_one() && self.is_real());
        let n = self.coeffs.len();
        let mut s = vec![Gaussian::zero(); n];
        s[0] = Gaussian::one();
        let half = rat(1, 2);
        for k in 1..n {
            let mut acc = self.coeffs[k].clone();
            for j in 1..k {
                acc -= &s[j] * &s[k - j];
            }
            s[k] = Complex::new(&acc.re * &half, &acc.im * &half);
        }
        Scalar { coeffs: s }
    }

    fn check(&self, other: &Scalar) -> Result<()> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::ContextMismatch(self.coeffs.len() - 1, other.coeffs.len() - 1));
        }
        Ok(())
    }
}

/// Truncated Cauchy product.
pub fn scalar_mul(a: &Scalar, b: &Scalar, ctx: TruncationContext) -> Result<Scalar> {
    a.check(b)?;
    if a.ctx() != ctx {
        return Err(Error::ContextMismatch(a.ctx().order, ctx.order));
    }
    Ok(a * b)
}

pub fn scalar_conj(a: &Scalar) -> Scalar {
    a.conj()
}

pub fn scalar_invert(a: &Scalar, ctx: TruncationContext) -> Result<Scalar> {
    if a.ctx() != ctx {
        return Err(Error::ContextMismatch(a.ctx().order, ctx.order));
    }
    a.invert()
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len(), "truncation order mismatch");
        Scalar { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len(), "truncation order mismatch");
        Scalar { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect() }
    }
}

/// Product with shortcuts for real factors.
fn gauss_mul(a: &Gaussian, b: &Gaussian) -> Gaussian {
    if a.im.is_zero() {
        Complex::new(&a.re * &b.re, &a.re * &b.im)
    } else if b.im.is_zero() {
        Complex::new(&a.re * &b.re, &a.im * &b.re)
    } else {
        a * b
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len(), "truncation order mismatch");
        let n = self.coeffs.len();
        let mut out = vec![Gaussian::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..n - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += gauss_mul(a, b);
                }
            }
        }
        Scalar { coeffs: out }
    }
}

impl<'a> Neg for &'a Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len(), "truncation order mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len(), "truncation order mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn fmt_gaussian(c: &Gaussian) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => fmt_rational(&c.re),
        (true, false) if c.im.is_one() => "i".to_string(),
        (true, false) if (-&c.im).is_one() => "-i".to_string(),
        (true, false) => format!("{}i", fmt_rational(&c.im)),
        (false, false) => {
            let sign = if c.im.is_negative() { "-" } else { "+" };
            format!("({} {} {}i)", fmt_rational(&c.re), sign, fmt_rational(&c.im.abs()))
        }
    }
}

impl fmt::Display for Scalar {
    /// Renders as a polynomial in λ, e.g. `1 - 2λ + 1/3λ^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut body = fmt_gaussian(c);
            let negative = body.starts_with('-');
            if negative {
                body.remove(0);
            }
            if !first {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            } else if negative {
                write!(f, "-")?;
            }
            first = false;
            let lam = match k {
                0 => String::new(),
                1 => "λ".to_string(),
                _ => format!("λ^{k}"),
            };
            if k > 0 && body == "1" {
                write!(f, "{lam}")?;
            } else {
                write!(f, "{body}{lam}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Display for OrderedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_scalar().fmt(f)
    }
}

fn big_to_json(n: &BigInt) -> serde_json::Value {
    match n.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::Number(n.to_string().parse().expect("integer literal")),
    }
}

fn json_to_big(v: &serde_json::Value) -> Option<BigInt> {
    match v {
        serde_json::Value::Number(n) => n.to_string().parse().ok(),
        _ => None,
    }
}

impl Scalar {
    /// `[[re_num, re_den, im_num, im_den], ...]` indexed by λ-power.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.coeffs
                .iter()
                .map(|c| {
                    serde_json::Value::Array(vec![
                        big_to_json(c.re.numer()),
                        big_to_json(c.re.denom()),
                        big_to_json(c.im.numer()),
                        big_to_json(c.im.denom()),
                    ])
                })
                .collect(),
        )
    }

    /// Parses the array form; missing high coefficients are zero, extra
    /// coefficients beyond the context are dropped.
    pub fn from_json(v: &serde_json::Value, ctx: TruncationContext) -> Result<Scalar> {
        let arr = v.as_array().ok_or_else(|| Error::Input("scalar must be an array".into()))?;
        let mut coeffs = Vec::with_capacity(arr.len());
        for entry in arr {
            let quad = entry
                .as_array()
                .filter(|q| q.len() == 4)
                .ok_or_else(|| Error::Input("scalar coefficient must be [re_num, re_den, im_num, im_den]".into()))?;
            let ints: Option<Vec<BigInt>> = quad.iter().map(json_to_big).collect();
            let ints = ints.ok_or_else(|| Error::Input("scalar coefficient entries must be integers".into()))?;
            if !ints[1].is_positive() || !ints[3].is_positive() {
                return Err(Error::Input("denominators must be positive".into()));
            }
            let re = Rational::new(ints[0].clone(), ints[1].clone());
            let im = Rational::new(ints[2].clone(), ints[3].clone());
            if re.numer() != &ints[0] || im.numer() != &ints[2] {
                return Err(Error::Input("fractions must be in lowest terms".into()));
            }
            coeffs.push(Complex::new(re, im));
        }
        coeffs.truncate(ctx.len());
        Ok(Scalar::from_coeffs(coeffs, ctx))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let len = v.as_array().map(|a| a.len()).unwrap_or(0).max(1);
        Scalar::from_json(&v, TruncationContext::new(len - 1)).map_err(serde::de::Error::custom)
    }
}

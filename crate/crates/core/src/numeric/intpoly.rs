use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Rational;
use crate::error::{Error, Result};

/// Polynomial in `t` with arbitrary-precision integer coefficients.
///
/// `coeffs[k]` is the coefficient of `t^k`; the last stored coefficient is
/// never zero, so the zero polynomial has no coefficients at all.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPolyT {
    coeffs: Vec<BigInt>,
}

impl IntPolyT {
    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPolyT { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPolyT { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The monomial `t^k`.
    pub fn t_pow(k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = BigInt::one();
        IntPolyT { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    /// Nonnegative gcd of the coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        IntPolyT {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Divides every coefficient by `k`; `k` must divide all of them.
    pub fn div_scalar_exact(&self, k: &BigInt) -> Self {
        IntPolyT {
            coeffs: self.coeffs.iter().map(|c| c / k).collect(),
        }
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = self.content();
        if self.leading_coeff().unwrap().is_negative() {
            c = -c;
        }
        self.div_scalar_exact(&c)
    }

    fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        IntPolyT { coeffs }
    }

    /// Pseudo-remainder of `self` by `divisor`: the remainder of
    /// `lc(divisor)^(deg self - deg divisor + 1) * self` on division.
    pub fn pseudo_rem(&self, divisor: &Self) -> Self {
        let dd = divisor.degree().expect("pseudo_rem by zero");
        let lc = divisor.leading_coeff().unwrap().clone();
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < dd {
                break;
            }
            let lr = r.leading_coeff().unwrap().clone();
            r = &r.scale(&lc) - &divisor.scale(&lr).shift(dr - dd);
        }
        r
    }

    /// Greatest common divisor over `Z[t]`, normalized to a positive leading
    /// coefficient. `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.primitive_part().scale(&other.content());
        }
        if other.is_zero() {
            return self.primitive_part().scale(&self.content());
        }
        let content = self.content().gcd(&other.content());
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.primitive_part().scale(&content)
    }

    /// Exact quotient over `Z[t]`, or `None` if `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        let dd = divisor.degree()?;
        if self.is_zero() {
            return Some(Self::zero());
        }
        let lc = divisor.leading_coeff().unwrap();
        let mut r = self.clone();
        let ds = self.degree().unwrap();
        if ds < dd {
            return None;
        }
        let mut q = vec![BigInt::zero(); ds - dd + 1];
        while let Some(dr) = r.degree() {
            if dr < dd {
                return None;
            }
            let (c, rem) = r.leading_coeff().unwrap().div_rem(lc);
            if !rem.is_zero() {
                return None;
            }
            r = &r - &divisor.scale(&c).shift(dr - dd);
            q[dr - dd] = c;
        }
        Some(Self::from_coeffs(q))
    }

    /// Horner evaluation at a rational point.
    pub fn eval(&self, t: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + Rational::from_integer(c.clone());
        }
        acc
    }

    /// Evaluation given precomputed powers `powers[k] = t^k`.
    pub(crate) fn eval_with_powers(&self, powers: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (c, p) in self.coeffs.iter().zip(powers) {
            if !c.is_zero() {
                acc += p * Rational::from_integer(c.clone());
            }
        }
        acc
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        use num_traits::ToPrimitive;
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + c.to_f64().unwrap_or(f64::NAN))
    }
}

/// The t-analogue `[m]_t = 1 + t + ... + t^(m-1)`, kept as the explicit sum.
pub fn t_analogue(m: usize) -> Result<IntPolyT> {
    if m == 0 {
        return Err(Error::Domain("t-analogue [m]_t requires m >= 1".into()));
    }
    Ok(IntPolyT {
        coeffs: vec![BigInt::one(); m],
    })
}

impl Add for &IntPolyT {
    type Output = IntPolyT;
    fn add(self, rhs: &IntPolyT) -> IntPolyT {
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut coeffs = long.coeffs.clone();
        for (c, s) in coeffs.iter_mut().zip(&short.coeffs) {
            *c += s;
        }
        IntPolyT::from_coeffs(coeffs)
    }
}

impl Sub for &IntPolyT {
    type Output = IntPolyT;
    fn sub(self, rhs: &IntPolyT) -> IntPolyT {
        self + &(-rhs)
    }
}

impl Neg for &IntPolyT {
    type Output = IntPolyT;
    fn neg(self) -> IntPolyT {
        IntPolyT {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &IntPolyT {
    type Output = IntPolyT;
    fn mul(self, rhs: &IntPolyT) -> IntPolyT {
        if self.is_zero() || rhs.is_zero() {
            return IntPolyT::zero();
        }
        if rhs.is_one() {
            return self.clone();
        }
        if self.is_one() {
            return rhs.clone();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        IntPolyT::from_coeffs(coeffs)
    }
}

impl fmt::Display for IntPolyT {
    /// Terms in increasing powers of `t`, e.g. `1 - 2*t + t^3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            match (k, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "t")?,
                (1, false) => write!(f, "{mag}*t")?,
                (_, true) => write!(f, "t^{k}")?,
                (_, false) => write!(f, "{mag}*t^{k}")?,
            }
        }
        Ok(())
    }
}

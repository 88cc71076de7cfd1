use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{t_analogue, IntPolyT, Rational};
use crate::error::{Error, Result};

/// Rational function `num(t) / den(t)` with integer-coefficient parts.
///
/// Always stored in canonical form: `gcd(num, den) = 1` over `Z[t]` (content
/// included) and `den` has a positive leading coefficient. Structural
/// equality is therefore mathematical equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFuncT {
    num: IntPolyT,
    den: IntPolyT,
}

/// The four field operations, for [`ratfunc_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Applies `op` to `a` and `b`; only division can fail.
pub fn ratfunc_arith(a: &RatFuncT, b: &RatFuncT, op: ArithOp) -> Result<RatFuncT> {
    match op {
        ArithOp::Add => Ok(a + b),
        ArithOp::Sub => Ok(a - b),
        ArithOp::Mul => Ok(a * b),
        ArithOp::Div => a.checked_div(b),
    }
}

impl RatFuncT {
    pub fn new(num: IntPolyT, den: IntPolyT) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: IntPolyT, den: IntPolyT) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if den.is_one() {
            return RatFuncT { num, den };
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        if den.leading_coeff().unwrap().is_negative() {
            num = -&num;
            den = -&den;
        }
        RatFuncT { num, den }
    }

    pub fn zero() -> Self {
        RatFuncT {
            num: IntPolyT::zero(),
            den: IntPolyT::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_poly(IntPolyT::one())
    }

    pub fn from_int(c: i64) -> Self {
        Self::from_poly(IntPolyT::constant(BigInt::from(c)))
    }

    pub fn from_poly(p: IntPolyT) -> Self {
        RatFuncT {
            num: p,
            den: IntPolyT::one(),
        }
    }

    /// The variable `t`.
    pub fn t() -> Self {
        Self::t_pow(1)
    }

    pub fn t_pow(k: usize) -> Self {
        Self::from_poly(IntPolyT::t_pow(k))
    }

    /// `t^k / [m]_t`, the basic cascade and matching probability.
    pub fn t_pow_over_analogue(k: usize, m: usize) -> Result<Self> {
        Self::new(IntPolyT::t_pow(k), t_analogue(m)?)
    }

    pub fn numer(&self) -> &IntPolyT {
        &self.num
    }

    pub fn denom(&self) -> &IntPolyT {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// True when the denominator is a constant, i.e. the value is a
    /// polynomial in `t` with rational coefficients.
    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self * &rhs.inv_unchecked())
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.inv_unchecked())
    }

    fn inv_unchecked(&self) -> Self {
        let (mut num, mut den) = (self.den.clone(), self.num.clone());
        if den.leading_coeff().unwrap().is_negative() {
            num = -&num;
            den = -&den;
        }
        RatFuncT { num, den }
    }

    pub fn scale_int(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Self::normalized(self.num.scale(k), self.den.clone())
    }

    /// Exact value at `t`; fails if the denominator vanishes there.
    pub fn eval(&self, t: &Rational) -> Result<Rational> {
        let d = self.den.eval(t);
        if d.is_zero() {
            return Err(Error::Pole(t.to_string()));
        }
        Ok(self.num.eval(t) / d)
    }

    pub(crate) fn eval_with_powers(&self, powers: &[Rational]) -> Result<Rational> {
        let d = self.den.eval_with_powers(powers);
        if d.is_zero() {
            return Err(Error::Pole(powers.get(1).map(|t| t.to_string()).unwrap_or_default()));
        }
        Ok(self.num.eval_with_powers(powers) / d)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.num.eval_f64(t) / self.den.eval_f64(t)
    }

    pub(crate) fn max_degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }
}

impl Add for &RatFuncT {
    type Output = RatFuncT;
    fn add(self, rhs: &RatFuncT) -> RatFuncT {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RatFuncT::normalized(&self.num + &rhs.num, self.den.clone());
        }
        RatFuncT::normalized(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &RatFuncT {
    type Output = RatFuncT;
    fn sub(self, rhs: &RatFuncT) -> RatFuncT {
        self + &(-rhs)
    }
}

impl Neg for &RatFuncT {
    type Output = RatFuncT;
    fn neg(self) -> RatFuncT {
        RatFuncT {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Mul for &RatFuncT {
    type Output = RatFuncT;
    fn mul(self, rhs: &RatFuncT) -> RatFuncT {
        if self.is_zero() || rhs.is_zero() {
            return RatFuncT::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFuncT::from_poly(&self.num * &rhs.num);
        }
        // Cross-cancel so each gcd runs on the smaller factors; the product of
        // two coprime pairs is then already reduced.
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let a = self.num.div_exact(&g1).unwrap();
        let d = rhs.den.div_exact(&g1).unwrap();
        let c = rhs.num.div_exact(&g2).unwrap();
        let b = self.den.div_exact(&g2).unwrap();
        let (mut num, mut den) = (&a * &c, &b * &d);
        if den.leading_coeff().unwrap().is_negative() {
            num = -&num;
            den = -&den;
        }
        RatFuncT { num, den }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for RatFuncT {
            type Output = RatFuncT;
            fn $m(self, rhs: RatFuncT) -> RatFuncT {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl From<i64> for RatFuncT {
    fn from(c: i64) -> Self {
        RatFuncT::from_int(c)
    }
}

impl fmt::Display for RatFuncT {
    /// `num / den` with each part in increasing powers of `t`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {}", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> IntPolyT {
        IntPolyT::from_i64s(c)
    }

    #[test]
    fn cancels_common_factors() {
        let f = RatFuncT::new(p(&[-1, 0, 1]), p(&[-1, 1])).unwrap();
        assert_eq!(f, RatFuncT::from_poly(p(&[1, 1])));
        assert_eq!(f.to_string(), "1 + t / 1");
        let g = RatFuncT::new(p(&[0, 2]), p(&[0, 0, -4])).unwrap();
        assert_eq!(g.numer(), &p(&[-1]));
        assert_eq!(g.denom(), &p(&[0, 2]));
    }

    #[test]
    fn field_examples() {
        let one_plus_t = p(&[1, 1]);
        let a = RatFuncT::new(p(&[0, 1]), one_plus_t.clone()).unwrap();
        let b = RatFuncT::new(p(&[1]), one_plus_t.clone()).unwrap();
        assert!((&a + &b).is_one());
        assert_eq!(a.to_string(), "t / 1 + t");
        let c = RatFuncT::from_poly(one_plus_t);
        assert!((&b * &c).is_one());
        assert_eq!(
            ratfunc_arith(&a, &RatFuncT::zero(), ArithOp::Div),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn evaluation_and_poles() {
        let f = RatFuncT::from_poly(p(&[1, 1]));
        assert_eq!(f.eval(&rat(1, 2)).unwrap(), rat(3, 2));
        let g = RatFuncT::new(p(&[0, 1]), p(&[1, 1])).unwrap();
        assert_eq!(g.eval(&rat(0, 1)).unwrap(), rat(0, 1));
        let h = RatFuncT::new(p(&[1]), p(&[1, -1])).unwrap();
        assert!(matches!(h.eval(&rat(1, 1)), Err(Error::Pole(_))));
    }

    fn small_poly() -> impl Strategy<Value = IntPolyT> {
        prop::collection::vec(-4i64..=4, 0..4).prop_map(|c| IntPolyT::from_i64s(&c))
    }

    fn ratfunc() -> impl Strategy<Value = RatFuncT> {
        (small_poly(), small_poly())
            .prop_filter("nonzero denominator", |(_, d)| !d.is_zero())
            .prop_map(|(n, d)| RatFuncT::new(n, d).unwrap())
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(f in ratfunc()) {
            let again = RatFuncT::new(f.numer().clone(), f.denom().clone()).unwrap();
            prop_assert_eq!(again, f);
        }

        #[test]
        fn evaluation_is_a_homomorphism(a in ratfunc(), b in ratfunc(), tn in 0i64..7, td in 1i64..5) {
            let t = rat(tn, td);
            let (Ok(av), Ok(bv)) = (a.eval(&t), b.eval(&t)) else { return Ok(()); };
            for op in [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div] {
                let Ok(r) = ratfunc_arith(&a, &b, op) else {
                    prop_assert!(b.is_zero());
                    continue;
                };
                let expected = match op {
                    ArithOp::Add => &av + &bv,
                    ArithOp::Sub => &av - &bv,
                    ArithOp::Mul => &av * &bv,
                    ArithOp::Div => {
                        if bv.is_zero() { continue; }
                        &av / &bv
                    }
                };
                // The reduced form may have removed a common root; only
                // compare where the reduced value is defined.
                if let Ok(rv) = r.eval(&t) {
                    prop_assert_eq!(rv, expected);
                }
            }
        }

        #[test]
        fn t_analogue_matches_geometric_sum(m in 1usize..9, tn in -5i64..6, td in 1i64..6) {
            let t = rat(tn, td);
            let direct = (0..m).fold((rat(0, 1), rat(1, 1)), |(s, pw), _| (s + &pw, pw * &t)).0;
            prop_assert_eq!(t_analogue(m).unwrap().eval(&t), direct);
        }
    }
}

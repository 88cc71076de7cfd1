//! Sparse polynomials in `x_1..x_n` with coefficients in `Q(t)`.
//!
//! Variables are indexed from zero in the API (`x_1` is index 0); the text
//! form prints them one-based. Terms are kept in a `BTreeMap` under graded
//! lexicographic order, so the last entry is the leading term.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{RatFuncT, Rational};

/// Exponent vector, ordered by total degree and then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn div(&self, other: &Monomial) -> Option<Monomial> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct XPoly {
    n_vars: usize,
    terms: BTreeMap<Monomial, RatFuncT>,
}

impl XPoly {
    pub fn zero(n_vars: usize) -> Self {
        XPoly {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n_vars: usize) -> Self {
        Self::constant(n_vars, RatFuncT::one())
    }

    pub fn constant(n_vars: usize, c: RatFuncT) -> Self {
        Self::monomial(n_vars, Monomial::one(n_vars), c)
    }

    /// The single variable `x_{i+1}`.
    pub fn var(n_vars: usize, i: usize) -> Self {
        let mut m = vec![0; n_vars];
        m[i] = 1;
        Self::monomial(n_vars, Monomial(m), RatFuncT::one())
    }

    pub fn monomial(n_vars: usize, m: Monomial, c: RatFuncT) -> Self {
        assert_eq!(m.0.len(), n_vars, "exponent vector length");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        XPoly { n_vars, terms }
    }

    /// Builds from `(exponents, coefficient)` pairs, summing duplicates.
    pub fn from_terms(n_vars: usize, terms: impl IntoIterator<Item = (Vec<u32>, RatFuncT)>) -> Self {
        let mut p = Self::zero(n_vars);
        for (e, c) in terms {
            assert_eq!(e.len(), n_vars, "exponent vector length");
            p.add_term(Monomial(e), &c);
        }
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in increasing graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &RatFuncT)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exponents: &[u32]) -> RatFuncT {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(RatFuncT::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &RatFuncT)> {
        self.terms.iter().next_back()
    }

    /// Total degree if all terms share it.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(Monomial::degree);
        let d = degs.next()?;
        degs.all(|e| e == d).then_some(d)
    }

    fn add_term(&mut self, m: Monomial, c: &RatFuncT) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_arity(&self, other: &XPoly) -> Result<()> {
        if self.n_vars != other.n_vars {
            return Err(Error::ArityMismatch {
                left: self.n_vars,
                right: other.n_vars,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &XPoly) -> Result<XPoly> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &XPoly) -> Result<XPoly> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &XPoly) -> Result<XPoly> {
        self.check_arity(other)?;
        let mut out = XPoly::zero(self.n_vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &RatFuncT) -> XPoly {
        if c.is_zero() {
            return XPoly::zero(self.n_vars);
        }
        XPoly {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> XPoly {
        (0..k).fold(XPoly::one(self.n_vars), |acc, _| &acc * self)
    }

    /// Exact value at rational `x` and `t`.
    pub fn eval(&self, xs: &[Rational], t: &Rational) -> Result<Rational> {
        if xs.len() != self.n_vars {
            return Err(Error::ArityMismatch {
                left: self.n_vars,
                right: xs.len(),
            });
        }
        let max_deg = self.terms.values().map(RatFuncT::max_degree).max().unwrap_or(0);
        let t_powers = powers(t, max_deg as u32);
        let max_exp = self
            .terms
            .keys()
            .flat_map(|m| m.0.iter().copied())
            .max()
            .unwrap_or(0);
        let x_powers: Vec<Vec<Rational>> = xs.iter().map(|x| powers(x, max_exp)).collect();
        let mut acc = Rational::from_integer(0.into());
        for (m, c) in &self.terms {
            let mut v = c.eval_with_powers(&t_powers)?;
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    v *= &x_powers[i][e as usize];
                }
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Applies `f` to every exponent vector; `f` must be injective.
    pub fn map_exponents(&self, f: impl Fn(&[u32]) -> Vec<u32>) -> XPoly {
        XPoly {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (Monomial(f(&m.0)), c.clone()))
                .collect(),
        }
    }

    /// Multiplies by the monomial with exponent vector `e`.
    pub fn mul_monomial(&self, e: &[u32]) -> XPoly {
        self.map_exponents(|a| a.iter().zip(e).map(|(x, y)| x + y).collect())
    }

    /// In-place `self += other * c`.
    pub fn add_scaled(&mut self, other: &XPoly, c: &RatFuncT) {
        for (m, v) in &other.terms {
            self.add_term(m.clone(), &(v * c));
        }
    }

    /// The operator `s_i`: exchanges `x_i` and `x_{i+1}` (zero-based `i`).
    pub fn swap_variables(&self, i: usize) -> Result<XPoly> {
        if i + 1 >= self.n_vars {
            return Err(Error::IndexOutOfRange {
                index: i,
                limit: self.n_vars.saturating_sub(1),
            });
        }
        Ok(self.transpose_unchecked(i, i + 1))
    }

    fn transpose_unchecked(&self, i: usize, j: usize) -> XPoly {
        self.map_exponents(|e| {
            let mut e = e.to_vec();
            e.swap(i, j);
            e
        })
    }

    /// Whether exchanging `x_i` and `x_j` leaves the polynomial unchanged.
    pub fn is_symmetric_in(&self, i: usize, j: usize) -> Result<bool> {
        let limit = self.n_vars;
        for idx in [i, j] {
            if idx >= limit {
                return Err(Error::IndexOutOfRange { index: idx, limit });
            }
        }
        Ok(self.transpose_unchecked(i, j) == *self)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n_vars.saturating_sub(1)).all(|i| self.transpose_unchecked(i, i + 1) == *self)
    }

    /// Multiplies every coefficient by the polynomial `d(t)` and checks that
    /// the result has polynomial coefficients in `t`.
    pub fn has_polynomial_coefficients(&self) -> bool {
        self.terms.values().all(RatFuncT::is_polynomial)
    }

    pub fn to_json(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .rev()
            .map(|(m, c)| TermJson {
                exponents: m.0.clone(),
                coeff_num: c.numer().coeffs().iter().map(|v| v.to_string()).collect(),
                coeff_den: c.denom().coeffs().iter().map(|v| v.to_string()).collect(),
            })
            .collect()
    }

    pub fn from_json(n_vars: usize, terms: &[TermJson]) -> Result<XPoly> {
        use crate::numeric::IntPolyT;
        let parse = |v: &[String]| -> Result<IntPolyT> {
            v.iter()
                .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad integer {s:?}"))))
                .collect::<Result<Vec<_>>>()
                .map(IntPolyT::from_coeffs)
        };
        let mut out = XPoly::zero(n_vars);
        for term in terms {
            if term.exponents.len() != n_vars {
                return Err(Error::ArityMismatch {
                    left: n_vars,
                    right: term.exponents.len(),
                });
            }
            let c = RatFuncT::new(parse(&term.coeff_num)?, parse(&term.coeff_den)?)?;
            out.add_term(Monomial(term.exponents.clone()), &c);
        }
        Ok(out)
    }
}

fn powers(x: &Rational, max: u32) -> Vec<Rational> {
    let mut out = Vec::with_capacity(max as usize + 1);
    out.push(Rational::from_integer(1.into()));
    for k in 0..max as usize {
        out.push(&out[k] * x);
    }
    out
}

/// One term in the JSON form; coefficients are integer strings in
/// increasing powers of `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exponents: Vec<u32>,
    pub coeff_num: Vec<String>,
    pub coeff_den: Vec<String>,
}

/// Arithmetic via operators panics on arity mismatch; use the `try_*`
/// methods where the arities are not known to agree.
impl Add for &XPoly {
    type Output = XPoly;
    fn add(self, rhs: &XPoly) -> XPoly {
        self.try_add(rhs).expect("arity mismatch")
    }
}

impl Sub for &XPoly {
    type Output = XPoly;
    fn sub(self, rhs: &XPoly) -> XPoly {
        self.try_sub(rhs).expect("arity mismatch")
    }
}

impl Mul for &XPoly {
    type Output = XPoly;
    fn mul(self, rhs: &XPoly) -> XPoly {
        self.try_mul(rhs).expect("arity mismatch")
    }
}

impl Neg for &XPoly {
    type Output = XPoly;
    fn neg(self) -> XPoly {
        XPoly {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl fmt::Display for XPoly {
    /// `(c) * x1^a1 x3^a3 + ...`, leading term first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            let mut star = false;
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                write!(f, "{}x{}^{}", if star { " " } else { " * " }, i + 1, e)?;
                star = true;
            }
        }
        Ok(())
    }
}

/// Multivariate division with remainder check: returns `q` with
/// `q * den = num`, or [`Error::Inexact`].
pub fn exact_divide(num: &XPoly, den: &XPoly) -> Result<XPoly> {
    num.check_arity(den)?;
    let (lead_m, lead_c) = den.leading_term().ok_or(Error::DivisionByZero)?;
    let lead_inv = lead_c.inv()?;
    let mut rem = num.clone();
    let mut quot = XPoly::zero(num.n_vars);
    while let Some((m, c)) = rem.leading_term() {
        let Some(qm) = m.div(lead_m) else {
            return Err(Error::Inexact);
        };
        let qc = if lead_c.is_one() { c.clone() } else { c * &lead_inv };
        for (dm, dc) in &den.terms {
            rem.add_term(qm.mul(dm), &-&(&qc * dc));
        }
        quot.add_term(qm, &qc);
    }
    Ok(quot)
}

/// Elementary symmetric polynomial `e_k` in the variables listed in `subset`.
/// Returns zero when `k` exceeds the subset size, and `1` for `k = 0`.
pub fn elementary(n_vars: usize, k: usize, subset: &[usize]) -> XPoly {
    let mut out = XPoly::zero(n_vars);
    if k > subset.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mut e = vec![0u32; n_vars];
        for &i in &idx {
            e[subset[i]] += 1;
        }
        out.add_term(Monomial(e), &RatFuncT::one());
        // advance to next k-combination of 0..subset.len()
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] < subset.len() - k + pos {
                break;
            }
        }
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// `e_k` allowing negative `k` (which gives zero).
pub fn elementary_signed(n_vars: usize, k: i64, subset: &[usize]) -> XPoly {
    if k < 0 {
        XPoly::zero(n_vars)
    } else {
        elementary(n_vars, k as usize, subset)
    }
}

/// `e_k` in all variables.
pub fn elementary_all(n_vars: usize, k: usize) -> XPoly {
    let all: Vec<usize> = (0..n_vars).collect();
    elementary(n_vars, k, &all)
}

/// Product `e_{c_1} e_{c_2} ...` over the parts of `parts`, in all variables.
pub fn elementary_product(n_vars: usize, parts: &[usize]) -> XPoly {
    parts
        .iter()
        .filter(|&&k| k > 0)
        .fold(XPoly::one(n_vars), |acc, &k| &acc * &elementary_all(n_vars, k))
}

/// Values `e_0(xs), ..., e_len(xs)` from the expansion of `prod (1 + z x_j)`.
pub fn elementary_values(xs: &[Rational]) -> Vec<Rational> {
    let mut e = vec![Rational::from_integer(0.into()); xs.len() + 1];
    e[0] = Rational::from_integer(1.into());
    for (j, x) in xs.iter().enumerate() {
        for k in (1..=j + 1).rev() {
            let add = &e[k - 1] * x;
            e[k] += add;
        }
    }
    e
}

/// Schur polynomial of the two-column shape `<2^a, 1^b>` via the dual
/// Jacobi-Trudi determinant `e_{a+b} e_a - e_{a+b+1} e_{a-1}`.
pub fn schur_two_column(n_vars: usize, a: usize, b: usize, subset: &[usize]) -> XPoly {
    let first = &elementary(n_vars, a + b, subset) * &elementary(n_vars, a, subset);
    if a == 0 {
        return first;
    }
    let second = &elementary(n_vars, a + b + 1, subset) * &elementary(n_vars, a - 1, subset);
    &first - &second
}

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::dp::{asep_family, row_polynomials, row_transitions, stationary_from_diagrams};
use super::require_distinct;
use crate::chain::{bell_outcomes, discrete_kernel, enumerate_states, merge_outcomes, Content, SystemParams};
use crate::error::{Error, Result};
use crate::numeric::{t_analogue, IntPolyT, RatFuncT, Rational};
use crate::xpoly::{elementary_all, elementary_product, XPoly};

/// Result of one structural check on one content.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub content: String,
    pub cases: usize,
    pub pass: bool,
    pub first_failure: Option<String>,
}

impl CheckOutcome {
    fn new(name: &str, content: &Content, cases: usize, failures: Vec<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            content: content.to_string(),
            cases,
            pass: failures.is_empty(),
            first_failure: failures.into_iter().next(),
        }
    }
}

fn require_no_ones(content: &Content) -> Result<()> {
    if content.m(1) != 0 {
        return Err(Error::Precondition(format!("content {content} has a species-1 particle")));
    }
    Ok(())
}

/// With no species 1, deleting the bottom row multiplies by `e_{a_1}`:
/// the weight of row 1 equal to `eta` is `e_{a_1}` times that of row 2 equal to `eta`.
pub fn bottom_rows_check(content: &Content) -> Result<CheckOutcome> {
    require_distinct(content)?;
    require_no_ones(content)?;
    if content.s() < 2 {
        return Err(Error::Precondition("need at least two rows".into()));
    }
    let n = content.n();
    let levels = row_polynomials(content)?;
    let e = elementary_all(n, content.a(1));
    let zero = XPoly::zero(n);
    let states = enumerate_states(content);
    let failures: Vec<String> = states
        .par_iter()
        .filter_map(|eta| {
            let w1 = levels[0].get(eta).unwrap_or(&zero);
            let w2 = levels[1].get(eta).unwrap_or(&zero);
            (*w1 != w2 * &e).then(|| eta.label(content.s()))
        })
        .collect();
    Ok(CheckOutcome::new("bottom-rows", content, states.len(), failures))
}

/// With one vacancy and no species 1, the row-1 labellings of the balls
/// on all sites but `j` reproduce the cascade started by a bell at `j`.
pub fn row_transition_check(content: &Content) -> Result<CheckOutcome> {
    require_distinct(content)?;
    require_no_ones(content)?;
    if content.m(0) != 1 {
        return Err(Error::Precondition(format!("content {content} must have exactly one vacancy")));
    }
    let n = content.n();
    let states = enumerate_states(content);
    let cases: Vec<_> = states.iter().flat_map(|eta| (0..n).map(move |j| (eta, j))).collect();
    let failures: Vec<String> = cases
        .par_iter()
        .filter_map(|&(eta, j)| {
            let support: Vec<bool> = (0..n).map(|q| q != j).collect();
            let mut by_row: std::collections::BTreeMap<Vec<usize>, RatFuncT> = Default::default();
            for tr in row_transitions(&eta.0, &support, 1) {
                let slot = by_row.entry(tr.lower.clone()).or_insert_with(RatFuncT::zero);
                *slot = &*slot + &tr.prob();
            }
            let cascade: std::collections::BTreeMap<Vec<usize>, RatFuncT> = merge_outcomes(&bell_outcomes(eta, j, content).expect("state of the content"))
                .into_iter()
                .map(|(c, p)| (c.0, p))
                .collect();
            (by_row != cascade).then(|| format!("{} bell at {}", eta.label(content.s()), j + 1))
        })
        .collect();
    Ok(CheckOutcome::new("row-transition", content, cases.len(), failures))
}

/// The diagram law is fixed by the one-step kernel: `pi p = pi` exactly.
pub fn kernel_fixed_point_check(content: &Content, params: &SystemParams) -> Result<CheckOutcome> {
    let pi = stationary_from_diagrams(content, params)?;
    let (states, p) = discrete_kernel(content, params)?;
    let mut failures = Vec::new();
    for (col, eta) in states.iter().enumerate() {
        let image = states
            .iter()
            .zip(&p)
            .fold(Rational::zero(), |acc, (zeta, row)| acc + pi.get(zeta).unwrap() * &row[col]);
        if &image != pi.get(eta).unwrap() {
            failures.push(format!("{}: pi p = {image}", eta.label(content.s())));
        }
    }
    Ok(CheckOutcome::new("kernel-fixed-point", content, states.len(), failures))
}

/// `prod_i [m_s + ... + m_i]_t! / [m_i]_t!`, accumulating multiplicities
/// from the largest species down.
pub fn denominator_factor(content: &Content) -> IntPolyT {
    let fact = |m: usize| (1..=m).fold(IntPolyT::one(), |acc, k| &acc * &t_analogue(k).unwrap());
    let mut out = IntPolyT::one();
    let mut cum = 0;
    for i in (1..=content.s()).rev() {
        let m = content.m(i);
        cum += m;
        out = &out * &fact(cum).div_exact(&fact(m)).expect("binomial quotient");
    }
    out
}

/// Clearing the factorial denominators leaves polynomial coefficients in `t`,
/// and the family sums to `e_{lambda'}`.
pub fn denominator_check(content: &Content) -> Result<CheckOutcome> {
    let n = content.n();
    let fam = asep_family(content)?;
    let d = RatFuncT::from_poly(denominator_factor(content));
    let mut failures: Vec<String> = fam
        .members
        .iter()
        .filter(|(_, f)| !f.scale(&d).has_polynomial_coefficients())
        .map(|(eta, _)| eta.label(content.s()))
        .collect();
    let total = fam.members.values().fold(XPoly::zero(n), |acc, f| &acc + f);
    if total != elementary_product(n, &content.conjugate()) {
        failures.push("sum of the family differs from e_{lambda'}".into());
    }
    Ok(CheckOutcome::new("denominators", content, fam.members.len(), failures))
}

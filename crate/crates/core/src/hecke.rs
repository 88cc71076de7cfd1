//! Hecke operators at `q = 1` and the exchange-relation checker for
//! polynomial families indexed by the states of a content.
//!
//! Operator indices are zero-based: `apply_t(p, 0)` is `T_1`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{enumerate_states, Configuration, Content};
use crate::error::{Error, Result};
use crate::numeric::{t_analogue, IntPolyT, RatFuncT};
use crate::xpoly::{exact_divide, XPoly};

fn t_scalar() -> RatFuncT {
    RatFuncT::t()
}

/// `L_i f = (t x_i - x_{i+1}) / (x_i - x_{i+1}) * (f - s_i f)`.
pub fn apply_l(p: &XPoly, i: usize) -> Result<XPoly> {
    let n = p.n_vars();
    let diff = p.try_sub(&p.swap_variables(i)?)?;
    if diff.is_zero() {
        return Ok(diff);
    }
    let (xi, xj) = (XPoly::var(n, i), XPoly::var(n, i + 1));
    let quotient = exact_divide(&diff, &(&xi - &xj))?;
    Ok(&(&xi.scale(&t_scalar()) - &xj) * &quotient)
}

/// `T_i f = t f - L_i f`.
pub fn apply_t(p: &XPoly, i: usize) -> Result<XPoly> {
    Ok(&p.scale(&t_scalar()) - &apply_l(p, i)?)
}

/// `T_i^{-1} f = t^{-1} f - t^{-1} L_i f`.
pub fn apply_t_inverse(p: &XPoly, i: usize) -> Result<XPoly> {
    let t_inv = t_scalar().inv()?;
    Ok((p - &apply_l(p, i)?).scale(&t_inv))
}

/// `(omega f)(x_1, ..., x_n) = f(x_n, x_1, ..., x_{n-1})`.
pub fn apply_omega_q1(p: &XPoly) -> XPoly {
    p.map_exponents(|a| {
        let mut b = a.to_vec();
        b.rotate_left(1);
        b
    })
}

/// Polynomials indexed by every state of a content.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QkzFamily {
    pub content: Content,
    pub members: BTreeMap<Configuration, XPoly>,
}

impl QkzFamily {
    /// Checks that the keys are exactly the states of `content` and that all
    /// members live in `n` variables.
    pub fn new(content: Content, members: BTreeMap<Configuration, XPoly>) -> Result<Self> {
        let states = enumerate_states(&content);
        if states.len() != members.len() || states.iter().any(|s| !members.contains_key(s)) {
            return Err(Error::Precondition("family keys must be exactly the states of the content".into()));
        }
        if let Some(bad) = members.values().find(|p| p.n_vars() != content.n()) {
            return Err(Error::ArityMismatch {
                left: content.n(),
                right: bad.n_vars(),
            });
        }
        Ok(QkzFamily { content, members })
    }

    pub fn get(&self, eta: &Configuration) -> &XPoly {
        &self.members[eta]
    }
}

/// One checked instance of an exchange relation.
///
/// `relation` is `first` (`T_i f_eta = f_{s_i eta}` for a descent),
/// `second` (`T_i f_eta = t f_eta` for equal neighbours), `third` (cyclic
/// shift) or `fourth` (`T_i f_eta = (t-1) f_eta + t f_{s_i eta}` for an
/// ascent). `i` is one-based; the cyclic shift reports `i = n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KzCheck {
    pub relation: String,
    pub eta: Vec<usize>,
    pub i: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KzReport {
    pub checks: Vec<KzCheck>,
    pub pass: bool,
    pub first_failure: Option<KzCheck>,
}

/// Checks every exchange relation and the cyclic relation for each member.
/// Failures are collected, not raised.
pub fn verify_kz_family(fam: &QkzFamily) -> KzReport {
    let n = fam.content.n();
    let t = t_scalar();
    let t_minus_one = &t - &RatFuncT::one();
    let per_state: Vec<Vec<KzCheck>> = fam
        .members
        .par_iter()
        .map(|(eta, f)| {
            let mut out = Vec::new();
            for i in 0..n - 1 {
                let swapped = eta.swapped(i);
                let (relation, ok) = match apply_t(f, i) {
                    Err(_) => ("first", false),
                    Ok(tf) => {
                        if eta[i] > eta[i + 1] {
                            ("first", tf == *fam.get(&swapped))
                        } else if eta[i] == eta[i + 1] {
                            ("second", tf == f.scale(&t))
                        } else {
                            let rhs = &f.scale(&t_minus_one) + &fam.get(&swapped).scale(&t);
                            ("fourth", tf == rhs)
                        }
                    }
                };
                out.push(KzCheck {
                    relation: relation.into(),
                    eta: eta.0.clone(),
                    i: i + 1,
                    pass: ok,
                });
            }
            let ok = *f == apply_omega_q1(fam.get(&eta.rotate_right()));
            out.push(KzCheck {
                relation: "third".into(),
                eta: eta.0.clone(),
                i: n,
                pass: ok,
            });
            out
        })
        .collect();
    let checks: Vec<KzCheck> = per_state.into_iter().flatten().collect();
    let first_failure = checks.iter().find(|c| !c.pass).cloned();
    KzReport {
        pass: first_failure.is_none(),
        checks,
        first_failure,
    }
}

/// Checks that `f_eta + f_{s_i eta}` is symmetric in `x_i, x_{i+1}` for every
/// state and every `i`, reported under the relation name `pair`.
pub fn verify_pair_symmetry(fam: &QkzFamily) -> KzReport {
    let n = fam.content.n();
    let checks: Vec<KzCheck> = fam
        .members
        .par_iter()
        .flat_map_iter(|(eta, f)| {
            (0..n - 1).map(move |i| {
                let sum = f + fam.get(&eta.swapped(i));
                KzCheck {
                    relation: "pair".into(),
                    eta: eta.0.clone(),
                    i: i + 1,
                    pass: sum.is_symmetric_in(i, i + 1).unwrap_or(false),
                }
            })
        })
        .collect();
    let first_failure = checks.iter().find(|c| !c.pass).cloned();
    KzReport {
        pass: first_failure.is_none(),
        checks,
        first_failure,
    }
}

/// `r_i(nu) = #{j < i : nu_{i+1} < nu_j <= nu_i} + #{j > i : nu_{i+1} <= nu_j < nu_i}`
/// for zero-based `i`.
pub fn r_index(nu: &[usize], i: usize) -> Result<usize> {
    if i + 1 >= nu.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            limit: nu.len().saturating_sub(1),
        });
    }
    let (hi, lo) = (nu[i], nu[i + 1]);
    let before = nu[..i].iter().filter(|&&v| lo < v && v <= hi).count();
    let after = nu[i + 1..].iter().filter(|&&v| lo <= v && v < hi).count();
    Ok(before + after)
}

/// Given `E_nu` at `q = 1` with `nu_i > nu_{i+1}`, returns
/// `E_{s_i nu} = (T_i + 1/[r_i(nu)]_t) E_nu`.
pub fn shape_permute_q1(e: &XPoly, nu: &[usize], i: usize) -> Result<XPoly> {
    let r = r_index(nu, i)?;
    if nu[i] <= nu[i + 1] {
        return Err(Error::Precondition(format!(
            "shape permutation needs nu_{} > nu_{} in {nu:?}",
            i + 1,
            i + 2
        )));
    }
    if r == 0 {
        return Err(Error::Internal(format!("r_{}({nu:?}) vanished", i + 1)));
    }
    let scalar = RatFuncT::new(IntPolyT::one(), t_analogue(r)?)?;
    Ok(&apply_t(e, i)? + &e.scale(&scalar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use crate::xpoly::{elementary_all, Monomial};
    use proptest::prelude::*;

    fn x(n: usize, i: usize) -> XPoly {
        XPoly::var(n, i)
    }

    fn over(num: &[i64], den: &[i64]) -> RatFuncT {
        RatFuncT::new(IntPolyT::from_i64s(num), IntPolyT::from_i64s(den)).unwrap()
    }

    fn mono(e: &[u32], c: RatFuncT) -> XPoly {
        XPoly::monomial(e.len(), Monomial(e.to_vec()), c)
    }

    /// The six polynomials of the (2,1,0) table at q = 1.
    fn table_210() -> BTreeMap<Configuration, XPoly> {
        let one = RatFuncT::one();
        let a = over(&[1], &[1, 1]);
        let b = over(&[0, 1], &[1, 1]);
        let rows: Vec<(Vec<usize>, Vec<(Vec<u32>, RatFuncT)>)> = vec![
            (vec![2, 1, 0], vec![(vec![2, 1, 0], one.clone()), (vec![1, 1, 1], a.clone())]),
            (vec![2, 0, 1], vec![(vec![2, 0, 1], one.clone()), (vec![1, 1, 1], b.clone())]),
            (vec![1, 2, 0], vec![(vec![1, 2, 0], one.clone()), (vec![1, 1, 1], b.clone())]),
            (vec![1, 0, 2], vec![(vec![1, 1, 1], a.clone()), (vec![1, 0, 2], one.clone())]),
            (vec![0, 2, 1], vec![(vec![1, 1, 1], a.clone()), (vec![0, 2, 1], one.clone())]),
            (vec![0, 1, 2], vec![(vec![1, 1, 1], b.clone()), (vec![0, 1, 2], one.clone())]),
        ];
        rows.into_iter()
            .map(|(eta, terms)| (Configuration(eta), XPoly::from_terms(3, terms)))
            .collect()
    }

    #[test]
    fn t_on_symmetric_input() {
        let e2 = elementary_all(3, 2);
        for i in 0..2 {
            assert_eq!(apply_t(&e2, i).unwrap(), e2.scale(&RatFuncT::t()));
            assert_eq!(apply_t_inverse(&e2, i).unwrap(), e2.scale(&RatFuncT::t().inv().unwrap()));
            assert_eq!(apply_t(&apply_t_inverse(&e2, i).unwrap(), i).unwrap(), e2);
        }
        assert!(apply_t(&e2, 2).is_err());
    }

    #[test]
    fn t_exchanges_table_entries() {
        let f = table_210();
        let get = |w: [usize; 3]| f[&Configuration(w.to_vec())].clone();
        assert_eq!(apply_t(&get([2, 1, 0]), 0).unwrap(), get([1, 2, 0]));
        assert_eq!(apply_t(&get([2, 1, 0]), 1).unwrap(), get([2, 0, 1]));
    }

    #[test]
    fn omega_examples() {
        let p = &x(3, 0).pow(2) * &x(3, 1);
        assert_eq!(apply_omega_q1(&p), &x(3, 2).pow(2) * &x(3, 0));
        let e2 = elementary_all(4, 2);
        assert_eq!(apply_omega_q1(&e2), e2);
    }

    #[test]
    fn table_is_a_kz_family() {
        let fam = QkzFamily::new(Content::from_lambda(&[2, 1, 0]).unwrap(), table_210()).unwrap();
        let report = verify_kz_family(&fam);
        assert!(report.pass, "{:?}", report.first_failure);
        assert_eq!(report.checks.len(), 6 * 3);
        assert!(report.checks.iter().any(|c| c.relation == "fourth"));

        let mut broken = table_210();
        let key = Configuration(vec![1, 0, 2]);
        let bumped = &broken[&key] * &x(3, 0);
        broken.insert(key, bumped);
        let fam = QkzFamily::new(Content::from_lambda(&[2, 1, 0]).unwrap(), broken).unwrap();
        let report = verify_kz_family(&fam);
        assert!(!report.pass);
        assert!(report.first_failure.is_some());
        let json = serde_json::to_value(report.first_failure.unwrap()).unwrap();
        assert!(json["relation"].is_string() && json["pass"] == false);
    }

    #[test]
    fn pair_report() {
        let fam = QkzFamily::new(Content::from_lambda(&[2, 1, 0]).unwrap(), table_210()).unwrap();
        let report = verify_pair_symmetry(&fam);
        assert!(report.pass);
        assert_eq!(report.checks.len(), 12);
    }

    #[test]
    fn pair_sums_are_symmetric() {
        let f = table_210();
        for (eta, p) in &f {
            for i in 0..2 {
                let s = &f[&eta.swapped(i)] + p;
                assert!(s.is_symmetric_in(i, i + 1).unwrap());
            }
        }
    }

    #[test]
    fn r_index_examples() {
        assert_eq!(r_index(&[2, 1, 0], 0).unwrap(), 1);
        assert_eq!(r_index(&[2, 1, 0], 1).unwrap(), 1);
        assert_eq!(r_index(&[1, 2, 0], 1).unwrap(), 2);
        assert_eq!(r_index(&[1, 0, 2], 0).unwrap(), 1);
        assert!(r_index(&[1, 0], 1).is_err());
    }

    #[test]
    fn shape_permutation_walks_to_the_increasing_shape() {
        let a = over(&[1], &[1, 1]);
        let one = RatFuncT::one();
        // nonsymmetric Macdonald polynomials of (2,1,0) and its permutations at q = 1
        let e210 = &mono(&[2, 1, 0], one.clone()) + &mono(&[1, 1, 1], a.clone());
        let e120 = XPoly::from_terms(
            3,
            [(vec![2, 1, 0], one.clone()), (vec![1, 2, 0], one.clone()), (vec![1, 1, 1], one.clone())],
        );
        let e102 = XPoly::from_terms(
            3,
            [
                (vec![2, 1, 0], a.clone()),
                (vec![1, 2, 0], a.clone()),
                (vec![2, 0, 1], one.clone()),
                (vec![1, 1, 1], over(&[2, 1], &[1, 1])),
                (vec![1, 0, 2], one.clone()),
            ],
        );
        let e012 = &elementary_all(3, 2) * &elementary_all(3, 1);
        assert_eq!(shape_permute_q1(&e210, &[2, 1, 0], 0).unwrap(), e120);
        assert_eq!(shape_permute_q1(&e120, &[1, 2, 0], 1).unwrap(), e102);
        assert_eq!(shape_permute_q1(&e102, &[1, 0, 2], 0).unwrap(), e012);
        assert!(matches!(shape_permute_q1(&e012, &[0, 1, 2], 0), Err(Error::Precondition(_))));
        assert!(matches!(shape_permute_q1(&e012, &[0, 1, 2], 1), Err(Error::Precondition(_))));
    }

    fn arb_poly(n: usize) -> impl Strategy<Value = XPoly> {
        prop::collection::vec((prop::collection::vec(0u32..3, n), -3i64..4, 0i64..3), 1..5).prop_map(move |ts| {
            XPoly::from_terms(n, ts.into_iter().map(|(e, c, k)| (e, over(&[c, k], &[1, 1]))))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn quadratic_relation(p in arb_poly(4), i in 0usize..3) {
            let tp = apply_t(&p, i).unwrap();
            let t = RatFuncT::t();
            let lhs = &apply_t(&tp, i).unwrap() - &(&tp.scale(&(&t - &RatFuncT::one())) + &p.scale(&t));
            prop_assert!(lhs.is_zero());
        }

        #[test]
        fn inverse_pair(p in arb_poly(3), i in 0usize..2) {
            prop_assert_eq!(apply_t_inverse(&apply_t(&p, i).unwrap(), i).unwrap(), p.clone());
            prop_assert_eq!(apply_t(&apply_t_inverse(&p, i).unwrap(), i).unwrap(), p);
        }

        #[test]
        fn braid_and_commutation(p in arb_poly(4)) {
            let t = |q: &XPoly, i: usize| apply_t(q, i).unwrap();
            prop_assert_eq!(t(&t(&t(&p, 0), 1), 0), t(&t(&t(&p, 1), 0), 1));
            prop_assert_eq!(t(&t(&p, 0), 2), t(&t(&p, 2), 0));
        }

        #[test]
        fn symmetric_factors_commute(p in arb_poly(3), k in 1usize..4, i in 0usize..2) {
            let h = elementary_all(3, k);
            prop_assert_eq!(apply_t(&(&h * &p), i).unwrap(), &h * &apply_t(&p, i).unwrap());
        }

        #[test]
        fn omega_has_order_n(p in arb_poly(4)) {
            let mut q = p.clone();
            for _ in 0..4 {
                q = apply_omega_q1(&q);
            }
            prop_assert_eq!(q, p);
        }
    }

    #[test]
    fn evaluation_sanity() {
        let f = table_210();
        let v = f[&Configuration(vec![2, 1, 0])]
            .eval(&[rat(1, 1), rat(2, 1), rat(3, 1)], &rat(1, 1))
            .unwrap();
        assert_eq!(v, rat(5, 1));
    }
}

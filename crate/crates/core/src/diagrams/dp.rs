use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use rayon::prelude::*;

use super::require_distinct;
use crate::chain::{enumerate_states, project_config, Configuration, Content, StationaryVector, SystemParams};
use crate::diagrams::refine_content;
use crate::error::{Error, Result};
use crate::hecke::QkzFamily;
use crate::numeric::{t_analogue, RatFuncT, Rational};
use crate::xpoly::{elementary_all, elementary_values, exact_divide, XPoly};

/// One way of labelling a lower row from the row above it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowTransition {
    pub lower: Vec<usize>,
    /// `(l, K)` for each non-trivial match, of probability `t^l / [K]_t`.
    pub factors: Vec<(usize, usize)>,
}

impl RowTransition {
    pub fn prob(&self) -> RatFuncT {
        self.factors.iter().fold(RatFuncT::one(), |acc, &(ell, k)| {
            &acc * &RatFuncT::t_pow_over_analogue(ell, k).expect("K >= 1")
        })
    }
}

/// All labellings of the balls at `lower_support` given the labelled row
/// `upper` above it. Labels are matched in decreasing order: straight down
/// when that ball is free, otherwise to the `k`-th free ball clockwise out of
/// `K`. A leftover ball takes label `r`, the one-based index of the lower row.
pub fn row_transitions(upper: &[usize], lower_support: &[bool], r: usize) -> Vec<RowTransition> {
    let mut labels: Vec<(usize, usize)> = upper.iter().enumerate().filter(|(_, &h)| h > 0).map(|(j, &h)| (h, j)).collect();
    labels.sort_unstable_by(|a, b| b.cmp(a));
    let mut lower = vec![0; upper.len()];
    let mut factors = Vec::new();
    let mut out = Vec::new();
    match_labels(&labels, 0, lower_support, r, &mut lower, &mut factors, &mut out);
    out
}

fn match_labels(
    labels: &[(usize, usize)],
    idx: usize,
    support: &[bool],
    r: usize,
    lower: &mut Vec<usize>,
    factors: &mut Vec<(usize, usize)>,
    out: &mut Vec<RowTransition>,
) {
    let n = lower.len();
    if idx == labels.len() {
        let mut done = lower.clone();
        let mut leftover = 0;
        for j in 0..n {
            if support[j] && done[j] == 0 {
                done[j] = r;
                leftover += 1;
            }
        }
        debug_assert!(leftover <= 1);
        out.push(RowTransition {
            lower: done,
            factors: factors.clone(),
        });
        return;
    }
    let (h, j) = labels[idx];
    if support[j] && lower[j] == 0 {
        lower[j] = h;
        match_labels(labels, idx + 1, support, r, lower, factors, out);
        lower[j] = 0;
        return;
    }
    let free: Vec<usize> = (1..n).map(|d| (j + d) % n).filter(|&q| support[q] && lower[q] == 0).collect();
    let k = free.len();
    for (ell, &q) in free.iter().enumerate() {
        lower[q] = h;
        factors.push((ell, k));
        match_labels(labels, idx + 1, support, r, lower, factors, out);
        factors.pop();
        lower[q] = 0;
    }
}

pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            out.push((0..n).map(|j| mask >> j & 1 == 1).collect());
        }
    }
    out
}

/// How weights of partial diagrams are represented and combined.
trait RowWeights: Sync {
    type V: Clone + Send + Sync;
    fn zero(&self) -> Self::V;
    fn top(&self, col: usize) -> Self::V;
    /// `acc += w * x^support * prob(factors)`
    fn accumulate(&self, acc: &mut Self::V, w: &Self::V, support: &[bool], tr: &RowTransition);
    fn merge(&self, acc: &mut Self::V, other: &Self::V);
}

struct Symbolic {
    n: usize,
}

impl RowWeights for Symbolic {
    type V = XPoly;
    fn zero(&self) -> XPoly {
        XPoly::zero(self.n)
    }
    fn top(&self, col: usize) -> XPoly {
        XPoly::var(self.n, col)
    }
    fn accumulate(&self, acc: &mut XPoly, w: &XPoly, support: &[bool], tr: &RowTransition) {
        let e: Vec<u32> = support.iter().map(|&b| b as u32).collect();
        acc.add_scaled(&w.mul_monomial(&e), &tr.prob());
    }
    fn merge(&self, acc: &mut XPoly, other: &XPoly) {
        acc.add_scaled(other, &RatFuncT::one());
    }
}

struct Numeric {
    x: Vec<Rational>,
    t_pows: Vec<Rational>,
    analogues: Vec<Rational>,
}

impl Numeric {
    fn new(params: &SystemParams) -> Self {
        let n = params.n();
        let mut t_pows = vec![Rational::one()];
        for k in 0..n {
            let next = &t_pows[k] * &params.t;
            t_pows.push(next);
        }
        let analogues = (0..=n)
            .map(|m| if m == 0 { Rational::zero() } else { t_analogue(m).unwrap().eval(&params.t) })
            .collect();
        Numeric {
            x: params.x.clone(),
            t_pows,
            analogues,
        }
    }
}

impl RowWeights for Numeric {
    type V = Rational;
    fn zero(&self) -> Rational {
        Rational::zero()
    }
    fn top(&self, col: usize) -> Rational {
        self.x[col].clone()
    }
    fn accumulate(&self, acc: &mut Rational, w: &Rational, support: &[bool], tr: &RowTransition) {
        let mut v = w.clone();
        for (j, &b) in support.iter().enumerate() {
            if b {
                v *= &self.x[j];
            }
        }
        for &(ell, k) in &tr.factors {
            v *= &self.t_pows[ell];
            v /= &self.analogues[k];
        }
        *acc += v;
    }
    fn merge(&self, acc: &mut Rational, other: &Rational) {
        *acc += other;
    }
}

/// `levels[r - 1]` maps each labelled row `r` to the total weight of the
/// rows `r..=s` above and including it.
fn run_rows<W: RowWeights>(content: &Content, w: &W) -> Vec<HashMap<Vec<usize>, W::V>> {
    let (n, s) = (content.n(), content.s());
    let mut top = HashMap::new();
    for j in 0..n {
        let mut row = vec![0; n];
        row[j] = s;
        top.insert(row, w.top(j));
    }
    let mut levels = vec![top];
    for r in (1..s).rev() {
        let above = levels.last().unwrap();
        let entries: Vec<(&Vec<usize>, &W::V)> = above.iter().collect();
        let supports = subsets(n, content.a(r));
        let next = supports
            .par_iter()
            .fold(HashMap::new, |mut acc: HashMap<Vec<usize>, W::V>, support| {
                for (upper, weight) in &entries {
                    for tr in row_transitions(upper, support, r) {
                        let slot = acc.entry(tr.lower.clone()).or_insert_with(|| w.zero());
                        w.accumulate(slot, weight, support, &tr);
                    }
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    match a.get_mut(&k) {
                        Some(slot) => w.merge(slot, &v),
                        None => {
                            a.insert(k, v);
                        }
                    }
                }
                a
            });
        levels.push(next);
    }
    levels.reverse();
    levels
}

/// Generating polynomials of each labelled row: entry `r - 1` maps a row-`r`
/// labelling to the summed weight of the diagram rows `r` and above.
pub fn row_polynomials(content: &Content) -> Result<Vec<BTreeMap<Configuration, XPoly>>> {
    require_distinct(content)?;
    Ok(run_rows(content, &Symbolic { n: content.n() })
        .into_iter()
        .map(|level| level.into_iter().map(|(k, v)| (Configuration(k), v)).collect())
        .collect())
}

/// `F_eta(x; 1, t)` for every state, by summing diagram weights over the bottom row.
pub fn asep_family_distinct(content: &Content) -> Result<QkzFamily> {
    let mut levels = row_polynomials(content)?;
    let mut members = levels.swap_remove(0);
    for eta in enumerate_states(content) {
        members.entry(eta).or_insert_with(|| XPoly::zero(content.n()));
    }
    QkzFamily::new(content.clone(), members)
}

/// `F_eta(x; 1, t)` for every state of any content. Repeated species go
/// through a refinement `lambda` with distinct species: `G_eta` sums the
/// refined polynomials over the fibre of `eta`, and
/// `F_eta = G_eta e_{mu'} / e_{lambda'}`, the division checked for exactness.
pub fn asep_family(content: &Content) -> Result<QkzFamily> {
    if content.has_distinct_parts() {
        return asep_family_distinct(content);
    }
    let n = content.n();
    let (refined, phi) = refine_content(content);
    let fine = asep_family_distinct(&refined)?;
    let mut g: BTreeMap<Configuration, XPoly> = BTreeMap::new();
    for (zeta, f) in &fine.members {
        let eta = project_config(&phi, zeta)?;
        g.entry(eta).or_insert_with(|| XPoly::zero(n)).add_scaled(f, &RatFuncT::one());
    }
    let mut extra = refined.conjugate();
    let mut direct = true;
    for k in content.conjugate() {
        match extra.iter().position(|&v| v == k) {
            Some(p) => {
                extra.remove(p);
            }
            None => direct = false,
        }
    }
    let members = g
        .into_par_iter()
        .map(|(eta, g_eta)| {
            let f = if direct {
                extra
                    .iter()
                    .try_fold(g_eta, |acc, &k| exact_divide(&acc, &elementary_all(n, k)))
            } else {
                let num = &g_eta * &elementary_product(n, &content.conjugate());
                exact_divide(&num, &elementary_product(n, &refined.conjugate()))
            };
            f.map(|f| (eta, f)).map_err(|e| match e {
                Error::Inexact => Error::Internal("ASEP polynomial quotient is not exact".into()),
                other => other,
            })
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    QkzFamily::new(content.clone(), members)
}

fn elementary_product(n: usize, parts: &[usize]) -> XPoly {
    crate::xpoly::elementary_product(n, parts)
}

/// `F_eta(x; 1, t)` for one state.
pub fn asep_polynomial_q1(content: &Content, eta: &Configuration) -> Result<XPoly> {
    if !content.contains(eta) {
        return Err(Error::InvalidConfiguration(format!(
            "{} is not a state of content {content}",
            eta.label(content.s())
        )));
    }
    Ok(asep_family(content)?.get(eta).clone())
}

/// Stationary law `F_eta(x; 1, t) / e_{lambda'}(x)` with everything evaluated
/// at the rational parameters. Repeated species use the refinement values
/// `F_eta = G_eta e_{mu'} / e_{lambda'}`.
pub fn stationary_from_diagrams(content: &Content, params: &SystemParams) -> Result<StationaryVector> {
    params.check_len(content)?;
    let e = elementary_values(&params.x);
    let e_conj = |c: &Content| c.conjugate().iter().fold(Rational::one(), |acc, &k| acc * &e[k]);
    let (refined, phi) = if content.has_distinct_parts() {
        (content.clone(), None)
    } else {
        let (r, p) = refine_content(content);
        (r, Some(p))
    };
    let mut levels = run_rows(&refined, &Numeric::new(params));
    let bottom = levels.swap_remove(0);
    let mut values: BTreeMap<Configuration, Rational> = BTreeMap::new();
    for (zeta, v) in bottom {
        let eta = match &phi {
            Some(p) => project_config(p, &Configuration(zeta))?,
            None => Configuration(zeta),
        };
        *values.entry(eta).or_insert_with(Rational::zero) += v;
    }
    let p_mu = e_conj(content);
    let scale = &p_mu / e_conj(&refined);
    let states = enumerate_states(content);
    let probs: Vec<Rational> = states
        .iter()
        .map(|eta| values.get(eta).map_or_else(Rational::zero, |g| g * &scale) / &p_mu)
        .collect();
    let total = probs.iter().fold(Rational::zero(), |a, b| a + b);
    if !total.is_one() {
        return Err(Error::Internal(format!("diagram weights sum to {total}, not 1")));
    }
    Ok(StationaryVector {
        content: content.clone(),
        states,
        probs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagrams::enumerate_diagrams;
    use crate::numeric::{rat, IntPolyT};
    use crate::xpoly::Monomial;

    fn over(num: &[i64], den: &[i64]) -> RatFuncT {
        RatFuncT::new(IntPolyT::from_i64s(num), IntPolyT::from_i64s(den)).unwrap()
    }

    fn poly(terms: &[(&[u32], RatFuncT)]) -> XPoly {
        XPoly::from_terms(terms[0].0.len(), terms.iter().map(|(e, c)| (e.to_vec(), c.clone())))
    }

    #[test]
    fn three_site_table() {
        let c = Content::from_lambda(&[2, 1, 0]).unwrap();
        let fam = asep_family(&c).unwrap();
        let one = RatFuncT::one();
        let a = over(&[1], &[1, 1]);
        let b = over(&[0, 1], &[1, 1]);
        let f = |w: [usize; 3]| fam.get(&Configuration(w.to_vec())).clone();
        assert_eq!(f([2, 1, 0]), poly(&[(&[2, 1, 0], one.clone()), (&[1, 1, 1], a.clone())]));
        assert_eq!(f([0, 1, 2]), poly(&[(&[1, 1, 1], b.clone()), (&[0, 1, 2], one.clone())]));
        let sum = fam.members.values().fold(XPoly::zero(3), |acc, p| &acc + p);
        assert_eq!(sum, &elementary_all(3, 1) * &elementary_all(3, 2));
    }

    #[test]
    fn enumeration_agrees_with_row_recursion() {
        for lambda in [vec![2, 1, 0], vec![3, 1, 0, 0], vec![3, 2, 0, 0], vec![4, 2, 1, 0]] {
            let c = Content::from_lambda(&lambda).unwrap();
            let fam = asep_family(&c).unwrap();
            for (eta, f) in &fam.members {
                let total = enumerate_diagrams(&c, eta)
                    .unwrap()
                    .into_iter()
                    .fold(XPoly::zero(c.n()), |acc, (_, w)| {
                        &acc + &XPoly::monomial(c.n(), Monomial(w.x_part), w.t_part)
                    });
                assert_eq!(&total, f, "{eta:?}");
            }
        }
    }

    #[test]
    fn single_ball_and_single_particle() {
        let c = Content::from_lambda(&[1, 0]).unwrap();
        assert_eq!(asep_polynomial_q1(&c, &Configuration(vec![1, 0])).unwrap(), XPoly::var(2, 0));
        assert_eq!(enumerate_diagrams(&c, &Configuration(vec![0, 1])).unwrap().len(), 1);
        let c = Content::from_lambda(&[1, 0, 0, 0]).unwrap();
        for i in 0..4 {
            let mut w = vec![0; 4];
            w[i] = 1;
            assert_eq!(asep_polynomial_q1(&c, &Configuration(w)).unwrap(), XPoly::var(4, i));
        }
    }

    #[test]
    fn repeated_species_fibre_sum() {
        // collapsing 0 and 1 of (2,1,0): F_(1,2,0) + F_(0,2,1) = x2 e2
        let lam = Content::from_lambda(&[2, 1, 0]).unwrap();
        let fam = asep_family(&lam).unwrap();
        let g = fam.get(&Configuration(vec![1, 2, 0])) + fam.get(&Configuration(vec![0, 2, 1]));
        assert_eq!(g, &XPoly::var(3, 1) * &elementary_all(3, 2));
    }

    #[test]
    fn repeated_species_family() {
        let mu = Content::from_lambda(&[1, 1, 0]).unwrap();
        let fam = asep_family(&mu).unwrap();
        let sum = fam.members.values().fold(XPoly::zero(3), |acc, p| &acc + p);
        assert_eq!(sum, elementary_all(3, 2));
        // single species: F_eta is the product of the occupied x_j
        for (eta, f) in &fam.members {
            let e: Vec<u32> = eta.0.iter().map(|&v| v as u32).collect();
            assert_eq!(f, &XPoly::monomial(3, Monomial(e), RatFuncT::one()));
        }
        let mu = Content::from_lambda(&[2, 1, 1, 0]).unwrap();
        let fam = asep_family(&mu).unwrap();
        let sum = fam.members.values().fold(XPoly::zero(4), |acc, p| &acc + p);
        assert_eq!(sum, &elementary_all(4, 3) * &elementary_all(4, 1));
    }

    #[test]
    fn alternative_refinement_gives_same_polynomials() {
        // (2,1,1,0,0) refined by hand to (6,5,4,2,0) instead of (5,4,3,2,0)
        let mu = Content::from_lambda(&[2, 1, 1, 0]).unwrap();
        let fam = asep_family(&mu).unwrap();
        let alt = Content::from_lambda(&[6, 5, 4, 0]).unwrap();
        let phi = crate::chain::MonotoneMap::new(vec![0, 0, 0, 0, 1, 1, 2]).unwrap();
        let fine = asep_family_distinct(&alt).unwrap();
        let n = 4;
        let mut g: BTreeMap<Configuration, XPoly> = BTreeMap::new();
        for (zeta, f) in &fine.members {
            g.entry(project_config(&phi, zeta).unwrap())
                .or_insert_with(|| XPoly::zero(n))
                .add_scaled(f, &RatFuncT::one());
        }
        for (eta, g_eta) in g {
            let num = &g_eta * &elementary_product(n, &mu.conjugate());
            let f = exact_divide(&num, &elementary_product(n, &alt.conjugate())).unwrap();
            assert_eq!(&f, fam.get(&eta));
        }
    }

    #[test]
    fn stationary_values_match_polynomials() {
        let params = SystemParams::new(vec![rat(1, 1), rat(2, 1), rat(3, 2), rat(1, 3)], rat(1, 3)).unwrap();
        for lambda in [vec![3, 2, 0, 0], vec![2, 1, 1, 0], vec![1, 1, 0, 0], vec![2, 2, 1, 0]] {
            let c = Content::from_lambda(&lambda).unwrap();
            let pi = stationary_from_diagrams(&c, &params).unwrap();
            let fam = asep_family(&c).unwrap();
            let p = elementary_product(4, &c.conjugate()).eval(&params.x, &params.t).unwrap();
            for (eta, prob) in pi.iter() {
                assert_eq!(fam.get(eta).eval(&params.x, &params.t).unwrap() / &p, *prob);
            }
        }
    }

    #[test]
    fn transitions_are_probability_distributions() {
        let upper = vec![0, 4, 3, 0, 2];
        for support in subsets(5, 4) {
            let total = row_transitions(&upper, &support, 1)
                .iter()
                .fold(RatFuncT::zero(), |acc, tr| &acc + &tr.prob());
            assert!(total.is_one());
        }
    }
}

//! Stationary densities and currents in closed form, with brute-force
//! counterparts computed from the exact stationary law.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{
    bell_outcomes, enumerate_states, stationary_oracle, Configuration, Content, StationaryVector, SystemParams,
    DEFAULT_MAX_STATES,
};
use crate::diagrams::asep_family;
use crate::error::{Error, Result};
use crate::numeric::{t_analogue, RatFuncT, Rational};
use crate::xpoly::{elementary_all, elementary_product, elementary_signed, elementary_values, schur_two_column, Monomial, XPoly};

/// Current of one species across the edge from site `edge` to the next
/// site clockwise (one-based; `edge = n` is the edge `(n, 1)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CurrentSpec {
    pub species: usize,
    pub edge: usize,
}

impl CurrentSpec {
    pub fn across_last_edge(species: usize, n: usize) -> Self {
        CurrentSpec { species, edge: n }
    }

    fn check(&self, content: &Content) -> Result<()> {
        if self.species == 0 || self.species > content.s() {
            return Err(Error::Domain(format!("species {} outside 1..={}", self.species, content.s())));
        }
        if self.edge == 0 || self.edge > content.n() {
            return Err(Error::IndexOutOfRange {
                index: self.edge,
                limit: content.n(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Formula,
    Oracle,
    Simulation,
}

/// An exact observable value and how it was obtained.
#[derive(Clone, Debug, Serialize)]
pub struct ObservableReport {
    pub name: String,
    pub exact_value: String,
    pub method: Method,
    pub metadata: serde_json::Value,
}

fn single_content(m0: usize, m1: usize) -> Result<Content> {
    if m0 == 0 {
        return Err(Error::InvalidContent("a single-species system needs a vacancy".into()));
    }
    Content::new(vec![m0, m1])
}

/// `pi(eta) = prod_{eta_i = 1} x_i / e_{m_1}(x)`, which does not involve `t`.
pub fn single_species_stationary(m0: usize, m1: usize, params: &SystemParams) -> Result<StationaryVector> {
    let content = single_content(m0, m1)?;
    params.check_len(&content)?;
    let e = elementary_values(&params.x)[m1].clone();
    let states = enumerate_states(&content);
    let probs = states
        .iter()
        .map(|eta| {
            eta.0
                .iter()
                .zip(&params.x)
                .filter(|(&v, _)| v == 1)
                .fold(Rational::one(), |acc, (_, x)| acc * x)
                / &e
        })
        .collect();
    Ok(StationaryVector { content, states, probs })
}

/// Density of species `r` at site 1:
/// `x_1 s_{<2^{a_{r+1}}, 1^{m_r - 1}>}(x_2..x_n) / (e_{a_r} e_{a_{r+1}})`.
pub fn density(content: &Content, r: usize, params: &SystemParams) -> Result<Rational> {
    params.check_len(content)?;
    if r == 0 || r > content.s() {
        return Err(Error::Domain(format!("species {r} outside 1..={}", content.s())));
    }
    if content.m(r) == 0 {
        return Ok(Rational::zero());
    }
    let n = content.n();
    let upper = if r < content.s() { content.a(r + 1) } else { 0 };
    let rest: Vec<usize> = (1..n).collect();
    let schur = schur_two_column(n, upper, content.m(r) - 1, &rest).eval(&params.x, &params.t)?;
    let e = elementary_values(&params.x);
    Ok(&params.x[0] * schur / (&e[content.a(r)] * &e[upper]))
}

/// Density of species `r` at site 1 read off the exact stationary law.
pub fn density_oracle(content: &Content, r: usize, params: &SystemParams) -> Result<Rational> {
    let pi = stationary_oracle(content, params, DEFAULT_MAX_STATES)?;
    Ok(pi.marginal(&[0], &[r]))
}

/// `J = ((1 + 2t + ... + m_0 t^{m_0 - 1}) / [m_0]_t) e_{m_1 - 1}(x) / e_{m_1}(x)`.
pub fn current_single_species(m0: usize, m1: usize, params: &SystemParams) -> Result<Rational> {
    let content = single_content(m0, m1)?;
    params.check_len(&content)?;
    if m1 == 0 {
        return Ok(Rational::zero());
    }
    let mut num = Rational::zero();
    let mut pow = Rational::one();
    for h in 0..m0 {
        num += Rational::from_integer((h as i64 + 1).into()) * &pow;
        pow *= &params.t;
    }
    let den = t_analogue(m0)?.eval(&params.t);
    let e = elementary_values(&params.x);
    Ok(num / den * &e[m1 - 1] / &e[m1])
}

/// Current across `(n, 1)` as the sum over a particle at `k` jumping to a
/// vacancy at `j < k` past `h` vacancies, at rate `t^h / ([m_0]_t x_k)`.
pub fn current_jump_sum(m0: usize, m1: usize, params: &SystemParams) -> Result<Rational> {
    let pi = single_species_stationary(m0, m1, params)?;
    let n = m0 + m1;
    let analogue = t_analogue(m0)?.eval(&params.t);
    let mut total = Rational::zero();
    for (eta, p) in pi.iter() {
        for k in 1..n {
            if eta[k] != 1 {
                continue;
            }
            for j in 0..k {
                if eta[j] != 0 {
                    continue;
                }
                let h = (k + 1..n).chain(0..j).filter(|&q| eta[q] == 0).count();
                let rate = pow(&params.t, h) / (&analogue * &params.x[k]);
                total += p * rate;
            }
        }
    }
    Ok(total)
}

fn pow(t: &Rational, h: usize) -> Rational {
    (0..h).fold(Rational::one(), |acc, _| acc * t)
}

/// Expected crossings per unit time: each bell at `j` contributes, for
/// every cascade, the number of particles of the species whose clockwise
/// arc uses the edge.
pub fn current_from_law(pi: &StationaryVector, spec: CurrentSpec, params: &SystemParams) -> Result<Rational> {
    let content = &pi.content;
    spec.check(content)?;
    let n = content.n();
    let edge_from = spec.edge - 1;
    let parts: Vec<Rational> = pi
        .states
        .par_iter()
        .zip(&pi.probs)
        .map(|(eta, p)| -> Result<Rational> {
            let mut acc = Rational::zero();
            for j in 0..n {
                let mut flow = Rational::zero();
                for o in bell_outcomes(eta, j, content)? {
                    let c = o.crossings(spec.species, edge_from, n);
                    if c > 0 {
                        flow += o.prob_at(&params.t) * Rational::from_integer((c as i64).into());
                    }
                }
                if !flow.is_zero() {
                    acc += flow / &params.x[j];
                }
            }
            Ok(acc * p)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().fold(Rational::zero(), |a, b| a + b))
}

/// Brute-force current from the exactly solved chain.
pub fn current_oracle(content: &Content, spec: CurrentSpec, params: &SystemParams) -> Result<Rational> {
    let pi = stationary_oracle(content, params, DEFAULT_MAX_STATES)?;
    current_from_law(&pi, spec, params)
}

/// The colouring guess for species `r`: the single-species current of the
/// particles of species at least `r` minus that of species above `r`.
pub fn naive_colored_current(content: &Content, r: usize, params: &SystemParams) -> Result<Rational> {
    params.check_len(content)?;
    if r == 0 || r > content.s() {
        return Err(Error::Domain(format!("species {r} outside 1..={}", content.s())));
    }
    let n = content.n();
    let j = |a: usize| if a == 0 { Ok(Rational::zero()) } else { current_single_species(n - a, a, params) };
    let upper = if r < content.s() { content.a(r + 1) } else { 0 };
    Ok(j(content.a(r))? - j(upper)?)
}

/// The current as a rational function `num / den` in `x` and `t`, with
/// `den = e_{lambda'}(x) x_1 ... x_n`.
pub fn current_symbolic(content: &Content, spec: CurrentSpec) -> Result<(XPoly, XPoly)> {
    spec.check(content)?;
    let n = content.n();
    let fam = asep_family(content)?;
    let edge_from = spec.edge - 1;
    let terms: Vec<XPoly> = fam
        .members
        .par_iter()
        .map(|(eta, f)| -> Result<XPoly> {
            let mut acc = XPoly::zero(n);
            for j in 0..n {
                let mut flow = RatFuncT::zero();
                for o in bell_outcomes(eta, j, content)? {
                    let c = o.crossings(spec.species, edge_from, n);
                    if c > 0 {
                        flow = &flow + &o.prob().scale_int(&(c as i64).into());
                    }
                }
                if !flow.is_zero() {
                    let mut e = vec![1; n];
                    e[j] = 0;
                    acc.add_scaled(&f.mul_monomial(&e), &flow);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let num = terms.into_iter().fold(XPoly::zero(n), |acc, p| &acc + &p);
    let all = XPoly::monomial(n, Monomial(vec![1; n]), RatFuncT::one());
    let den = &elementary_product(n, &content.conjugate()) * &all;
    Ok((num, den))
}

/// Checks `(h+1) e_{n-m_0-1}(x) = sum_a sum_j e_{h-m_0+a}(x_{j+1..j+a-1})
/// e_{n-h-1-a}(x_{j+a+1..n}, x_{1..j-1})` as a polynomial identity.
pub fn elementary_identity_check(n: usize, m0: usize, h: usize) -> Result<bool> {
    if m0 == 0 || m0 >= n || h >= m0 {
        return Err(Error::Domain(format!("need 0 <= h < m0 < n, got n={n}, m0={m0}, h={h}")));
    }
    let lhs = elementary_all(n, n - m0 - 1).scale(&RatFuncT::from_int(h as i64 + 1));
    let mut rhs = XPoly::zero(n);
    let (n_i, m0_i, h_i) = (n as i64, m0 as i64, h as i64);
    for a in (m0 - h)..n {
        for j in 1..=(n - a) {
            // one-based j; zero-based indices of x_{j+1}..x_{j+a-1}
            let inner: Vec<usize> = (j..j + a - 1).collect();
            let outer: Vec<usize> = (j + a..n).chain(0..j - 1).collect();
            let a_i = a as i64;
            let term = &elementary_signed(n, h_i - m0_i + a_i, &inner) * &elementary_signed(n, n_i - h_i - 1 - a_i, &outer);
            rhs = &rhs + &term;
        }
    }
    Ok(lhs == rhs)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SwapCheck {
    /// One-based: `x_i` exchanged with `x_{i+1}`.
    pub i: usize,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetryReport {
    pub content: String,
    pub k: usize,
    pub swaps: Vec<SwapCheck>,
    pub pass: bool,
}

fn prefix_after_swap(content: &Content, params: &SystemParams, k: usize, i: usize) -> Result<bool> {
    let base = stationary_oracle(content, params, DEFAULT_MAX_STATES)?.prefix_law(k);
    let other = stationary_oracle(content, &params.swapped(i - 1, i), DEFAULT_MAX_STATES)?.prefix_law(k);
    Ok(base == other)
}

/// Compares the law of sites `1..=k` under `x` and under `x` with `x_i`,
/// `x_{i+1}` exchanged, for every `k < i < n`.
pub fn symmetry_check(content: &Content, params: &SystemParams, k: usize) -> Result<SymmetryReport> {
    params.check_len(content)?;
    let n = content.n();
    if k == 0 || k >= n {
        return Err(Error::Domain(format!("prefix length {k} outside 1..{n}")));
    }
    let swaps: Vec<SwapCheck> = (k + 1..n)
        .map(|i| prefix_after_swap(content, params, k, i).map(|equal| SwapCheck { i, equal }))
        .collect::<Result<_>>()?;
    Ok(SymmetryReport {
        content: content.to_string(),
        k,
        pass: swaps.iter().all(|s| s.equal),
        swaps,
    })
}

/// Whether the prefix law changes when `x_i` and `x_{i+1}` are exchanged
/// with `i <= k`, where no symmetry is expected.
pub fn prefix_changes_under_swap(content: &Content, params: &SystemParams, k: usize, i: usize) -> Result<bool> {
    if i == 0 || i >= content.n() {
        return Err(Error::IndexOutOfRange { index: i, limit: content.n() });
    }
    Ok(!prefix_after_swap(content, params, k, i)?)
}

/// Probability of `eta` under a single-species law, for reporting.
pub fn single_species_probability(eta: &Configuration, params: &SystemParams) -> Result<Rational> {
    let m1 = eta.0.iter().filter(|&&v| v == 1).count();
    let pi = single_species_stationary(eta.len() - m1, m1, params)?;
    pi.get(eta)
        .cloned()
        .ok_or_else(|| Error::InvalidConfiguration(format!("{} is not a 0/1 word", eta.label(1))))
}

//! The t-PushTASEP as a continuous-time Markov chain: contents, states,
//! bell outcomes, the generator and the exact stationary solve.

mod cascade;
mod generator;
mod projection;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Rational;

pub use cascade::{bell_outcomes, merge_outcomes, rates_cross_check, BellOutcome, Move};
pub use generator::{
    discrete_kernel, generator, solve_stationary, stationary_oracle, StationaryVector, TransitionTable,
    DEFAULT_MAX_STATES,
};
pub use projection::{project_config, project_stationary, MonotoneMap};

/// Species multiplicities `m_0, ..., m_s` of a system on a ring.
///
/// `m_0 >= 1` and `m_s >= 1`; intermediate species may be absent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Content {
    mult: Vec<usize>,
}

impl Content {
    pub fn new(mult: Vec<usize>) -> Result<Self> {
        if mult.len() < 2 {
            return Err(Error::InvalidContent("need multiplicities m0,...,ms with s >= 1".into()));
        }
        if mult[0] == 0 {
            return Err(Error::InvalidContent("m0 must be at least 1".into()));
        }
        if *mult.last().unwrap() == 0 {
            return Err(Error::InvalidContent("the largest species must be present".into()));
        }
        Ok(Content { mult })
    }

    /// Content of a partition or of any word with these entries.
    pub fn from_lambda(lambda: &[usize]) -> Result<Self> {
        let s = lambda.iter().copied().max().unwrap_or(0);
        let mut mult = vec![0; s + 1];
        for &v in lambda {
            mult[v] += 1;
        }
        Self::new(mult)
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.mult
    }

    /// Number of sites.
    pub fn n(&self) -> usize {
        self.mult.iter().sum()
    }

    /// Largest species.
    pub fn s(&self) -> usize {
        self.mult.len() - 1
    }

    pub fn m(&self, r: usize) -> usize {
        self.mult.get(r).copied().unwrap_or(0)
    }

    /// `a_r = m_r + ... + m_s`, the number of particles of species at least `r`.
    pub fn a(&self, r: usize) -> usize {
        self.mult.iter().skip(r).sum()
    }

    /// Number of entries of the partition strictly below `r`.
    pub fn below(&self, r: usize) -> usize {
        self.mult.iter().take(r).sum()
    }

    /// The partition in weakly decreasing order.
    pub fn lambda(&self) -> Vec<usize> {
        (0..=self.s())
            .rev()
            .flat_map(|r| std::iter::repeat(r).take(self.mult[r]))
            .collect()
    }

    /// Conjugate partition `(a_1, ..., a_s)`, zero columns dropped.
    pub fn conjugate(&self) -> Vec<usize> {
        (1..=self.s()).map(|k| self.a(k)).filter(|&a| a > 0).collect()
    }

    /// True when every nonzero species appears at most once.
    pub fn has_distinct_parts(&self) -> bool {
        self.mult.iter().skip(1).all(|&m| m <= 1)
    }

    /// Species present with multiplicity one or more, excluding vacancies.
    pub fn species(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.s()).filter(|&r| self.mult[r] > 0)
    }

    /// `n! / prod m_i!`, saturating at `usize::MAX`.
    pub fn num_states(&self) -> usize {
        let mut count: u128 = 1;
        let mut placed: u128 = 0;
        for &m in &self.mult {
            for k in 1..=m as u128 {
                placed += 1;
                count = count * placed / k;
                if count > usize::MAX as u128 {
                    return usize::MAX;
                }
            }
        }
        count as usize
    }

    pub fn contains(&self, eta: &Configuration) -> bool {
        eta.len() == self.n() && Content::from_lambda(eta.word()).is_ok_and(|c| c == *self)
    }
}

impl TryFrom<Vec<usize>> for Content {
    type Error = Error;
    fn try_from(mult: Vec<usize>) -> Result<Self> {
        Content::new(mult)
    }
}

impl From<Content> for Vec<usize> {
    fn from(c: Content) -> Self {
        c.mult
    }
}

impl fmt::Display for Content {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.mult.iter().map(usize::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// A state: the species at each site, sites indexed from zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(pub Vec<usize>);

impl Configuration {
    pub fn new(word: Vec<usize>) -> Self {
        Configuration(word)
    }

    pub fn checked(word: Vec<usize>, content: &Content) -> Result<Self> {
        let eta = Configuration(word);
        if !content.contains(&eta) {
            return Err(Error::InvalidConfiguration(format!(
                "{} is not a rearrangement of content {}",
                eta.label(content.s()),
                content
            )));
        }
        Ok(eta)
    }

    pub fn word(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Compact text form: a digit string when all species are single
    /// digits, otherwise dash-separated.
    pub fn label(&self, s: usize) -> String {
        if s <= 9 {
            self.0.iter().map(|v| char::from(b'0' + *v as u8)).collect()
        } else {
            let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
            parts.join("-")
        }
    }

    /// `(eta_n, eta_1, ..., eta_{n-1})`.
    pub fn rotate_right(&self) -> Configuration {
        let mut w = self.0.clone();
        w.rotate_right(1);
        Configuration(w)
    }

    pub fn swapped(&self, i: usize) -> Configuration {
        let mut w = self.0.clone();
        w.swap(i, i + 1);
        Configuration(w)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let parts: Vec<&str> = if text.contains([',', '-']) {
            text.split([',', '-']).collect()
        } else {
            text.split("").filter(|p| !p.is_empty()).collect()
        };
        parts
            .iter()
            .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad species {p:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(Configuration)
    }
}

impl std::ops::Index<usize> for Configuration {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

/// Site parameters `x_1..x_n` and the push parameter `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemParams {
    pub x: Vec<Rational>,
    pub t: Rational,
}

impl SystemParams {
    pub fn new(x: Vec<Rational>, t: Rational) -> Result<Self> {
        use num_traits::Signed;
        if let Some(bad) = x.iter().find(|v| !v.is_positive()) {
            return Err(Error::InvalidParams(format!("site parameter {bad} is not positive")));
        }
        if t.is_negative() {
            return Err(Error::InvalidParams(format!("t = {t} is negative")));
        }
        Ok(SystemParams { x, t })
    }

    pub fn uniform(n: usize, t: Rational) -> Self {
        SystemParams {
            x: vec![Rational::from_integer(1.into()); n],
            t,
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn check_len(&self, content: &Content) -> Result<()> {
        if self.x.len() != content.n() {
            return Err(Error::InvalidParams(format!(
                "{} site parameters given for {} sites",
                self.x.len(),
                content.n()
            )));
        }
        Ok(())
    }

    /// Copy with `x_i` and `x_j` exchanged.
    pub fn swapped(&self, i: usize, j: usize) -> Self {
        let mut out = self.clone();
        out.x.swap(i, j);
        out
    }
}

/// All rearrangements of the content in lexicographically decreasing order.
pub fn enumerate_states(content: &Content) -> Vec<Configuration> {
    let mut word = content.lambda();
    let mut out = vec![Configuration(word.clone())];
    // previous permutation in lexicographic order, starting from the largest
    while prev_permutation(&mut word) {
        out.push(Configuration(word.clone()));
    }
    out
}

fn prev_permutation(w: &mut [usize]) -> bool {
    let n = w.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && w[i - 1] <= w[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while w[j] >= w[i - 1] {
        j -= 1;
    }
    w.swap(i - 1, j);
    w[i..].reverse();
    true
}

/// Every content on `n` sites with all multiplicities positive.
pub fn contents_with_n(n: usize) -> Vec<Content> {
    fn compositions(n: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for first in 1..=n {
            prefix.push(first);
            compositions(n - first, prefix, out);
            prefix.pop();
        }
    }
    let mut all = Vec::new();
    compositions(n, &mut Vec::new(), &mut all);
    all.into_iter().filter_map(|m| Content::new(m).ok()).collect()
}

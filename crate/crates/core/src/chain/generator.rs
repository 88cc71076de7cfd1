use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{bell_outcomes, enumerate_states, Configuration, Content, SystemParams};
use crate::error::{Error, Result};
use crate::numeric::Rational;

/// Refuse exact solves above this many states unless told otherwise.
pub const DEFAULT_MAX_STATES: usize = 20_000;

/// Sparse generator matrix in the order of [`enumerate_states`].
#[derive(Clone, Debug)]
pub struct TransitionTable {
    pub states: Vec<Configuration>,
    /// Off-diagonal rates per source row, sorted by target index.
    pub rows: Vec<Vec<(usize, Rational)>>,
}

impl TransitionTable {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Total exit rate of state `i` (the negated diagonal entry).
    pub fn exit_rate(&self, i: usize) -> Rational {
        self.rows[i].iter().fold(Rational::zero(), |acc, (_, r)| acc + r)
    }

    /// Entry `Q[i][j]`; diagonal entries make each row sum to zero.
    pub fn entry(&self, i: usize, j: usize) -> Rational {
        if i == j {
            return -self.exit_rate(i);
        }
        self.rows[i]
            .iter()
            .find(|(k, _)| *k == j)
            .map(|(_, r)| r.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn index_of(&self, eta: &Configuration) -> Option<usize> {
        self.states.binary_search_by(|s| eta.cmp(s)).ok()
    }

    /// Dense matrix, rows summing to zero.
    pub fn dense(&self) -> Vec<Vec<Rational>> {
        let n = self.len();
        let mut q = vec![vec![Rational::zero(); n]; n];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, r) in row {
                q[i][*j] += r;
                q[i][i] -= r;
            }
        }
        q
    }
}

/// Builds the generator at rational parameters. Rows are assembled in
/// parallel; each entry sums `(1/x_j) * P(bell at j gives eta')` over sites.
pub fn generator(content: &Content, params: &SystemParams) -> Result<TransitionTable> {
    params.check_len(content)?;
    let states = enumerate_states(content);
    let index: HashMap<&Configuration, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let n = content.n();
    let rates: Vec<Rational> = params.x.iter().map(|x| x.recip()).collect();
    let rows = states
        .par_iter()
        .enumerate()
        .map(|(i, eta)| {
            let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
            for j in 0..n {
                if eta[j] == 0 {
                    continue;
                }
                for o in bell_outcomes(eta, j, content)? {
                    let target = index[&o.config];
                    if target == i {
                        continue;
                    }
                    let r = &rates[j] * o.prob_at(&params.t);
                    *row.entry(target).or_insert_with(Rational::zero) += r;
                }
            }
            Ok(row.into_iter().filter(|(_, r)| !r.is_zero()).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransitionTable { states, rows })
}

/// Kernel `p(eta, eta') = sum_j (x_j^-1 / sum_k x_k^-1) p_j(eta, eta')` of the
/// embedded discrete chain with uniform total clock, dense.
pub fn discrete_kernel(content: &Content, params: &SystemParams) -> Result<(Vec<Configuration>, Vec<Vec<Rational>>)> {
    params.check_len(content)?;
    let states = enumerate_states(content);
    let index: HashMap<&Configuration, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let inv: Vec<Rational> = params.x.iter().map(|x| x.recip()).collect();
    let total = inv.iter().fold(Rational::zero(), |a, b| a + b);
    let mut p = vec![vec![Rational::zero(); states.len()]; states.len()];
    for (i, eta) in states.iter().enumerate() {
        for (j, w) in inv.iter().enumerate() {
            let weight = w / &total;
            for o in bell_outcomes(eta, j, content)? {
                p[i][index[&o.config]] += &weight * o.prob_at(&params.t);
            }
        }
    }
    Ok((states, p))
}

/// Exact stationary law of the chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StationaryVector {
    pub content: Content,
    pub states: Vec<Configuration>,
    pub probs: Vec<Rational>,
}

#[derive(Serialize)]
struct StationaryEntry {
    config: Vec<usize>,
    label: String,
    probability: String,
}

impl StationaryVector {
    pub fn get(&self, eta: &Configuration) -> Option<&Rational> {
        self.states
            .binary_search_by(|s| eta.cmp(s))
            .ok()
            .map(|i| &self.probs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Configuration, &Rational)> {
        self.states.iter().zip(&self.probs)
    }

    pub fn total(&self) -> Rational {
        self.probs.iter().fold(Rational::zero(), |a, b| a + b)
    }

    /// Probability that the sites in `sites` hold `values`.
    pub fn marginal(&self, sites: &[usize], values: &[usize]) -> Rational {
        self.iter()
            .filter(|(eta, _)| sites.iter().zip(values).all(|(&i, &v)| eta[i] == v))
            .fold(Rational::zero(), |acc, (_, p)| acc + p)
    }

    /// Joint law of the first `k` sites.
    pub fn prefix_law(&self, k: usize) -> BTreeMap<Vec<usize>, Rational> {
        let mut out: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        for (eta, p) in self.iter() {
            *out.entry(eta.0[..k].to_vec()).or_insert_with(Rational::zero) += p;
        }
        out
    }

    /// CSV with header `configuration,probability`.
    pub fn to_csv(&self) -> String {
        let s = self.content.s();
        let mut out = String::from("configuration,probability\n");
        for (eta, p) in self.iter() {
            out.push_str(&format!("{},{}\n", eta.label(s), p));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let s = self.content.s();
        let entries: Vec<StationaryEntry> = self
            .iter()
            .map(|(eta, p)| StationaryEntry {
                config: eta.0.clone(),
                label: eta.label(s),
                probability: p.to_string(),
            })
            .collect();
        serde_json::json!({
            "content": self.content.multiplicities(),
            "states": entries,
        })
    }
}

/// Stationary law by an exact fraction-free solve of `pi Q = 0`,
/// `sum pi = 1`. Fails above `max_states` states.
pub fn stationary_oracle(content: &Content, params: &SystemParams, max_states: usize) -> Result<StationaryVector> {
    let states = content.num_states();
    if states > max_states {
        return Err(Error::StateSpaceTooLarge {
            states,
            limit: max_states,
        });
    }
    let table = generator(content, params)?;
    let probs = solve_stationary(&table)?;
    if probs.iter().any(|p| !p.is_positive()) {
        return Err(Error::Internal("stationary vector has a nonpositive entry".into()));
    }
    Ok(StationaryVector {
        content: content.clone(),
        states: table.states,
        probs,
    })
}

/// Solves `Q^T pi = 0` with the last equation replaced by normalization.
pub fn solve_stationary(table: &TransitionTable) -> Result<Vec<Rational>> {
    let n = table.len();
    let q = table.dense();
    let mut a: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| q[j][i].clone()).collect()).collect();
    let mut b = vec![Rational::zero(); n];
    a[n - 1] = vec![Rational::one(); n];
    b[n - 1] = Rational::one();
    bareiss_solve(a, b)
}

/// Fraction-free Gaussian elimination. Each row is first scaled to integers;
/// the elimination runs over `BigInt` with exact Bareiss divisions, then
/// back-substitution runs over the rationals.
pub(crate) fn bareiss_solve(a: Vec<Vec<Rational>>, b: Vec<Rational>) -> Result<Vec<Rational>> {
    let n = a.len();
    let mut m: Vec<Vec<BigInt>> = a
        .into_iter()
        .zip(b)
        .map(|(mut row, rhs)| {
            row.push(rhs);
            let l = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            row.iter().map(|v| v.numer() * (&l / v.denom())).collect()
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !m[r][k].is_zero()) else {
            return Err(Error::Singular);
        };
        m.swap(k, p);
        let (top, rest) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        rest.par_iter_mut().for_each(|row| {
            let factor = row[k].clone();
            for c in k + 1..=n {
                let v = &pivot_row[k] * &row[c] - &factor * &pivot_row[c];
                row[c] = v / &prev;
            }
            row[k] = BigInt::zero();
        });
        prev = m[k][k].clone();
    }
    let mut x = vec![Rational::zero(); n];
    for k in (0..n).rev() {
        let mut acc = Rational::from_integer(m[k][n].clone());
        for c in k + 1..n {
            acc -= Rational::from_integer(m[k][c].clone()) * &x[c];
        }
        x[k] = acc / Rational::from_integer(m[k][k].clone());
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    fn params(x: &[(i64, i64)], t: (i64, i64)) -> SystemParams {
        SystemParams::new(x.iter().map(|&(p, q)| rat(p, q)).collect(), rat(t.0, t.1)).unwrap()
    }

    #[test]
    fn two_site_rates() {
        let c = Content::from_lambda(&[1, 0]).unwrap();
        let p = params(&[(2, 1), (3, 1)], (1, 2));
        let q = generator(&c, &p).unwrap();
        assert_eq!(q.entry(0, 1), rat(1, 2));
        assert_eq!(q.entry(1, 0), rat(1, 3));
        assert_eq!(q.entry(0, 0), rat(-1, 2));
    }

    #[test]
    fn rows_sum_to_zero() {
        let c = Content::from_lambda(&[2, 1, 1, 0]).unwrap();
        let q = generator(&c, &params(&[(1, 1), (2, 3), (5, 2), (7, 4)], (1, 3))).unwrap();
        for row in q.dense() {
            assert!(row.iter().fold(Rational::zero(), |a, b| a + b).is_zero());
        }
    }

    #[test]
    fn three_site_transition_graph() {
        let c = Content::from_lambda(&[2, 1, 0]).unwrap();
        let q = generator(&c, &SystemParams::uniform(3, rat(1, 2))).unwrap();
        let targets = |eta: &Configuration| -> Vec<Configuration> {
            let i = q.index_of(eta).unwrap();
            let mut out: Vec<Configuration> = q.rows[i].iter().map(|(j, _)| q.states[*j].clone()).collect();
            out.sort();
            out
        };
        let parse = |v: &[&str]| -> Vec<Configuration> {
            let mut out: Vec<Configuration> = v.iter().map(|s| Configuration::parse(s).unwrap()).collect();
            out.sort();
            out
        };
        assert_eq!(targets(&Configuration(vec![2, 1, 0])), parse(&["021", "012", "201"]));
        assert_eq!(targets(&Configuration(vec![1, 2, 0])), parse(&["021", "102", "201"]));
        // uniform rates make the graph equivariant under rotation
        for eta in &q.states {
            let mut rotated: Vec<Configuration> = targets(eta).iter().map(Configuration::rotate_right).collect();
            rotated.sort();
            assert_eq!(targets(&eta.rotate_right()), rotated);
        }
    }

    #[test]
    fn single_particle_law() {
        let c = Content::from_lambda(&[1, 0, 0, 0]).unwrap();
        let x = [(1, 1), (2, 1), (1, 3), (5, 2)];
        let pi = stationary_oracle(&c, &params(&x, (2, 5)), DEFAULT_MAX_STATES).unwrap();
        let sum: Rational = x.iter().map(|&(p, q)| rat(p, q)).sum();
        for (i, &(p, q)) in x.iter().enumerate() {
            let mut w = vec![0; 4];
            w[i] = 1;
            assert_eq!(pi.get(&Configuration(w)).unwrap(), &(rat(p, q) / &sum));
        }
    }

    #[test]
    fn small_chain_examples() {
        let c = Content::from_lambda(&[1, 1, 0]).unwrap();
        let pi = stationary_oracle(&c, &SystemParams::uniform(3, rat(0, 1)), 100).unwrap();
        assert!(pi.probs.iter().all(|p| *p == rat(1, 3)));

        // (2,1,0) against x1 x2 (x1 + x3/(1+t)) / (e1 e2)
        let c = Content::from_lambda(&[2, 1, 0]).unwrap();
        let (x1, x2, x3, t) = (rat(1, 1), rat(2, 1), rat(3, 1), rat(1, 2));
        let p = SystemParams::new(vec![x1.clone(), x2.clone(), x3.clone()], t.clone()).unwrap();
        let pi = stationary_oracle(&c, &p, 100).unwrap();
        let e1 = &x1 + &x2 + &x3;
        let e2 = &x1 * &x2 + &x1 * &x3 + &x2 * &x3;
        let f = &x1 * &x2 * (&x1 + &x3 / (rat(1, 1) + &t));
        assert_eq!(pi.get(&Configuration(vec![2, 1, 0])).unwrap(), &(f / (e1 * e2)));
        assert_eq!(pi.total(), rat(1, 1));
        assert!(matches!(
            stationary_oracle(&c, &p, 5),
            Err(Error::StateSpaceTooLarge { states: 6, limit: 5 })
        ));
    }

    #[test]
    fn bareiss_detects_singular_systems() {
        let a = vec![vec![rat(1, 1), rat(2, 1)], vec![rat(1, 2), rat(1, 1)]];
        assert_eq!(bareiss_solve(a, vec![rat(1, 1), rat(0, 1)]), Err(Error::Singular));
        let a = vec![vec![rat(0, 1), rat(2, 3)], vec![rat(1, 2), rat(1, 1)]];
        assert_eq!(bareiss_solve(a, vec![rat(1, 1), rat(0, 1)]).unwrap(), vec![rat(-3, 1), rat(3, 2)]);
    }

    #[test]
    fn discrete_kernel_is_stochastic() {
        let c = Content::from_lambda(&[2, 1, 0, 0]).unwrap();
        let (_, p) = discrete_kernel(&c, &params(&[(1, 1), (2, 1), (3, 1), (1, 2)], (1, 2))).unwrap();
        for row in p {
            assert_eq!(row.iter().fold(Rational::zero(), |a, b| a + b), rat(1, 1));
        }
    }

    #[test]
    fn csv_and_json_forms() {
        let c = Content::from_lambda(&[1, 0]).unwrap();
        let pi = stationary_oracle(&c, &params(&[(1, 1), (3, 1)], (0, 1)), 10).unwrap();
        assert_eq!(pi.to_csv(), "configuration,probability\n10,1/4\n01,3/4\n");
        let json = pi.to_json();
        assert_eq!(json["states"][1]["probability"], "3/4");
    }
}

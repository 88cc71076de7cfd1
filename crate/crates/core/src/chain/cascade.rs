use std::collections::BTreeMap;

use num_traits::One;

use super::{Configuration, Content};
use crate::error::{Error, Result};
use crate::numeric::{t_analogue, RatFuncT, Rational};

/// One displacement in a cascade: a particle of `species` moves clockwise
/// from site `from` to site `to`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub species: usize,
    pub from: usize,
    pub to: usize,
}

impl Move {
    /// Clockwise arc length, between 1 and n - 1.
    pub fn arc_len(&self, n: usize) -> usize {
        (self.to + n - self.from) % n
    }

    /// Whether the clockwise arc from `from` to `to` uses the edge from site
    /// `edge_from` to site `edge_from + 1` (mod n).
    pub fn crosses(&self, edge_from: usize, n: usize) -> bool {
        let offset = (edge_from + n - self.from) % n;
        offset < self.arc_len(n)
    }
}

/// One branch of the displacement cascade after a bell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellOutcome {
    pub config: Configuration,
    /// `(k, m)` for each active particle: it took the `k`-th of `m` weaker
    /// particles, with probability `t^(k-1) / [m]_t`.
    pub choices: Vec<(usize, usize)>,
    pub moves: Vec<Move>,
}

impl BellOutcome {
    pub fn prob(&self) -> RatFuncT {
        self.choices.iter().fold(RatFuncT::one(), |acc, &(k, m)| {
            &acc * &RatFuncT::t_pow_over_analogue(k - 1, m).expect("m >= 1")
        })
    }

    pub fn prob_at(&self, t: &Rational) -> Rational {
        let mut p = Rational::one();
        for &(k, m) in &self.choices {
            let mut num = Rational::one();
            for _ in 1..k {
                num *= t;
            }
            p *= num / t_analogue(m).expect("m >= 1").eval(t);
        }
        p
    }

    /// Number of particles of `species` whose move crosses the edge out of
    /// site `edge_from`.
    pub fn crossings(&self, species: usize, edge_from: usize, n: usize) -> usize {
        self.moves
            .iter()
            .filter(|mv| mv.species == species && mv.crosses(edge_from, n))
            .count()
    }
}

/// All cascades triggered by a bell at site `j` (zero-based).
///
/// A bell at a vacancy returns the unchanged state with probability one.
/// Distinct branches are kept apart even if they end in the same state; see
/// [`merge_outcomes`].
pub fn bell_outcomes(eta: &Configuration, j: usize, content: &Content) -> Result<Vec<BellOutcome>> {
    let n = content.n();
    if !content.contains(eta) {
        return Err(Error::InvalidConfiguration(format!(
            "{} is not a state of content {content}",
            eta.label(content.s())
        )));
    }
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, limit: n });
    }
    if eta[j] == 0 {
        return Ok(vec![BellOutcome {
            config: eta.clone(),
            choices: Vec::new(),
            moves: Vec::new(),
        }]);
    }
    let mut out = Vec::new();
    let mut work = eta.0.clone();
    let mut choices = Vec::new();
    let mut moves = Vec::new();
    explore(content, j, &mut work, eta[j], j, &mut choices, &mut moves, &mut out);
    Ok(out)
}

// The bell site keeps its original species until the cascade ends, so it is
// never a candidate and the number of weaker sites always equals the
// number of entries of the content below the active species.
#[allow(clippy::too_many_arguments)]
fn explore(
    content: &Content,
    bell: usize,
    work: &mut Vec<usize>,
    active: usize,
    pos: usize,
    choices: &mut Vec<(usize, usize)>,
    moves: &mut Vec<Move>,
    out: &mut Vec<BellOutcome>,
) {
    let n = work.len();
    let m = content.below(active);
    let candidates: Vec<usize> = (1..n).map(|d| (pos + d) % n).filter(|&q| work[q] < active).collect();
    debug_assert_eq!(candidates.len(), m);
    for (idx, &q) in candidates.iter().enumerate() {
        let displaced = work[q];
        work[q] = active;
        choices.push((idx + 1, m));
        moves.push(Move {
            species: active,
            from: pos,
            to: q,
        });
        if displaced == 0 {
            let mut config = work.clone();
            config[bell] = 0;
            out.push(BellOutcome {
                config: Configuration(config),
                choices: choices.clone(),
                moves: moves.clone(),
            });
        } else {
            explore(content, bell, work, displaced, q, choices, moves, out);
        }
        moves.pop();
        choices.pop();
        work[q] = displaced;
    }
}

/// Total probability of each reachable state.
pub fn merge_outcomes(outcomes: &[BellOutcome]) -> BTreeMap<Configuration, RatFuncT> {
    let mut merged: BTreeMap<Configuration, RatFuncT> = BTreeMap::new();
    for o in outcomes {
        let p = o.prob();
        merged
            .entry(o.config.clone())
            .and_modify(|acc| *acc = &*acc + &p)
            .or_insert(p);
    }
    merged
}

/// Recomputes each outcome's probability from the direct description of the
/// jump rates: `prod_h t^(l_h) / [K_h]_t` over the species whose position
/// set changed, where `K_h` counts entries below `h` and `l_h` counts sites
/// strictly inside the clockwise interval from the old to the new `h`-site
/// holding a value below `h` in `eta`. Returns the per-state probabilities
/// or an error naming the first disagreement with the cascade.
pub fn rates_cross_check(eta: &Configuration, j: usize, content: &Content) -> Result<BTreeMap<Configuration, RatFuncT>> {
    let merged = merge_outcomes(&bell_outcomes(eta, j, content)?);
    for (eta2, p) in &merged {
        let direct = direct_rate(eta, eta2, j, content)?;
        if direct != *p {
            return Err(Error::Internal(format!(
                "jump {} -> {} at site {}: cascade gives {p}, direct rule gives {direct}",
                eta.label(content.s()),
                eta2.label(content.s()),
                j + 1
            )));
        }
    }
    Ok(merged)
}

fn direct_rate(eta: &Configuration, eta2: &Configuration, j: usize, content: &Content) -> Result<RatFuncT> {
    let n = content.n();
    if eta[j] == 0 {
        return Ok(if eta == eta2 { RatFuncT::one() } else { RatFuncT::zero() });
    }
    let mut prob = RatFuncT::one();
    for h in content.species() {
        let old: Vec<usize> = (0..n).filter(|&i| eta[i] == h && eta2[i] != h).collect();
        let new: Vec<usize> = (0..n).filter(|&i| eta2[i] == h && eta[i] != h).collect();
        match (old.as_slice(), new.as_slice()) {
            ([], []) => {}
            ([from], [to]) => {
                let ell = (1..n)
                    .map(|d| (from + d) % n)
                    .take_while(|q| q != to)
                    .filter(|&q| eta[q] < h)
                    .count();
                prob = &prob * &RatFuncT::t_pow_over_analogue(ell, content.below(h))?;
            }
            _ => return Ok(RatFuncT::zero()),
        }
    }
    Ok(prob)
}

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dp::row_transitions;
use super::{require_distinct, MultilineDiagram};
use crate::chain::{Content, SystemParams};
use crate::error::{Error, Result};

/// A random `a`-subset of the columns with probability proportional to
/// `prod_{j in B} x_j`.
pub fn sample_ball_row<R: Rng + ?Sized>(x: &[f64], a: usize, rng: &mut R) -> Result<Vec<bool>> {
    let n = x.len();
    if a > n {
        return Err(Error::Domain(format!("cannot place {a} balls on {n} sites")));
    }
    if x.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParams("rates must be positive and finite".into()));
    }
    // tail[j][k] = e_k(x_j, ..., x_{n-1})
    let mut tail = vec![vec![0.0; a + 1]; n + 1];
    tail[n][0] = 1.0;
    for j in (0..n).rev() {
        tail[j][0] = 1.0;
        for k in 1..=a {
            tail[j][k] = tail[j + 1][k] + x[j] * tail[j + 1][k - 1];
        }
    }
    let mut row = vec![false; n];
    let mut left = a;
    for j in 0..n {
        if left == 0 {
            break;
        }
        let take = x[j] * tail[j + 1][left - 1] / tail[j][left];
        if rng.gen::<f64>() < take {
            row[j] = true;
            left -= 1;
        }
    }
    Ok(row)
}

fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Draws a multiline diagram from the product of independent ball rows and
/// random matchings, whose bottom row is stationary for the chain.
pub fn sample_diagram<R: Rng + ?Sized>(content: &Content, params: &SystemParams, rng: &mut R) -> Result<MultilineDiagram> {
    require_distinct(content)?;
    params.check_len(content)?;
    let s = content.s();
    let x: Vec<f64> = params.x.iter().map(|v| v.to_f64().unwrap()).collect();
    let t = params.t.to_f64().unwrap();
    let top = sample_ball_row(&x, 1, rng)?;
    let mut rows = vec![top.iter().map(|&b| if b { s } else { 0 }).collect::<Vec<usize>>()];
    for r in (1..s).rev() {
        let support = sample_ball_row(&x, content.a(r), rng)?;
        let upper = rows.last().unwrap();
        let options = row_transitions(upper, &support, r);
        let weights: Vec<f64> = options
            .iter()
            .map(|tr| {
                tr.factors.iter().fold(1.0, |acc, &(ell, k)| {
                    let analogue: f64 = (0..k).map(|i| t.powi(i as i32)).sum();
                    acc * t.powi(ell as i32) / analogue
                })
            })
            .collect();
        rows.push(options[sample_index(&weights, rng)].lower.clone());
    }
    rows.reverse();
    MultilineDiagram::new(content.clone(), rows)
}

/// Seeded convenience wrapper around [`sample_diagram`].
pub fn sample_diagram_seeded(content: &Content, params: &SystemParams, seed: u64) -> Result<MultilineDiagram> {
    sample_diagram(content, params, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagrams::stationary_from_diagrams;
    use crate::numeric::rat;
    use std::collections::HashMap;

    #[test]
    fn ball_row_frequencies() {
        let x = [1.0, 2.0, 3.0];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts: HashMap<Vec<bool>, usize> = HashMap::new();
        let draws = 60_000;
        for _ in 0..draws {
            *counts.entry(sample_ball_row(&x, 2, &mut rng).unwrap()).or_default() += 1;
        }
        // e_2 = 2 + 3 + 6 = 11
        for (row, w) in [(vec![true, true, false], 2.0), (vec![true, false, true], 3.0), (vec![false, true, true], 6.0)] {
            let p = w / 11.0;
            let freq = counts[&row] as f64 / draws as f64;
            let sd = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((freq - p).abs() < 5.0 * sd, "{row:?}: {freq} vs {p}");
        }
    }

    #[test]
    fn bottom_rows_follow_stationary_law() {
        let c = Content::from_lambda(&[2, 1, 0]).unwrap();
        let params = SystemParams::new(vec![rat(1, 1), rat(2, 1), rat(1, 2)], rat(1, 2)).unwrap();
        let pi = stationary_from_diagrams(&c, &params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 40_000;
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..draws {
            let d = sample_diagram(&c, &params, &mut rng).unwrap();
            *counts.entry(d.bottom_row().0).or_default() += 1;
        }
        let mut chi2 = 0.0;
        for (eta, p) in pi.iter() {
            let expected = p.to_f64().unwrap() * draws as f64;
            let seen = *counts.get(&eta.0).unwrap_or(&0) as f64;
            chi2 += (seen - expected).powi(2) / expected;
        }
        // 5 degrees of freedom; the 0.999 quantile is about 20.5
        assert!(chi2 < 20.5, "chi2 = {chi2}");
    }

    #[test]
    fn seeded_draws_repeat() {
        let c = Content::from_lambda(&[3, 2, 0, 0]).unwrap();
        let params = SystemParams::uniform(4, rat(1, 3));
        assert_eq!(sample_diagram_seeded(&c, &params, 5).unwrap(), sample_diagram_seeded(&c, &params, 5).unwrap());
    }
}

//! Multiline diagrams for contents whose nonzero species are distinct, the
//! ASEP polynomials at `q = 1` they generate, and the refinement route for
//! contents with repeated species.

mod checks;
mod dp;
mod sample;

use serde::{Deserialize, Serialize};

use crate::chain::{Configuration, Content, MonotoneMap};
use crate::error::{Error, Result};
use crate::numeric::{IntPolyT, RatFuncT};

pub use checks::{bottom_rows_check, denominator_check, denominator_factor, kernel_fixed_point_check, row_transition_check, CheckOutcome};
pub use dp::{
    asep_family, asep_family_distinct, asep_polynomial_q1, row_polynomials, row_transitions, stationary_from_diagrams,
    RowTransition,
};
pub use sample::{sample_ball_row, sample_diagram, sample_diagram_seeded};

/// Row occupancies, `occupied[r][j]` for row `r + 1` and column `j + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BallSystem {
    pub occupied: Vec<Vec<bool>>,
}

impl BallSystem {
    pub fn rows(&self) -> usize {
        self.occupied.len()
    }

    pub fn cols(&self) -> usize {
        self.occupied.first().map_or(0, Vec::len)
    }

    /// Balls per column.
    pub fn column_counts(&self) -> Vec<u32> {
        (0..self.cols())
            .map(|j| self.occupied.iter().filter(|row| row[j]).count() as u32)
            .collect()
    }
}

/// A labelled ball system. `rows[r][j]` is the label at row `r + 1` (rows
/// counted from the bottom), column `j + 1`, with 0 for an empty site.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultilineDiagram {
    content: Content,
    rows: Vec<Vec<usize>>,
}

/// `x`-weight as column exponents and `t`-weight as a rational function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramWeight {
    pub x_part: Vec<u32>,
    pub t_part: RatFuncT,
}

#[derive(Serialize, Deserialize)]
struct BallJson {
    row: usize,
    col: usize,
    label: usize,
}

#[derive(Serialize, Deserialize)]
struct DiagramJson {
    rows: usize,
    cols: usize,
    balls: Vec<BallJson>,
}

pub(crate) fn require_distinct(content: &Content) -> Result<()> {
    if !content.has_distinct_parts() {
        return Err(Error::Precondition(format!(
            "content {content} repeats a nonzero species; multiline diagrams need distinct species"
        )));
    }
    Ok(())
}

/// Labels carried by row `r` (one-based): species at least `r` present in the content.
pub(crate) fn row_labels(content: &Content, r: usize) -> Vec<usize> {
    (r..=content.s()).filter(|&h| content.m(h) == 1).collect()
}

impl MultilineDiagram {
    /// Validates row sizes, label sets and the column constraint (a lower
    /// label is at least the label directly above it).
    pub fn new(content: Content, rows: Vec<Vec<usize>>) -> Result<Self> {
        require_distinct(&content)?;
        let (s, n) = (content.s(), content.n());
        if rows.len() != s || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidConfiguration(format!("a diagram needs {s} rows of {n} sites")));
        }
        for (idx, row) in rows.iter().enumerate() {
            let mut labels: Vec<usize> = row.iter().copied().filter(|&v| v > 0).collect();
            labels.sort_unstable();
            if labels != row_labels(&content, idx + 1) {
                return Err(Error::InvalidConfiguration(format!("row {} has labels {labels:?}", idx + 1)));
            }
        }
        for idx in 0..s.saturating_sub(1) {
            for j in 0..n {
                let (lower, upper) = (rows[idx][j], rows[idx + 1][j]);
                if lower > 0 && upper > 0 && lower < upper {
                    return Err(Error::InvalidConfiguration(format!(
                        "label {lower} at row {}, column {} sits below larger label {upper}",
                        idx + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(MultilineDiagram { content, rows })
    }

    pub fn content(&self) -> &Content {
        &self.content
    }

    /// Row `r` as a composition, one-based from the bottom.
    pub fn row(&self, r: usize) -> Configuration {
        Configuration(self.rows[r - 1].clone())
    }

    pub fn bottom_row(&self) -> Configuration {
        self.row(1)
    }

    pub fn pattern(&self) -> BallSystem {
        BallSystem {
            occupied: self.rows.iter().map(|row| row.iter().map(|&v| v > 0).collect()).collect(),
        }
    }

    /// Product of `t^l / [K]_t` over every non-trivial match, with the
    /// matching replayed in decreasing label order.
    pub fn weight(&self) -> DiagramWeight {
        let n = self.content.n();
        let mut t_part = RatFuncT::one();
        for r in 1..self.content.s() {
            let (lower, upper) = (&self.rows[r - 1], &self.rows[r]);
            let mut labels: Vec<(usize, usize)> =
                upper.iter().enumerate().filter(|(_, &h)| h > 0).map(|(j, &h)| (h, j)).collect();
            labels.sort_unstable_by(|a, b| b.cmp(a));
            for (h, j) in labels {
                let target = lower.iter().position(|&v| v == h).expect("validated labels");
                if target == j {
                    continue;
                }
                let k = lower.iter().filter(|&&v| v > 0 && v <= h).count();
                let ell = (1..n)
                    .map(|d| (j + d) % n)
                    .take_while(|&q| q != target)
                    .filter(|&q| lower[q] > 0 && lower[q] < h)
                    .count();
                t_part = &t_part * &RatFuncT::t_pow_over_analogue(ell, k).expect("K >= 1");
            }
        }
        DiagramWeight {
            x_part: self.pattern().column_counts(),
            t_part,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut balls = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            for (j, &label) in row.iter().enumerate() {
                if label > 0 {
                    balls.push(BallJson {
                        row: r + 1,
                        col: j + 1,
                        label,
                    });
                }
            }
        }
        serde_json::to_value(DiagramJson {
            rows: self.rows.len(),
            cols: self.content.n(),
            balls,
        })
        .expect("serializable")
    }

    pub fn from_json(content: Content, value: &serde_json::Value) -> Result<Self> {
        let d: DiagramJson = serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let mut rows = vec![vec![0; d.cols]; d.rows];
        for b in d.balls {
            if b.row == 0 || b.row > d.rows || b.col == 0 || b.col > d.cols {
                return Err(Error::Parse(format!("ball at ({}, {}) is outside the diagram", b.row, b.col)));
            }
            rows[b.row - 1][b.col - 1] = b.label;
        }
        Self::new(content, rows)
    }
}

impl DiagramWeight {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "x_exponents": self.x_part,
            "t_weight": format!("{}/{}", paren(self.t_part.numer()), paren(self.t_part.denom())),
        })
    }
}

fn paren(p: &IntPolyT) -> String {
    let s = p.to_string();
    if s.contains(' ') {
        format!("({s})")
    } else {
        s
    }
}

/// All diagrams with the given bottom row, each with its weight.
pub fn enumerate_diagrams(content: &Content, bottom_row: &Configuration) -> Result<Vec<(MultilineDiagram, DiagramWeight)>> {
    require_distinct(content)?;
    if !content.contains(bottom_row) {
        return Err(Error::InvalidConfiguration(format!(
            "{} is not a state of content {content}",
            bottom_row.label(content.s())
        )));
    }
    let (n, s) = (content.n(), content.s());
    let mut out = Vec::new();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); s];
    for j in 0..n {
        let mut top = vec![0; n];
        top[j] = s;
        rows[s - 1] = top;
        descend(content, bottom_row, s - 1, &mut rows, &mut out)?;
    }
    Ok(out)
}

fn descend(
    content: &Content,
    bottom: &Configuration,
    r: usize,
    rows: &mut Vec<Vec<usize>>,
    out: &mut Vec<(MultilineDiagram, DiagramWeight)>,
) -> Result<()> {
    if r == 0 {
        if rows[0] != bottom.0 {
            return Ok(());
        }
        let d = MultilineDiagram::new(content.clone(), rows.clone())?;
        let w = d.weight();
        out.push((d, w));
        return Ok(());
    }
    let n = content.n();
    let supports: Vec<Vec<bool>> = if r == 1 {
        vec![bottom.0.iter().map(|&v| v > 0).collect()]
    } else {
        dp::subsets(n, content.a(r))
    };
    for support in supports {
        for tr in row_transitions(&rows[r], &support, r) {
            if r == 1 && tr.lower != bottom.0 {
                continue;
            }
            rows[r - 1] = tr.lower;
            descend(content, bottom, r - 1, rows, out)?;
        }
    }
    Ok(())
}

/// Refines `mu` to a content with distinct species, no species 1 and a
/// single vacancy, with a monotone map collapsing it back onto `mu`.
///
/// Vacancies lift to `0, 2, 3, ..., m_0`; each later species takes the next
/// consecutive values above everything assigned so far (and above 1).
pub fn refine_content(mu: &Content) -> (Content, MonotoneMap) {
    // (lifted value, species of mu it collapses to); value 1 is skipped
    let mut lifted: Vec<(usize, usize)> = vec![(0, 0)];
    lifted.extend((2..=mu.m(0)).map(|v| (v, 0)));
    let mut next = mu.m(0).max(1) + 1;
    for species in 1..=mu.s() {
        for _ in 0..mu.m(species) {
            lifted.push((next, species));
            next += 1;
        }
    }
    let top = next - 1;
    let mut phi = vec![0; top + 1];
    let mut mult = vec![0; top + 1];
    for &(v, species) in &lifted {
        mult[v] = 1;
        phi[v] = species;
    }
    for v in 1..=top {
        if mult[v] == 0 {
            phi[v] = phi[v - 1];
        }
    }
    (
        Content::new(mult).expect("refined content is valid"),
        MonotoneMap::new(phi).expect("refinement map is monotone"),
    )
}

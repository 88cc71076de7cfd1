//! Batch checks of the exact identities over ranges of small systems.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{contents_with_n, project_stationary, stationary_oracle, Content, MonotoneMap, StationaryVector, SystemParams, DEFAULT_MAX_STATES};
use crate::diagrams::{asep_family, bottom_rows_check, denominator_check, kernel_fixed_point_check, row_transition_check, CheckOutcome};
use crate::error::{Error, Result};
use crate::hecke::{verify_kz_family, verify_pair_symmetry};
use crate::numeric::{rat, Rational};
use crate::observables::{elementary_identity_check, symmetry_check};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Qkz,
    Lemma72,
    Symmetry,
    Projection,
    BottomRows,
    Denominator,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Qkz,
        Suite::Lemma72,
        Suite::Symmetry,
        Suite::Projection,
        Suite::BottomRows,
        Suite::Denominator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Qkz => "qkz",
            Suite::Lemma72 => "lemma72",
            Suite::Symmetry => "symmetry",
            Suite::Projection => "projection",
            Suite::BottomRows => "bottom-rows",
            Suite::Denominator => "denominator",
        }
    }

    pub fn default_max_n(self) -> usize {
        match self {
            Suite::Qkz | Suite::BottomRows | Suite::Denominator => 4,
            Suite::Lemma72 => 8,
            Suite::Symmetry | Suite::Projection => 5,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceResult {
    pub instance: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl InstanceResult {
    fn new(instance: impl Into<String>, pass: bool, detail: Option<String>) -> Self {
        InstanceResult {
            instance: instance.into(),
            pass,
            detail,
        }
    }
}

impl From<CheckOutcome> for InstanceResult {
    fn from(c: CheckOutcome) -> Self {
        InstanceResult::new(format!("{} [{}]", c.name, c.content), c.pass, c.first_failure)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub instances: Vec<InstanceResult>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: Suite, instances: Vec<InstanceResult>) -> Self {
        SuiteReport {
            suite,
            pass: instances.iter().all(|i| i.pass),
            instances,
        }
    }
}

/// Size bounds for a suite run. `content` restricts the run to one system.
#[derive(Clone, Debug, Default)]
pub struct Bounds {
    pub max_n: Option<usize>,
    pub content: Option<Content>,
    pub seed: u64,
}

/// Contents with every nonzero species appearing at most once, `n <= max_n`
/// and `s <= max_s`, including those that skip species.
pub fn distinct_contents(max_n: usize, max_s: usize) -> Vec<Content> {
    let mut out = Vec::new();
    for s in 1..=max_s {
        for mask in 0u32..(1 << (s - 1)) {
            let mut mult = vec![0; s + 1];
            mult[s] = 1;
            for i in 1..s {
                mult[i] = (mask >> (i - 1) & 1) as usize;
            }
            let used: usize = mult.iter().sum();
            for m0 in 1..=max_n.saturating_sub(used) {
                mult[0] = m0;
                out.push(Content::new(mult.clone()).expect("valid content"));
            }
        }
    }
    out
}

/// All contents with positive multiplicities and `2 <= n <= max_n`.
pub fn all_contents(max_n: usize) -> Vec<Content> {
    (2..=max_n).flat_map(contents_with_n).collect()
}

/// Deterministic random rational parameters for `n` sites.
pub fn random_params(n: usize, t: Rational, seed: u64) -> SystemParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..n).map(|_| rat(rng.gen_range(1..=9), rng.gen_range(1..=5))).collect();
    SystemParams::new(x, t).expect("positive parameters")
}

fn pick(bounds: &Bounds, default: Vec<Content>, keep: impl Fn(&Content) -> bool) -> Vec<Content> {
    match &bounds.content {
        Some(c) => vec![c.clone()],
        None => default.into_iter().filter(keep).collect(),
    }
}

fn run_qkz(bounds: &Bounds, max_n: usize) -> Result<Vec<InstanceResult>> {
    let contents = pick(bounds, all_contents(max_n), |_| true);
    let mut out = Vec::new();
    for c in contents {
        let fam = asep_family(&c)?;
        for (name, report) in [("exchange", verify_kz_family(&fam)), ("pair", verify_pair_symmetry(&fam))] {
            let detail = report
                .first_failure
                .map(|f| format!("{} relation at i={} for {:?}", f.relation, f.i, f.eta));
            out.push(InstanceResult::new(format!("{name} [{c}] ({} checks)", report.checks.len()), report.pass, detail));
        }
    }
    Ok(out)
}

fn run_lemma72(max_n: usize) -> Result<Vec<InstanceResult>> {
    let cases: Vec<(usize, usize, usize)> = (2..=max_n)
        .flat_map(|n| (1..n).flat_map(move |m0| (0..m0).map(move |h| (n, m0, h))))
        .collect();
    cases
        .par_iter()
        .map(|&(n, m0, h)| {
            elementary_identity_check(n, m0, h).map(|ok| InstanceResult::new(format!("n={n} m0={m0} h={h}"), ok, None))
        })
        .collect()
}

fn run_symmetry(bounds: &Bounds, max_n: usize) -> Result<Vec<InstanceResult>> {
    let contents = pick(bounds, all_contents(max_n), |c| c.n() >= 3);
    contents
        .par_iter()
        .enumerate()
        .map(|(idx, c)| -> Result<Vec<InstanceResult>> {
            let params = random_params(c.n(), rat(1, 3), bounds.seed.wrapping_add(idx as u64));
            (1..c.n().saturating_sub(1))
                .map(|k| {
                    let r = symmetry_check(c, &params, k)?;
                    let detail = r.swaps.iter().find(|s| !s.equal).map(|s| format!("x{} <-> x{}", s.i, s.i + 1));
                    Ok(InstanceResult::new(format!("[{c}] k={k} ({} swaps)", r.swaps.len()), r.pass, detail))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().flatten().collect())
}

/// Weakly increasing maps `{0..=s} -> {0..=s}` fixing 0.
pub fn monotone_maps(s: usize) -> Vec<MonotoneMap> {
    fn extend(values: &mut Vec<usize>, s: usize, out: &mut Vec<MonotoneMap>) {
        if values.len() == s + 1 {
            out.push(MonotoneMap::new(values.clone()).expect("monotone by construction"));
            return;
        }
        let last = *values.last().unwrap();
        for v in last..=s {
            values.push(v);
            extend(values, s, out);
            values.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut vec![0], s, &mut out);
    out
}

fn run_projection(bounds: &Bounds, max_n: usize) -> Result<Vec<InstanceResult>> {
    let contents = pick(bounds, all_contents(max_n), |_| true);
    let mut laws: BTreeMap<(Content, usize), StationaryVector> = BTreeMap::new();
    let mut law = |c: &Content, n: usize| -> Result<StationaryVector> {
        if let Some(v) = laws.get(&(c.clone(), n)) {
            return Ok(v.clone());
        }
        let params = random_params(n, rat(2, 5), bounds.seed.wrapping_add(n as u64));
        let v = stationary_oracle(c, &params, DEFAULT_MAX_STATES)?;
        laws.insert((c.clone(), n), v.clone());
        Ok(v)
    };
    let mut out = Vec::new();
    for c in contents {
        let pi = law(&c, c.n())?;
        for phi in monotone_maps(c.s()) {
            let Ok(image) = phi.project_content(&c) else { continue };
            let pushed = project_stationary(&phi, &pi)?;
            let direct = law(&image, c.n())?;
            out.push(InstanceResult::new(format!("[{c}] phi={:?}", phi.values()), pushed == direct, None));
        }
    }
    Ok(out)
}

fn run_bottom_rows(bounds: &Bounds, max_n: usize) -> Result<Vec<InstanceResult>> {
    let contents = pick(bounds, distinct_contents(max_n, 4), |_| true);
    let mut out = Vec::new();
    for c in &contents {
        if c.m(1) == 0 && c.s() >= 2 && c.has_distinct_parts() {
            out.push(bottom_rows_check(c)?.into());
            if c.m(0) == 1 {
                out.push(row_transition_check(c)?.into());
            }
        }
        let params = random_params(c.n(), rat(3, 7), bounds.seed.wrapping_add(c.n() as u64));
        out.push(kernel_fixed_point_check(c, &params)?.into());
    }
    Ok(out)
}

fn run_denominator(bounds: &Bounds, max_n: usize) -> Result<Vec<InstanceResult>> {
    let contents = pick(bounds, all_contents(max_n), |_| true);
    contents.par_iter().map(|c| denominator_check(c).map(Into::into)).collect()
}

/// Runs one suite. Failing instances are reported, not raised.
pub fn run_suite(suite: Suite, bounds: &Bounds) -> Result<SuiteReport> {
    let max_n = bounds.max_n.unwrap_or(suite.default_max_n());
    let instances = match suite {
        Suite::Qkz => run_qkz(bounds, max_n)?,
        Suite::Lemma72 => run_lemma72(max_n)?,
        Suite::Symmetry => run_symmetry(bounds, max_n)?,
        Suite::Projection => run_projection(bounds, max_n)?,
        Suite::BottomRows => run_bottom_rows(bounds, max_n)?,
        Suite::Denominator => run_denominator(bounds, max_n)?,
    };
    Ok(SuiteReport::new(suite, instances))
}

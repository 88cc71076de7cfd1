//! Continuous-time simulation with batch-means error bars.

use std::collections::{BTreeMap, HashMap};

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{enumerate_states, Configuration, Content, SystemParams};
use crate::diagrams::stationary_from_diagrams;
use crate::error::{Error, Result};
use crate::observables::{current_from_law, current_single_species, density, CurrentSpec};

pub const BATCHES: usize = 50;
pub const MIN_EVENTS: u64 = 100;
/// Largest state space for which exact stationary values are attached.
pub const EXACT_STATE_LIMIT: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Horizon {
    Events(u64),
    Time(f64),
}

/// One displaced particle in a simulated cascade.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hop {
    pub species: usize,
    pub from: usize,
    pub to: usize,
}

/// Simulator state: configuration, clock and accumulators for the batch
/// currently being filled.
pub struct SimState {
    content: Content,
    x: Vec<f64>,
    t: f64,
    cumulative: Vec<f64>,
    total_rate: f64,
    pub config: Configuration,
    pub clock: f64,
    pub event_count: u64,
    rng: ChaCha8Rng,
}

impl SimState {
    pub fn new(content: &Content, params: &SystemParams, start: Configuration, seed: u64) -> Result<Self> {
        params.check_len(content)?;
        if !content.contains(&start) {
            return Err(Error::InvalidConfiguration(format!("{} is not a state of {content}", start.label(content.s()))));
        }
        let x: Vec<f64> = params.x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
        let t = params.t.to_f64().unwrap_or(f64::NAN);
        if x.iter().any(|v| !(v.is_finite() && *v > 0.0)) || !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParams("rates are not representable as positive floats".into()));
        }
        let mut cumulative = Vec::with_capacity(x.len());
        let mut acc = 0.0;
        for v in &x {
            acc += 1.0 / v;
            cumulative.push(acc);
        }
        Ok(SimState {
            content: content.clone(),
            x,
            t,
            total_rate: acc,
            cumulative,
            config: start,
            clock: 0.0,
            event_count: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn holding_time(&mut self) -> f64 {
        let u: f64 = self.rng.gen();
        -(1.0 - u).ln() / self.total_rate
    }

    fn bell_site(&mut self) -> usize {
        let u = self.rng.gen::<f64>() * self.total_rate;
        self.cumulative.partition_point(|&c| c <= u).min(self.x.len() - 1)
    }

    /// Runs the cascade started by a bell at `j` and returns the hops.
    pub fn ring(&mut self, j: usize) -> Vec<Hop> {
        let n = self.x.len();
        let mut hops = Vec::new();
        let bell_species = self.config[j];
        if bell_species == 0 {
            return hops;
        }
        let mut active = bell_species;
        let mut pos = j;
        loop {
            let m = self.content.below(active);
            let k = sample_choice(m, self.t, &mut self.rng);
            let q = (1..n)
                .map(|d| (pos + d) % n)
                .filter(|&q| q != j && self.config[q] < active)
                .nth(k)
                .expect("enough weaker particles");
            let displaced = self.config[q];
            self.config.0[q] = active;
            hops.push(Hop {
                species: active,
                from: pos,
                to: q,
            });
            if displaced == 0 {
                break;
            }
            active = displaced;
            pos = q;
        }
        self.config.0[j] = 0;
        hops
    }

    /// One event: waits an exponential time, then rings a bell.
    /// Returns the holding time spent in the previous configuration.
    pub fn step(&mut self) -> (f64, Vec<Hop>) {
        let dt = self.holding_time();
        self.clock += dt;
        let j = self.bell_site();
        let hops = self.ring(j);
        self.event_count += 1;
        (dt, hops)
    }
}

/// Zero-based index `k` with probability `t^k / [m]_t`.
fn sample_choice<R: Rng + ?Sized>(m: usize, t: f64, rng: &mut R) -> usize {
    if m <= 1 || t == 0.0 {
        return 0;
    }
    let weights: Vec<f64> = (0..m).map(|k| t.powi(k as i32)).collect();
    let mut u = rng.gen::<f64>() * weights.iter().sum::<f64>();
    for (k, w) in weights.iter().enumerate() {
        if u < *w {
            return k;
        }
        u -= w;
    }
    m - 1
}

// arcs are shorter than a full turn, so (n, 1) is crossed iff the hop wraps
fn crosses_last_edge(h: &Hop) -> bool {
    h.to < h.from
}

#[derive(Clone, Default)]
struct Batch {
    time: f64,
    occupation: Vec<f64>,
    first_site: Vec<f64>,
    crossings: Vec<u64>,
}

impl Batch {
    fn new(states: usize, s: usize) -> Self {
        Batch {
            time: 0.0,
            occupation: vec![0.0; states],
            first_site: vec![0.0; s + 1],
            crossings: vec![0; s + 1],
        }
    }
}

/// Mean, batch-means standard error, exact value and z-score.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub empirical: f64,
    pub std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub content: Vec<usize>,
    pub x: Vec<String>,
    pub t: String,
    pub horizon: Horizon,
    pub seed: u64,
    pub events: u64,
    pub clock: f64,
    pub batches: usize,
    pub warning: Option<String>,
    /// Occupation-time law keyed by configuration label.
    pub stationary: BTreeMap<String, Estimate>,
    /// Species densities at site 1, keyed by species.
    pub density: BTreeMap<usize, Estimate>,
    /// Crossings of the edge `(n, 1)` per unit time, keyed by species.
    pub current: BTreeMap<usize, Estimate>,
    pub max_abs_z: Option<f64>,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn z_scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.stationary
            .values()
            .chain(self.density.values())
            .chain(self.current.values())
            .filter_map(|e| e.z)
    }
}

fn estimate(per_batch: &[f64], weights: &[f64], total_num: f64, total_den: f64) -> (f64, f64) {
    let mean = if total_den > 0.0 { total_num / total_den } else { 0.0 };
    let usable: Vec<f64> = per_batch
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(v, _)| *v)
        .collect();
    let b = usable.len() as f64;
    if b < 2.0 {
        return (mean, f64::INFINITY);
    }
    let m = usable.iter().sum::<f64>() / b;
    let var = usable.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (b - 1.0);
    (mean, (var / b).sqrt())
}

fn z_score(empirical: f64, se: f64, exact: f64) -> f64 {
    let diff = empirical - exact;
    if se > 0.0 {
        diff / se
    } else if diff.abs() < 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Exact comparison values: stationary law, densities and currents.
struct Exact {
    stationary: Option<Vec<crate::numeric::Rational>>,
    density: Vec<crate::numeric::Rational>,
    current: Vec<Option<crate::numeric::Rational>>,
}

fn exact_values(content: &Content, params: &SystemParams, states: &[Configuration]) -> Result<Exact> {
    let n = content.n();
    let s = content.s();
    let density = (1..=s).map(|r| density(content, r, params)).collect::<Result<Vec<_>>>()?;
    if states.len() > EXACT_STATE_LIMIT {
        let current = if s == 1 {
            vec![Some(current_single_species(content.m(0), content.m(1), params)?)]
        } else {
            vec![None; s]
        };
        return Ok(Exact {
            stationary: None,
            density,
            current,
        });
    }
    let pi = stationary_from_diagrams(content, params)?;
    let current = (1..=s)
        .map(|r| current_from_law(&pi, CurrentSpec::across_last_edge(r, n), params).map(Some))
        .collect::<Result<Vec<_>>>()?;
    let probs = states.iter().map(|eta| pi.get(eta).cloned().unwrap_or_default()).collect();
    Ok(Exact {
        stationary: Some(probs),
        density,
        current,
    })
}

/// Runs one replica from the lexicographically largest state.
pub fn run(content: &Content, params: &SystemParams, horizon: Horizon, seed: u64) -> Result<SimReport> {
    let s = content.s();
    match horizon {
        Horizon::Events(0) => return Err(Error::InvalidParams("horizon must be positive".into())),
        Horizon::Time(t) if !(t.is_finite() && t > 0.0) => {
            return Err(Error::InvalidParams("horizon must be positive".into()))
        }
        _ => {}
    }
    let states = enumerate_states(content);
    let index: HashMap<Vec<usize>, usize> = states.iter().enumerate().map(|(i, c)| (c.0.clone(), i)).collect();
    let mut sim = SimState::new(content, params, states[0].clone(), seed)?;
    let mut batches: Vec<Batch> = (0..BATCHES).map(|_| Batch::new(states.len(), s)).collect();
    let mut current_idx = 0usize;
    loop {
        let (time_before, events_before) = (sim.clock, sim.event_count);
        let config_before = sim.config[0];
        let state_before = current_idx;
        if let Horizon::Events(total) = horizon {
            if events_before >= total {
                break;
            }
        }
        let (dt, hops) = sim.step();
        // spread the holding interval over the batches it touches
        match horizon {
            Horizon::Events(total) => {
                let b = (events_before * BATCHES as u64 / total) as usize;
                let batch = &mut batches[b];
                batch.time += dt;
                batch.occupation[state_before] += dt;
                batch.first_site[config_before] += dt;
                for h in &hops {
                    if crosses_last_edge(h) {
                        batch.crossings[h.species] += 1;
                    }
                }
            }
            Horizon::Time(total) => {
                let width = total / BATCHES as f64;
                let mut start = time_before;
                let end = sim.clock.min(total);
                while start < end {
                    let b = ((start / width) as usize).min(BATCHES - 1);
                    let stop = (width * (b + 1) as f64).min(end);
                    let piece = stop - start;
                    let batch = &mut batches[b];
                    batch.time += piece;
                    batch.occupation[state_before] += piece;
                    batch.first_site[config_before] += piece;
                    if stop <= start {
                        break;
                    }
                    start = stop;
                }
                if sim.clock >= total {
                    sim.clock = total;
                    break;
                }
                let b = ((sim.clock / width) as usize).min(BATCHES - 1);
                for h in &hops {
                    if crosses_last_edge(h) {
                        batches[b].crossings[h.species] += 1;
                    }
                }
            }
        }
        current_idx = index[&sim.config.0];
    }

    let exact = exact_values(content, params, &states)?;
    let times: Vec<f64> = batches.iter().map(|b| b.time).collect();
    let total_time: f64 = times.iter().sum();
    let ratio = |f: &dyn Fn(&Batch) -> f64| -> (f64, f64) {
        let per: Vec<f64> = batches.iter().map(|b| if b.time > 0.0 { f(b) / b.time } else { 0.0 }).collect();
        let num: f64 = batches.iter().map(f).sum();
        estimate(&per, &times, num, total_time)
    };
    let make = |(emp, se): (f64, f64), exact: Option<&crate::numeric::Rational>| Estimate {
        empirical: emp,
        std_error: se,
        exact: exact.map(|v| v.to_string()),
        z: exact.map(|v| z_score(emp, se, v.to_f64().unwrap_or(f64::NAN))),
    };
    let stationary = states
        .iter()
        .enumerate()
        .map(|(i, eta)| {
            let e = ratio(&|b: &Batch| b.occupation[i]);
            (eta.label(s), make(e, exact.stationary.as_ref().map(|v| &v[i])))
        })
        .collect();
    let density = (1..=s)
        .map(|r| (r, make(ratio(&|b: &Batch| b.first_site[r]), Some(&exact.density[r - 1]))))
        .collect();
    let current = (1..=s)
        .map(|r| (r, make(ratio(&|b: &Batch| b.crossings[r] as f64), exact.current[r - 1].as_ref())))
        .collect();
    let warning = (sim.event_count < MIN_EVENTS)
        .then(|| format!("only {} events; estimates are unreliable", sim.event_count));
    let mut report = SimReport {
        content: content.multiplicities().to_vec(),
        x: params.x.iter().map(|v| v.to_string()).collect(),
        t: params.t.to_string(),
        horizon,
        seed,
        events: sim.event_count,
        clock: sim.clock,
        batches: BATCHES,
        warning,
        stationary,
        density,
        current,
        max_abs_z: None,
    };
    report.max_abs_z = report.z_scores().map(f64::abs).reduce(f64::max);
    Ok(report)
}

/// SplitMix64 mixing of a base seed with a replica index.
pub fn derive_seed(seed: u64, replica: u64) -> u64 {
    let mut z = seed.wrapping_add(replica.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent replicas with derived seeds, run in parallel.
pub fn run_replicas(content: &Content, params: &SystemParams, horizon: Horizon, seed: u64, replicas: usize) -> Result<Vec<SimReport>> {
    (0..replicas as u64)
        .into_par_iter()
        .map(|r| run(content, params, horizon, derive_seed(seed, r)))
        .collect()
}

/// A named simulation setting with a fixed seed.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: &'static str,
    pub lambda: Vec<usize>,
    pub x: Vec<(i64, i64)>,
    pub t: (i64, i64),
    pub events: u64,
    pub seed: u64,
}

impl Scenario {
    pub fn content(&self) -> Content {
        Content::from_lambda(&self.lambda).expect("preset content")
    }

    pub fn params(&self) -> SystemParams {
        use crate::numeric::rat;
        SystemParams::new(self.x.iter().map(|&(p, q)| rat(p, q)).collect(), rat(self.t.0, self.t.1)).expect("preset params")
    }

    pub fn run(&self) -> Result<SimReport> {
        run(&self.content(), &self.params(), Horizon::Events(self.events), self.seed)
    }
}

/// The preset consistency scenarios.
pub fn preset_scenarios() -> Vec<Scenario> {
    vec![
        Scenario {
            name: "three-site-two-species",
            lambda: vec![2, 1, 0],
            x: vec![(1, 1), (2, 1), (3, 1)],
            t: (1, 2),
            events: 1_000_000,
            seed: 1,
        },
        Scenario {
            name: "single-species-current",
            lambda: vec![1, 1, 0, 0],
            x: vec![(1, 1), (2, 1), (3, 1), (5, 1)],
            t: (1, 3),
            events: 1_000_000,
            seed: 2,
        },
        Scenario {
            name: "two-site",
            lambda: vec![1, 0],
            x: vec![(1, 1), (3, 1)],
            t: (7, 10),
            events: 200_000,
            seed: 3,
        },
        Scenario {
            name: "four-site-three-species",
            lambda: vec![3, 2, 1, 0],
            x: vec![(1, 1), (1, 2), (2, 1), (3, 2)],
            t: (3, 4),
            events: 1_000_000,
            seed: 4,
        },
        Scenario {
            name: "repeated-species",
            lambda: vec![2, 1, 1, 0, 0],
            x: vec![(2, 1), (1, 1), (3, 1), (1, 1), (1, 2)],
            t: (1, 4),
            events: 1_000_000,
            seed: 5,
        },
    ]
}

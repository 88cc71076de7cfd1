//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

use std::time::Instant;

use pushtasep::chain::{stationary_oracle, Content, Configuration, SystemParams, DEFAULT_MAX_STATES};
use pushtasep::diagrams::{
    asep_family, bottom_rows_check, kernel_fixed_point_check, row_transition_check, stationary_from_diagrams,
};
use pushtasep::hecke::{verify_kz_family, verify_pair_symmetry};
use pushtasep::montecarlo::preset_scenarios;
use pushtasep::numeric::{rat, IntPolyT, RatFuncT};
use pushtasep::observables::{
    current_oracle, current_single_species, current_symbolic, density, elementary_identity_check,
    naive_colored_current, CurrentSpec,
};
use pushtasep::verify::{all_contents, distinct_contents, random_params, run_suite, Bounds, Suite};
use pushtasep::xpoly::{elementary_all, elementary_values, Monomial, XPoly};

fn verdict(id: u32, name: &str, pass: bool, detail: &str, started: Instant) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id:>2} {name}: {detail} ({:.2?})", started.elapsed());
}

fn poly_t(coeffs: &[i64]) -> RatFuncT {
    RatFuncT::from_poly(IntPolyT::from_i64s(coeffs))
}

fn term(e: [u32; 3], c: RatFuncT) -> XPoly {
    XPoly::monomial(3, Monomial(e.to_vec()), c)
}

#[test]
fn criterion_01_three_site_polynomials() {
    let started = Instant::now();
    let c = Content::from_lambda(&[2, 1, 0]).unwrap();
    let fam = asep_family(&c).unwrap();
    let one = RatFuncT::one();
    let inv = poly_t(&[1, 1]).inv().unwrap();
    let t_inv = &RatFuncT::t() * &inv;
    // x_a x_b (x_c + x_d * coeff)
    let table: [([usize; 3], [u32; 3], [u32; 3], RatFuncT, RatFuncT); 6] = [
        ([2, 1, 0], [2, 1, 0], [1, 1, 1], one.clone(), inv.clone()),
        ([2, 0, 1], [2, 0, 1], [1, 1, 1], one.clone(), t_inv.clone()),
        ([1, 2, 0], [1, 2, 0], [1, 1, 1], one.clone(), t_inv.clone()),
        ([1, 0, 2], [1, 0, 2], [1, 1, 1], one.clone(), inv.clone()),
        ([0, 2, 1], [0, 2, 1], [1, 1, 1], one.clone(), inv.clone()),
        ([0, 1, 2], [0, 1, 2], [1, 1, 1], one.clone(), t_inv.clone()),
    ];
    let mut mismatches = Vec::new();
    for (eta, e_main, e_mixed, c_main, c_mixed) in table {
        let expected = &term(e_main, c_main) + &term(e_mixed, c_mixed);
        if fam.get(&Configuration(eta.to_vec())) != &expected {
            mismatches.push(format!("{eta:?}"));
        }
    }
    let sum = fam.members.values().fold(XPoly::zero(3), |acc, p| &acc + p);
    let p_ok = sum == &elementary_all(3, 1) * &elementary_all(3, 2);
    let fast = started.elapsed().as_secs_f64() < 1.0;
    let pass = mismatches.is_empty() && p_ok && fast;
    verdict(1, "three-site ASEP polynomials", pass, &format!("table mismatches {mismatches:?}, sum = e1 e2: {p_ok}"), started);
    assert!(pass);
}

#[test]
fn criterion_02_diagrams_equal_oracle() {
    let started = Instant::now();
    let ts = [rat(0, 1), rat(1, 3), rat(3, 4)];
    let mut cases = 0;
    let mut failures = Vec::new();
    for c in all_contents(5) {
        for (k, t) in ts.iter().enumerate() {
            let params = random_params(c.n(), t.clone(), 1000 + k as u64 * 17 + c.n() as u64);
            let oracle = stationary_oracle(&c, &params, DEFAULT_MAX_STATES).unwrap();
            let diagrams = stationary_from_diagrams(&c, &params).unwrap();
            cases += 1;
            if oracle != diagrams {
                failures.push(format!("{c} t={t}"));
            }
        }
    }
    let pass = failures.is_empty() && cases == 78 && started.elapsed().as_secs() < 300;
    verdict(2, "diagram law equals solved chain", pass, &format!("{cases} cases, failures {failures:?}"), started);
    assert!(pass);
}

#[test]
fn criterion_03_exchange_relations() {
    let started = Instant::now();
    let mut checks = 0;
    let mut failures = Vec::new();
    for c in all_contents(4) {
        let fam = asep_family(&c).unwrap();
        for report in [verify_kz_family(&fam), verify_pair_symmetry(&fam)] {
            checks += report.checks.len();
            if let Some(f) = report.first_failure {
                failures.push(format!("{c}: {} i={} {:?}", f.relation, f.i, f.eta));
            }
        }
    }
    let pass = failures.is_empty();
    verdict(3, "exchange relations and pair symmetry", pass, &format!("{checks} checks, failures {failures:?}"), started);
    assert!(pass);
}

#[test]
fn criterion_04_single_species_current() {
    let started = Instant::now();
    let mut cases = 0;
    let mut failures = Vec::new();
    for n in 2..=6usize {
        for m0 in 1..n {
            let m1 = n - m0;
            let c = Content::new(vec![m0, m1]).unwrap();
            for (k, t) in [rat(1, 4), rat(1, 2), rat(5, 3)].into_iter().enumerate() {
                let params = random_params(n, t.clone(), 40 + 7 * n as u64 + k as u64);
                let formula = current_single_species(m0, m1, &params).unwrap();
                let oracle = current_oracle(&c, CurrentSpec::across_last_edge(1, n), &params).unwrap();
                cases += 1;
                if formula != oracle {
                    failures.push(format!("m0={m0} m1={m1} t={t}"));
                }
            }
            let params = random_params(n, rat(0, 1), 99 + n as u64);
            let e = elementary_values(&params.x);
            if current_single_species(m0, m1, &params).unwrap() != &e[m1 - 1] / &e[m1] {
                failures.push(format!("t=0 m0={m0} m1={m1}"));
            }
        }
    }
    let pass = failures.is_empty();
    verdict(4, "single-species current", pass, &format!("{cases} oracle cases, failures {failures:?}"), started);
    assert!(pass);
}

#[test]
fn criterion_05_multispecies_current_counterexample() {
    let started = Instant::now();
    let c = Content::from_lambda(&[2, 1, 0]).unwrap();
    let spec = CurrentSpec::across_last_edge(1, 3);
    let (num, den) = current_symbolic(&c, spec).unwrap();
    let sq = poly_t(&[1, 2, 1]);
    let power_sum = (0..3).fold(XPoly::zero(3), |acc, i| &acc + &(&XPoly::var(3, i) * &XPoly::var(3, i)));
    let e1 = elementary_all(3, 1);
    let e2 = elementary_all(3, 2);
    let target_num = &power_sum.scale(&sq) + &e2.scale(&poly_t(&[1, 2, 2]));
    let target_den = (&e2 * &e1).scale(&sq);
    let symbolic = &num * &target_den == &target_num * &den;

    let generic = SystemParams::new(vec![rat(1, 1), rat(2, 1), rat(3, 1)], rat(1, 2)).unwrap();
    let differs = current_oracle(&c, spec, &generic).unwrap() != naive_colored_current(&c, 1, &generic).unwrap();
    let zero = SystemParams::new(vec![rat(1, 1), rat(2, 1), rat(3, 1)], rat(0, 1)).unwrap();
    let agrees_at_zero = current_oracle(&c, spec, &zero).unwrap() == naive_colored_current(&c, 1, &zero).unwrap();
    let pass = symbolic && differs && agrees_at_zero;
    verdict(
        5,
        "multispecies current versus colouring",
        pass,
        &format!("closed form {symbolic}, differs at t=1/2 {differs}, agrees at t=0 {agrees_at_zero}"),
        started,
    );
    assert!(pass);
}

#[test]
fn criterion_06_density() {
    let started = Instant::now();
    let mut cases = 0;
    let mut failures = Vec::new();
    let contents: Vec<Content> = all_contents(7).into_iter().filter(|c| c.num_states() <= 120).collect();
    for (idx, c) in contents.iter().enumerate() {
        let x = random_params(c.n(), rat(0, 1), 600 + idx as u64).x;
        let p0 = SystemParams::new(x.clone(), rat(0, 1)).unwrap();
        let p1 = SystemParams::new(x, rat(1, 2)).unwrap();
        let law0 = stationary_oracle(c, &p0, DEFAULT_MAX_STATES).unwrap();
        let law1 = stationary_oracle(c, &p1, DEFAULT_MAX_STATES).unwrap();
        for r in 1..=c.s() {
            let f = density(c, r, &p1).unwrap();
            let (a, b) = (law0.marginal(&[0], &[r]), law1.marginal(&[0], &[r]));
            cases += 1;
            if f != a || f != b {
                failures.push(format!("{c} species {r}"));
            }
        }
    }
    let pass = failures.is_empty();
    verdict(
        6,
        "species density at site 1",
        pass,
        &format!("{} contents, {cases} species, failures {failures:?}", contents.len()),
        started,
    );
    assert!(pass);
}

#[test]
fn criterion_07_elementary_identity() {
    let started = Instant::now();
    let mut cases = 0;
    let mut failures = Vec::new();
    for n in 2..=8 {
        for m0 in 1..n {
            for h in 0..m0 {
                cases += 1;
                if !elementary_identity_check(n, m0, h).unwrap() {
                    failures.push((n, m0, h));
                }
            }
        }
    }
    let pass = failures.is_empty() && started.elapsed().as_secs() < 120;
    verdict(7, "elementary symmetric identity", pass, &format!("{cases} instances, failures {failures:?}"), started);
    assert!(pass);
}

#[test]
fn criterion_08_bottom_rows_cascades_fixed_point() {
    let started = Instant::now();
    let (mut lemma_rows, mut lemma_cascade, mut fixed) = (0, 0, 0);
    let mut failures = Vec::new();
    for (idx, c) in distinct_contents(4, 4).iter().enumerate() {
        if c.m(1) == 0 && c.s() >= 2 {
            lemma_rows += 1;
            if !bottom_rows_check(c).unwrap().pass {
                failures.push(format!("bottom rows {c}"));
            }
            if c.m(0) == 1 {
                lemma_cascade += 1;
                if !row_transition_check(c).unwrap().pass {
                    failures.push(format!("cascade {c}"));
                }
            }
        }
        fixed += 1;
        let params = random_params(c.n(), rat(2, 7), 800 + idx as u64);
        if !kernel_fixed_point_check(c, &params).unwrap().pass {
            failures.push(format!("fixed point {c}"));
        }
    }
    let pass = failures.is_empty() && lemma_rows > 0 && lemma_cascade > 0;
    verdict(
        8,
        "bottom rows, row transitions, kernel fixed point",
        pass,
        &format!("{lemma_rows}/{lemma_cascade}/{fixed} contents, failures {failures:?}"),
        started,
    );
    assert!(pass);
}

#[test]
fn criterion_09_projection_and_symmetry() {
    let started = Instant::now();
    let bounds = Bounds {
        max_n: Some(5),
        content: None,
        seed: 9,
    };
    let projection = run_suite(Suite::Projection, &bounds).unwrap();
    let symmetry = run_suite(Suite::Symmetry, &bounds).unwrap();
    let pass = projection.pass && symmetry.pass;
    let bad: Vec<&str> = projection
        .instances
        .iter()
        .chain(&symmetry.instances)
        .filter(|i| !i.pass)
        .map(|i| i.instance.as_str())
        .collect();
    verdict(
        9,
        "projection and prefix symmetry",
        pass,
        &format!("{} projections, {} prefix checks, failures {bad:?}", projection.instances.len(), symmetry.instances.len()),
        started,
    );
    assert!(pass);
}

#[test]
fn criterion_10_monte_carlo() {
    let started = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for sc in preset_scenarios() {
        let t0 = Instant::now();
        let report = sc.run().unwrap();
        let z = report.max_abs_z.unwrap_or(f64::INFINITY);
        let again = sc.run().unwrap();
        let identical = report.to_json() == again.to_json();
        let count = report.z_scores().count();
        let ok = z < 4.0 && identical && count > 0 && t0.elapsed().as_secs() < 120;
        pass &= ok;
        lines.push(format!("{} max|z|={z:.2} over {count} ({})", sc.name, if identical { "reproducible" } else { "NOT reproducible" }));
    }
    verdict(10, "simulation consistency", pass, &lines.join("; "), started);
    assert!(pass);
}

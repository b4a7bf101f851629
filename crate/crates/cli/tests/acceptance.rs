//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use mixbound::gen::{self, Shape};
use mixbound::{
    bounds, dist, extremal, int, oracle, rat, transforms, Assembly, FiniteDistribution, Rational,
};
use mixbound_cli::commands;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

type Verdict = Result<String, String>;
type Check<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

fn tol(x: f64) -> Rational {
    Rational::from_float(x).unwrap()
}

/// The shared random workload: n in 2..=6, at most 6 atoms, mass denominators <= 64.
fn corpus(count: usize) -> Vec<Assembly> {
    let mut rng = gen::rng(0x5EED);
    let shape = Shape::default();
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=6);
            gen::random_assembly(&mut rng, n, &shape)
        })
        .collect()
}

fn chain(corpus: &[Assembly]) -> Verdict {
    let start = Instant::now();
    let bad = corpus
        .par_iter()
        .filter(|a| {
            let m = dist::m_list(a);
            let (m_bar, upper) = bounds::mean_bounds(&m, a.n()).unwrap();
            let sen = bounds::sen_lower(a);
            let exact = dist::expected_max(a);
            !(m_bar <= sen && sen <= exact && exact <= upper)
        })
        .count();
    let secs = start.elapsed().as_secs_f64();
    let detail = format!("{} assemblies, {bad} failures, {secs:.2} s", corpus.len());
    if bad == 0 && secs < 10.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence(corpus: &[Assembly]) -> Verdict {
    let bad = corpus
        .par_iter()
        .filter(|a| oracle::enumerate_expected_max(a).unwrap() != dist::expected_max(a))
        .count();
    let detail = format!("{} assemblies, {bad} mismatches", corpus.len());
    if bad == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sharpness() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for (n, eps) in [(2usize, rat(1, 1000)), (3, rat(1, 100))] {
        let run = commands::extremal(vec![int(1); n], &eps).map_err(|e| e.to_string())?;
        let floor = extremal::theta_sup(n) - &eps;
        ok &= run.theta >= floor && run.theta < run.theta_sup;
        parts.push(format!(
            "n={n}: theta={:.6} floor={:.6}",
            run.theta.to_f64().unwrap(),
            floor.to_f64().unwrap()
        ));
    }
    if ok {
        Ok(parts.join(", "))
    } else {
        Err(parts.join(", "))
    }
}

/// Drops the atoms of `d` strictly inside `(lo, hi)` and renormalizes.
fn avoiding(d: &FiniteDistribution, lo: &Rational, hi: &Rational) -> FiniteDistribution {
    let kept: Vec<(Rational, Rational)> = d
        .atoms()
        .iter()
        .filter(|(v, _)| !(v > lo && v < hi))
        .cloned()
        .collect();
    if kept.is_empty() {
        FiniteDistribution::point(Rational::zero()).unwrap()
    } else {
        FiniteDistribution::from_weights(kept).unwrap()
    }
}

fn inside_open(d: &FiniteDistribution, lo: &Rational, hi: &Rational) -> usize {
    d.values().filter(|v| *v > lo && *v < hi).count()
}

fn transform_certificates() -> Verdict {
    const PER: usize = 200;
    let mut rng = gen::rng(0xC0A1);
    let shape = Shape::default();
    let tol9 = tol(1e-9);
    let mut failures = Vec::new();

    let mut done = [0usize; 3];
    while done[0] < PER {
        let d = gen::random_distribution(&mut rng, &shape);
        let vals: Vec<Rational> = d.values().cloned().collect();
        let i = rng.random_range(0..vals.len());
        let j = rng.random_range(i..vals.len());
        let (a, b) = (&vals[i], &vals[j]);
        let y = avoiding(&gen::random_distribution(&mut rng, &shape), a, b);
        let n = rng.random_range(2..=6);
        let c = match transforms::coalesce(&d, a, b, &y, n) {
            Ok(c) => c,
            Err(e) => {
                failures.push(format!("coalesce: {e}"));
                break;
            }
        };
        let within = c
            .outcome
            .result
            .values()
            .filter(|v| *v >= a && *v <= b)
            .count();
        if !c.outcome.m_residual.iter().all(Zero::is_zero)
            || c.outcome.e_delta.is_negative()
            || within != 1
        {
            failures.push(format!("coalesce certificate on {d} over [{a}, {b}]"));
        }
        done[0] += 1;
    }

    while done[1] < PER {
        let d = gen::random_distribution(&mut rng, &shape);
        if d.len() < 2 {
            continue;
        }
        let vals: Vec<Rational> = d.values().cloned().collect();
        let k = rng.random_range(0..vals.len() - 1);
        let (a, b) = (&vals[k], &vals[k + 1]);
        let l = if k > 0 {
            vals[k - 1].clone()
        } else {
            a / int(2)
        };
        if l >= *a {
            continue;
        }
        let r = vals.get(k + 2).cloned().unwrap_or_else(|| b + int(1));
        let y = gen::random_distribution(&mut rng, &shape);
        let n = rng.random_range(2..=6);
        let out = match transforms::reduce_pair(&d, &l, &r, &y, n) {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("reduce: {e}"));
                break;
            }
        };
        if !out.outcome.m_residual.iter().all(Zero::is_zero)
            || out.outcome.e_delta.is_negative()
            || inside_open(&out.outcome.result, &l, &r) > 1
        {
            failures.push(format!("reduce certificate on {d} over ({l}, {r})"));
        }
        done[1] += 1;
    }

    while done[2] < PER {
        let n = rng.random_range(2..=5);
        let a = gen::random_assembly(&mut rng, n, &shape);
        let top = a.support_max();
        let lo = Rational::new(BigInt::from(rng.random_range(0..=20u32)), BigInt::from(4));
        let hi = &lo + Rational::new(BigInt::from(rng.random_range(1..=20u32)), BigInt::from(4));
        if a.members().iter().any(|d| *d.min_value() > hi) || lo >= top {
            continue;
        }
        let out = match transforms::down_project(&a, &lo, &hi, 1e-12) {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("down: {e}"));
                break;
            }
        };
        if out.outcome.m_residual.iter().any(|r| r.abs() > tol9)
            || out.outcome.e_delta > tol9
            || out
                .outcome
                .result
                .members()
                .iter()
                .any(|d| inside_open(d, &lo, &hi) > 0)
        {
            failures.push(format!("down certificate on [{lo}, {hi}]"));
        }
        done[2] += 1;
    }

    let detail = format!(
        "coalesce {} / reduce {} / down {} instances, {} failures",
        done[0],
        done[1],
        done[2],
        failures.len()
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {}", failures[0]))
    }
}

fn holder_bounds() -> Verdict {
    let mut rng = gen::rng(0x401D);
    let shape = Shape::default();
    let eps = tol(1e-9);
    let mut bad = 0;
    for _ in 0..200 {
        let n = rng.random_range(2..=6);
        let a = gen::random_assembly(&mut rng, n, &shape);
        let r = bounds::full_report(&a, Some(&a.support_max()), 1e-12).unwrap();
        let h = r.holder_lower.as_ref().unwrap();
        if !(&r.m_bar - &eps <= *h.lo() && *h.hi() <= &r.exact_e + &eps) {
            bad += 1;
        }
    }
    let mut bad_two_point = 0;
    for _ in 0..200 {
        let n = rng.random_range(2..=6);
        let b = Rational::new(BigInt::from(rng.random_range(1..=40u32)), BigInt::from(4));
        let a = gen::random_two_point(&mut rng, n, &b, 64);
        let r = bounds::full_report(&a, Some(&b), 1e-12).unwrap();
        if *r.holder_lower.as_ref().unwrap().lo() < &r.sen_e - &eps {
            bad_two_point += 1;
        }
    }
    let detail = format!(
        "200 bounded assemblies ({bad} failures), 200 two-point ({bad_two_point} below sen_E)"
    );
    if bad + bad_two_point == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn equality_condition() -> Verdict {
    let mut rng = gen::rng(0xE0);
    let shape = Shape::default();
    let mut cases = 0;
    let mut bad = 0;
    while cases < 100 {
        let d = gen::random_distribution(&mut rng, &shape);
        if d.len() < 2 {
            continue;
        }
        let n = rng.random_range(2..=6);
        let same = Assembly::copies(&d, n).unwrap();
        let m_bar = bounds::mean_bounds(&dist::m_list(&same), n).unwrap().0;
        if dist::expected_max(&same) != m_bar {
            bad += 1;
        }
        let mut atoms = d.atoms().to_vec();
        let k = rng.random_range(0..atoms.len());
        atoms[k].1 += rat(1, 1000);
        let perturbed = same.with_member(
            rng.random_range(0..n),
            FiniteDistribution::from_weights(atoms).unwrap(),
        );
        let m_bar = bounds::mean_bounds(&dist::m_list(&perturbed), n).unwrap().0;
        if dist::expected_max(&perturbed) <= m_bar {
            bad += 1;
        }
        cases += 1;
    }
    let detail = format!("{cases} cases, {bad} failures");
    if bad == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gam(corpus: &[Assembly]) -> Verdict {
    let results: Vec<bounds::GamGap> = corpus[..100]
        .par_iter()
        .map(|a| bounds::gam_gap(a, 1e-10).unwrap())
        .collect();
    let bad = results.iter().filter(|g| !g.holds()).count();
    let widest = results
        .iter()
        .map(|g| g.integral.radius_f64())
        .fold(0.0, f64::max);
    let detail = format!("100 assemblies, {bad} failures, widest radius {widest:.1e}");
    if bad == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mc_fixtures() -> Vec<Assembly> {
    let law = |atoms: &[(i64, i64, i64)]| {
        FiniteDistribution::new(atoms.iter().map(|&(v, p, q)| (int(v), rat(p, q))).collect())
            .unwrap()
    };
    vec![
        Assembly::new(vec![
            law(&[(0, 1, 2), (1, 1, 2)]),
            law(&[(0, 1, 4), (1, 3, 4)]),
        ])
        .unwrap(),
        Assembly::copies(&law(&[(1, 1, 3), (2, 1, 3), (3, 1, 3)]), 3).unwrap(),
        Assembly::new(vec![
            law(&[(0, 1, 10), (5, 9, 10)]),
            law(&[(2, 1, 2), (3, 1, 2)]),
            law(&[(1, 1, 4), (4, 1, 2), (6, 1, 4)]),
        ])
        .unwrap(),
        Assembly::new(vec![
            law(&[(0, 7, 8), (8, 1, 8)]),
            law(&[(1, 1, 2), (2, 1, 2)]),
            law(&[(0, 1, 3), (3, 2, 3)]),
            law(&[(2, 3, 5), (4, 2, 5)]),
        ])
        .unwrap(),
        Assembly::new(vec![
            law(&[(0, 1, 64), (1, 63, 64)]),
            law(&[(0, 1, 2), (10, 1, 2)]),
            law(&[(3, 1, 1)]),
            law(&[(1, 5, 6), (7, 1, 6)]),
            law(&[(2, 1, 8), (5, 7, 8)]),
        ])
        .unwrap(),
    ]
}

fn monte_carlo() -> Verdict {
    const SAMPLES: u64 = 100_000;
    let mut worst = 100;
    let mut unstable = 0;
    for a in &mc_fixtures() {
        let exact = dist::expected_max(a).to_f64().unwrap();
        let runs: Vec<(bool, bool)> = (0..100u64)
            .into_par_iter()
            .map(|seed| {
                let first = oracle::mc_expected_max(a, SAMPLES, seed).unwrap();
                let again = oracle::mc_expected_max(a, SAMPLES, seed).unwrap();
                let same = first.mean.to_bits() == again.mean.to_bits()
                    && first.stderr.to_bits() == again.stderr.to_bits();
                (first.within(exact, 4.0), same)
            })
            .collect();
        worst = worst.min(runs.iter().filter(|r| r.0).count());
        unstable += runs.iter().filter(|r| !r.1).count();
    }
    let detail = format!(
        "5 assemblies x 100 seeds: worst {worst}/100 within 4 stderr, {unstable} unstable re-runs"
    );
    if worst >= 99 && unstable == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn discretization() -> Verdict {
    let u = dist::UniformCdf::new(int(0), int(1)).unwrap();
    let mut prev = Rational::zero();
    let mut errs = Vec::new();
    for m in 1..=8u32 {
        let e = dist::discretize(&u, m)
            .map_err(|e| e.to_string())?
            .expected_value();
        let gap = rat(1, 2) - &e;
        let limit = Rational::new(BigInt::one(), BigInt::from(2).pow(m));
        if e < prev || gap.is_negative() || gap > limit {
            return Err(format!("m={m}: mean {e}"));
        }
        errs.push(gap.to_string());
        prev = e;
    }
    Ok(format!("1/2 - mean over m=1..8: {}", errs.join(", ")))
}

fn main() -> ExitCode {
    let corpus = corpus(1000);
    let criteria: Vec<Check> = vec![
        ("bound chain, exact", Box::new(|| chain(&corpus))),
        (
            "expected_max equals enumeration",
            Box::new(|| oracle_equivalence(&corpus)),
        ),
        ("extremal sharpness", Box::new(sharpness)),
        ("transform certificates", Box::new(transform_certificates)),
        ("holder lower bound", Box::new(holder_bounds)),
        ("equality condition", Box::new(equality_condition)),
        ("GAM gap", Box::new(|| gam(&corpus))),
        ("Monte Carlo oracle", Box::new(monte_carlo)),
        ("uniform discretization", Box::new(discretization)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

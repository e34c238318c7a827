//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use concave_ot::bench::{self, BenchConfig, Metric, Sampling};
use concave_ot::chains::decompose;
use concave_ot::indicators::{IndicatorCache, PairMemo};
use concave_ot::oracle::{brute_force_ranked, noncrossing_dp};
use concave_ot::solver::solve_with_report;
use concave_ot::{CostSpec, EvalCounter, GroundCost, ProblemInstance, Result, Role, SitePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORACLE_REL_TOL: f64 = 1e-9;
const ORACLE_SUITE_SIZE: usize = 600;
const ORACLE_SUITE_SEED: u64 = 2024;
const UNIQUE_GAP: f64 = 1e-6;
const WORST_CASE_SIZES: [usize; 3] = [10, 50, 100];
const SLOPE_TOL: f64 = 0.30;
const TARGET_ALPHAS: [(&str, f64); 3] = [("power:0.001", 1.18), ("sqrt", 1.87), ("power:0.999", 2.0)];
const CHAIN_INSTANCES: usize = 1000;
const CHAIN_MAX_PAIRS: usize = 10_000;
const PHI_CONFIGS: usize = 1000;
const PHI_TOL: f64 = 1e-12;
const IDENTITY_PROBES: usize = 10_000;
const IDENTITY_REL_TOL: f64 = 1e-9;

struct Outcome {
    passed: bool,
    detail: String,
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Instance `index` of the shared oracle suite: `N0 = 1 + index % 8`.
fn suite_instance(index: usize) -> ProblemInstance {
    let n = 1 + index % 8;
    let mut rng = bench::sample_rng(ORACLE_SUITE_SEED, n, index);
    bench::generate_instance(n, &mut rng)
}

fn oracle_costs() -> Vec<CostSpec> {
    vec![
        CostSpec::Linear,
        CostSpec::Sqrt,
        CostSpec::power(0.3).unwrap(),
        CostSpec::Log,
    ]
}

fn criterion_1_solver_matches_permutation_oracle() -> Result<Outcome> {
    let mut checked = 0;
    let mut failures = Vec::new();
    for index in 0..ORACLE_SUITE_SIZE {
        let instance = suite_instance(index);
        for cost in oracle_costs() {
            let solved = solve_with_report(&instance, &cost)?.matching.total_cost;
            let best = brute_force_ranked(&instance, &cost)?.matching.total_cost;
            checked += 1;
            if !rel_close(solved, best, ORACLE_REL_TOL) {
                failures.push(format!("instance {index} {cost}: {solved} vs {best}"));
            }
        }
    }
    Ok(Outcome {
        passed: failures.is_empty(),
        detail: format!(
            "{checked} (instance, cost) cases over {ORACLE_SUITE_SIZE} instances, {} mismatches{}",
            failures.len(),
            first(&failures)
        ),
    })
}

fn criterion_2_noncrossing_dp_matches_permutation_oracle() -> Result<Outcome> {
    let mut checked = 0;
    let mut failures = Vec::new();
    for index in 0..ORACLE_SUITE_SIZE {
        let instance = suite_instance(index);
        for cost in oracle_costs() {
            let dp = noncrossing_dp(&instance, &cost)?.total_cost;
            let best = brute_force_ranked(&instance, &cost)?.matching.total_cost;
            checked += 1;
            if !rel_close(dp, best, ORACLE_REL_TOL) {
                failures.push(format!("instance {index} {cost}: {dp} vs {best}"));
            }
        }
    }
    Ok(Outcome {
        passed: failures.is_empty(),
        detail: format!(
            "{checked} cases, {} mismatches{}",
            failures.len(),
            first(&failures)
        ),
    })
}

fn criterion_3_certified_pairs_are_optimal() -> Result<Outcome> {
    let mut unique = 0;
    let mut certified = 0;
    let mut violations = Vec::new();
    for index in 0..ORACLE_SUITE_SIZE {
        let instance = suite_instance(index);
        for cost in oracle_costs() {
            let oracle = brute_force_ranked(&instance, &cost)?;
            if oracle.optimality_gap() <= UNIQUE_GAP {
                continue;
            }
            unique += 1;
            let sigma = oracle.matching.permutation();
            let report = solve_with_report(&instance, &cost)?;
            for pair in report.pairs.iter().filter(|p| p.origin.is_certified()) {
                certified += 1;
                if sigma[pair.demand] != pair.supply {
                    violations.push(format!(
                        "instance {index} {cost}: ({}, {}) from {:?}",
                        pair.demand, pair.supply, pair.origin
                    ));
                }
            }
        }
    }
    Ok(Outcome {
        passed: violations.is_empty() && certified > 0,
        detail: format!(
            "{unique} unique-optimum cases, {certified} certified pairs, {} violations{}",
            violations.len(),
            first(&violations)
        ),
    })
}

fn criterion_4_worst_case_count() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut passed = true;
    for n in WORST_CASE_SIZES {
        let demand: Vec<f64> = (0..n).map(|i| 2.0 * i as f64).collect();
        let supply: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + 1.0).collect();
        let instance = ProblemInstance::from_positions(&demand, &supply)?;
        let report = solve_with_report(&instance, &CostSpec::Linear)?;
        let expected = ((n - 1) * (n - 1)) as u64;
        let straight = report.matching.pairs.iter().all(|&(d, s)| d == s);
        let ok = report.counter.indicator_evaluations == expected && straight;
        passed &= ok;
        parts.push(format!(
            "N={n}: {} indicators (expected {expected}), straight={straight}",
            report.counter.indicator_evaluations
        ));
    }
    Ok(Outcome {
        passed,
        detail: parts.join("; "),
    })
}

fn criterion_5_evaluation_slopes() -> Result<Outcome> {
    // the benchmarked unit is one alternating chain of N pairs
    let config = BenchConfig {
        sampling: Sampling::SingleChain,
        ..BenchConfig::default()
    };
    let start = Instant::now();
    let records = bench::run_bench(&config)?;
    let fitted = bench::slopes(&records, Metric::Fresh)?;
    let mut passed = true;
    let mut parts = Vec::new();
    for (label, target) in TARGET_ALPHAS {
        let alpha = fitted
            .iter()
            .find(|(l, _)| l == label)
            .map(|&(_, a)| a)
            .unwrap_or(f64::NAN);
        let ok = (alpha - target).abs() <= SLOPE_TOL;
        passed &= ok;
        parts.push(format!(
            "{label}: alpha={alpha:.3} (target {target} +/- {SLOPE_TOL})"
        ));
    }
    // reported for reference, not asserted
    let independent = bench::run_bench(&BenchConfig::default())?;
    let ind_slopes = bench::slopes(&independent, Metric::Fresh)?;
    parts.push(format!(
        "independent sampling for reference: {}",
        ind_slopes
            .iter()
            .map(|(l, a)| format!("{l}={a:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    parts.push(format!("{:.1}s", start.elapsed().as_secs_f64()));
    Ok(Outcome {
        passed,
        detail: parts.join("; "),
    })
}

/// Counts every call to `g` made through it.
struct CountingCost<'a> {
    inner: CostSpec,
    calls: &'a AtomicU64,
}

impl GroundCost for CountingCost<'_> {
    fn g(&self, x: f64) -> Result<f64> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.g(x)
    }

    fn label(&self) -> String {
        self.inner.label()
    }
}

fn criterion_6_chain_decomposition() -> Result<Outcome> {
    let roles = [
        Role::Demand,
        Role::Supply,
        Role::Supply,
        Role::Demand,
        Role::Demand,
        Role::Supply,
        Role::Supply,
        Role::Demand,
    ];
    let layout: Vec<(Role, f64)> = roles
        .iter()
        .enumerate()
        .map(|(i, &r)| (r, (i + 1) as f64))
        .collect();
    let layout_chains = decompose(&ProblemInstance::from_roles(&layout)?);
    let layout_positions: Vec<Vec<f64>> = layout_chains
        .iter()
        .map(|c| c.points.iter().map(|p| p.position).collect())
        .collect();
    let layout_ok = layout_positions == vec![vec![1.0, 2.0, 5.0, 6.0], vec![3.0, 4.0, 7.0, 8.0]];

    let calls = AtomicU64::new(0);
    let counting = CountingCost {
        inner: CostSpec::Sqrt,
        calls: &calls,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut invariant_failures = Vec::new();
    let mut total_points = 0usize;
    let mut calls_during_decompose = 0;
    for index in 0..CHAIN_INSTANCES {
        let n = rng.gen_range(1..=CHAIN_MAX_PAIRS);
        let instance = bench::generate_instance(n, &mut rng);
        let before = calls.load(Ordering::Relaxed);
        let chains = decompose(&instance);
        calls_during_decompose += calls.load(Ordering::Relaxed) - before;
        total_points += instance.points().len();

        let mut seen: Vec<SitePoint> = chains
            .iter()
            .flat_map(|c| c.points.iter().copied())
            .collect();
        seen.sort_by(|a, b| a.position.total_cmp(&b.position));
        if seen != instance.points() {
            invariant_failures.push(format!("instance {index}: not a partition"));
        }
        if let Some(bad) = chains.iter().position(|c| !c.is_well_formed()) {
            invariant_failures.push(format!("instance {index}: chain {bad} malformed"));
        }
        if index % 100 == 0 && n <= 200 {
            // exercise the counter on a solve so the instrumentation is live
            solve_with_report(&instance, &counting)?;
        }
    }
    let solve_calls = calls.load(Ordering::Relaxed);
    let passed = layout_ok && invariant_failures.is_empty() && calls_during_decompose == 0;
    Ok(Outcome {
        passed,
        detail: format!(
            "interleaved layout chains {:?}; {CHAIN_INSTANCES} random instances ({total_points} points, N0 <= {CHAIN_MAX_PAIRS}): {} invariant failures{}; g calls during decompose = {calls_during_decompose} (solves made {solve_calls})",
            layout_positions,
            invariant_failures.len(),
            first(&invariant_failures)
        ),
    })
}

fn random_chain(rng: &mut ChaCha8Rng, n: usize) -> (Vec<SitePoint>, Vec<SitePoint>) {
    let mut x = rng.gen_range(-1.0..1.0);
    let mut p = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for j in 0..n {
        x += rng.gen_range(0.01..1.0);
        p.push(SitePoint::demand(x, j));
        x += rng.gen_range(0.01..1.0);
        q.push(SitePoint::supply(x, j));
    }
    (p, q)
}

fn phi_costs() -> Vec<CostSpec> {
    vec![
        CostSpec::Linear,
        CostSpec::Sqrt,
        CostSpec::Log,
        CostSpec::power(0.3).unwrap(),
        CostSpec::power(1e-3).unwrap(),
        CostSpec::power(0.999).unwrap(),
    ]
}

fn criterion_7_phi_monotonicity() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checks = 0;
    let mut violations = Vec::new();
    for config in 0..PHI_CONFIGS {
        let n = rng.gen_range(2..=10);
        let (p, q) = random_chain(&mut rng, n);
        for cost in phi_costs() {
            let mut counter = EvalCounter::new();
            let cache = IndicatorCache::new(
                p.clone(),
                q.clone(),
                &cost,
                &mut counter,
                &mut PairMemo::new(),
            )?;
            let lo = rng.gen_range(1e-3..2.0);
            let hi = lo + rng.gen_range(1e-3..2.0);
            let other = rng.gen_range(1e-3..2.0);
            let k = rng.gen_range(1..n);
            let i = rng.gen_range(0..n - k);
            let mut check = |name: &str, a: f64, b: f64| {
                checks += 1;
                if a < b - PHI_TOL {
                    violations.push(format!("config {config} {cost} {name}: {a} < {b}"));
                }
            };
            let px = (
                cache.phi_p(k, i, lo, other, &mut counter)?,
                cache.phi_p(k, i, hi, other, &mut counter)?,
            );
            check("phi_p in x", px.0, px.1);
            let py = (
                cache.phi_p(k, i, other, lo, &mut counter)?,
                cache.phi_p(k, i, other, hi, &mut counter)?,
            );
            check("phi_p in y", py.0, py.1);
            if n >= 3 {
                let k = rng.gen_range(1..n - 1);
                let i = rng.gen_range(0..n - k - 1);
                let qx = (
                    cache.phi_q(k, i, lo, other, &mut counter)?,
                    cache.phi_q(k, i, hi, other, &mut counter)?,
                );
                check("phi_q in x", qx.0, qx.1);
                let qy = (
                    cache.phi_q(k, i, other, lo, &mut counter)?,
                    cache.phi_q(k, i, other, hi, &mut counter)?,
                );
                check("phi_q in y", qy.0, qy.1);
            }
        }
    }
    Ok(Outcome {
        passed: violations.is_empty(),
        detail: format!(
            "{PHI_CONFIGS} configurations x {} costs, {checks} comparisons, {} violations{}",
            phi_costs().len(),
            violations.len(),
            first(&violations)
        ),
    })
}

fn criterion_8_incremental_indicator_identity() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let costs = phi_costs();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for probe in 0..IDENTITY_PROBES {
        let n = rng.gen_range(2..=60);
        let (p, q) = random_chain(&mut rng, n);
        let cost = costs[rng.gen_range(0..costs.len())];
        let mut counter = EvalCounter::new();
        let cache = IndicatorCache::new(
            p.clone(),
            q.clone(),
            &cost,
            &mut counter,
            &mut PairMemo::new(),
        )?;
        let c = |a: &SitePoint, b: &SitePoint| cost.g((a.position - b.position).abs()).unwrap();
        let use_q = n >= 3 && rng.gen_bool(0.5);
        let (got, want) = if use_q {
            let k = rng.gen_range(1..n - 1);
            let i = rng.gen_range(0..n - k - 1);
            let mut terms = vec![c(&p[i + k + 1], &q[i])];
            terms.extend((1..=k).map(|l| c(&p[i + l], &q[i + l])));
            terms.extend((0..=k).map(|l| -c(&p[i + l + 1], &q[i + l])));
            (cache.indicator_q(k, i, &mut counter)?, exact_sum(&terms))
        } else {
            let k = rng.gen_range(1..n);
            let i = rng.gen_range(0..n - k);
            let mut terms = vec![c(&p[i], &q[i + k])];
            terms.extend((0..k).map(|l| c(&p[i + l + 1], &q[i + l])));
            terms.extend((0..=k).map(|l| -c(&p[i + l], &q[i + l])));
            (cache.indicator_p(k, i, &mut counter)?, exact_sum(&terms))
        };
        let rel = (got - want).abs() / want.abs().max(got.abs());
        if rel.is_finite() {
            worst = worst.max(rel);
        }
        if !rel_close(got, want, IDENTITY_REL_TOL) {
            failures.push(format!("probe {probe} {cost}: {got} vs {want}"));
        }
    }
    Ok(Outcome {
        passed: failures.is_empty(),
        detail: format!(
            "{IDENTITY_PROBES} probes, max relative deviation {worst:.2e}, {} failures{}",
            failures.len(),
            first(&failures)
        ),
    })
}

/// Correctly rounded sum of floats (Shewchuk's non-overlapping partials).
fn exact_sum(values: &[f64]) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for &v in values {
        let mut x = v;
        let mut kept = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        partials.truncate(kept);
        partials.push(x);
    }
    partials.iter().rev().fold(0.0, |acc, &v| acc + v)
}

fn first(items: &[String]) -> String {
    items
        .first()
        .map(|s| format!(" (first: {s})"))
        .unwrap_or_default()
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 8] = [
        (
            "C1 solver == permutation oracle",
            criterion_1_solver_matches_permutation_oracle,
        ),
        (
            "C2 non-crossing DP == permutation oracle",
            criterion_2_noncrossing_dp_matches_permutation_oracle,
        ),
        (
            "C3 certified pairs belong to the unique optimum",
            criterion_3_certified_pairs_are_optimal,
        ),
        (
            "C4 worst-case indicator count (N-1)^2",
            criterion_4_worst_case_count,
        ),
        ("C5 evaluation-count slopes", criterion_5_evaluation_slopes),
        ("C6 chain decomposition", criterion_6_chain_decomposition),
        ("C7 phi monotonicity", criterion_7_phi_monotonicity),
        (
            "C8 cached vs direct indicators",
            criterion_8_incremental_indicator_identity,
        ),
    ];
    let mut all_passed = true;
    for (name, run) in criteria {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all_passed &= passed;
        println!(
            "[{}] {name}: {detail} [{:.2}s]",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

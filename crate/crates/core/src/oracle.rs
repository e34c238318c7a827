//! Reference solvers used to check the indicator solver.
//!
//! Neither oracle shares code with the solver beyond pricing pairs: the
//! permutation search prices all `N!` plans, the interval DP optimises over
//! non-crossing plans only. Agreement of the two is an empirical check of the
//! non-crossing property for concave costs.

use crate::cost::{pair_cost_uncounted, GroundCost};
use crate::error::{Error, Result};
use crate::instance::{ProblemInstance, Role};
use crate::matching::Matching;

pub const BRUTE_FORCE_LIMIT: usize = 9;
pub const NONCROSSING_DP_LIMIT: usize = 2000;

/// Best plan found by exhaustive search and the cost of the runner-up.
#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub matching: Matching,
    /// Cost of the cheapest permutation other than the reported one;
    /// `None` when `N = 1`.
    pub runner_up_cost: Option<f64>,
}

impl BruteForceResult {
    /// Gap between the best and second-best plans (infinite for `N = 1`).
    pub fn optimality_gap(&self) -> f64 {
        self.runner_up_cost
            .map_or(f64::INFINITY, |c| c - self.matching.total_cost)
    }
}

/// Exact minimiser over all permutations, `N <= 9`.
///
/// Permutations are visited in lexicographic order and only strict
/// improvements replace the incumbent, so ties resolve to the
/// lexicographically smallest pair list.
pub fn brute_force<C: GroundCost + ?Sized>(
    instance: &ProblemInstance,
    cost: &C,
) -> Result<Matching> {
    brute_force_ranked(instance, cost).map(|r| r.matching)
}

/// [`brute_force`] that also reports the second-best cost.
pub fn brute_force_ranked<C: GroundCost + ?Sized>(
    instance: &ProblemInstance,
    cost: &C,
) -> Result<BruteForceResult> {
    let n = instance.n_pairs();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let demand = instance.demand_positions();
    let supply = instance.supply_positions();
    let mut table = vec![0.0; n * n];
    for (d, &x) in demand.iter().enumerate() {
        for (s, &y) in supply.iter().enumerate() {
            table[d * n + s] = pair_cost_uncounted(cost, x, y)?;
        }
    }

    let mut sigma: Vec<usize> = (0..n).collect();
    let mut best = sigma.clone();
    let mut best_cost = f64::INFINITY;
    let mut runner_up = f64::INFINITY;
    loop {
        let c: f64 = sigma
            .iter()
            .enumerate()
            .map(|(d, &s)| table[d * n + s])
            .sum();
        if c < best_cost {
            runner_up = best_cost;
            best_cost = c;
            best.copy_from_slice(&sigma);
        } else if c < runner_up {
            runner_up = c;
        }
        if !next_permutation(&mut sigma) {
            break;
        }
    }
    let pairs = best.into_iter().enumerate().collect();
    Ok(BruteForceResult {
        matching: Matching {
            pairs,
            total_cost: best_cost,
        },
        runner_up_cost: runner_up.is_finite().then_some(runner_up),
    })
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v
        .iter()
        .rposition(|&x| x > v[i])
        .expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Minimum-cost non-crossing perfect matching by interval DP.
///
/// With the points `w_0 < ... < w_{2N-1}`, `M(i, j)` is the cheapest
/// non-crossing matching of `w_i..=w_j`; `w_i` is paired with some `w_m` of
/// the opposite role such that both `w_{i+1}..w_{m-1}` and `w_{m+1}..=w_j`
/// are balanced. O(N^3) time, O(N^2) memory.
pub fn noncrossing_dp<C: GroundCost + ?Sized>(
    instance: &ProblemInstance,
    cost: &C,
) -> Result<Matching> {
    let n_pairs = instance.n_pairs();
    if n_pairs > NONCROSSING_DP_LIMIT {
        return Err(Error::TooLarge {
            n: n_pairs,
            limit: NONCROSSING_DP_LIMIT,
        });
    }
    let w = instance.points();
    let len = w.len();
    // prefix[i] = balance of w[..i]
    let mut prefix = vec![0i64; len + 1];
    for (i, p) in w.iter().enumerate() {
        prefix[i + 1] = prefix[i] + p.role.balance_step();
    }
    let balanced = |i: usize, j_excl: usize| prefix[j_excl] == prefix[i];

    // best[i][j] for the half-open range i..j, stored at i * (len + 1) + j
    let stride = len + 1;
    let mut best = vec![f64::INFINITY; len * stride + stride];
    let mut choice = vec![usize::MAX; len * stride + stride];
    for i in 0..=len {
        best[i * stride + i] = 0.0;
    }
    for width in (2..=len).step_by(2) {
        for i in 0..=len - width {
            let j = i + width;
            if !balanced(i, j) {
                continue;
            }
            let mut value = f64::INFINITY;
            let mut arg = usize::MAX;
            for m in (i + 1..j).step_by(2) {
                if w[m].role == w[i].role || !balanced(i + 1, m) {
                    continue;
                }
                let inside = best[(i + 1) * stride + m];
                let after = best[(m + 1) * stride + j];
                let c = pair_cost_uncounted(cost, w[i].position, w[m].position)? + inside + after;
                if c < value {
                    value = c;
                    arg = m;
                }
            }
            best[i * stride + j] = value;
            choice[i * stride + j] = arg;
        }
    }

    let mut pairs = Vec::with_capacity(n_pairs);
    let mut stack = vec![(0usize, len)];
    while let Some((i, j)) = stack.pop() {
        if i >= j {
            continue;
        }
        let m = choice[i * stride + j];
        if m == usize::MAX {
            return Err(Error::Contract(format!(
                "range {i}..{j} has no non-crossing matching"
            )));
        }
        let (a, b) = (w[i], w[m]);
        pairs.push(match a.role {
            Role::Demand => (a.id, b.id),
            Role::Supply => (b.id, a.id),
        });
        stack.push((i + 1, m));
        stack.push((m + 1, j));
    }
    pairs.sort_unstable();
    Ok(Matching {
        pairs,
        total_cost: best[len],
    })
}

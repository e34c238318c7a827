use crate::cost::{pair_cost_uncounted, GroundCost};
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;

/// A transport plan: a bijection from demand ids to supply ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// `(demand_id, supply_id)`, sorted by demand id.
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
}

impl Matching {
    /// Validates `pairs` against `instance` and prices them under `cost`.
    pub fn new<C: GroundCost + ?Sized>(
        instance: &ProblemInstance,
        mut pairs: Vec<(usize, usize)>,
        cost: &C,
    ) -> Result<Self> {
        pairs.sort_unstable();
        let total_cost = total_cost(instance, &pairs, cost)?;
        Ok(Self { pairs, total_cost })
    }

    /// `sigma[demand_id] = supply_id`.
    pub fn permutation(&self) -> Vec<usize> {
        let mut sigma = vec![usize::MAX; self.pairs.len()];
        for &(d, s) in &self.pairs {
            sigma[d] = s;
        }
        sigma
    }
}

/// Checks that `pairs` is a bijection over the ids of `instance`.
pub fn check_bijection(instance: &ProblemInstance, pairs: &[(usize, usize)]) -> Result<()> {
    let n = instance.n_pairs();
    if pairs.len() != n {
        return Err(Error::Contract(format!(
            "{} pairs for an instance of {} pairs",
            pairs.len(),
            n
        )));
    }
    let mut demand_seen = vec![false; n];
    let mut supply_seen = vec![false; n];
    for &(d, s) in pairs {
        if d >= n || s >= n {
            return Err(Error::Contract(format!(
                "pair ({d}, {s}) references an unknown id"
            )));
        }
        if std::mem::replace(&mut demand_seen[d], true) {
            return Err(Error::Contract(format!("demand {d} matched twice")));
        }
        if std::mem::replace(&mut supply_seen[s], true) {
            return Err(Error::Contract(format!("supply {s} matched twice")));
        }
    }
    Ok(())
}

/// Total cost of a plan, `sum of g(|p - q|)` over its pairs.
///
/// Evaluations made here are not counted; this is reporting, not solving.
pub fn total_cost<C: GroundCost + ?Sized>(
    instance: &ProblemInstance,
    pairs: &[(usize, usize)],
    cost: &C,
) -> Result<f64> {
    check_bijection(instance, pairs)?;
    let demand = instance.demand_positions();
    let supply = instance.supply_positions();
    pairs
        .iter()
        .map(|&(d, s)| pair_cost_uncounted(cost, demand[d], supply[s]))
        .sum()
}

/// True when the pairs, drawn as intervals, are pairwise nested or disjoint.
pub fn is_non_crossing(instance: &ProblemInstance, pairs: &[(usize, usize)]) -> bool {
    let demand = instance.demand_positions();
    let supply = instance.supply_positions();
    let intervals: Vec<(f64, f64)> = pairs
        .iter()
        .map(|&(d, s)| {
            let (a, b) = (demand[d], supply[s]);
            (a.min(b), a.max(b))
        })
        .collect();
    intervals.iter().enumerate().all(|(i, &(a, b))| {
        intervals[i + 1..].iter().all(|&(c, d)| {
            let disjoint = b < c || d < a;
            let nested = (a <= c && d <= b) || (c <= a && b <= d);
            disjoint || nested
        })
    })
}

//! Chain-by-chain solver driven by local matching indicators.
//!
//! For one demand-first chain of `N` pairs the solver scans levels
//! `k = 1, 2, ...`. At each level it computes every `I^p_k(i)` and `I^q_k(i)`.
//! A strictly negative `I^p_k(i)` certifies that `p_{i+j}` is matched with
//! `q_{i+j-1}` for `j = 1..=k`; a strictly negative `I^q_k(i)` certifies
//! `p_{i+j}` with `q_{i+j}`. Certified pairs are removed, the remaining points
//! (still alternating, demand first) are renumbered and the scan restarts at
//! `k = 1`. When a full scan up to `k = N - 1` finds nothing, the remaining
//! points are matched straight.

use rayon::prelude::*;

use crate::chains::{canonicalize, decompose, Chain};
use crate::cost::GroundCost;
use crate::counter::EvalCounter;
use crate::error::{Error, Result};
use crate::indicators::{IndicatorCache, PairMemo};
use crate::instance::{ProblemInstance, SitePoint};
use crate::matching::Matching;

/// How a pair entered the plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairOrigin {
    /// Certified by a negative `I^p` at this level.
    IndicatorP { level: usize },
    /// Certified by a negative `I^q` at this level.
    IndicatorQ { level: usize },
    /// Final straight matching of the points left after all reductions.
    Straight,
}

impl PairOrigin {
    pub fn is_certified(self) -> bool {
        !matches!(self, PairOrigin::Straight)
    }
}

/// One matched pair in the original labelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchedPair {
    pub demand: usize,
    pub supply: usize,
    pub origin: PairOrigin,
}

/// Result of solving a single chain.
#[derive(Debug, Clone, Default)]
pub struct ChainSolution {
    pub pairs: Vec<MatchedPair>,
    pub counter: EvalCounter,
    /// Number of reduction rounds applied.
    pub reductions: usize,
}

/// Full solve output: the plan plus instrumentation.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub matching: Matching,
    /// Every pair with its origin, sorted by demand id.
    pub pairs: Vec<MatchedPair>,
    pub counter: EvalCounter,
    pub n_chains: usize,
}

/// Active points of a chain under reduction (`l^p`, `l^q` in index form).
struct WorkingChain<'a, C: ?Sized> {
    chain: &'a Chain,
    /// Indices into the chain's demand-side points, ascending.
    active_p: Vec<usize>,
    /// Indices into the chain's supply-side points, ascending.
    active_q: Vec<usize>,
    cache: IndicatorCache<'a, C>,
    memo: PairMemo,
}

impl<'a, C: GroundCost + ?Sized> WorkingChain<'a, C> {
    fn new(chain: &'a Chain, cost: &'a C, counter: &mut EvalCounter) -> Result<Self> {
        let n = chain.n_pairs();
        let mut memo = PairMemo::new();
        let active_p: Vec<usize> = (0..n).collect();
        let active_q: Vec<usize> = (0..n).collect();
        let cache = Self::make_cache(chain, &active_p, &active_q, cost, counter, &mut memo)?;
        Ok(Self {
            chain,
            active_p,
            active_q,
            cache,
            memo,
        })
    }

    fn make_cache(
        chain: &Chain,
        active_p: &[usize],
        active_q: &[usize],
        cost: &'a C,
        counter: &mut EvalCounter,
        memo: &mut PairMemo,
    ) -> Result<IndicatorCache<'a, C>> {
        let p: Vec<SitePoint> = active_p.iter().map(|&j| *chain.p(j)).collect();
        let q: Vec<SitePoint> = active_q.iter().map(|&j| *chain.q(j)).collect();
        IndicatorCache::new(p, q, cost, counter, memo).map_err(|e| match e {
            Error::Contract(msg) => {
                Error::ReductionConflict(format!("remaining points lost alternation: {msg}"))
            }
            other => other,
        })
    }

    fn n(&self) -> usize {
        self.active_p.len()
    }

    /// Applies the reductions certified at level `k`.
    ///
    /// Returns the matched pairs as `(local p index, local q index, origin)`.
    fn reduce(
        &mut self,
        k: usize,
        fired_p: &[usize],
        fired_q: &[usize],
        cost: &'a C,
        counter: &mut EvalCounter,
    ) -> Result<Vec<(usize, usize, PairOrigin)>> {
        let n = self.n();
        let mut partner_of_p: Vec<Option<usize>> = vec![None; n];
        let mut partner_of_q: Vec<Option<usize>> = vec![None; n];
        let mut matched = Vec::new();
        let assignments = fired_p
            .iter()
            .flat_map(|&i0| {
                (i0 + 1..=i0 + k).map(move |i| (i, i - 1, PairOrigin::IndicatorP { level: k }))
            })
            .chain(fired_q.iter().flat_map(|&i0| {
                (i0 + 1..=i0 + k).map(move |i| (i, i, PairOrigin::IndicatorQ { level: k }))
            }));
        for (i, j, origin) in assignments {
            match (partner_of_p[i], partner_of_q[j]) {
                (None, None) => {
                    partner_of_p[i] = Some(j);
                    partner_of_q[j] = Some(i);
                    matched.push((i, j, origin));
                }
                // overlapping firings of the same kind repeat the same pair
                (Some(jj), Some(ii)) if jj == j && ii == i => {}
                _ => {
                    return Err(Error::ReductionConflict(format!(
                        "level {k}: p[{i}] and q[{j}] already claimed by other pairs"
                    )))
                }
            }
        }

        let keep_p: Vec<usize> = (0..n)
            .filter(|&i| partner_of_p[i].is_none())
            .map(|i| self.active_p[i])
            .collect();
        let keep_q: Vec<usize> = (0..n)
            .filter(|&j| partner_of_q[j].is_none())
            .map(|j| self.active_q[j])
            .collect();
        let global: Vec<(usize, usize, PairOrigin)> = matched
            .into_iter()
            .map(|(i, j, origin)| (self.active_p[i], self.active_q[j], origin))
            .collect();
        self.active_p = keep_p;
        self.active_q = keep_q;
        if self.n() > 0 {
            self.cache = Self::make_cache(
                self.chain,
                &self.active_p,
                &self.active_q,
                cost,
                counter,
                &mut self.memo,
            )?;
        }
        Ok(global)
    }
}

/// Solves one canonical chain.
///
/// Pairs are reported in the original labelling (demand id, supply id).
pub fn solve_chain<C: GroundCost + ?Sized>(chain: &Chain, cost: &C) -> Result<ChainSolution> {
    if !chain.is_well_formed() && !chain.points.is_empty() {
        return Err(Error::Contract("chain does not alternate".into()));
    }
    if !chain.is_canonical() && !chain.points.is_empty() {
        return Err(Error::Contract("chain must be canonicalized first".into()));
    }
    let mut out = ChainSolution::default();
    if chain.n_pairs() == 0 {
        return Ok(out);
    }
    let mut counter = EvalCounter::new();
    let mut work = WorkingChain::new(chain, cost, &mut counter)?;
    let mut local_pairs: Vec<(usize, usize, PairOrigin)> = Vec::with_capacity(chain.n_pairs());

    let mut k = 1;
    while work.n() > 0 && k < work.n() {
        let n = work.n();
        let mut fired_p = Vec::new();
        for i in 0..n - k {
            if work.cache.indicator_p(k, i, &mut counter)? < 0.0 {
                fired_p.push(i);
            }
        }
        let mut fired_q = Vec::new();
        if k + 2 <= n {
            for i in 0..n - k - 1 {
                if work.cache.indicator_q(k, i, &mut counter)? < 0.0 {
                    fired_q.push(i);
                }
            }
        }
        if fired_p.is_empty() && fired_q.is_empty() {
            k += 1;
            continue;
        }
        local_pairs.extend(work.reduce(k, &fired_p, &fired_q, cost, &mut counter)?);
        out.reductions += 1;
        k = 1;
    }
    local_pairs.extend(
        work.active_p
            .iter()
            .zip(&work.active_q)
            .map(|(&i, &j)| (i, j, PairOrigin::Straight)),
    );

    out.pairs = local_pairs
        .into_iter()
        .map(|(i, j, origin)| {
            let (demand, supply) = chain.original_pair(chain.p(i), chain.q(j));
            MatchedPair {
                demand,
                supply,
                origin,
            }
        })
        .collect();
    out.counter = counter;
    Ok(out)
}

/// Decomposes `instance` into chains, solves them in parallel and assembles
/// the plan.
pub fn solve_with_report<C: GroundCost + ?Sized>(
    instance: &ProblemInstance,
    cost: &C,
) -> Result<SolveReport> {
    let chains: Vec<Chain> = decompose(instance).into_iter().map(canonicalize).collect();
    let solutions = chains
        .par_iter()
        .map(|chain| solve_chain(chain, cost))
        .collect::<Result<Vec<_>>>()?;
    assemble(instance, cost, chains.len(), solutions)
}

/// Same as [`solve_with_report`] but solves the chains one after another.
pub fn solve_sequential<C: GroundCost + ?Sized>(
    instance: &ProblemInstance,
    cost: &C,
) -> Result<SolveReport> {
    let chains: Vec<Chain> = decompose(instance).into_iter().map(canonicalize).collect();
    let solutions = chains
        .iter()
        .map(|chain| solve_chain(chain, cost))
        .collect::<Result<Vec<_>>>()?;
    assemble(instance, cost, chains.len(), solutions)
}

fn assemble<C: GroundCost + ?Sized>(
    instance: &ProblemInstance,
    cost: &C,
    n_chains: usize,
    solutions: Vec<ChainSolution>,
) -> Result<SolveReport> {
    let counter = solutions.iter().map(|s| s.counter).sum();
    let mut pairs: Vec<MatchedPair> = solutions.into_iter().flat_map(|s| s.pairs).collect();
    pairs.sort_by_key(|p| (p.demand, p.supply));
    let plain = pairs.iter().map(|p| (p.demand, p.supply)).collect();
    let matching = Matching::new(instance, plain, cost)?;
    Ok(SolveReport {
        matching,
        pairs,
        counter,
        n_chains,
    })
}

/// Optimal transport plan for `instance` under a concave `cost`.
pub fn solve<C: GroundCost + ?Sized>(instance: &ProblemInstance, cost: &C) -> Result<Matching> {
    solve_with_report(instance, cost).map(|r| r.matching)
}

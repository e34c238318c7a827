//! Local matching indicators of a demand-first alternating chain
//! `p_0 < q_0 < p_1 < q_1 < ... < p_{N-1} < q_{N-1}` (0-based here).
//!
//! For a level `k >= 1`:
//!
//! ```text
//! I^p_k(i) = c(p_i, q_{i+k})   + sum_{l=0..k-1} c(p_{i+l+1}, q_{i+l}) - sum_{l=0..k} c(p_{i+l}, q_{i+l})
//! I^q_k(i) = c(p_{i+k+1}, q_i) + sum_{l=1..k}   c(p_{i+l}, q_{i+l})   - sum_{l=0..k} c(p_{i+l+1}, q_{i+l})
//! ```
//!
//! The "straight" costs `c(p_j, q_j)` and "staircase" costs `c(p_{j+1}, q_j)`
//! are computed once per chain and kept as prefix sums, so every indicator
//! costs a single fresh evaluation of `g` (the jump term) plus O(1) work.

use std::collections::HashMap;

use crate::chains::Chain;
use crate::cost::{eval_g, pair_cost, GroundCost};
use crate::counter::EvalCounter;
use crate::error::{Error, Result};
use crate::instance::SitePoint;

/// Pair costs already paid for, keyed by canonical `(p id, q id)`.
///
/// Lives for the whole solve of one chain so that cache rebuilds after a
/// reduction only evaluate the pairs that became adjacent.
#[derive(Debug, Default, Clone)]
pub struct PairMemo {
    costs: HashMap<(usize, usize), f64>,
}

impl PairMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    fn get_or_eval<C: GroundCost + ?Sized>(
        &mut self,
        cost: &C,
        p: &SitePoint,
        q: &SitePoint,
        counter: &mut EvalCounter,
    ) -> Result<f64> {
        if let Some(&c) = self.costs.get(&(p.id, q.id)) {
            return Ok(c);
        }
        let c = pair_cost(cost, p.position, q.position, counter)?;
        self.costs.insert((p.id, q.id), c);
        Ok(c)
    }
}

/// Straight and staircase pair costs of one alternating chain.
#[derive(Debug, Clone)]
pub struct IndicatorCache<'a, C: ?Sized> {
    cost: &'a C,
    p: Vec<SitePoint>,
    q: Vec<SitePoint>,
    straight: Vec<f64>,
    staircase: Vec<f64>,
    straight_prefix: PrefixSums,
    staircase_prefix: PrefixSums,
}

/// Builds the cache for a canonical chain.
pub fn build_cache<'a, C: GroundCost + ?Sized>(
    chain: &Chain,
    cost: &'a C,
    counter: &mut EvalCounter,
    memo: &mut PairMemo,
) -> Result<IndicatorCache<'a, C>> {
    if !chain.is_canonical() {
        return Err(Error::Contract(
            "indicator cache needs a demand-first chain".into(),
        ));
    }
    let n = chain.n_pairs();
    let p = (0..n).map(|j| *chain.p(j)).collect();
    let q = (0..n).map(|j| *chain.q(j)).collect();
    IndicatorCache::new(p, q, cost, counter, memo)
}

/// Error-free transformation: `a + b == s + e` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Compensated summation; accurate to a few ulps of the result even when
/// the terms cancel heavily.
fn compensated_sum(terms: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for &t in terms {
        let (s, e) = two_sum(sum, t);
        sum = s;
        carry += e;
    }
    sum + carry
}

/// Prefix sums kept as unevaluated `hi + lo` pairs so that range sums can be
/// recombined without losing the low-order bits.
#[derive(Debug, Clone)]
struct PrefixSums {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl PrefixSums {
    fn new(values: &[f64]) -> Self {
        let mut hi = Vec::with_capacity(values.len() + 1);
        let mut lo = Vec::with_capacity(values.len() + 1);
        let (mut h, mut l) = (0.0, 0.0);
        hi.push(h);
        lo.push(l);
        for &v in values {
            let (s, e) = two_sum(h, v);
            h = s;
            l += e;
            hi.push(h);
            lo.push(l);
        }
        Self { hi, lo }
    }

    /// Three terms whose exact sum is `sign * sum(values[from..=to])`.
    fn range_terms(&self, from: usize, to: usize, sign: f64) -> [f64; 3] {
        if from > to {
            return [0.0; 3];
        }
        [
            sign * self.hi[to + 1],
            -sign * self.hi[from],
            sign * (self.lo[to + 1] - self.lo[from]),
        ]
    }
}

impl<'a, C: GroundCost + ?Sized> IndicatorCache<'a, C> {
    /// Builds the cache for the alternating sequence `p[0] < q[0] < p[1] < ...`.
    ///
    /// Costs `2N - 1` fresh evaluations minus memo hits.
    pub fn new(
        p: Vec<SitePoint>,
        q: Vec<SitePoint>,
        cost: &'a C,
        counter: &mut EvalCounter,
        memo: &mut PairMemo,
    ) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::Contract(format!(
                "{} demand-side and {} supply-side points",
                p.len(),
                q.len()
            )));
        }
        let n = p.len();
        for j in 0..n {
            let next_ok = j + 1 == n || q[j].position < p[j + 1].position;
            if !(p[j].position < q[j].position && next_ok) {
                return Err(Error::Contract(format!(
                    "points do not alternate at index {j}"
                )));
            }
        }
        let straight = (0..n)
            .map(|j| memo.get_or_eval(cost, &p[j], &q[j], counter))
            .collect::<Result<Vec<_>>>()?;
        let staircase = (0..n.saturating_sub(1))
            .map(|j| memo.get_or_eval(cost, &p[j + 1], &q[j], counter))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cost,
            straight_prefix: PrefixSums::new(&straight),
            staircase_prefix: PrefixSums::new(&staircase),
            p,
            q,
            straight,
            staircase,
        })
    }

    pub fn n_pairs(&self) -> usize {
        self.p.len()
    }

    pub fn p_points(&self) -> &[SitePoint] {
        &self.p
    }

    pub fn q_points(&self) -> &[SitePoint] {
        &self.q
    }

    /// `straight[j] = c(p_j, q_j)`.
    pub fn straight(&self) -> &[f64] {
        &self.straight
    }

    /// `staircase[j] = c(p_{j+1}, q_j)`.
    pub fn staircase(&self) -> &[f64] {
        &self.staircase
    }

    /// `jump + stair[a..=b] - straight[c..=d] + ...` evaluated with
    /// compensation. Ranges with `from > to` are empty.
    fn combine(
        &self,
        leading: &[f64],
        staircase: (usize, usize),
        straight: (usize, usize),
        straight_sign: f64,
    ) -> f64 {
        let mut terms = [0.0; 9];
        terms[..leading.len()].copy_from_slice(leading);
        terms[3..6].copy_from_slice(&self.staircase_prefix.range_terms(
            staircase.0,
            staircase.1,
            -straight_sign,
        ));
        terms[6..].copy_from_slice(&self.straight_prefix.range_terms(
            straight.0,
            straight.1,
            straight_sign,
        ));
        compensated_sum(&terms)
    }

    fn check_p_range(&self, k: usize, i: usize) -> Result<()> {
        let n = self.n_pairs();
        if k == 0 || i + k >= n {
            return Err(Error::IndexOutOfRange { k, i, n });
        }
        Ok(())
    }

    fn check_q_range(&self, k: usize, i: usize) -> Result<()> {
        let n = self.n_pairs();
        if k == 0 || i + k + 1 >= n {
            return Err(Error::IndexOutOfRange { k, i, n });
        }
        Ok(())
    }

    /// `I^p_k(i)`; valid for `1 <= k` and `i + k <= N - 1`.
    ///
    /// Compares nesting `p_i` with `q_{i+k}` (staircase inside) against the
    /// straight plan on the same `2k + 2` points.
    pub fn indicator_p(&self, k: usize, i: usize, counter: &mut EvalCounter) -> Result<f64> {
        self.check_p_range(k, i)?;
        let jump = pair_cost(
            self.cost,
            self.p[i].position,
            self.q[i + k].position,
            counter,
        )?;
        counter.record_indicator();
        Ok(self.combine(&[jump], (i, i + k - 1), (i, i + k), -1.0))
    }

    /// `I^q_k(i)`; valid for `1 <= k` and `i + k + 1 <= N - 1`.
    ///
    /// Compares nesting `q_i` with `p_{i+k+1}` (straight inside) against the
    /// staircase plan on the same points.
    pub fn indicator_q(&self, k: usize, i: usize, counter: &mut EvalCounter) -> Result<f64> {
        self.check_q_range(k, i)?;
        let jump = pair_cost(
            self.cost,
            self.p[i + k + 1].position,
            self.q[i].position,
            counter,
        )?;
        counter.record_indicator();
        Ok(self.combine(&[jump], (i, i + k), (i + 1, i + k), 1.0))
    }

    /// `phi^p_{k,i}(x, y)`: `I^p_k(i)` with the outer straight gaps
    /// `q_i - p_i` and `q_{i+k} - p_{i+k}` replaced by `x` and `y`.
    ///
    /// Non-increasing in each variable when `g` is concave. Evaluates `g`
    /// three times.
    pub fn phi_p(
        &self,
        k: usize,
        i: usize,
        x: f64,
        y: f64,
        counter: &mut EvalCounter,
    ) -> Result<f64> {
        self.check_p_range(k, i)?;
        check_positive(x, y)?;
        let inner = self.p[i + k].position - self.q[i].position;
        let outer = eval_g(self.cost, x + y + inner, counter)?;
        let gx = eval_g(self.cost, x, counter)?;
        let gy = eval_g(self.cost, y, counter)?;
        Ok(self.combine(&[outer, -gx, -gy], (i, i + k - 1), (i + 1, i + k - 1), -1.0))
    }

    /// `phi^q_{k,i}(x, y)`: `I^q_k(i)` with the outer staircase gaps
    /// `p_{i+1} - q_i` and `p_{i+k+1} - q_{i+k}` replaced by `x` and `y`.
    pub fn phi_q(
        &self,
        k: usize,
        i: usize,
        x: f64,
        y: f64,
        counter: &mut EvalCounter,
    ) -> Result<f64> {
        self.check_q_range(k, i)?;
        check_positive(x, y)?;
        let inner = self.q[i + k].position - self.p[i + 1].position;
        let outer = eval_g(self.cost, x + y + inner, counter)?;
        let gx = eval_g(self.cost, x, counter)?;
        let gy = eval_g(self.cost, y, counter)?;
        Ok(self.combine(&[outer, -gx, -gy], (i + 1, i + k - 1), (i + 1, i + k), 1.0))
    }
}

fn check_positive(x: f64, y: f64) -> Result<()> {
    if x > 0.0 && y > 0.0 {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "phi arguments must be positive, got ({x}, {y})"
        )))
    }
}

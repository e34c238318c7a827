//! Partition of an instance into alternating chains.
//!
//! Scanning the points in position order with a running balance
//! (demand = +1, supply = -1), each point moves the balance across exactly one
//! unit level interval `[m, m + 1]`. The points crossing a given level form a
//! chain: their crossings alternate in direction, so their roles alternate,
//! and a level that is crossed upwards is crossed back down before the scan
//! ends. Between two consecutive crossings of the same level the balance makes
//! an excursion on one side of it, hence the points in between are balanced
//! and the next crossing is the nearest such neighbour.
//!
//! No cost evaluation happens here.

use crate::instance::{ProblemInstance, Role, SitePoint};

/// A maximal alternating, balanced run of points.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    /// Points in ascending position order, roles alternating.
    pub points: Vec<SitePoint>,
    pub leading_role: Role,
    /// Set when the role labels of `points` were exchanged to make the chain
    /// read demand-first.
    pub role_swapped: bool,
}

impl Chain {
    /// Number of pairs `N`; the chain holds `2N` points.
    pub fn n_pairs(&self) -> usize {
        self.points.len() / 2
    }

    pub fn is_canonical(&self) -> bool {
        self.leading_role == Role::Demand
    }

    /// `j`-th demand-side point (0-based) of a canonical chain.
    pub fn p(&self, j: usize) -> &SitePoint {
        &self.points[2 * j]
    }

    /// `j`-th supply-side point (0-based) of a canonical chain.
    pub fn q(&self, j: usize) -> &SitePoint {
        &self.points[2 * j + 1]
    }

    /// Role of `point` before any canonicalization.
    pub fn original_role(&self, point: &SitePoint) -> Role {
        if self.role_swapped {
            point.role.opposite()
        } else {
            point.role
        }
    }

    /// `(demand_id, supply_id)` in the original labelling for a canonical pair
    /// `(p, q)`.
    pub fn original_pair(&self, p: &SitePoint, q: &SitePoint) -> (usize, usize) {
        if self.role_swapped {
            (q.id, p.id)
        } else {
            (p.id, q.id)
        }
    }

    /// Roles alternate, counts balance, positions strictly increase.
    pub fn is_well_formed(&self) -> bool {
        !self.points.is_empty()
            && self.points.len() % 2 == 0
            && self.points[0].role == self.leading_role
            && self
                .points
                .windows(2)
                .all(|w| w[0].role != w[1].role && w[0].position < w[1].position)
    }
}

/// Splits `instance` into chains, ordered by the position of their first point.
pub fn decompose(instance: &ProblemInstance) -> Vec<Chain> {
    let points = instance.points();
    let n = instance.n_pairs() as i64;
    // level m lives in [-n, n - 1]
    let mut slot_of_level: Vec<Option<usize>> = vec![None; 2 * n as usize];
    let mut chains: Vec<Chain> = Vec::new();
    let mut balance = 0i64;
    for &point in points {
        let next = balance + point.role.balance_step();
        let level = balance.min(next);
        let slot = &mut slot_of_level[(level + n) as usize];
        let index = *slot.get_or_insert_with(|| {
            chains.push(Chain {
                points: Vec::new(),
                leading_role: point.role,
                role_swapped: false,
            });
            chains.len() - 1
        });
        chains[index].points.push(point);
        balance = next;
    }
    debug_assert_eq!(balance, 0);
    chains
}

/// Relabels a supply-first chain so that it reads demand-first.
///
/// Ids are kept; [`Chain::original_role`] and [`Chain::original_pair`] recover
/// the input roles. Idempotent.
pub fn canonicalize(chain: Chain) -> Chain {
    if chain.is_canonical() {
        return chain;
    }
    let points = chain
        .points
        .into_iter()
        .map(|p| SitePoint {
            role: p.role.opposite(),
            ..p
        })
        .collect();
    Chain {
        points,
        leading_role: Role::Demand,
        role_swapped: !chain.role_swapped,
    }
}

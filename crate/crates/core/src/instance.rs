use std::fmt;

use crate::error::{Error, Result};

/// Which side of the transport problem a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Demand,
    Supply,
}

impl Role {
    pub fn opposite(self) -> Role {
        match self {
            Role::Demand => Role::Supply,
            Role::Supply => Role::Demand,
        }
    }

    /// +1 for demand, -1 for supply.
    pub fn balance_step(self) -> i64 {
        match self {
            Role::Demand => 1,
            Role::Supply => -1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Demand => "demand",
            Role::Supply => "supply",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A demand or supply location on the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SitePoint {
    pub position: f64,
    pub role: Role,
    /// Identifier within its role, stable through all processing.
    pub id: usize,
}

impl SitePoint {
    pub fn new(position: f64, role: Role, id: usize) -> Self {
        Self { position, role, id }
    }

    pub fn demand(position: f64, id: usize) -> Self {
        Self::new(position, Role::Demand, id)
    }

    pub fn supply(position: f64, id: usize) -> Self {
        Self::new(position, Role::Supply, id)
    }
}

/// A balanced set of demand and supply points with distinct positions,
/// stored in ascending position order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    points: Vec<SitePoint>,
    n_pairs: usize,
}

impl ProblemInstance {
    /// Validates and sorts `points`.
    ///
    /// Ids must be unique within each role and, per role, cover `0..n`.
    pub fn new(mut points: Vec<SitePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInstance);
        }
        if let Some(p) = points.iter().find(|p| !p.position.is_finite()) {
            return Err(Error::NonFinitePosition(p.position));
        }
        let demand = points.iter().filter(|p| p.role == Role::Demand).count();
        let supply = points.len() - demand;
        if demand != supply {
            return Err(Error::Unbalanced { demand, supply });
        }
        let n_pairs = demand;
        let mut seen = [vec![false; n_pairs], vec![false; n_pairs]];
        for p in &points {
            let slot = &mut seen[p.role as usize];
            match slot.get_mut(p.id) {
                Some(flag) if !*flag => *flag = true,
                Some(_) => {
                    return Err(Error::DuplicateId {
                        role: p.role.as_str(),
                        id: p.id,
                    })
                }
                None => {
                    return Err(Error::Contract(format!(
                        "{} id {} outside 0..{}",
                        p.role, p.id, n_pairs
                    )))
                }
            }
        }
        points.sort_by(|a, b| a.position.total_cmp(&b.position));
        if let Some(w) = points.windows(2).find(|w| w[0].position == w[1].position) {
            return Err(Error::DuplicatePosition(w[0].position));
        }
        Ok(Self { points, n_pairs })
    }

    /// Builds an instance with ids assigned in slice order.
    pub fn from_positions(demand: &[f64], supply: &[f64]) -> Result<Self> {
        let points = demand
            .iter()
            .enumerate()
            .map(|(id, &x)| SitePoint::demand(x, id))
            .chain(
                supply
                    .iter()
                    .enumerate()
                    .map(|(id, &x)| SitePoint::supply(x, id)),
            )
            .collect();
        Self::new(points)
    }

    /// Builds an instance from `(role, position)` pairs, ids assigned per role in order.
    pub fn from_roles(points: &[(Role, f64)]) -> Result<Self> {
        let mut next = [0usize, 0usize];
        let points = points
            .iter()
            .map(|&(role, x)| {
                let id = next[role as usize];
                next[role as usize] += 1;
                SitePoint::new(x, role, id)
            })
            .collect();
        Self::new(points)
    }

    /// Points in ascending position order.
    pub fn points(&self) -> &[SitePoint] {
        &self.points
    }

    /// Number of demand (equivalently supply) points.
    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    /// Positions of the demand points indexed by id.
    pub fn demand_positions(&self) -> Vec<f64> {
        self.positions_of(Role::Demand)
    }

    /// Positions of the supply points indexed by id.
    pub fn supply_positions(&self) -> Vec<f64> {
        self.positions_of(Role::Supply)
    }

    fn positions_of(&self, role: Role) -> Vec<f64> {
        let mut out = vec![0.0; self.n_pairs];
        for p in self.points.iter().filter(|p| p.role == role) {
            out[p.id] = p.position;
        }
        out
    }
}

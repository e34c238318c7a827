use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::Serialize;

/// Instrumentation for cost evaluations.
///
/// Each chain solve owns its counter; totals across chains are merged by
/// summation, so the result does not depend on scheduling order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalCounter {
    /// Calls to `g` that were not served from a cache or memo.
    pub fresh_evaluations: u64,
    /// Local matching indicator values computed.
    pub indicator_evaluations: u64,
}

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_fresh(&mut self) {
        self.fresh_evaluations += 1;
    }

    pub fn record_indicator(&mut self) {
        self.indicator_evaluations += 1;
    }

    pub fn merge(&mut self, other: &EvalCounter) {
        self.fresh_evaluations += other.fresh_evaluations;
        self.indicator_evaluations += other.indicator_evaluations;
    }
}

impl Add for EvalCounter {
    type Output = EvalCounter;

    fn add(mut self, rhs: EvalCounter) -> EvalCounter {
        self.merge(&rhs);
        self
    }
}

impl AddAssign for EvalCounter {
    fn add_assign(&mut self, rhs: EvalCounter) {
        self.merge(&rhs);
    }
}

impl Sum for EvalCounter {
    fn sum<I: Iterator<Item = EvalCounter>>(iter: I) -> Self {
        iter.fold(EvalCounter::default(), Add::add)
    }
}

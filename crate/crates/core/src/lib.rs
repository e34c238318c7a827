//! Optimal transport between `N` demand and `N` supply points on the real
//! line when the cost is a concave, non-decreasing function of distance.
//!
//! The instance is split into alternating chains ([`chains`]), each chain is
//! reduced with local matching indicators ([`indicators`], [`solver`]), and
//! two independent oracles ([`oracle`]) are provided to check the result.
//! [`bench`] measures how the number of cost evaluations grows with `N`.
//!
//! ```
//! use concave_ot::{solve, CostSpec, ProblemInstance};
//!
//! let instance = ProblemInstance::from_positions(&[0.0, 1.1], &[1.0, 2.0]).unwrap();
//! let plan = solve(&instance, &CostSpec::Sqrt).unwrap();
//! assert_eq!(plan.pairs, vec![(0, 1), (1, 0)]);
//! ```

pub mod bench;
pub mod chains;
pub mod cli;
pub mod cost;
pub mod counter;
pub mod error;
pub mod indicators;
pub mod instance;
pub mod matching;
pub mod oracle;
pub mod solver;

pub use chains::{canonicalize, decompose, Chain};
pub use cost::{check_concavity, eval_g, pair_cost, CostSpec, Exponent, GroundCost};
pub use counter::EvalCounter;
pub use error::{Error, Result};
pub use indicators::{build_cache, IndicatorCache, PairMemo};
pub use instance::{ProblemInstance, Role, SitePoint};
pub use matching::{total_cost, Matching};
pub use oracle::{brute_force, brute_force_ranked, noncrossing_dp};
pub use solver::{solve, solve_chain, solve_with_report, MatchedPair, PairOrigin, SolveReport};

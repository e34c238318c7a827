//! Concave ground costs `c(p, q) = g(|p - q|)`.
//!
//! The solver is generic over [`GroundCost`] so that user-supplied functions
//! can be plugged in; the built-in family is [`CostSpec`].

use std::fmt;
use std::str::FromStr;

use crate::counter::EvalCounter;
use crate::error::{Error, Result};

/// A function `g` of the distance between a demand and a supply point.
///
/// The indicator-based solver is only correct when `g` is concave and
/// non-decreasing on `x > 0`. Nothing enforces this for foreign
/// implementations; see [`check_concavity`] for a numeric spot check.
pub trait GroundCost: Sync {
    /// Evaluates `g(x)` for `x >= 0` without touching any counter.
    fn g(&self, x: f64) -> Result<f64>;

    /// Short label used in reports and CSV output.
    fn label(&self) -> String;
}

impl<C: GroundCost + ?Sized> GroundCost for &C {
    fn g(&self, x: f64) -> Result<f64> {
        (**self).g(x)
    }

    fn label(&self) -> String {
        (**self).label()
    }
}

/// Exponent of a power cost, restricted to `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(a: f64) -> Result<Self> {
        if a.is_finite() && a > 0.0 && a <= 1.0 {
            Ok(Exponent(a))
        } else {
            Err(Error::InvalidExponent(a))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Built-in concave cost family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostSpec {
    /// `g(x) = x`
    Linear,
    /// `g(x) = sqrt(x)`
    Sqrt,
    /// `g(x) = ln(x)`, undefined at zero.
    Log,
    /// `g(x) = x^a` with `0 < a <= 1`.
    Power(Exponent),
}

impl CostSpec {
    pub fn power(a: f64) -> Result<Self> {
        Exponent::new(a).map(CostSpec::Power)
    }

    /// The costs exercised by the verification suites.
    pub fn verification_set() -> Vec<CostSpec> {
        vec![
            CostSpec::Linear,
            CostSpec::Sqrt,
            CostSpec::Power(Exponent(0.3)),
            CostSpec::Log,
        ]
    }
}

impl GroundCost for CostSpec {
    fn g(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::NegativeDistance(x));
        }
        let value = match self {
            CostSpec::Linear => x,
            CostSpec::Sqrt => x.sqrt(),
            CostSpec::Log => {
                if x == 0.0 {
                    return Err(Error::ZeroDistanceLog);
                }
                x.ln()
            }
            CostSpec::Power(a) => x.powf(a.get()),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFiniteCost(x))
        }
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CostSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostSpec::Linear => f.write_str("linear"),
            CostSpec::Sqrt => f.write_str("sqrt"),
            CostSpec::Log => f.write_str("log"),
            CostSpec::Power(a) => write!(f, "power:{}", a.get()),
        }
    }
}

/// Parses `linear`, `sqrt`, `log` or `power:<a>`.
impl FromStr for CostSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "linear" | "abs" => Ok(CostSpec::Linear),
            "sqrt" => Ok(CostSpec::Sqrt),
            "log" | "ln" => Ok(CostSpec::Log),
            other => {
                let exponent = other
                    .strip_prefix("power:")
                    .or_else(|| other.strip_prefix("power="))
                    .ok_or_else(|| Error::InvalidCostSpec(s.to_string()))?;
                let a: f64 = exponent
                    .parse()
                    .map_err(|_| Error::InvalidCostSpec(s.to_string()))?;
                CostSpec::power(a)
            }
        }
    }
}

/// Evaluates `g(x)` and counts it as one fresh evaluation.
pub fn eval_g<C: GroundCost + ?Sized>(cost: &C, x: f64, counter: &mut EvalCounter) -> Result<f64> {
    let value = cost.g(x)?;
    counter.record_fresh();
    Ok(value)
}

/// `c(p, q) = g(|p - q|)`, counted as one fresh evaluation.
pub fn pair_cost<C: GroundCost + ?Sized>(
    cost: &C,
    p: f64,
    q: f64,
    counter: &mut EvalCounter,
) -> Result<f64> {
    eval_g(cost, (p - q).abs(), counter)
}

/// Uncounted pair cost, for reporting and oracles.
pub(crate) fn pair_cost_uncounted<C: GroundCost + ?Sized>(cost: &C, p: f64, q: f64) -> Result<f64> {
    cost.g((p - q).abs())
}

const CONCAVITY_TOL: f64 = 1e-12;

/// Numeric spot check that `f` is concave and non-decreasing on `grid`.
///
/// Compares consecutive difference quotients, so non-uniform grids are fine.
/// Returns `false` for grids that are not strictly ascending, have fewer than
/// three points, or where `f` is not finite.
pub fn check_concavity<F: Fn(f64) -> f64>(f: F, grid: &[f64]) -> bool {
    if grid.len() < 3 || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return false;
    }
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let slopes: Vec<f64> = grid
        .windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    let non_decreasing = values.windows(2).all(|y| y[1] - y[0] >= -CONCAVITY_TOL);
    let concave = slopes.windows(2).all(|s| s[1] - s[0] <= CONCAVITY_TOL);
    non_decreasing && concave
}

/// [`check_concavity`] applied to a [`GroundCost`]; evaluation errors count as failure.
pub fn cost_is_concave_on<C: GroundCost + ?Sized>(cost: &C, grid: &[f64]) -> bool {
    check_concavity(|x| cost.g(x).unwrap_or(f64::NAN), grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_costs() -> Vec<CostSpec> {
        vec![
            CostSpec::Linear,
            CostSpec::Sqrt,
            CostSpec::Log,
            CostSpec::power(0.3).unwrap(),
            CostSpec::power(0.999).unwrap(),
            CostSpec::power(1.0).unwrap(),
        ]
    }

    #[test]
    fn eval_g_examples() {
        let mut counter = EvalCounter::new();
        assert_eq!(eval_g(&CostSpec::Linear, 2.0, &mut counter).unwrap(), 2.0);
        assert_eq!(eval_g(&CostSpec::Sqrt, 4.0, &mut counter).unwrap(), 2.0);
        let half = CostSpec::power(0.5).unwrap();
        let got = eval_g(&half, 2.0, &mut counter).unwrap();
        // exp(0.5 ln 2) as an independent route to 2^0.5
        let oracle = (0.5 * 2f64.ln()).exp();
        assert!((got - oracle).abs() < 1e-15);
        assert!((got - 1.414_213_56).abs() < 1e-8);
        assert_eq!(counter.fresh_evaluations, 3);
        assert_eq!(counter.indicator_evaluations, 0);
    }

    #[test]
    fn log_at_zero_is_a_domain_error() {
        let mut counter = EvalCounter::new();
        assert_eq!(
            eval_g(&CostSpec::Log, 0.0, &mut counter),
            Err(Error::ZeroDistanceLog)
        );
        assert_eq!(counter.fresh_evaluations, 0);
        assert_eq!(
            pair_cost(&CostSpec::Log, 1.5, 1.5, &mut counter),
            Err(Error::ZeroDistanceLog)
        );
    }

    #[test]
    fn negative_distance_rejected() {
        let mut counter = EvalCounter::new();
        assert!(matches!(
            eval_g(&CostSpec::Sqrt, -1.0, &mut counter),
            Err(Error::NegativeDistance(_))
        ));
    }

    #[test]
    fn pair_cost_examples() {
        let mut counter = EvalCounter::new();
        assert_eq!(
            pair_cost(&CostSpec::Linear, 1.0, 4.0, &mut counter).unwrap(),
            3.0
        );
        assert_eq!(
            pair_cost(&CostSpec::Linear, 4.0, 1.0, &mut counter).unwrap(),
            3.0
        );
        let root3 = pair_cost(&CostSpec::Sqrt, 4.0, 1.0, &mut counter).unwrap();
        assert!((root3 * root3 - 3.0).abs() < 1e-15);
        assert!((root3 - 1.732_050_8).abs() < 1e-7);
        assert_eq!(counter.fresh_evaluations, 3);
    }

    #[test]
    fn exponent_bounds() {
        assert!(CostSpec::power(1.0).is_ok());
        assert!(CostSpec::power(1e-3).is_ok());
        assert_eq!(CostSpec::power(1.5), Err(Error::InvalidExponent(1.5)));
        assert!(CostSpec::power(0.0).is_err());
        assert!(CostSpec::power(-0.5).is_err());
        assert!(CostSpec::power(f64::NAN).is_err());
    }

    #[test]
    fn power_one_matches_linear() {
        let one = CostSpec::power(1.0).unwrap();
        for x in [0.0, 1e-9, 0.3, 1.0, 17.25] {
            assert_eq!(one.g(x).unwrap(), CostSpec::Linear.g(x).unwrap());
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        for cost in all_costs() {
            let text = cost.to_string();
            assert_eq!(text.parse::<CostSpec>().unwrap(), cost);
        }
        assert_eq!(
            "Power=0.5".parse::<CostSpec>().unwrap(),
            CostSpec::power(0.5).unwrap()
        );
        assert!("power:2".parse::<CostSpec>().is_err());
        assert!("cubic".parse::<CostSpec>().is_err());
    }

    #[test]
    fn concavity_spot_checks() {
        let grid: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        assert!(cost_is_concave_on(&CostSpec::Sqrt, &grid));
        assert!(cost_is_concave_on(&CostSpec::Linear, &grid));
        assert!(cost_is_concave_on(&CostSpec::Linear, &[1e-6, 3.0, 1e4]));
        assert!(!check_concavity(|x| x * x, &grid));
        // decreasing but concave
        assert!(!check_concavity(|x| -x, &grid));
        assert!(!check_concavity(f64::sqrt, &[0.1, 0.2]));
        assert!(!check_concavity(f64::sqrt, &[0.3, 0.2, 0.4]));
    }

    proptest! {
        #[test]
        fn pair_cost_is_symmetric(p in -1e3f64..1e3, q in -1e3f64..1e3) {
            prop_assume!(p != q);
            let mut counter = EvalCounter::new();
            for cost in all_costs() {
                let a = pair_cost(&cost, p, q, &mut counter).unwrap();
                let b = pair_cost(&cost, q, p, &mut counter).unwrap();
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn g_is_monotone_and_concave(x in 1e-6f64..10.0, gap in 1e-6f64..10.0, delta in 1e-6f64..10.0) {
            let y = x + gap;
            for cost in all_costs() {
                let g = |t: f64| cost.g(t).unwrap();
                prop_assert!(g(x) <= g(y));
                prop_assert!(g(x + delta) - g(x) >= g(y + delta) - g(y) - 1e-12);
            }
        }
    }
}

//! Evaluation-count benchmark: mean number of `g` evaluations against the
//! number of pairs, and the slope of that curve on log-log axes.
//!
//! Every sample draws its points from its own ChaCha stream, selected by
//! `(n, sample index)` under the configured seed. Samples therefore do not
//! depend on execution order and the same points are reused for every cost.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cost::{CostSpec, GroundCost};
use crate::counter::EvalCounter;
use crate::error::{Error, Result};
use crate::instance::{ProblemInstance, Role};
use crate::solver::solve_with_report;

/// How random instances are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    /// `n` demand and `n` supply positions, independent uniform on `[0, 1]`.
    /// The instance usually splits into many chains.
    #[default]
    Independent,
    /// `2n` uniform positions on `[0, 1]`, sorted and labelled
    /// demand/supply alternately: one chain of `n` pairs.
    SingleChain,
}

impl std::str::FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(Sampling::Independent),
            "chain" | "single-chain" => Ok(Sampling::SingleChain),
            other => Err(Error::Contract(format!("unknown sampling `{other}`"))),
        }
    }
}

/// Which counter the slope is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    /// Cache-missing evaluations of `g`.
    #[default]
    Fresh,
    /// Indicator values computed.
    Indicators,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fresh" => Ok(Metric::Fresh),
            "indicators" => Ok(Metric::Indicators),
            other => Err(Error::Contract(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub samples_per_size: usize,
    pub seed: u64,
    pub costs: Vec<CostSpec>,
    pub sampling: Sampling,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: (100..=500).step_by(50).collect(),
            samples_per_size: 100,
            seed: 0,
            costs: vec![
                CostSpec::power(1e-3).expect("valid exponent"),
                CostSpec::Sqrt,
                CostSpec::power(1.0 - 1e-3).expect("valid exponent"),
            ],
            sampling: Sampling::Independent,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 2) {
            return Err(Error::Contract("bench sizes must be >= 2".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract(
                "bench sizes must be strictly ascending".into(),
            ));
        }
        if self.samples_per_size == 0 {
            return Err(Error::Contract(
                "at least one sample per size is required".into(),
            ));
        }
        if self.costs.is_empty() {
            return Err(Error::Contract("no cost to benchmark".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallTime {
    pub mean_secs: f64,
    pub min_secs: f64,
    pub max_secs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub cost: String,
    pub n: usize,
    pub mean_fresh_evaluations: f64,
    pub mean_indicator_evaluations: f64,
    pub wall_time: WallTime,
}

impl BenchRecord {
    pub fn mean(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Fresh => self.mean_fresh_evaluations,
            Metric::Indicators => self.mean_indicator_evaluations,
        }
    }
}

/// The random stream for sample `sample` at size `n`.
pub fn sample_rng(seed: u64, n: usize, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | sample as u64);
    rng
}

/// `n_pairs` demand and supply positions, independent uniform on `[0, 1]`.
pub fn generate_instance<R: Rng + ?Sized>(n_pairs: usize, rng: &mut R) -> ProblemInstance {
    loop {
        let demand: Vec<f64> = (0..n_pairs).map(|_| rng.gen::<f64>()).collect();
        let supply: Vec<f64> = (0..n_pairs).map(|_| rng.gen::<f64>()).collect();
        match ProblemInstance::from_positions(&demand, &supply) {
            Ok(instance) => return instance,
            // duplicate draw, probability ~ n^2 2^-53
            Err(_) => continue,
        }
    }
}

/// One alternating chain of `n_pairs` pairs with uniform positions on `[0, 1]`.
pub fn generate_chain_instance<R: Rng + ?Sized>(n_pairs: usize, rng: &mut R) -> ProblemInstance {
    loop {
        let mut xs: Vec<f64> = (0..2 * n_pairs).map(|_| rng.gen::<f64>()).collect();
        xs.sort_by(f64::total_cmp);
        let points: Vec<(Role, f64)> = xs
            .into_iter()
            .enumerate()
            .map(|(i, x)| {
                (
                    if i % 2 == 0 {
                        Role::Demand
                    } else {
                        Role::Supply
                    },
                    x,
                )
            })
            .collect();
        if let Ok(instance) = ProblemInstance::from_roles(&points) {
            return instance;
        }
    }
}

pub fn draw(sampling: Sampling, n_pairs: usize, seed: u64, sample: usize) -> ProblemInstance {
    let mut rng = sample_rng(seed, n_pairs, sample);
    match sampling {
        Sampling::Independent => generate_instance(n_pairs, &mut rng),
        Sampling::SingleChain => generate_chain_instance(n_pairs, &mut rng),
    }
}

/// Runs the benchmark; one record per `(cost, n)`, costs in config order.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    config.validate()?;
    let mut records = Vec::with_capacity(config.costs.len() * config.sizes.len());
    for cost in &config.costs {
        for &n in &config.sizes {
            let runs = (0..config.samples_per_size)
                .into_par_iter()
                .map(|sample| {
                    let instance = draw(config.sampling, n, config.seed, sample);
                    let start = Instant::now();
                    let report = solve_with_report(&instance, cost)?;
                    Ok((report.counter, start.elapsed().as_secs_f64()))
                })
                .collect::<Result<Vec<(EvalCounter, f64)>>>()?;
            records.push(summarize(cost, n, &runs));
        }
    }
    Ok(records)
}

fn summarize<C: GroundCost + ?Sized>(
    cost: &C,
    n: usize,
    runs: &[(EvalCounter, f64)],
) -> BenchRecord {
    let m = runs.len() as f64;
    let total: EvalCounter = runs.iter().map(|r| r.0).sum();
    let times = runs.iter().map(|r| r.1);
    BenchRecord {
        cost: cost.label(),
        n,
        mean_fresh_evaluations: total.fresh_evaluations as f64 / m,
        mean_indicator_evaluations: total.indicator_evaluations as f64 / m,
        wall_time: WallTime {
            mean_secs: times.clone().sum::<f64>() / m,
            min_secs: times.clone().fold(f64::INFINITY, f64::min),
            max_secs: times.fold(0.0, f64::max),
        },
    }
}

/// Least-squares slope of `ln(count)` against `ln(n)`.
pub fn fit_slope(points: &[(usize, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Contract(
            "slope fit needs at least two points".into(),
        ));
    }
    if let Some(&(_, c)) = points.iter().find(|&&(_, c)| !(c > 0.0)) {
        return Err(Error::NonPositiveCount(c));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, c)| c.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Contract(
            "slope fit needs at least two distinct sizes".into(),
        ));
    }
    Ok(sxy / sxx)
}

/// Slope of one cost's records under `metric`.
pub fn fit_records(records: &[&BenchRecord], metric: Metric) -> Result<f64> {
    let points: Vec<(usize, f64)> = records.iter().map(|r| (r.n, r.mean(metric))).collect();
    fit_slope(&points)
}

/// Records grouped by cost label, in first-seen order.
pub fn group_by_cost(records: &[BenchRecord]) -> Vec<(String, Vec<&BenchRecord>)> {
    let mut groups: Vec<(String, Vec<&BenchRecord>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(label, _)| *label == r.cost) {
            Some((_, group)) => group.push(r),
            None => groups.push((r.cost.clone(), vec![r])),
        }
    }
    groups
}

/// Fitted slope per cost.
pub fn slopes(records: &[BenchRecord], metric: Metric) -> Result<Vec<(String, f64)>> {
    group_by_cost(records)
        .into_iter()
        .map(|(label, group)| fit_records(&group, metric).map(|a| (label, a)))
        .collect()
}

/// CSV with one row per `(cost, n)` and a `#`-prefixed summary of slopes.
///
/// `slope_partial` is the slope fitted on this cost's rows up to and
/// including the current one; empty on the first row.
pub fn to_csv(records: &[BenchRecord], metric: Metric) -> Result<String> {
    let mut out = String::from("cost,n,mean_fresh_evals,mean_indicator_evals,slope_partial\n");
    let groups = group_by_cost(records);
    for (label, group) in &groups {
        for (row, r) in group.iter().enumerate() {
            let partial = if row == 0 {
                String::new()
            } else {
                format!("{:.6}", fit_records(&group[..=row], metric)?)
            };
            writeln!(
                out,
                "{},{},{},{},{}",
                label, r.n, r.mean_fresh_evaluations, r.mean_indicator_evaluations, partial
            )
            .expect("writing to a String");
        }
    }
    let metric_name = match metric {
        Metric::Fresh => "fresh",
        Metric::Indicators => "indicators",
    };
    writeln!(out, "# metric,{metric_name}").expect("writing to a String");
    for (label, group) in &groups {
        if group.len() >= 2 {
            writeln!(out, "# alpha,{},{:.6}", label, fit_records(group, metric)?)
                .expect("writing to a String");
        }
    }
    Ok(out)
}

/// A gnuplot script that plots `csv_path` on log-log axes.
pub fn plot_script(records: &[BenchRecord], csv_path: &str, metric: Metric) -> String {
    let column = match metric {
        Metric::Fresh => 3,
        Metric::Indicators => 4,
    };
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset logscale xy\n");
    s.push_str("set xlabel 'pairs N'\nset ylabel 'evaluations of g'\nset key left top\n");
    let plots: Vec<String> = group_by_cost(records)
        .into_iter()
        .map(|(label, _)| {
            format!(
                "'{csv_path}' using (stringcolumn(1) eq '{label}' ? $2 : 1/0):{column} with linespoints title '{label}'"
            )
        })
        .chain(std::iter::once("(x-1)**2 title 'worst case (N-1)^2'".to_string()))
        .collect();
    writeln!(s, "plot {}", plots.join(", \\\n     ")).expect("writing to a String");
    s
}

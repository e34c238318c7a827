//! Command-line front end.
//!
//! Input files hold one point per line, `<role>,<position>`, where the role is
//! `demand` / `p` or `supply` / `q`. `#` starts a comment and blank lines are
//! ignored. Ids are assigned per role in file order.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a disagreement, 2 for bad
//! input or flags, 3 when the solver reports an internal integrity failure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bench::{self, BenchConfig, Metric, Sampling};
use crate::chains::decompose;
use crate::cost::{pair_cost_uncounted, CostSpec, GroundCost};
use crate::error::{Error, Result};
use crate::instance::{ProblemInstance, Role, SitePoint};
use crate::oracle::{brute_force, noncrossing_dp, BRUTE_FORCE_LIMIT, NONCROSSING_DP_LIMIT};
use crate::solver::{solve_with_report, SolveReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DISAGREEMENT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTEGRITY: i32 = 3;

/// Relative tolerance used by `verify` when comparing total costs.
pub const VERIFY_REL_TOL: f64 = 1e-9;

const VERSION_LINE: &str = concat!("# concave-ot ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Parser)]
#[command(
    name = "concave-ot",
    version,
    about = "Optimal transport on the line under concave costs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance file and print the optimal plan.
    Solve {
        input: PathBuf,
        #[arg(long, default_value = "sqrt")]
        cost: CostSpec,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// List the alternating chains of an instance file.
    Chains { input: PathBuf },
    /// Compare the solver with the exact oracles on random instances.
    Verify {
        #[arg(long, default_value_t = 8)]
        max_n: usize,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Repeatable; defaults to linear, sqrt, power:0.3 and log.
        #[arg(long = "cost")]
        costs: Vec<CostSpec>,
    },
    /// Measure evaluation counts and fit log-log slopes; CSV output.
    Bench {
        #[arg(long, default_value = "100:500:50")]
        sizes: SizeRange,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Repeatable; defaults to power:0.001, sqrt and power:0.999.
        #[arg(long = "cost")]
        costs: Vec<CostSpec>,
        #[arg(long, default_value = "fresh")]
        metric: Metric,
        #[arg(long, default_value = "independent")]
        sampling: Sampling,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write a gnuplot script for the CSV (requires `--output`).
        #[arg(long, requires = "output")]
        plot_script: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

/// `a:b:step`, inclusive of `b` when it lies on the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeRange(pub Vec<usize>);

impl std::str::FromStr for SizeRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Contract(format!("expected sizes as a:b:step, got `{s}`"));
        let parts: Vec<usize> = s
            .split(':')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let [a, b, step] = parts[..] else {
            return Err(bad());
        };
        if step == 0 || a > b {
            return Err(bad());
        }
        Ok(SizeRange((a..=b).step_by(step).collect()))
    }
}

/// Parses an instance file.
pub fn parse_instance(text: &str) -> Result<ProblemInstance> {
    let mut points = Vec::new();
    let mut next_id = [0usize; 2];
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let parse_error = |message: String| Error::Parse { line, message };
        let (role, position) = content
            .split_once(',')
            .ok_or_else(|| parse_error(format!("expected `<role>,<position>`, got `{content}`")))?;
        let role = match role.trim().to_ascii_lowercase().as_str() {
            "demand" | "p" => Role::Demand,
            "supply" | "q" => Role::Supply,
            other => return Err(parse_error(format!("unknown role `{other}`"))),
        };
        let position: f64 = position
            .trim()
            .parse()
            .map_err(|_| parse_error(format!("invalid position `{}`", position.trim())))?;
        if !position.is_finite() {
            return Err(parse_error(format!("non-finite position `{position}`")));
        }
        let slot = &mut next_id[role as usize];
        points.push(SitePoint::new(position, role, *slot));
        *slot += 1;
    }
    ProblemInstance::new(points)
}

/// Writes an instance in the input grammar: demands by id, then supplies by
/// id. Parsing the result yields the same instance.
pub fn serialize_instance(instance: &ProblemInstance) -> String {
    let mut out = String::new();
    for (role, positions) in [
        (Role::Demand, instance.demand_positions()),
        (Role::Supply, instance.supply_positions()),
    ] {
        for x in positions {
            writeln!(out, "{role},{x:?}").expect("writing to a String");
        }
    }
    out
}

pub fn read_instance(path: &Path) -> Result<ProblemInstance> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_instance(&text)
}

#[derive(Serialize)]
struct JsonPair {
    demand: usize,
    supply: usize,
    distance: f64,
    cost: f64,
}

#[derive(Serialize)]
struct JsonEvaluations {
    fresh: u64,
    indicators: u64,
}

#[derive(Serialize)]
struct JsonPlan {
    pairs: Vec<JsonPair>,
    total_cost: f64,
    evaluations: JsonEvaluations,
}

fn priced_pairs<C: GroundCost + ?Sized>(
    instance: &ProblemInstance,
    report: &SolveReport,
    cost: &C,
) -> Result<Vec<JsonPair>> {
    let demand = instance.demand_positions();
    let supply = instance.supply_positions();
    report
        .matching
        .pairs
        .iter()
        .map(|&(d, s)| {
            Ok(JsonPair {
                demand: d,
                supply: s,
                distance: (demand[d] - supply[s]).abs(),
                cost: pair_cost_uncounted(cost, demand[d], supply[s])?,
            })
        })
        .collect()
}

/// Serialized plan. The TSV form starts with a version line; JSON has none.
pub fn format_plan<C: GroundCost + ?Sized>(
    instance: &ProblemInstance,
    report: &SolveReport,
    cost: &C,
    format: Format,
) -> Result<String> {
    let pairs = priced_pairs(instance, report, cost)?;
    let mut out = String::new();
    match format {
        Format::Json => {
            let plan = JsonPlan {
                pairs,
                total_cost: report.matching.total_cost,
                evaluations: JsonEvaluations {
                    fresh: report.counter.fresh_evaluations,
                    indicators: report.counter.indicator_evaluations,
                },
            };
            out = serde_json::to_string(&plan).map_err(|e| Error::Contract(e.to_string()))?;
            out.push('\n');
        }
        Format::Tsv => {
            writeln!(out, "{VERSION_LINE}").unwrap();
            writeln!(out, "demand\tsupply\tdistance\tcost").unwrap();
            for p in &pairs {
                writeln!(
                    out,
                    "{}\t{}\t{:?}\t{:?}",
                    p.demand, p.supply, p.distance, p.cost
                )
                .unwrap();
            }
            writeln!(out, "# total_cost\t{:?}", report.matching.total_cost).unwrap();
            writeln!(
                out,
                "# fresh_evaluations\t{}",
                report.counter.fresh_evaluations
            )
            .unwrap();
            writeln!(
                out,
                "# indicator_evaluations\t{}",
                report.counter.indicator_evaluations
            )
            .unwrap();
        }
    }
    Ok(out)
}

/// One block per chain: header with the leading role, then its points.
pub fn format_chains(instance: &ProblemInstance) -> String {
    let mut out = String::new();
    let chains = decompose(instance);
    writeln!(out, "{VERSION_LINE}").unwrap();
    writeln!(out, "# {} chains", chains.len()).unwrap();
    for (index, chain) in chains.iter().enumerate() {
        writeln!(
            out,
            "chain {index}\tleading={}\tpairs={}",
            chain.leading_role,
            chain.n_pairs()
        )
        .unwrap();
        for p in &chain.points {
            writeln!(out, "  {}\t{}\t{:?}", p.role, p.id, p.position).unwrap();
        }
    }
    out
}

/// Settings of a verification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub max_n: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            max_n: 8,
            trials: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Disagreement {
    pub instance: ProblemInstance,
    pub cost: String,
    pub solver_cost: f64,
    pub oracle: &'static str,
    pub oracle_cost: f64,
}

impl Disagreement {
    /// The instance as an input file, with the disagreement in comments.
    pub fn to_input_file(&self) -> String {
        format!(
            "# counterexample under cost {}\n# solver {:?}, {} {:?}\n{}",
            self.cost,
            self.solver_cost,
            self.oracle,
            self.oracle_cost,
            serialize_instance(&self.instance)
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOutcome {
    pub instances: usize,
    pub comparisons: usize,
    pub counterexample: Option<Disagreement>,
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= VERIFY_REL_TOL * a.abs().max(b.abs())
}

/// Solver against both oracles on one instance; the first oracle whose total
/// cost differs.
pub fn check_instance<C: GroundCost + ?Sized>(
    instance: &ProblemInstance,
    cost: &C,
) -> Result<(usize, Option<Disagreement>)> {
    let solver_cost = solve_with_report(instance, cost)?.matching.total_cost;
    let mut comparisons = 0;
    let mut oracles: Vec<(&'static str, f64)> = Vec::with_capacity(2);
    if instance.n_pairs() <= BRUTE_FORCE_LIMIT {
        oracles.push((
            "permutation oracle",
            brute_force(instance, cost)?.total_cost,
        ));
    }
    oracles.push((
        "non-crossing DP",
        noncrossing_dp(instance, cost)?.total_cost,
    ));
    for (oracle, oracle_cost) in oracles {
        comparisons += 1;
        if !rel_close(solver_cost, oracle_cost) {
            return Ok((
                comparisons,
                Some(Disagreement {
                    instance: instance.clone(),
                    cost: cost.label(),
                    solver_cost,
                    oracle,
                    oracle_cost,
                }),
            ));
        }
    }
    Ok((comparisons, None))
}

/// Random instances with `1..=max_n` pairs, every cost on every instance.
/// Stops at the first disagreement.
pub fn verify<C: GroundCost>(config: VerifyConfig, costs: &[C]) -> Result<VerifyOutcome> {
    if config.max_n == 0 || config.max_n > NONCROSSING_DP_LIMIT {
        return Err(Error::Contract(format!(
            "max-n must lie in 1..={NONCROSSING_DP_LIMIT}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut outcome = VerifyOutcome::default();
    for _ in 0..config.trials {
        let n = rng.gen_range(1..=config.max_n);
        let instance = bench::generate_instance(n, &mut rng);
        outcome.instances += 1;
        for cost in costs {
            let (comparisons, found) = check_instance(&instance, cost)?;
            outcome.comparisons += comparisons;
            if found.is_some() {
                outcome.counterexample = found;
                return Ok(outcome);
            }
        }
    }
    Ok(outcome)
}

enum Failure {
    Input(Error),
    Integrity(Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Integrity(_) => EXIT_INTEGRITY,
        }
    }

    fn error(&self) -> &Error {
        match self {
            Failure::Input(e) | Failure::Integrity(e) => e,
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::Input(Error::Contract(format!("i/o error: {e}")))
}

/// Errors raised once the input is accepted are the solver's fault.
fn solver_failure(e: Error) -> Failure {
    if e.is_integrity() {
        Failure::Integrity(e)
    } else {
        Failure::Integrity(Error::Contract(format!(
            "solver failed on valid input: {e}"
        )))
    }
}

/// Parses `args` (program name first) and runs the command. Returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_INPUT
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.error());
            failure.code()
        }
    }
}

fn dispatch(
    command: Command,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::result::Result<i32, Failure> {
    match command {
        Command::Solve {
            input,
            cost,
            format,
        } => {
            let instance = read_instance(&input).map_err(Failure::Input)?;
            let report = solve_with_report(&instance, &cost).map_err(solver_failure)?;
            let text = format_plan(&instance, &report, &cost, format).map_err(solver_failure)?;
            out.write_all(text.as_bytes()).map_err(io_failure)?;
            Ok(EXIT_OK)
        }
        Command::Chains { input } => {
            let instance = read_instance(&input).map_err(Failure::Input)?;
            out.write_all(format_chains(&instance).as_bytes())
                .map_err(io_failure)?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            max_n,
            trials,
            seed,
            costs,
        } => {
            let costs = if costs.is_empty() {
                CostSpec::verification_set()
            } else {
                costs
            };
            let config = VerifyConfig {
                max_n,
                trials,
                seed,
            };
            let outcome = match verify(config, &costs) {
                Ok(o) => o,
                Err(e @ Error::Contract(_)) => return Err(Failure::Input(e)),
                Err(e) => return Err(solver_failure(e)),
            };
            match outcome.counterexample {
                None => {
                    writeln!(
                        out,
                        "ok: {} instances, {} oracle comparisons, all within {VERIFY_REL_TOL:e}",
                        outcome.instances, outcome.comparisons
                    )
                    .map_err(io_failure)?;
                    Ok(EXIT_OK)
                }
                Some(d) => {
                    writeln!(
                        err,
                        "disagreement under {}: solver {:?}, {} {:?}",
                        d.cost, d.solver_cost, d.oracle, d.oracle_cost
                    )
                    .map_err(io_failure)?;
                    out.write_all(d.to_input_file().as_bytes())
                        .map_err(io_failure)?;
                    Ok(EXIT_DISAGREEMENT)
                }
            }
        }
        Command::Bench {
            sizes,
            samples,
            seed,
            costs,
            metric,
            sampling,
            output,
            plot_script,
        } => {
            let defaults = BenchConfig::default();
            let config = BenchConfig {
                sizes: sizes.0,
                samples_per_size: samples,
                seed,
                costs: if costs.is_empty() {
                    defaults.costs
                } else {
                    costs
                },
                sampling,
            };
            config.validate().map_err(Failure::Input)?;
            let records = bench::run_bench(&config).map_err(solver_failure)?;
            let csv = bench::to_csv(&records, metric).map_err(Failure::Input)?;
            match output {
                None => out.write_all(csv.as_bytes()).map_err(io_failure)?,
                Some(path) => {
                    std::fs::write(&path, &csv).map_err(io_failure)?;
                    for line in csv.lines().filter(|l| l.starts_with('#')) {
                        writeln!(out, "{line}").map_err(io_failure)?;
                    }
                    if let Some(script) = plot_script {
                        let text = bench::plot_script(&records, &path.to_string_lossy(), metric);
                        std::fs::write(script, text).map_err(io_failure)?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
    }
}

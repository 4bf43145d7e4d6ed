mod render;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lapguard::io::{
    compare_with_reference, parse_error_bounds, parse_matrix, parse_perturbation, AnalysisReport,
    BoundOutput, CriticalOutput, FormatError, SolveOutput, StepLine,
};
use lapguard::perturbation::{elementwise_sensitivities_with, SensitivityOptions};
use lapguard::sim::{run_simulation, summarize, Policy, Scenario, SimLog};
use lapguard::{
    allowable_bound, certify_optimal, critical_search, halfspace_intervals, solve_lap,
    verify_allowable, BipartiteInstance, CriticalOptions, ErrorBounds, Perturbation, SolveReport,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::render::Format;

#[derive(Parser)]
#[command(
    name = "lapguard",
    version,
    about = "Assignment solving and perturbation analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal assignment and its cost.
    Solve(InputArgs),
    /// Element-wise sensitivity of every edge.
    Sensitivity {
        #[command(flatten)]
        input: InputArgs,
        /// Report raw values even when the optimum is not unique.
        #[arg(long)]
        allow_degenerate: bool,
    },
    /// Sensitivities divided by twice the task count.
    Bound(InputArgs),
    /// Iterated search for a critical perturbation.
    Critical {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Compare against a reference perturbation file.
        #[arg(long, value_name = "PATH")]
        reference: Option<PathBuf>,
    },
    /// Half-space interval table around a perturbation.
    Intervals {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// zero, bound, critical, or a perturbation file.
        #[arg(long, value_name = "SOURCE", default_value = "critical")]
        perturbation: String,
    },
    /// Whether the optimum survives a perturbation. Exits 3 when it does not.
    Verify {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// zero, bound, critical, or a perturbation file.
        #[arg(long, value_name = "SOURCE")]
        perturbation: String,
    },
    /// Whether measurement errors within EPS provably keep the optimum.
    /// Exits 3 when certification fails.
    Certify {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Uniform bound, or a file of per-edge bounds.
        #[arg(long, value_name = "REAL|PATH")]
        eps: String,
        /// zero, bound, critical, or a perturbation file.
        #[arg(long, value_name = "SOURCE", default_value = "critical")]
        perturbation: String,
    },
    /// Full report: solve, sensitivities, bound, critical search, intervals.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Noisy pursuit simulation. Emits one record per step, then a summary.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Cost matrix file; rows are agents, columns are tasks.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct SearchArgs {
    /// Stop tolerance for the critical search.
    #[arg(long, value_name = "REAL")]
    tol: Option<f64>,
    #[arg(long, value_name = "INT", default_value_t = lapguard::perturbation::DEFAULT_MAX_ITERS)]
    max_iters: usize,
}

impl SearchArgs {
    fn options(&self) -> CriticalOptions {
        CriticalOptions {
            stop_tol: self.tol,
            max_iters: self.max_iters,
            ..CriticalOptions::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Naive,
    Certified,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Naive => Policy::Naive,
            PolicyArg::Certified => Policy::Certified,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario JSON; defaults to the built-in crossing pair.
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// Noise half-width, overriding the scenario's.
    #[arg(long, value_name = "REAL")]
    eps: Option<f64>,
    #[arg(long, value_name = "INT", conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Seed range `A..B` (exclusive) or `A..=B`, run in parallel.
    #[arg(long, value_name = "A..B")]
    seeds: Option<String>,
    #[arg(long, value_enum, default_value = "certified")]
    policy: PolicyArg,
    /// Print only the summary records.
    #[arg(long)]
    summary_only: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

const DEFAULT_NOISE: f64 = 0.05;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    match run(cli.command, &mut out) {
        Ok(code) => code,
        Err(err) => {
            let _ = out.flush();
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 1 for infeasible or degenerate instances, 2 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let model = err.chain().find_map(|e| {
        e.downcast_ref::<lapguard::Error>()
            .or_else(|| match e.downcast_ref::<FormatError>() {
                Some(FormatError::Model(m)) => Some(m),
                _ => None,
            })
    });
    match model {
        Some(
            lapguard::Error::Infeasible
            | lapguard::Error::DegenerateOptimum(_)
            | lapguard::Error::NotOptimal { .. },
        ) => 1,
        _ => 2,
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(input: &InputArgs) -> anyhow::Result<BipartiteInstance> {
    let text = read(&input.input)?;
    parse_matrix(&text).with_context(|| format!("parsing {}", input.input.display()))
}

fn solved(instance: &BipartiteInstance) -> anyhow::Result<SolveReport> {
    Ok(solve_lap(instance)?)
}

fn perturbation_from(
    source: &str,
    instance: &BipartiteInstance,
    report: &SolveReport,
    search: &SearchArgs,
) -> anyhow::Result<Perturbation> {
    let optimum = &report.assignment;
    Ok(match source {
        "zero" => Perturbation::zero(instance),
        "bound" => {
            let s = lapguard::elementwise_sensitivities(instance, optimum)?;
            allowable_bound(&s, instance.num_tasks()).perturbation
        }
        "critical" => critical_search(instance, optimum, &search.options())?.perturbation,
        path => {
            let text = read(Path::new(path))?;
            parse_perturbation(&text, instance).with_context(|| format!("parsing {path}"))?
        }
    })
}

fn error_bounds(eps: &str, instance: &BipartiteInstance) -> anyhow::Result<ErrorBounds> {
    if let Ok(v) = eps.parse::<f64>() {
        if !v.is_finite() {
            bail!("--eps must be finite, got {eps}");
        }
        return Ok(ErrorBounds::uniform(instance.weights(), v)?);
    }
    let text = read(Path::new(eps))?;
    parse_error_bounds(&text, instance).with_context(|| format!("parsing {eps}"))
}

fn emit<T: Serialize>(out: &mut impl Write, value: &T) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct Verdict<'a> {
    #[serde(rename = "result")]
    holds: bool,
    perturbation: &'a str,
}

fn verdict_code(holds: bool) -> ExitCode {
    if holds {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

fn run(command: Command, out: &mut impl Write) -> anyhow::Result<ExitCode> {
    match command {
        Command::Solve(input) => {
            let instance = load(&input)?;
            let report = solved(&instance)?;
            match input.format {
                Format::Json => emit(out, &SolveOutput::from(&report))?,
                Format::Table => render::solve(out, &report)?,
            }
        }
        Command::Sensitivity {
            input,
            allow_degenerate,
        } => {
            let instance = load(&input)?;
            let report = solved(&instance)?;
            let options = SensitivityOptions {
                allow_degenerate,
                ..SensitivityOptions::default()
            };
            let s = elementwise_sensitivities_with(&instance, &report.assignment, options)?;
            let cells = lapguard::io::sensitivity_cells(&s);
            match input.format {
                Format::Json => emit(out, &serde_json::json!({ "sensitivities": cells }))?,
                Format::Table => render::grid(out, &cells)?,
            }
        }
        Command::Bound(input) => {
            let instance = load(&input)?;
            let report = solved(&instance)?;
            let s = lapguard::elementwise_sensitivities(&instance, &report.assignment)?;
            let bound = BoundOutput::from(&allowable_bound(&s, instance.num_tasks()));
            match input.format {
                Format::Json => emit(out, &bound)?,
                Format::Table => render::bound(out, &bound)?,
            }
        }
        Command::Critical {
            input,
            search,
            reference,
        } => {
            let instance = load(&input)?;
            let report = solved(&instance)?;
            let optimum = &report.assignment;
            let result = critical_search(&instance, optimum, &search.options())?;
            let critical = CriticalOutput::new(&instance, optimum, &result)?;
            let comparison = match reference {
                Some(path) => {
                    let text = read(&path)?;
                    let reference = parse_perturbation(&text, &instance)
                        .with_context(|| format!("parsing {}", path.display()))?;
                    Some(compare_with_reference(
                        &instance,
                        optimum,
                        &result.perturbation,
                        &reference,
                        result.stop_tol,
                    )?)
                }
                None => None,
            };
            match input.format {
                Format::Json => {
                    let mut value = serde_json::to_value(&critical)?;
                    if let Some(c) = &comparison {
                        value["reference"] = serde_json::to_value(c)?;
                    }
                    emit(out, &value)?
                }
                Format::Table => render::critical(out, &critical, comparison.as_ref())?,
            }
        }
        Command::Intervals {
            input,
            search,
            perturbation,
        } => {
            let instance = load(&input)?;
            let report = solved(&instance)?;
            let delta = perturbation_from(&perturbation, &instance, &report, &search)?;
            let table = halfspace_intervals(&delta, &report.assignment);
            let rows = lapguard::io::interval_rows(&table, &report.assignment);
            match input.format {
                Format::Json => emit(out, &serde_json::json!({ "intervals": rows }))?,
                Format::Table => render::intervals(out, &rows)?,
            }
        }
        Command::Verify {
            input,
            search,
            perturbation,
        } => {
            let instance = load(&input)?;
            let report = solved(&instance)?;
            let delta = perturbation_from(&perturbation, &instance, &report, &search)?;
            let holds = verify_allowable(&instance, &report.assignment, &delta)?;
            render::verdict(
                out,
                input.format,
                &Verdict {
                    holds,
                    perturbation: &perturbation,
                },
            )?;
            return Ok(verdict_code(holds));
        }
        Command::Certify {
            input,
            search,
            eps,
            perturbation,
        } => {
            let instance = load(&input)?;
            let report = solved(&instance)?;
            let bounds = error_bounds(&eps, &instance)?;
            let delta = perturbation_from(&perturbation, &instance, &report, &search)?;
            let holds = certify_optimal(&delta, &report.assignment, &bounds)?;
            render::verdict(
                out,
                input.format,
                &Verdict {
                    holds,
                    perturbation: &perturbation,
                },
            )?;
            return Ok(verdict_code(holds));
        }
        Command::Analyze { input, search } => {
            let instance = load(&input)?;
            let report = AnalysisReport::build(&instance, &search.options())?;
            match input.format {
                Format::Json => emit(out, &report)?,
                Format::Table => render::analysis(out, &report)?,
            }
        }
        Command::Simulate(args) => simulate(out, &args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_seeds(spec: &str) -> anyhow::Result<Vec<u64>> {
    let (lo, hi, inclusive) = if let Some((a, b)) = spec.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = spec.split_once("..") {
        (a, b, false)
    } else {
        bail!("--seeds expects A..B or A..=B, got `{spec}`");
    };
    let lo: u64 = lo
        .trim()
        .parse()
        .with_context(|| format!("bad seed range `{spec}`"))?;
    let hi: u64 = hi
        .trim()
        .parse()
        .with_context(|| format!("bad seed range `{spec}`"))?;
    let seeds: Vec<u64> = if inclusive {
        (lo..=hi).collect()
    } else {
        (lo..hi).collect()
    };
    if seeds.is_empty() {
        bail!("seed range `{spec}` is empty");
    }
    Ok(seeds)
}

fn simulate(out: &mut impl Write, args: &SimulateArgs) -> anyhow::Result<()> {
    let mut base = match &args.scenario {
        Some(path) => serde_json::from_str::<Scenario>(&read(path)?)
            .with_context(|| format!("parsing {}", path.display()))?,
        None => Scenario::crossing_pair(DEFAULT_NOISE, 0),
    };
    if let Some(eps) = args.eps {
        base.noise_bound = eps;
    }
    let seeds = match (&args.seeds, args.seed) {
        (Some(spec), _) => parse_seeds(spec)?,
        (None, Some(seed)) => vec![seed],
        (None, None) => vec![base.seed],
    };
    let policy = Policy::from(args.policy);
    let logs: Vec<SimLog> = seeds
        .par_iter()
        .map(|&seed| {
            let scenario = Scenario {
                seed,
                ..base.clone()
            };
            run_simulation(&scenario, policy)
        })
        .collect::<Result<_, _>>()?;

    for (seed, log) in seeds.iter().zip(&logs) {
        let summary = summarize(log);
        match args.format {
            Format::Json => {
                if !args.summary_only {
                    for record in &log.steps {
                        let line = StepLine::new(log, record);
                        let mut value = serde_json::to_value(&line)?;
                        value["seed"] = (*seed).into();
                        writeln!(out, "{}", serde_json::to_string(&value)?)?;
                    }
                }
                let mut value = serde_json::to_value(&summary)?;
                value["seed"] = (*seed).into();
                writeln!(out, "{}", serde_json::json!({ "summary": value }))?;
            }
            Format::Table => render::simulation(out, *seed, log, &summary, args.summary_only)?,
        }
    }
    Ok(())
}

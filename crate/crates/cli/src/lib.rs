//! Command implementations behind the `rdsim` binary.
//!
//! Exit status: 0 on success, 1 on I/O failure, 2 on invalid input.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use rdsim_core::abm::TaskState;
use rdsim_core::maturity::maturity_curve;
use rdsim_core::metrics::{
    batch_csv, compare_scalars, compute_metrics, format_significant, mean_scalars, report_csv, MetricsReport,
    DEFAULT_SIGNIFICANT_DIGITS,
};
use rdsim_core::scenario::{
    parse_scenario, preset, team_size_sweep, validate_scenario, AllocationPolicy, ScenarioConfig,
};
use rdsim_core::spm::{monte_carlo, monte_carlo_with_threads, run_simulation};
use rdsim_core::{RunTrace, SimError};

#[derive(Parser, Debug)]
#[command(
    name = "rdsim",
    version,
    about = "Hybrid agent-based / system-dynamics R&D project simulator"
)]
struct Cli {
    /// Print the JSON Schema of the scenario document and exit.
    #[arg(long)]
    schema: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one seeded simulation and write its trace, events and metrics.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Run seed; defaults to the scenario's master_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte-Carlo batch and write per-run metrics and the maturity curve.
    Montecarlo {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Master seed; defaults to the scenario's master_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of runs; defaults to the scenario's runs.
        #[arg(long)]
        runs: Option<u32>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a predefined experiment.
    Experiment {
        name: Experiment,
        #[command(flatten)]
        scenario: OverrideArgs,
        /// Master seed for every batch.
        #[arg(long)]
        seed: Option<u64>,
        /// Runs per batch.
        #[arg(long)]
        runs: Option<u32>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a scenario and list any violations.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Experiment {
    /// Parallel vs sequential base case.
    Exp1,
    /// Team-size sweep in both orderings.
    Exp2,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ScenarioArgs {
    /// Built-in scenario: base_parallel, base_sequential or team_size_sweep.
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    preset: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Args, Debug, Clone, Default, Serialize)]
struct OverrideArgs {
    /// Simulation horizon, weeks.
    #[arg(long)]
    horizon: Option<f64>,
    /// Progress level the maturity curve measures against.
    #[arg(long)]
    threshold: Option<f64>,
    /// Maturity smoothing window, weeks.
    #[arg(long)]
    smoothing: Option<f64>,
    /// greedy_first_eligible or static_partition.
    #[arg(long)]
    allocation: Option<AllocationPolicy>,
    /// Keep members on their task through reviews and rework.
    #[arg(long, value_name = "BOOL")]
    retain_during_review: Option<bool>,
    /// Share of a task's effort re-executed on rework.
    #[arg(long)]
    rework_fraction: Option<f64>,
}

impl OverrideArgs {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(h) = self.horizon {
            cfg.horizon = Some(h);
        }
        if let Some(t) = self.threshold {
            cfg.maturity_threshold = t;
        }
        if let Some(s) = self.smoothing {
            cfg.smoothing_window = s;
        }
        if let Some(a) = self.allocation {
            cfg.allocation_policy = a;
        }
        if let Some(r) = self.retain_during_review {
            cfg.retain_during_review = r;
        }
        if let Some(f) = self.rework_fraction {
            cfg.rework_fraction = f;
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Invalid(violations) => {
                let mut message = format!("scenario failed validation with {} violation(s):", violations.len());
                for v in &violations {
                    message.push_str(&format!("\n  {v}"));
                }
                Failure { code: 2, message }
            }
            e @ (SimError::Io { .. } | SimError::Json(_)) => Failure {
                code: 1,
                message: e.to_string(),
            },
            e => Failure {
                code: 2,
                message: e.to_string(),
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn load_scenarios(args: &ScenarioArgs) -> CliResult<Vec<ScenarioConfig>> {
    let mut configs = match (&args.preset, &args.scenario) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
            vec![parse_scenario(&text)?]
        }
        (None, None) => return Err(Failure::invalid("either --preset or --scenario is required")),
    };
    for cfg in &mut configs {
        args.overrides.apply(cfg);
        check(cfg)?;
    }
    Ok(configs)
}

fn single_scenario(args: &ScenarioArgs) -> CliResult<ScenarioConfig> {
    let mut configs = load_scenarios(args)?;
    if configs.len() != 1 {
        return Err(Failure::invalid(format!(
            "preset yields {} scenarios; use `experiment exp2` for the sweep",
            configs.len()
        )));
    }
    Ok(configs.remove(0))
}

fn check(cfg: &ScenarioConfig) -> CliResult<()> {
    let violations = validate_scenario(cfg);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(SimError::Invalid(violations).into())
    }
}

/// Worker bound from `RDSIM_THREADS`; 0 or unset means automatic.
fn thread_limit() -> CliResult<usize> {
    match std::env::var("RDSIM_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::invalid(format!("RDSIM_THREADS must be a non-negative integer, got `{v}`"))),
    }
}

fn batch(cfg: &ScenarioConfig, runs: u32, master: u64) -> CliResult<Vec<RunTrace>> {
    Ok(match thread_limit()? {
        0 => monte_carlo(cfg, runs, master),
        n => monte_carlo_with_threads(cfg, runs, master, n),
    })
}

#[derive(Serialize)]
struct FileEntry {
    name: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a, A: Serialize> {
    command: &'a str,
    arguments: &'a A,
    seed: u64,
    n_runs: u32,
    out: String,
    files: Vec<FileEntry>,
}

/// Writes files into one directory and records their hashes.
struct Output {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Output {
    fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| SimError::io(&path, e))?;
        self.files.push(FileEntry {
            name: name.to_string(),
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
        });
        Ok(())
    }

    fn finish<A: Serialize>(mut self, command: &str, arguments: &A, seed: u64, n_runs: u32) -> CliResult<()> {
        let files = std::mem::take(&mut self.files);
        let manifest = Manifest {
            command,
            arguments,
            seed,
            n_runs,
            out: self.dir.display().to_string(),
            files,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(SimError::from)? + "\n";
        let path = self.dir.join("manifest.json");
        fs::write(&path, text).map_err(|e| SimError::io(&path, e))?;
        Ok(())
    }
}

fn json<T: Serialize>(value: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value).map_err(SimError::from)? + "\n")
}

fn cmd_run(args: &ScenarioArgs, seed: Option<u64>, out: &Path) -> CliResult<()> {
    let cfg = single_scenario(args)?;
    let seed = seed.unwrap_or(cfg.master_seed);
    let trace = run_simulation(&cfg, seed);
    let report = compute_metrics(&trace);
    let mut o = Output::create(out)?;
    o.write("scenario.json", &(cfg.to_json_pretty() + "\n"))?;
    o.write("trace.csv", &trace.to_csv())?;
    o.write("events.json", &(trace.events_json() + "\n"))?;
    o.write("metrics.csv", &report_csv(&report, DEFAULT_SIGNIFICANT_DIGITS))?;
    o.write("metrics.json", &json(&report)?)?;
    o.finish("run", args, seed, 1)?;
    println!(
        "seed {seed}: {} of {} tasks closed, makespan {} weeks",
        report.closed_count,
        report.n_tasks,
        format_significant(report.makespan, DEFAULT_SIGNIFICANT_DIGITS)
    );
    Ok(())
}

#[derive(Serialize)]
struct Aggregate {
    n_runs: usize,
    completed_runs: usize,
    mean: Vec<rdsim_core::metrics::MetricValue>,
    maturity_first_crossing_0_9: Option<f64>,
}

struct BatchResult {
    reports: Vec<MetricsReport>,
    aggregate: Aggregate,
    curve_csv: String,
}

fn run_batch(cfg: &ScenarioConfig, runs: u32, master: u64) -> CliResult<BatchResult> {
    if runs < 2 {
        return Err(Failure::invalid(format!(
            "a Monte-Carlo batch needs at least 2 runs, got {runs}"
        )));
    }
    let traces = batch(cfg, runs, master)?;
    let curve = maturity_curve(&traces, cfg)?;
    let reports: Vec<MetricsReport> = traces.iter().map(compute_metrics).collect();
    let aggregate = Aggregate {
        n_runs: reports.len(),
        completed_runs: reports.iter().filter(|r| r.completion).count(),
        mean: mean_scalars(&reports),
        maturity_first_crossing_0_9: curve.first_crossing(0.9),
    };
    Ok(BatchResult {
        reports,
        aggregate,
        curve_csv: curve.to_csv(),
    })
}

fn cmd_montecarlo(args: &ScenarioArgs, seed: Option<u64>, runs: Option<u32>, out: &Path) -> CliResult<()> {
    let cfg = single_scenario(args)?;
    let master = seed.unwrap_or(cfg.master_seed);
    let runs = runs.unwrap_or(cfg.runs);
    let result = run_batch(&cfg, runs, master)?;
    let mut o = Output::create(out)?;
    o.write("scenario.json", &(cfg.to_json_pretty() + "\n"))?;
    o.write("runs.csv", &batch_csv(&result.reports, DEFAULT_SIGNIFICANT_DIGITS))?;
    o.write("aggregate.json", &json(&result.aggregate)?)?;
    o.write("maturity.csv", &result.curve_csv)?;
    o.finish("montecarlo", args, master, runs)?;
    println!(
        "{} runs, {} completed; maturity 0.9 crossing: {}",
        result.aggregate.n_runs,
        result.aggregate.completed_runs,
        result
            .aggregate
            .maturity_first_crossing_0_9
            .map_or("none".to_string(), |t| format!("week {t}"))
    );
    Ok(())
}

#[derive(Serialize)]
struct ExperimentArgs<'a> {
    name: Experiment,
    overrides: &'a OverrideArgs,
}

fn cmd_experiment(
    name: Experiment,
    overrides: &OverrideArgs,
    seed: Option<u64>,
    runs: Option<u32>,
    out: &Path,
) -> CliResult<()> {
    let args = ExperimentArgs { name, overrides };
    match name {
        Experiment::Exp1 => exp1(&args, seed, runs, out),
        Experiment::Exp2 => exp2(&args, seed, runs, out),
    }
}

fn prepared(mut cfg: ScenarioConfig, overrides: &OverrideArgs) -> CliResult<ScenarioConfig> {
    overrides.apply(&mut cfg);
    check(&cfg)?;
    Ok(cfg)
}

fn exp1(args: &ExperimentArgs, seed: Option<u64>, runs: Option<u32>, out: &Path) -> CliResult<()> {
    let par = prepared(preset("base_parallel")?.remove(0), args.overrides)?;
    let seq = prepared(preset("base_sequential")?.remove(0), args.overrides)?;
    let master = seed.unwrap_or(par.master_seed);
    let runs = runs.unwrap_or(par.runs);
    let p = run_batch(&par, runs, master)?;
    let s = run_batch(&seq, runs, master)?;

    let mut table = String::from("metric,parallel,sequential,change,change_kind\n");
    for d in compare_scalars(&p.aggregate.mean, &s.aggregate.mean) {
        let fmt = |v: f64| format_significant(v, DEFAULT_SIGNIFICANT_DIGITS);
        let kind = if d.relative { "percent" } else { "absolute" };
        table.push_str(&format!(
            "{},{},{},{},{kind}\n",
            d.metric,
            fmt(d.a),
            fmt(d.b),
            fmt(d.delta)
        ));
    }

    let mut o = Output::create(out)?;
    o.write("exp1_comparison.csv", &table)?;
    o.write("runs_parallel.csv", &batch_csv(&p.reports, DEFAULT_SIGNIFICANT_DIGITS))?;
    o.write(
        "runs_sequential.csv",
        &batch_csv(&s.reports, DEFAULT_SIGNIFICANT_DIGITS),
    )?;
    o.write("maturity_parallel.csv", &p.curve_csv)?;
    o.write("maturity_sequential.csv", &s.curve_csv)?;
    o.finish("experiment", args, master, runs)?;
    print!("{table}");
    Ok(())
}

const EXP2_HEADER: &str = "ordering,team_size,runs,completed_runs,completion,mean_makespan,mean_closed_count,\
mean_on_time_pct,mean_flow_efficiency,mean_rework_ratio,mean_task_weeks_rework";

fn exp2(args: &ExperimentArgs, seed: Option<u64>, runs: Option<u32>, out: &Path) -> CliResult<()> {
    let cases = team_size_sweep();
    let master = seed.unwrap_or(cases[0].config.master_seed);
    let runs = runs.unwrap_or(cases[0].config.runs);
    let mut table = format!("{EXP2_HEADER}\n");
    for case in cases {
        let cfg = prepared(case.config, args.overrides)?;
        let reports: Vec<MetricsReport> = batch(&cfg, runs, master)?.iter().map(compute_metrics).collect();
        let n = reports.len() as f64;
        let mean = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        let completed = reports.iter().filter(|r| r.completion).count();
        let fmt = |v: f64| format_significant(v, DEFAULT_SIGNIFICANT_DIGITS);
        table.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            case.ordering,
            case.team_size,
            reports.len(),
            completed,
            completed == reports.len(),
            fmt(mean(&|r| r.makespan)),
            fmt(mean(&|r| r.closed_count as f64)),
            fmt(mean(&|r| r.on_time_pct)),
            fmt(mean(&|r| r.flow_efficiency)),
            fmt(mean(&|r| r.rework_ratio)),
            fmt(mean(&|r| r.task_weeks[&TaskState::Rework])),
        ));
    }
    let mut o = Output::create(out)?;
    o.write("exp2_summary.csv", &table)?;
    o.finish("experiment", args, master, runs)?;
    print!("{table}");
    Ok(())
}

fn cmd_validate(args: &ScenarioArgs) -> CliResult<()> {
    let configs = load_scenarios(args)?;
    println!("ok: {} scenario(s) valid", configs.len());
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    if cli.schema {
        println!("{}", json(&rdsim_core::scenario::schema())?.trim_end());
        return Ok(());
    }
    match cli.command {
        Some(Command::Run { scenario, seed, out }) => cmd_run(&scenario, seed, &out),
        Some(Command::Montecarlo {
            scenario,
            seed,
            runs,
            out,
        }) => cmd_montecarlo(&scenario, seed, runs, &out),
        Some(Command::Experiment {
            name,
            scenario,
            seed,
            runs,
            out,
        }) => cmd_experiment(name, &scenario, seed, runs, &out),
        Some(Command::Validate { scenario }) => cmd_validate(&scenario),
        None => Err(Failure::invalid("no command given; see --help")),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn execute<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

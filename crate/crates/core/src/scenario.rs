//! Scenario descriptions: parsing, validation, presets and static allocation.
//!
//! A scenario is a JSON document whose keys are exactly the field names of
//! [`ScenarioConfig`] (snake_case). Unknown keys are rejected. Optional fields
//! fall back to the defaults documented on each field.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Result, SimError};

/// Task identifier. Ids are dense, `1..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub u32);

/// Team member identifier, `1..=team.size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MemberId(pub u32);

impl TaskId {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl MemberId {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for MemberId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub const DEFAULT_QM_DELAY: f64 = 1.0;
pub const DEFAULT_CLIENT_DELAY: f64 = 2.5;
pub const DEFAULT_TIMESTEP: f64 = 1.0;
pub const DEFAULT_REWORK_FRACTION: f64 = 0.5;
pub const DEFAULT_PRESSURE_CAP: f64 = 3.0;
pub const DEFAULT_RUNS: u32 = 100;
pub const DEFAULT_MASTER_SEED: u64 = 1;
pub const DEFAULT_MATURITY_THRESHOLD: f64 = 0.99;
pub const DEFAULT_SMOOTHING_WINDOW: f64 = 5.0;
pub const DEFAULT_LEARNING_FACTOR: f64 = 0.2;
pub const DEFAULT_MAX_PRODUCTIVITY: f64 = 3.0;
pub const DEFAULT_LEARNING_MIDPOINT: f64 = 5.0;
/// Minimum simulation horizon in weeks; the effective default is
/// `max(MIN_DEFAULT_HORIZON, deadline)`.
pub const MIN_DEFAULT_HORIZON: f64 = 400.0;
/// Productivity of an untrained member, work-units/week.
pub const BASELINE_PRODUCTIVITY: f64 = 1.0;

/// Default pressure → global productivity knots: flat up to SP = 1, a gain
/// under moderate pressure, a decline once pressure is excessive.
pub const DEFAULT_PRODUCTIVITY_LOOKUP: [(f64, f64); 6] = [
    (0.0, 1.0),
    (1.0, 1.0),
    (1.5, 1.15),
    (2.0, 1.25),
    (2.5, 1.10),
    (3.0, 0.90),
];

fn default_qm_delay() -> f64 {
    DEFAULT_QM_DELAY
}
fn default_client_delay() -> f64 {
    DEFAULT_CLIENT_DELAY
}
fn default_timestep() -> f64 {
    DEFAULT_TIMESTEP
}
fn default_rework_fraction() -> f64 {
    DEFAULT_REWORK_FRACTION
}
fn default_pressure_cap() -> f64 {
    DEFAULT_PRESSURE_CAP
}
fn default_lookup() -> Vec<(f64, f64)> {
    DEFAULT_PRODUCTIVITY_LOOKUP.to_vec()
}
fn default_runs() -> u32 {
    DEFAULT_RUNS
}
fn default_master_seed() -> u64 {
    DEFAULT_MASTER_SEED
}
fn default_threshold() -> f64 {
    DEFAULT_MATURITY_THRESHOLD
}
fn default_smoothing() -> f64 {
    DEFAULT_SMOOTHING_WINDOW
}
fn default_learning_factor() -> f64 {
    DEFAULT_LEARNING_FACTOR
}
fn default_max_productivity() -> f64 {
    DEFAULT_MAX_PRODUCTIVITY
}
fn default_learning_midpoint() -> f64 {
    DEFAULT_LEARNING_MIDPOINT
}
fn default_true() -> bool {
    true
}
fn default_retain() -> bool {
    DEFAULT_RETAIN_DURING_REVIEW
}

/// Whether a member keeps its task through QM review, client review and
/// rework, or releases it when the task enters QM review.
pub const DEFAULT_RETAIN_DURING_REVIEW: bool = false;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub id: TaskId,
    /// Initial workload, work-units.
    pub effort: f64,
    /// Probability that a client review sends the task back to rework.
    pub rework_probability: f64,
    /// QM review duration, weeks.
    #[serde(default = "default_qm_delay")]
    pub qm_delay: f64,
    /// Client review duration, weeks.
    #[serde(default = "default_client_delay")]
    pub client_delay: f64,
    #[serde(default)]
    pub dependencies: Vec<TaskId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeamSpec {
    pub size: u32,
    #[serde(default = "default_learning_factor")]
    pub learning_factor: f64,
    #[serde(default = "default_max_productivity")]
    pub max_productivity: f64,
    /// Completed-task count at the inflection of the learning curve.
    #[serde(default = "default_learning_midpoint")]
    pub learning_midpoint: f64,
}

impl TeamSpec {
    pub fn with_size(size: u32) -> Self {
        Self {
            size,
            learning_factor: DEFAULT_LEARNING_FACTOR,
            max_productivity: DEFAULT_MAX_PRODUCTIVITY,
            learning_midpoint: DEFAULT_LEARNING_MIDPOINT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationPolicy {
    /// Available members, by ascending id, claim the lowest-id eligible task.
    #[default]
    GreedyFirstEligible,
    /// Members only claim tasks from their [`static_partition`] list.
    StaticPartition,
}

impl FromStr for AllocationPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "greedy_first_eligible" => Ok(Self::GreedyFirstEligible),
            "static_partition" => Ok(Self::StaticPartition),
            other => Err(format!(
                "unknown allocation policy `{other}` (expected greedy_first_eligible or static_partition)"
            )),
        }
    }
}

impl fmt::Display for AllocationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::GreedyFirstEligible => "greedy_first_eligible",
            Self::StaticPartition => "static_partition",
        })
    }
}

/// Full declarative description of one simulation setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Planned completion date, weeks.
    pub deadline: f64,
    #[serde(default = "default_timestep")]
    pub timestep: f64,
    pub tasks: Vec<TaskSpec>,
    pub team: TeamSpec,
    #[serde(default)]
    pub allocation_policy: AllocationPolicy,
    #[serde(default = "default_retain")]
    pub retain_during_review: bool,
    /// Share of the original effort re-executed after a failed client review.
    #[serde(default = "default_rework_fraction")]
    pub rework_fraction: f64,
    #[serde(default = "default_pressure_cap")]
    pub pressure_cap: f64,
    /// `(schedule pressure, global productivity)` knots, interpolated linearly.
    #[serde(default = "default_lookup")]
    pub productivity_lookup: Vec<(f64, f64)>,
    #[serde(default = "default_runs")]
    pub runs: u32,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    /// Progress level the maturity curve measures attainment of.
    #[serde(default = "default_threshold")]
    pub maturity_threshold: f64,
    /// Centered moving-average window for the maturity curve, weeks.
    #[serde(default = "default_smoothing")]
    pub smoothing_window: f64,
    /// Simulation cut-off, weeks. `None` means `max(400, deadline)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Count waiting_dependencies tasks as remaining effort in schedule pressure.
    #[serde(default = "default_true")]
    pub pressure_includes_waiting: bool,
}

impl ScenarioConfig {
    /// Scenario with every optional field at its default.
    pub fn new(deadline: f64, tasks: Vec<TaskSpec>, team: TeamSpec) -> Self {
        Self {
            deadline,
            timestep: DEFAULT_TIMESTEP,
            tasks,
            team,
            allocation_policy: AllocationPolicy::default(),
            retain_during_review: DEFAULT_RETAIN_DURING_REVIEW,
            rework_fraction: DEFAULT_REWORK_FRACTION,
            pressure_cap: DEFAULT_PRESSURE_CAP,
            productivity_lookup: default_lookup(),
            runs: DEFAULT_RUNS,
            master_seed: DEFAULT_MASTER_SEED,
            maturity_threshold: DEFAULT_MATURITY_THRESHOLD,
            smoothing_window: DEFAULT_SMOOTHING_WINDOW,
            horizon: None,
            pressure_includes_waiting: true,
        }
    }

    pub fn effective_horizon(&self) -> f64 {
        self.horizon.unwrap_or_else(|| MIN_DEFAULT_HORIZON.max(self.deadline))
    }

    pub fn total_effort(&self) -> f64 {
        self.tasks.iter().map(|t| t.effort).sum()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// Parse and validate a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| SimError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let violations = validate_scenario(&cfg);
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(SimError::Invalid(violations))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    EmptyTasks,
    DuplicateId,
    NonDenseIds,
    UnknownDependency,
    Cycle,
    Range,
    Timestep,
    Deadline,
    Team,
    Lookup,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("code serializes");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskId>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.task {
            Some(id) => write!(f, "{} (task {}): {}", self.code, id, self.message),
            None => write!(f, "{}: {}", self.code, self.message),
        }
    }
}

struct Violations(Vec<Violation>);

impl Violations {
    fn push(&mut self, code: ViolationCode, task: Option<TaskId>, message: impl Into<String>) {
        self.0.push(Violation {
            code,
            message: message.into(),
            task,
        });
    }

    fn check(&mut self, ok: bool, code: ViolationCode, task: Option<TaskId>, message: impl FnOnce() -> String) {
        if !ok {
            self.push(code, task, message());
        }
    }
}

/// Every violated invariant of `cfg`; empty means valid.
pub fn validate_scenario(cfg: &ScenarioConfig) -> Vec<Violation> {
    use ViolationCode::*;
    let mut v = Violations(Vec::new());

    v.check(cfg.timestep.is_finite() && cfg.timestep > 0.0, Timestep, None, || {
        format!("timestep must be > 0, got {}", cfg.timestep)
    });
    v.check(
        cfg.deadline.is_finite() && cfg.deadline >= cfg.timestep,
        Deadline,
        None,
        || format!("deadline {} must be >= timestep {}", cfg.deadline, cfg.timestep),
    );
    if let Some(h) = cfg.horizon {
        v.check(h.is_finite() && h >= cfg.timestep, Range, None, || {
            format!("horizon {h} must be >= timestep {}", cfg.timestep)
        });
    }

    let team = &cfg.team;
    v.check(team.size >= 1, Team, None, || "team size must be >= 1".into());
    v.check(
        team.learning_factor.is_finite() && team.learning_factor > 0.0,
        Team,
        None,
        || format!("learning_factor must be > 0, got {}", team.learning_factor),
    );
    v.check(
        team.max_productivity.is_finite() && team.max_productivity >= BASELINE_PRODUCTIVITY,
        Team,
        None,
        || {
            format!(
                "max_productivity must be >= {BASELINE_PRODUCTIVITY}, got {}",
                team.max_productivity
            )
        },
    );
    v.check(
        team.learning_midpoint.is_finite() && team.learning_midpoint >= 0.0,
        Team,
        None,
        || format!("learning_midpoint must be >= 0, got {}", team.learning_midpoint),
    );

    v.check(
        cfg.rework_fraction > 0.0 && cfg.rework_fraction <= 1.0,
        Range,
        None,
        || format!("rework_fraction must be in (0, 1], got {}", cfg.rework_fraction),
    );
    v.check(
        cfg.pressure_cap.is_finite() && cfg.pressure_cap > 0.0,
        Range,
        None,
        || format!("pressure_cap must be > 0, got {}", cfg.pressure_cap),
    );
    v.check(cfg.runs >= 1, Range, None, || "runs must be >= 1".into());
    v.check(
        cfg.maturity_threshold > 0.0 && cfg.maturity_threshold < 1.0,
        Range,
        None,
        || format!("maturity_threshold must be in (0, 1), got {}", cfg.maturity_threshold),
    );
    v.check(
        cfg.smoothing_window.is_finite() && cfg.smoothing_window >= 0.0,
        Range,
        None,
        || format!("smoothing_window must be >= 0, got {}", cfg.smoothing_window),
    );

    validate_lookup(&cfg.productivity_lookup, cfg.pressure_cap, &mut v);
    validate_tasks(&cfg.tasks, &mut v);
    v.0
}

fn validate_lookup(knots: &[(f64, f64)], cap: f64, v: &mut Violations) {
    use ViolationCode::Lookup;
    if knots.is_empty() {
        v.push(Lookup, None, "productivity_lookup needs at least one knot");
        return;
    }
    if knots.iter().any(|&(p, f)| !p.is_finite() || !f.is_finite() || f < 0.0) {
        v.push(
            Lookup,
            None,
            "productivity_lookup knots must be finite with factor >= 0",
        );
    }
    if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
        v.push(
            Lookup,
            None,
            "productivity_lookup pressures must be strictly increasing",
        );
    }
    let (lo, hi) = (knots[0].0, knots[knots.len() - 1].0);
    if lo > 0.0 || hi < cap {
        v.push(
            Lookup,
            None,
            format!("productivity_lookup covers [{lo}, {hi}] but must cover [0, {cap}]"),
        );
    }
}

fn validate_tasks(tasks: &[TaskSpec], v: &mut Violations) {
    use ViolationCode::*;
    if tasks.is_empty() {
        v.push(EmptyTasks, None, "scenario has no tasks");
        return;
    }

    let mut seen = BTreeSet::new();
    for t in tasks {
        let id = Some(t.id);
        if !seen.insert(t.id) {
            v.push(DuplicateId, id, format!("task id {} appears more than once", t.id));
        }
        v.check(t.effort.is_finite() && t.effort > 0.0, Range, id, || {
            format!("effort must be > 0, got {}", t.effort)
        });
        v.check((0.0..=1.0).contains(&t.rework_probability), Range, id, || {
            format!("rework_probability must be in [0, 1], got {}", t.rework_probability)
        });
        v.check(t.qm_delay.is_finite() && t.qm_delay >= 0.0, Range, id, || {
            format!("qm_delay must be >= 0, got {}", t.qm_delay)
        });
        v.check(t.client_delay.is_finite() && t.client_delay >= 0.0, Range, id, || {
            format!("client_delay must be >= 0, got {}", t.client_delay)
        });
    }

    let n = tasks.len() as u32;
    let expected: BTreeSet<TaskId> = (1..=n).map(TaskId).collect();
    if seen != expected {
        v.push(NonDenseIds, None, format!("task ids must be exactly 1..={n}"));
    }

    for t in tasks {
        for d in &t.dependencies {
            if !seen.contains(d) {
                v.push(UnknownDependency, Some(t.id), format!("depends on unknown task {d}"));
            }
        }
    }

    let cyclic = cyclic_tasks(tasks);
    if !cyclic.is_empty() {
        let ids: Vec<String> = cyclic.iter().map(|id| id.to_string()).collect();
        v.push(
            Cycle,
            None,
            format!("dependency cycle among tasks [{}]", ids.join(", ")),
        );
    }
}

/// Tasks that Kahn's topological sort cannot order, i.e. those on or behind
/// a dependency cycle. Unknown dependencies are ignored.
pub fn cyclic_tasks(tasks: &[TaskSpec]) -> Vec<TaskId> {
    let ids: BTreeSet<TaskId> = tasks.iter().map(|t| t.id).collect();
    let mut indegree: BTreeMap<TaskId, usize> = ids.iter().map(|&id| (id, 0)).collect();
    let mut dependents: BTreeMap<TaskId, Vec<TaskId>> = BTreeMap::new();
    for t in tasks {
        let deps: BTreeSet<TaskId> = t.dependencies.iter().copied().filter(|d| ids.contains(d)).collect();
        *indegree.get_mut(&t.id).expect("id present") += deps.len();
        for d in deps {
            dependents.entry(d).or_default().push(t.id);
        }
    }

    let mut ready: VecDeque<TaskId> = indegree.iter().filter(|(_, &n)| n == 0).map(|(&id, _)| id).collect();
    while let Some(id) = ready.pop_front() {
        for &next in dependents.get(&id).map(Vec::as_slice).unwrap_or_default() {
            let n = indegree.get_mut(&next).expect("id present");
            *n -= 1;
            if *n == 0 {
                ready.push_back(next);
            }
        }
        indegree.remove(&id);
    }
    indegree.into_keys().collect()
}

/// Even split of tasks `1..=n_tasks` over members `1..=n_members` as
/// contiguous id ranges; lower member ids take the remainder first.
pub fn static_partition(n_tasks: usize, n_members: usize) -> BTreeMap<MemberId, Vec<TaskId>> {
    let mut out = BTreeMap::new();
    if n_members == 0 {
        return out;
    }
    let base = n_tasks / n_members;
    let extra = n_tasks % n_members;
    let mut next = 1u32;
    for m in 0..n_members {
        let count = base + usize::from(m < extra);
        let ids: Vec<TaskId> = (next..next + count as u32).map(TaskId).collect();
        next += count as u32;
        out.insert(MemberId(m as u32 + 1), ids);
    }
    out
}

/// One Table-5 style task group: tasks `first..=last` with effort and rework
/// probability interpolated linearly from the first task's value to the
/// last task's value.
#[derive(Debug, Clone, Copy)]
pub struct TaskGroup {
    pub first: u32,
    pub last: u32,
    pub effort: (f64, f64),
    pub rework_probability: (f64, f64),
}

/// Base-case task groups. Values fall from the upper to the lower end of
/// each range in task order, so early-stage work is the heaviest and riskiest.
pub const BASE_TASK_GROUPS: [TaskGroup; 4] = [
    TaskGroup {
        first: 1,
        last: 4,
        effort: (22.0, 16.0),
        rework_probability: (0.50, 0.42),
    },
    TaskGroup {
        first: 5,
        last: 8,
        effort: (16.0, 13.0),
        rework_probability: (0.45, 0.28),
    },
    TaskGroup {
        first: 9,
        last: 11,
        effort: (12.0, 10.0),
        rework_probability: (0.25, 0.15),
    },
    TaskGroup {
        first: 12,
        last: 15,
        effort: (10.0, 5.0),
        rework_probability: (0.18, 0.10),
    },
];

pub const BASE_DEADLINE: f64 = 156.0;
pub const BASE_TEAM_SIZE: u32 = 5;
pub const SWEEP_TEAM_SIZES: [u32; 7] = [1, 2, 3, 4, 5, 7, 10];

/// The fifteen base-case tasks, without dependencies.
pub fn base_tasks() -> Vec<TaskSpec> {
    let mut tasks = Vec::new();
    for g in BASE_TASK_GROUPS {
        let span = (g.last - g.first) as f64;
        for id in g.first..=g.last {
            let s = if span > 0.0 { (id - g.first) as f64 / span } else { 0.0 };
            tasks.push(TaskSpec {
                id: TaskId(id),
                effort: g.effort.0 + s * (g.effort.1 - g.effort.0),
                rework_probability: g.rework_probability.0 + s * (g.rework_probability.1 - g.rework_probability.0),
                qm_delay: DEFAULT_QM_DELAY,
                client_delay: DEFAULT_CLIENT_DELAY,
                dependencies: Vec::new(),
            });
        }
    }
    tasks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    Parallel,
    Sequential,
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ordering::Parallel => "parallel",
            Ordering::Sequential => "sequential",
        })
    }
}

/// Base case: fifteen independent tasks, five members, 156-week deadline.
pub fn base_parallel() -> ScenarioConfig {
    ScenarioConfig::new(BASE_DEADLINE, base_tasks(), TeamSpec::with_size(BASE_TEAM_SIZE))
}

/// Base case with a strict chain: task k depends on task k-1.
pub fn base_sequential() -> ScenarioConfig {
    let mut cfg = base_parallel();
    make_sequential(&mut cfg.tasks);
    cfg
}

fn make_sequential(tasks: &mut [TaskSpec]) {
    for t in tasks.iter_mut() {
        t.dependencies = if t.id.0 >= 2 {
            vec![TaskId(t.id.0 - 1)]
        } else {
            Vec::new()
        };
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCase {
    pub team_size: u32,
    pub ordering: Ordering,
    pub config: ScenarioConfig,
}

/// Team sizes {1,2,3,4,5,7,10} in both orderings. Parallel cases use greedy
/// claiming; sequential cases use the static even split with members
/// retaining their tasks through review.
pub fn team_size_sweep() -> Vec<SweepCase> {
    let mut cases = Vec::new();
    for ordering in [Ordering::Parallel, Ordering::Sequential] {
        for size in SWEEP_TEAM_SIZES {
            let mut config = match ordering {
                Ordering::Parallel => base_parallel(),
                Ordering::Sequential => {
                    let mut c = base_sequential();
                    c.allocation_policy = AllocationPolicy::StaticPartition;
                    c.retain_during_review = true;
                    c
                }
            };
            config.team.size = size;
            cases.push(SweepCase {
                team_size: size,
                ordering,
                config,
            });
        }
    }
    cases
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    BaseParallel,
    BaseSequential,
    TeamSizeSweep,
}

impl Preset {
    pub const NAMES: [&'static str; 3] = ["base_parallel", "base_sequential", "team_size_sweep"];

    pub fn configs(self) -> Vec<ScenarioConfig> {
        match self {
            Preset::BaseParallel => vec![base_parallel()],
            Preset::BaseSequential => vec![base_sequential()],
            Preset::TeamSizeSweep => team_size_sweep().into_iter().map(|c| c.config).collect(),
        }
    }
}

impl FromStr for Preset {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base_parallel" => Ok(Preset::BaseParallel),
            "base_sequential" => Ok(Preset::BaseSequential),
            "team_size_sweep" => Ok(Preset::TeamSizeSweep),
            other => Err(SimError::UnknownPreset(other.to_string())),
        }
    }
}

/// Scenarios for a named preset; the sweep yields 14, the others one.
pub fn preset(name: &str) -> Result<Vec<ScenarioConfig>> {
    Ok(name.parse::<Preset>()?.configs())
}

/// JSON Schema of the scenario document.
pub fn schema() -> serde_json::Value {
    let number = |desc: &str| json!({ "type": "number", "description": desc });
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "ScenarioConfig",
        "type": "object",
        "additionalProperties": false,
        "required": ["deadline", "tasks", "team"],
        "properties": {
            "deadline": number("planned completion, weeks (>= timestep)"),
            "timestep": { "type": "number", "exclusiveMinimum": 0, "default": DEFAULT_TIMESTEP },
            "tasks": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "additionalProperties": false,
                    "required": ["id", "effort", "rework_probability"],
                    "properties": {
                        "id": { "type": "integer", "minimum": 1, "description": "dense ids 1..N" },
                        "effort": { "type": "number", "exclusiveMinimum": 0 },
                        "rework_probability": { "type": "number", "minimum": 0, "maximum": 1 },
                        "qm_delay": { "type": "number", "minimum": 0, "default": DEFAULT_QM_DELAY },
                        "client_delay": { "type": "number", "minimum": 0, "default": DEFAULT_CLIENT_DELAY },
                        "dependencies": { "type": "array", "items": { "type": "integer" }, "default": [] }
                    }
                }
            },
            "team": {
                "type": "object",
                "additionalProperties": false,
                "required": ["size"],
                "properties": {
                    "size": { "type": "integer", "minimum": 1 },
                    "learning_factor": { "type": "number", "exclusiveMinimum": 0, "default": DEFAULT_LEARNING_FACTOR },
                    "max_productivity": { "type": "number", "minimum": 1, "default": DEFAULT_MAX_PRODUCTIVITY },
                    "learning_midpoint": { "type": "number", "minimum": 0, "default": DEFAULT_LEARNING_MIDPOINT }
                }
            },
            "allocation_policy": {
                "enum": ["greedy_first_eligible", "static_partition"],
                "default": "greedy_first_eligible"
            },
            "retain_during_review": { "type": "boolean", "default": DEFAULT_RETAIN_DURING_REVIEW },
            "rework_fraction": { "type": "number", "exclusiveMinimum": 0, "maximum": 1, "default": DEFAULT_REWORK_FRACTION },
            "pressure_cap": { "type": "number", "exclusiveMinimum": 0, "default": DEFAULT_PRESSURE_CAP },
            "productivity_lookup": {
                "type": "array",
                "description": "[pressure, factor] knots, strictly increasing in pressure, covering [0, pressure_cap]",
                "items": { "type": "array", "prefixItems": [{ "type": "number" }, { "type": "number" }], "minItems": 2, "maxItems": 2 },
                "default": DEFAULT_PRODUCTIVITY_LOOKUP.iter().map(|&(p, f)| json!([p, f])).collect::<Vec<_>>()
            },
            "runs": { "type": "integer", "minimum": 1, "default": DEFAULT_RUNS },
            "master_seed": { "type": "integer", "minimum": 0, "default": DEFAULT_MASTER_SEED },
            "maturity_threshold": { "type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1, "default": DEFAULT_MATURITY_THRESHOLD },
            "smoothing_window": { "type": "number", "minimum": 0, "default": DEFAULT_SMOOTHING_WINDOW },
            "horizon": { "type": "number", "description": "simulation cut-off, weeks; default max(400, deadline)" },
            "pressure_includes_waiting": { "type": "boolean", "default": true }
        }
    })
}

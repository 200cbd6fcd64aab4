//! Agent layer: task, team-member and controlling agents.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::UniformSource;
use crate::scenario::{AllocationPolicy, MemberId, TaskId, TaskSpec, TeamSpec, BASELINE_PRODUCTIVITY};

/// Timers at or below this value count as expired.
const TIMER_EPS: f64 = 1e-9;
/// Remaining effort at or below this value counts as done.
const EFFORT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskState {
    Open,
    WaitingDependencies,
    InProgress,
    QmReview,
    ClientReview,
    Rework,
    Closed,
}

impl TaskState {
    pub const ALL: [TaskState; 7] = [
        TaskState::Open,
        TaskState::WaitingDependencies,
        TaskState::InProgress,
        TaskState::QmReview,
        TaskState::ClientReview,
        TaskState::Rework,
        TaskState::Closed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskState::Open => "open",
            TaskState::WaitingDependencies => "waiting_dependencies",
            TaskState::InProgress => "in_progress",
            TaskState::QmReview => "qm_review",
            TaskState::ClientReview => "client_review",
            TaskState::Rework => "rework",
            TaskState::Closed => "closed",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_review(self) -> bool {
        matches!(self, TaskState::QmReview | TaskState::ClientReview)
    }
}

impl fmt::Display for TaskState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An operation was called on an agent in a state it does not accept.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{operation} called on task {task} in state {state}")]
pub struct ContractViolation {
    pub operation: &'static str,
    pub task: TaskId,
    pub state: TaskState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskAgent {
    pub id: TaskId,
    pub state: TaskState,
    /// Original effort, work-units.
    pub effort: f64,
    pub remaining_effort: f64,
    pub dependencies: Vec<TaskId>,
    pub rework_probability: f64,
    pub qm_delay: f64,
    pub client_delay: f64,
    /// Member currently holding the task.
    pub holder: Option<MemberId>,
    /// Member that last performed work on the task; credited on closure.
    pub last_worker: Option<MemberId>,
    /// Weeks left in the current review stage.
    pub review_timer: f64,
    pub start_time: Option<f64>,
    pub close_time: Option<f64>,
    pub rework_count: u32,
}

impl TaskAgent {
    pub fn assigned(&self) -> bool {
        self.holder.is_some()
    }
}

/// Initial agent for `spec`: open when every dependency is already closed.
pub fn initial_task_state(spec: &TaskSpec, is_closed: impl Fn(TaskId) -> bool) -> TaskAgent {
    let ready = spec.dependencies.iter().all(|&d| is_closed(d));
    TaskAgent {
        id: spec.id,
        state: if ready {
            TaskState::Open
        } else {
            TaskState::WaitingDependencies
        },
        effort: spec.effort,
        remaining_effort: spec.effort,
        dependencies: spec.dependencies.clone(),
        rework_probability: spec.rework_probability,
        qm_delay: spec.qm_delay,
        client_delay: spec.client_delay,
        holder: None,
        last_worker: None,
        review_timer: 0.0,
        start_time: None,
        close_time: None,
        rework_count: 0,
    }
}

/// `tasks[i]` must carry id `i + 1`.
fn dependencies_closed(task: &TaskAgent, tasks: &[TaskAgent]) -> bool {
    task.dependencies
        .iter()
        .all(|d| tasks.get(d.index()).is_some_and(|t| t.state == TaskState::Closed))
}

/// Moves waiting tasks whose dependencies have all closed to `open`.
/// Returns the ids that changed.
pub fn resolve_dependencies(tasks: &mut [TaskAgent]) -> Vec<TaskId> {
    let ready: Vec<usize> = (0..tasks.len())
        .filter(|&i| tasks[i].state == TaskState::WaitingDependencies && dependencies_closed(&tasks[i], tasks))
        .collect();
    ready
        .into_iter()
        .map(|i| {
            tasks[i].state = TaskState::Open;
            tasks[i].id
        })
        .collect()
}

/// Unassigned open or rework tasks whose dependencies are closed, by ascending id.
pub fn eligible_tasks(tasks: &[TaskAgent]) -> Vec<TaskId> {
    let mut ids: Vec<TaskId> = tasks
        .iter()
        .filter(|t| matches!(t.state, TaskState::Open | TaskState::Rework))
        .filter(|t| !t.assigned() && dependencies_closed(t, tasks))
        .map(|t| t.id)
        .collect();
    ids.sort_unstable();
    ids
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberState {
    Available,
    Busy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamMemberAgent {
    pub id: MemberId,
    pub task: Option<TaskId>,
    pub completed_tasks: u32,
    pub learning_factor: f64,
    pub max_productivity: f64,
    pub learning_midpoint: f64,
    pub personal_productivity: f64,
}

impl TeamMemberAgent {
    pub fn new(id: MemberId, team: &TeamSpec) -> Self {
        Self {
            id,
            task: None,
            completed_tasks: 0,
            learning_factor: team.learning_factor,
            max_productivity: team.max_productivity,
            learning_midpoint: team.learning_midpoint,
            personal_productivity: personal_productivity(0, team),
        }
    }

    pub fn state(&self) -> MemberState {
        if self.task.is_some() {
            MemberState::Busy
        } else {
            MemberState::Available
        }
    }

    /// Credits one completed task and moves along the learning curve.
    pub fn record_completion(&mut self) {
        self.completed_tasks += 1;
        self.personal_productivity = learning_curve(
            self.completed_tasks,
            self.learning_factor,
            self.learning_midpoint,
            self.max_productivity,
        );
    }
}

/// Full team for `team`, ids `1..=size`.
pub fn team_members(team: &TeamSpec) -> Vec<TeamMemberAgent> {
    (1..=team.size)
        .map(|i| TeamMemberAgent::new(MemberId(i), team))
        .collect()
}

/// Normalized logistic learning curve: 1.0 with no completed tasks, rising
/// to `max_productivity` as `completed` grows, inflecting at the midpoint.
pub fn personal_productivity(completed: u32, team: &TeamSpec) -> f64 {
    learning_curve(
        completed,
        team.learning_factor,
        team.learning_midpoint,
        team.max_productivity,
    )
}

fn learning_curve(completed: u32, rate: f64, midpoint: f64, max_productivity: f64) -> f64 {
    let logistic = |n: f64| 1.0 / (1.0 + (-rate * (n - midpoint)).exp());
    let l0 = logistic(0.0);
    let share = (logistic(completed as f64) - l0) / (1.0 - l0);
    BASELINE_PRODUCTIVITY + (max_productivity - BASELINE_PRODUCTIVITY) * share
}

/// Advances `task` by one step of `member`'s effort. Returns the work done;
/// a task whose remaining effort reaches zero enters QM review.
pub fn perform_work(
    task: &mut TaskAgent,
    member: &TeamMemberAgent,
    global_productivity: f64,
    dt: f64,
) -> Result<f64, ContractViolation> {
    if task.state != TaskState::InProgress || member.task != Some(task.id) {
        return Err(ContractViolation {
            operation: "perform_work",
            task: task.id,
            state: task.state,
        });
    }
    let capacity = (global_productivity * member.personal_productivity * dt).max(0.0);
    let done = task.remaining_effort.min(capacity);
    task.remaining_effort -= done;
    task.last_worker = Some(member.id);
    if task.remaining_effort <= EFFORT_EPS {
        task.remaining_effort = 0.0;
        task.state = TaskState::QmReview;
        task.review_timer = task.qm_delay;
    }
    Ok(done)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ReviewOutcome {
    /// QM review finished; client review started.
    QmPassed,
    /// Client review approved the task; it is closed.
    Approved { u: f64 },
    /// Client review rejected the task; it needs rework.
    Reworked { u: f64 },
}

/// Counts down the current review stage by `dt`. On client-review expiry a
/// single uniform draw decides between closure and rework. The task's holder
/// is left untouched; releasing members is the caller's policy.
pub fn advance_review(
    task: &mut TaskAgent,
    dt: f64,
    rng: &mut UniformSource,
    rework_fraction: f64,
    now: f64,
) -> Result<Option<ReviewOutcome>, ContractViolation> {
    if !task.state.is_review() {
        return Err(ContractViolation {
            operation: "advance_review",
            task: task.id,
            state: task.state,
        });
    }
    task.review_timer -= dt;
    if task.review_timer > TIMER_EPS {
        return Ok(None);
    }
    match task.state {
        TaskState::QmReview => {
            task.state = TaskState::ClientReview;
            task.review_timer = task.client_delay;
            Ok(Some(ReviewOutcome::QmPassed))
        }
        _ => {
            task.review_timer = 0.0;
            let u = rng.next_f64();
            if u < task.rework_probability {
                task.state = TaskState::Rework;
                task.remaining_effort = rework_fraction * task.effort;
                task.rework_count += 1;
                Ok(Some(ReviewOutcome::Reworked { u }))
            } else {
                task.state = TaskState::Closed;
                task.close_time = Some(now);
                Ok(Some(ReviewOutcome::Approved { u }))
            }
        }
    }
}

/// Remaining effort summed per aggregated state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EffortAggregate {
    pub open: f64,
    pub in_progress: f64,
    pub rework: f64,
}

pub fn aggregate_efforts(tasks: &[TaskAgent]) -> EffortAggregate {
    tasks.iter().fold(EffortAggregate::default(), |mut acc, t| {
        match t.state {
            TaskState::Open => acc.open += t.remaining_effort,
            TaskState::InProgress => acc.in_progress += t.remaining_effort,
            TaskState::Rework => acc.rework += t.remaining_effort,
            _ => {}
        }
        acc
    })
}

/// Global indicators exposed to every agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllingState {
    pub global_productivity: f64,
    pub schedule_pressure: f64,
    pub open_effort: f64,
    pub in_progress_effort: f64,
    pub rework_effort: f64,
    pub closed_count: u32,
}

impl Default for ControllingState {
    fn default() -> Self {
        Self {
            global_productivity: 1.0,
            schedule_pressure: 0.0,
            open_effort: 0.0,
            in_progress_effort: 0.0,
            rework_effort: 0.0,
            closed_count: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub member: MemberId,
    pub task: TaskId,
    /// The member already held the task and resumes it after rework.
    pub resumed: bool,
}

/// Puts members to work. Members still holding a task that came back from
/// client review resume it first; then available members, by ascending id,
/// claim the lowest-id eligible task (restricted to their own list under
/// the static policy). `partition` is required for the static policy.
pub fn assign_available_members(
    members: &mut [TeamMemberAgent],
    tasks: &mut [TaskAgent],
    policy: AllocationPolicy,
    partition: Option<&BTreeMap<MemberId, Vec<TaskId>>>,
    now: f64,
) -> Vec<Assignment> {
    let mut out = Vec::new();

    for m in members.iter() {
        if let Some(id) = m.task {
            let t = &mut tasks[id.index()];
            if t.state == TaskState::Rework {
                t.state = TaskState::InProgress;
                out.push(Assignment {
                    member: m.id,
                    task: id,
                    resumed: true,
                });
            }
        }
    }

    let mut eligible = eligible_tasks(tasks);
    for m in members.iter_mut().filter(|m| m.task.is_none()) {
        let pick = match policy {
            AllocationPolicy::GreedyFirstEligible => eligible.first().copied(),
            AllocationPolicy::StaticPartition => {
                let own = partition
                    .and_then(|p| p.get(&m.id))
                    .map(Vec::as_slice)
                    .unwrap_or_default();
                eligible.iter().copied().find(|id| own.contains(id))
            }
        };
        let Some(id) = pick else { continue };
        eligible.retain(|&e| e != id);
        let t = &mut tasks[id.index()];
        t.state = TaskState::InProgress;
        t.holder = Some(m.id);
        t.start_time.get_or_insert(now);
        m.task = Some(id);
        out.push(Assignment {
            member: m.id,
            task: id,
            resumed: false,
        });
    }
    out
}

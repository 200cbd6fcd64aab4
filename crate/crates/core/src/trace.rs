//! Run traces and their CSV / JSON renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::abm::{EffortAggregate, TaskAgent, TaskState, TeamMemberAgent};
use crate::scenario::{MemberId, TaskId};
use crate::sd::TaskStocks;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    DependenciesResolved {
        time: f64,
        task: TaskId,
    },
    /// A member took the task at the start of the step beginning at `time`.
    Claimed {
        time: f64,
        member: MemberId,
        task: TaskId,
        resumed: bool,
    },
    EnteredQmReview {
        time: f64,
        task: TaskId,
    },
    QmPassed {
        time: f64,
        task: TaskId,
    },
    ReworkDraw {
        time: f64,
        task: TaskId,
        u: f64,
        rework: bool,
    },
    Closed {
        time: f64,
        task: TaskId,
        credited: Option<MemberId>,
    },
    Released {
        time: f64,
        member: MemberId,
        task: TaskId,
    },
}

impl Event {
    pub fn time(&self) -> f64 {
        match *self {
            Event::DependenciesResolved { time, .. }
            | Event::Claimed { time, .. }
            | Event::EnteredQmReview { time, .. }
            | Event::QmPassed { time, .. }
            | Event::ReworkDraw { time, .. }
            | Event::Closed { time, .. }
            | Event::Released { time, .. } => time,
        }
    }
}

/// Snapshot after one step. Row 0 is the initial state at time 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// End of the step, weeks.
    pub time: f64,
    /// Task states at `time`.
    pub states: Vec<TaskState>,
    /// States the tasks occupied during the step (after assignment, before
    /// work and reviews). Equal to `states` in row 0.
    pub active: Vec<TaskState>,
    pub remaining: Vec<f64>,
    pub stocks: Vec<TaskStocks>,
    /// Aggregates of the post-agent-update states.
    pub aggregates: EffortAggregate,
    pub schedule_pressure: f64,
    /// Factor computed at this step; applied to work in the next step.
    pub global_productivity: f64,
    /// Member busy flags during the step.
    pub busy: Vec<bool>,
    pub closed_count: u32,
    pub cumulative_work: f64,
    pub cumulative_rework_work: f64,
}

impl TraceRow {
    pub fn count(&self, state: TaskState) -> usize {
        self.states.iter().filter(|&&s| s == state).count()
    }

    pub fn active_count(&self, state: TaskState) -> usize {
        self.active.iter().filter(|&&s| s == state).count()
    }

    pub fn busy_count(&self) -> usize {
        self.busy.iter().filter(|&&b| b).count()
    }

    pub fn stock_totals(&self) -> TaskStocks {
        self.stocks.iter().fold(TaskStocks::default(), |a, s| TaskStocks {
            wtd: a.wtd + s.wtd,
            wqa: a.wqa + s.wqa,
            wcr: a.wcr + s.wcr,
            wa: a.wa + s.wa,
            cumulative_wir: a.cumulative_wir + s.cumulative_wir,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub seed: u64,
    pub dt: f64,
    pub deadline: f64,
    pub horizon: f64,
    pub team_size: u32,
    pub efforts: Vec<f64>,
    pub rework_fraction: f64,
    pub rows: Vec<TraceRow>,
    pub events: Vec<Event>,
    pub final_tasks: Vec<TaskAgent>,
    pub final_members: Vec<TeamMemberAgent>,
    /// Every task closed before the horizon.
    pub completed: bool,
    /// Close time of the last task, when completed.
    pub d_act: Option<f64>,
    pub clamp_deficit: f64,
}

pub const TRACE_CSV_COLUMNS: [&str; 32] = [
    "step",
    "time",
    "open",
    "waiting_dependencies",
    "in_progress",
    "qm_review",
    "client_review",
    "rework",
    "closed",
    "active_open",
    "active_waiting_dependencies",
    "active_in_progress",
    "active_qm_review",
    "active_client_review",
    "active_rework",
    "active_closed",
    "busy_members",
    "wtd",
    "wqa",
    "wcr",
    "wa",
    "wip",
    "cumulative_wir",
    "open_effort",
    "in_progress_effort",
    "rework_effort",
    "schedule_pressure",
    "global_productivity",
    "closed_count",
    "cumulative_work",
    "cumulative_rework_work",
    "remaining_effort",
];

impl RunTrace {
    pub fn n_tasks(&self) -> usize {
        self.efforts.len()
    }

    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace has an initial row")
    }

    /// Closed-task count at time `t` (the last row at or before `t`).
    pub fn closed_at(&self, t: f64) -> u32 {
        let idx = ((t / self.dt) + 1e-9).floor().max(0.0) as usize;
        self.rows[idx.min(self.rows.len() - 1)].closed_count
    }

    /// One row per step, columns [`TRACE_CSV_COLUMNS`].
    pub fn to_csv(&self) -> String {
        let mut out = TRACE_CSV_COLUMNS.join(",");
        out.push('\n');
        for (step, r) in self.rows.iter().enumerate() {
            let s = r.stock_totals();
            let remaining: f64 = r.remaining.iter().sum();
            let mut fields: Vec<String> = vec![step.to_string(), r.time.to_string()];
            fields.extend(TaskState::ALL.iter().map(|&st| r.count(st).to_string()));
            fields.extend(TaskState::ALL.iter().map(|&st| r.active_count(st).to_string()));
            fields.push(r.busy_count().to_string());
            for v in [
                s.wtd,
                s.wqa,
                s.wcr,
                s.wa,
                s.wip(),
                s.cumulative_wir,
                r.aggregates.open,
                r.aggregates.in_progress,
                r.aggregates.rework,
                r.schedule_pressure,
                r.global_productivity,
            ] {
                fields.push(v.to_string());
            }
            fields.push(r.closed_count.to_string());
            fields.push(r.cumulative_work.to_string());
            fields.push(r.cumulative_rework_work.to_string());
            fields.push(remaining.to_string());
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    /// Structured event log.
    pub fn events_json(&self) -> String {
        let doc = serde_json::json!({
            "seed": self.seed,
            "dt": self.dt,
            "deadline": self.deadline,
            "horizon": self.horizon,
            "completed": self.completed,
            "d_act": self.d_act,
            "events": self.events,
        });
        serde_json::to_string_pretty(&doc).expect("events serialize")
    }
}

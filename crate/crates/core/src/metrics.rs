//! Performance metrics and state occupancy computed from run traces.
//!
//! Metrics are computed from a per-step occupancy table. The table is built
//! either by streaming over trace rows ([`OccupancyTable::from_rows`]) or by
//! replaying the event log ([`OccupancyTable::from_events`]); the two routes
//! must agree.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::abm::TaskState;
use crate::error::{Result, SimError};
use crate::trace::{Event, RunTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub avg_cycle_time: f64,
    pub flow_efficiency: f64,
    pub peak_queue: f64,
    pub avg_queue: f64,
    pub peak_in_progress: f64,
    pub avg_in_progress: f64,
    pub utilization: f64,
    pub makespan: f64,
    pub throughput: f64,
    pub on_time_pct: f64,
    pub late_pct: f64,
    pub rework_ratio: f64,
    /// Task-weeks spent in each state.
    pub task_weeks: BTreeMap<TaskState, f64>,
    /// All tasks closed within the horizon.
    pub completion: bool,
    pub closed_count: u32,
    pub n_tasks: u32,
    pub rework_effort_executed: f64,
    pub initial_effort: f64,
    pub deadline: f64,
}

/// Per-step occupancy reconstructed from a run.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyTable {
    pub dt: f64,
    /// `counts[state][step]`, step `0` being the first simulated step.
    pub counts: Vec<Vec<u32>>,
    pub busy: Vec<u32>,
    /// Step index at which each task was initiated (became open).
    pub initiation_step: Vec<Option<u64>>,
    /// Step count (end time / dt) at which each task closed.
    pub close_step: Vec<Option<u64>>,
    pub in_progress_steps: Vec<u64>,
    pub rework_effort_executed: f64,
}

fn step_of(time: f64, dt: f64) -> u64 {
    (time / dt).round() as u64
}

impl OccupancyTable {
    fn empty(n_tasks: usize, n_steps: usize, dt: f64) -> Self {
        Self {
            dt,
            counts: vec![vec![0; n_steps]; TaskState::ALL.len()],
            busy: vec![0; n_steps],
            initiation_step: vec![None; n_tasks],
            close_step: vec![None; n_tasks],
            in_progress_steps: vec![0; n_tasks],
            rework_effort_executed: 0.0,
        }
    }

    pub fn n_steps(&self) -> usize {
        self.busy.len()
    }

    /// Streaming pass over the trace rows.
    pub fn from_rows(trace: &RunTrace) -> Self {
        let n_steps = trace.rows.len() - 1;
        let mut table = Self::empty(trace.n_tasks(), n_steps, trace.dt);
        for (k, row) in trace.rows.iter().skip(1).enumerate() {
            for (i, (&active, &now)) in row.active.iter().zip(&row.states).enumerate() {
                table.counts[active.index()][k] += 1;
                if active != TaskState::WaitingDependencies {
                    table.initiation_step[i].get_or_insert(k as u64);
                }
                if active == TaskState::InProgress {
                    table.in_progress_steps[i] += 1;
                }
                if now == TaskState::Closed && table.close_step[i].is_none() {
                    table.close_step[i] = Some(k as u64 + 1);
                }
            }
            table.busy[k] = row.busy_count() as u32;
        }
        table.rework_effort_executed = trace.last().cumulative_rework_work;
        table
    }

    /// Independent pass replaying the event log.
    pub fn from_events(trace: &RunTrace) -> Self {
        let dt = trace.dt;
        let n_tasks = trace.n_tasks();
        let n_steps = trace.rows.len() - 1;
        let end = n_steps as u64;
        let mut table = Self::empty(n_tasks, n_steps, dt);

        // Each task's state from a given step onward, as (from_step, state).
        let mut timeline: Vec<Vec<(u64, TaskState)>> = trace.rows[0].states.iter().map(|&s| vec![(0, s)]).collect();
        for (i, &s) in trace.rows[0].states.iter().enumerate() {
            if s != TaskState::WaitingDependencies && end > 0 {
                table.initiation_step[i] = Some(0);
            }
        }
        let mut busy_from: BTreeMap<u32, u64> = BTreeMap::new();
        let mut reworks = vec![0u32; n_tasks];

        for ev in &trace.events {
            let k = step_of(ev.time(), dt);
            match *ev {
                Event::DependenciesResolved { task, .. } => {
                    timeline[task.index()].push((k, TaskState::Open));
                    table.initiation_step[task.index()] = Some(k);
                }
                Event::Claimed {
                    task, member, resumed, ..
                } => {
                    timeline[task.index()].push((k, TaskState::InProgress));
                    if !resumed {
                        busy_from.insert(member.0, k);
                    }
                }
                Event::EnteredQmReview { task, .. } => timeline[task.index()].push((k, TaskState::QmReview)),
                Event::QmPassed { task, .. } => timeline[task.index()].push((k, TaskState::ClientReview)),
                Event::ReworkDraw { task, rework: true, .. } => {
                    reworks[task.index()] += 1;
                    timeline[task.index()].push((k, TaskState::Rework));
                }
                Event::ReworkDraw { rework: false, .. } => {}
                Event::Closed { task, .. } => {
                    timeline[task.index()].push((k, TaskState::Closed));
                    table.close_step[task.index()] = Some(k);
                }
                Event::Released { member, .. } => {
                    let from = busy_from.remove(&member.0).expect("release follows a claim");
                    for b in &mut table.busy[from as usize..k as usize] {
                        *b += 1;
                    }
                }
            }
        }
        for from in busy_from.into_values() {
            for b in &mut table.busy[from as usize..end as usize] {
                *b += 1;
            }
        }

        for (i, segments) in timeline.iter().enumerate() {
            for (j, &(from, state)) in segments.iter().enumerate() {
                let to = segments.get(j + 1).map_or(end, |s| s.0);
                for k in from..to.min(end) {
                    table.counts[state.index()][k as usize] += 1;
                }
                if state == TaskState::InProgress {
                    table.in_progress_steps[i] += to.min(end).saturating_sub(from);
                }
            }
        }

        // Re-executed effort: every rework re-adds `fraction * effort`; work
        // still outstanding on an unfinished rework pass was not executed.
        table.rework_effort_executed = trace
            .final_tasks
            .iter()
            .zip(&reworks)
            .map(|(t, &n)| {
                let added = n as f64 * trace.rework_fraction * t.effort;
                let pending = if n > 0 && matches!(t.state, TaskState::Rework | TaskState::InProgress) {
                    t.remaining_effort
                } else {
                    0.0
                };
                added - pending
            })
            .sum();
        table
    }

    pub fn report(&self, trace: &RunTrace) -> MetricsReport {
        let dt = self.dt;
        let n_steps = self.n_steps();
        let n_tasks = trace.n_tasks();
        let makespan = match trace.d_act {
            Some(t) if trace.completed => t,
            _ => n_steps as f64 * dt,
        };

        let mut cycle_total = 0u64;
        let mut active_total = 0u64;
        let mut closed = 0u32;
        let mut on_time = 0u32;
        let deadline_step = trace.deadline / dt + 1e-9;
        for i in 0..n_tasks {
            let (Some(s), Some(c)) = (self.initiation_step[i], self.close_step[i]) else {
                continue;
            };
            closed += 1;
            cycle_total += c - s;
            active_total += self.in_progress_steps[i];
            if (c as f64) <= deadline_step {
                on_time += 1;
            }
        }
        let pct = |num: f64, den: f64| if den > 0.0 { num / den * 100.0 } else { 0.0 };
        let series = |state: TaskState| &self.counts[state.index()];
        let peak = |v: &[u32]| v.iter().copied().max().unwrap_or(0) as f64;
        let mean = |v: &[u32]| {
            if v.is_empty() {
                0.0
            } else {
                v.iter().map(|&c| c as f64).sum::<f64>() / v.len() as f64
            }
        };
        let busy_steps: u64 = self.busy.iter().map(|&b| b as u64).sum();
        let initial_effort: f64 = trace.efforts.iter().sum();

        MetricsReport {
            avg_cycle_time: if closed > 0 {
                cycle_total as f64 * dt / closed as f64
            } else {
                0.0
            },
            flow_efficiency: pct(active_total as f64, cycle_total as f64),
            peak_queue: peak(series(TaskState::Open)),
            avg_queue: mean(series(TaskState::Open)),
            peak_in_progress: peak(series(TaskState::InProgress)),
            avg_in_progress: mean(series(TaskState::InProgress)),
            utilization: pct(busy_steps as f64, trace.team_size as f64 * n_steps as f64),
            makespan,
            throughput: if makespan > 0.0 { closed as f64 / makespan } else { 0.0 },
            on_time_pct: pct(on_time as f64, closed as f64),
            late_pct: pct((closed - on_time) as f64, closed as f64),
            rework_ratio: pct(self.rework_effort_executed, initial_effort),
            task_weeks: TaskState::ALL
                .iter()
                .map(|&s| (s, series(s).iter().map(|&c| c as u64).sum::<u64>() as f64 * dt))
                .collect(),
            completion: trace.completed,
            closed_count: closed,
            n_tasks: n_tasks as u32,
            rework_effort_executed: self.rework_effort_executed,
            initial_effort,
            deadline: trace.deadline,
        }
    }
}

/// Metrics from the streaming pass over trace rows.
pub fn compute_metrics(trace: &RunTrace) -> MetricsReport {
    OccupancyTable::from_rows(trace).report(trace)
}

/// Metrics recomputed from the event log alone.
pub fn recompute_from_events(trace: &RunTrace) -> MetricsReport {
    OccupancyTable::from_events(trace).report(trace)
}

/// Scalar metric with its unit, in report order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub metric: String,
    pub value: f64,
    pub unit: &'static str,
}

impl MetricsReport {
    pub fn scalars(&self) -> Vec<MetricValue> {
        let mut v = vec![
            ("avg_cycle_time", self.avg_cycle_time, "weeks"),
            ("flow_efficiency", self.flow_efficiency, "percent"),
            ("peak_queue", self.peak_queue, "tasks"),
            ("avg_queue", self.avg_queue, "tasks"),
            ("peak_in_progress", self.peak_in_progress, "tasks"),
            ("avg_in_progress", self.avg_in_progress, "tasks"),
            ("utilization", self.utilization, "percent"),
            ("makespan", self.makespan, "weeks"),
            ("throughput", self.throughput, "tasks/week"),
            ("on_time_pct", self.on_time_pct, "percent"),
            ("late_pct", self.late_pct, "percent"),
            ("rework_ratio", self.rework_ratio, "percent"),
        ];
        for (state, weeks) in &self.task_weeks {
            let name: &'static str = match state {
                TaskState::Open => "task_weeks_open",
                TaskState::WaitingDependencies => "task_weeks_waiting_dependencies",
                TaskState::InProgress => "task_weeks_in_progress",
                TaskState::QmReview => "task_weeks_qm_review",
                TaskState::ClientReview => "task_weeks_client_review",
                TaskState::Rework => "task_weeks_rework",
                TaskState::Closed => "task_weeks_closed",
            };
            v.push((name, *weeks, "task-weeks"));
        }
        v.push(("closed_count", self.closed_count as f64, "tasks"));
        v.push(("completion", if self.completion { 1.0 } else { 0.0 }, "bool"));
        v.into_iter()
            .map(|(metric, value, unit)| MetricValue {
                metric: metric.to_string(),
                value,
                unit,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDelta {
    pub metric: String,
    pub a: f64,
    pub b: f64,
    /// Percent change when `relative`, absolute difference otherwise.
    pub delta: f64,
    pub relative: bool,
}

/// Per-metric change from `a` to `b`: `(b - a) / a * 100`, or `b - a` when
/// `a` is zero.
pub fn compare_reports(a: &MetricsReport, b: &MetricsReport) -> Vec<MetricDelta> {
    compare_scalars(&a.scalars(), &b.scalars())
}

pub fn compare_scalars(a: &[MetricValue], b: &[MetricValue]) -> Vec<MetricDelta> {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            debug_assert_eq!(x.metric, y.metric);
            let relative = x.value != 0.0;
            MetricDelta {
                metric: x.metric.clone(),
                a: x.value,
                b: y.value,
                delta: if relative {
                    (y.value - x.value) / x.value * 100.0
                } else {
                    y.value - x.value
                },
                relative,
            }
        })
        .collect()
}

/// Mean of every scalar metric over a batch, in report order.
pub fn mean_scalars(reports: &[MetricsReport]) -> Vec<MetricValue> {
    let Some(first) = reports.first() else {
        return Vec::new();
    };
    let mut acc = first.scalars();
    for r in &reports[1..] {
        for (a, s) in acc.iter_mut().zip(r.scalars()) {
            a.value += s.value;
        }
    }
    for a in &mut acc {
        a.value /= reports.len() as f64;
    }
    acc
}

/// `value` rounded to `digits` significant digits, without trailing zeros.
pub fn format_significant(value: f64, digits: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        return if value == 0.0 { "0".into() } else { value.to_string() };
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = digits as i32 - 1 - magnitude;
    if decimals > 0 {
        let s = format!("{:.*}", decimals as usize, value);
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        let scale = 10f64.powi(-decimals);
        format!("{}", (value / scale).round() * scale)
    }
}

pub const REPORT_CSV_HEADER: &str = "metric,value,unit";
pub const DEFAULT_SIGNIFICANT_DIGITS: usize = 4;

/// `metric,value,unit` rows.
pub fn report_csv(report: &MetricsReport, digits: usize) -> String {
    let mut out = format!("{REPORT_CSV_HEADER}\n");
    for m in report.scalars() {
        out.push_str(&format!(
            "{},{},{}\n",
            m.metric,
            format_significant(m.value, digits),
            m.unit
        ));
    }
    out
}

/// One row per run plus a trailing `mean` row.
pub fn batch_csv(reports: &[MetricsReport], digits: usize) -> String {
    let Some(first) = reports.first() else {
        return String::new();
    };
    let names: Vec<String> = first.scalars().into_iter().map(|m| m.metric).collect();
    let mut out = format!("run,{}\n", names.join(","));
    for (k, r) in reports.iter().enumerate() {
        let vals: Vec<String> = r
            .scalars()
            .iter()
            .map(|m| format_significant(m.value, digits))
            .collect();
        out.push_str(&format!("{k},{}\n", vals.join(",")));
    }
    let means: Vec<String> = mean_scalars(reports)
        .iter()
        .map(|m| format_significant(m.value, digits))
        .collect();
    out.push_str(&format!("mean,{}\n", means.join(",")));
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| SimError::io(path, e))
}

/// Writes `<stem>.csv` (rounded) and `<stem>.json` (full precision) into
/// `dir` and returns the paths.
pub fn write_report(report: &MetricsReport, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    write_file(&csv, &report_csv(report, DEFAULT_SIGNIFICANT_DIGITS))?;
    write_file(&json, &serde_json::to_string_pretty(report)?)?;
    Ok(vec![csv, json])
}

//! Simulation process manager: the step loop coupling agents and stocks.
//!
//! Each step runs four phases in a fixed order:
//!
//! 1. agent update: dependency resolution, assignment, work, reviews;
//! 2. aggregation: effort aggregates and SD flows from the post-update
//!    agent states, then one Euler step;
//! 3. feedback: schedule pressure and the productivity lookup;
//! 4. the new global productivity is used by the *next* step's work.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::abm::{
    advance_review, aggregate_efforts, assign_available_members, initial_task_state, perform_work,
    resolve_dependencies, team_members, ControllingState, ReviewOutcome, TaskAgent, TaskState, TeamMemberAgent,
};
use crate::rng::{mix_seed, UniformSource};
use crate::scenario::{static_partition, AllocationPolicy, MemberId, ScenarioConfig, TaskId, BASELINE_PRODUCTIVITY};
use crate::sd::{derive_flows, euler_step, ClientDecision, SdState, TaskStepEvents};
use crate::trace::{Event, RunTrace, TraceRow};

/// `min(E / (t_remaining * N), cap)`, pinned to `cap` once no time is left.
pub fn schedule_pressure(e_remaining: f64, t_remaining: f64, n_team: u32, cap: f64) -> f64 {
    if e_remaining <= 0.0 {
        return 0.0;
    }
    if t_remaining <= 0.0 {
        return cap;
    }
    (e_remaining / (t_remaining * n_team.max(1) as f64)).min(cap)
}

/// Piecewise-linear interpolation over `knots`, clamped at both ends.
pub fn productivity_lookup(sp: f64, knots: &[(f64, f64)]) -> f64 {
    let Some(&(first_p, first_f)) = knots.first() else {
        return 1.0;
    };
    if sp <= first_p {
        return first_f;
    }
    for w in knots.windows(2) {
        let ((p0, f0), (p1, f1)) = (w[0], w[1]);
        if sp <= p1 {
            return f0 + (f1 - f0) * (sp - p0) / (p1 - p0);
        }
    }
    knots[knots.len() - 1].1
}

/// Remaining effort feeding schedule pressure.
pub fn remaining_effort(tasks: &[TaskAgent], include_waiting: bool) -> f64 {
    tasks
        .iter()
        .filter(|t| match t.state {
            TaskState::Open | TaskState::InProgress | TaskState::Rework => true,
            TaskState::WaitingDependencies => include_waiting,
            _ => false,
        })
        .map(|t| t.remaining_effort)
        .sum()
}

/// Complete mutable state of one run.
#[derive(Debug, Clone)]
pub struct World<'a> {
    cfg: &'a ScenarioConfig,
    pub step: u64,
    pub tasks: Vec<TaskAgent>,
    pub members: Vec<TeamMemberAgent>,
    pub controlling: ControllingState,
    pub sd: SdState,
    pub rng: UniformSource,
    partition: Option<BTreeMap<MemberId, Vec<TaskId>>>,
    pub cumulative_work: f64,
    pub cumulative_rework_work: f64,
    pub events: Vec<Event>,
}

impl<'a> World<'a> {
    pub fn new(cfg: &'a ScenarioConfig, seed: u64) -> Self {
        let tasks: Vec<TaskAgent> = cfg.tasks.iter().map(|s| initial_task_state(s, |_| false)).collect();
        let members = team_members(&cfg.team);
        let partition = match cfg.allocation_policy {
            AllocationPolicy::StaticPartition => Some(static_partition(tasks.len(), members.len())),
            AllocationPolicy::GreedyFirstEligible => None,
        };
        let gamma = cfg.team.size as f64 * BASELINE_PRODUCTIVITY;
        let mut world = Self {
            cfg,
            step: 0,
            sd: SdState::new(tasks.len(), cfg.deadline, gamma),
            tasks,
            members,
            controlling: ControllingState::default(),
            rng: UniformSource::new(seed),
            partition,
            cumulative_work: 0.0,
            cumulative_rework_work: 0.0,
            events: Vec::new(),
        };
        world.feedback(0.0);
        world
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.cfg.timestep
    }

    pub fn all_closed(&self) -> bool {
        self.tasks.iter().all(|t| t.state == TaskState::Closed)
    }

    fn feedback(&mut self, now: f64) {
        let agg = aggregate_efforts(&self.tasks);
        let e = remaining_effort(&self.tasks, self.cfg.pressure_includes_waiting);
        let sp = schedule_pressure(e, self.cfg.deadline - now, self.cfg.team.size, self.cfg.pressure_cap);
        self.controlling = ControllingState {
            global_productivity: productivity_lookup(sp, &self.cfg.productivity_lookup),
            schedule_pressure: sp,
            open_effort: agg.open,
            in_progress_effort: agg.in_progress,
            rework_effort: agg.rework,
            closed_count: self.tasks.iter().filter(|t| t.state == TaskState::Closed).count() as u32,
        };
    }

    fn snapshot(&self, active: Vec<TaskState>, busy: Vec<bool>) -> TraceRow {
        TraceRow {
            time: self.time(),
            states: self.tasks.iter().map(|t| t.state).collect(),
            active,
            remaining: self.tasks.iter().map(|t| t.remaining_effort).collect(),
            stocks: self.sd.tasks.clone(),
            aggregates: aggregate_efforts(&self.tasks),
            schedule_pressure: self.controlling.schedule_pressure,
            global_productivity: self.controlling.global_productivity,
            busy,
            closed_count: self.controlling.closed_count,
            cumulative_work: self.cumulative_work,
            cumulative_rework_work: self.cumulative_rework_work,
        }
    }

    /// Row describing the world before the first step.
    pub fn initial_row(&self) -> TraceRow {
        let states = self.tasks.iter().map(|t| t.state).collect();
        self.snapshot(states, vec![false; self.members.len()])
    }

    fn release(&mut self, member: MemberId, task: TaskId, now: f64) {
        self.members[member.index()].task = None;
        self.tasks[task.index()].holder = None;
        self.events.push(Event::Released {
            time: now,
            member,
            task,
        });
    }

    /// Executes one step and returns its trace row.
    pub fn run_step(&mut self) -> TraceRow {
        let cfg = self.cfg;
        let dt = cfg.timestep;
        let start = self.time();
        let end = (self.step + 1) as f64 * dt;
        let mut step_events = vec![TaskStepEvents::default(); self.tasks.len()];
        if self.step == 0 {
            for (ev, t) in step_events.iter_mut().zip(&self.tasks) {
                ev.introduced = t.effort;
            }
        }

        // Phase 1: agent update.
        for task in resolve_dependencies(&mut self.tasks) {
            self.events.push(Event::DependenciesResolved { time: start, task });
        }
        let assignments = assign_available_members(
            &mut self.members,
            &mut self.tasks,
            cfg.allocation_policy,
            self.partition.as_ref(),
            start,
        );
        for a in assignments {
            self.events.push(Event::Claimed {
                time: start,
                member: a.member,
                task: a.task,
                resumed: a.resumed,
            });
        }
        let active: Vec<TaskState> = self.tasks.iter().map(|t| t.state).collect();
        let busy: Vec<bool> = self.members.iter().map(|m| m.task.is_some()).collect();
        let in_review: Vec<usize> = (0..self.tasks.len())
            .filter(|&i| self.tasks[i].state.is_review())
            .collect();

        let productivity = self.controlling.global_productivity;
        for mi in 0..self.members.len() {
            let Some(id) = self.members[mi].task else { continue };
            let task = &mut self.tasks[id.index()];
            if task.state != TaskState::InProgress {
                continue;
            }
            let reworking = task.rework_count > 0;
            let done =
                perform_work(task, &self.members[mi], productivity, dt).expect("held in-progress task accepts work");
            step_events[id.index()].work_done += done;
            self.cumulative_work += done;
            if reworking {
                self.cumulative_rework_work += done;
            }
            if task.state == TaskState::QmReview {
                self.events.push(Event::EnteredQmReview { time: end, task: id });
                if !cfg.retain_during_review {
                    self.release(self.members[mi].id, id, end);
                }
            }
        }

        for i in in_review {
            let outcome = advance_review(&mut self.tasks[i], dt, &mut self.rng, cfg.rework_fraction, end)
                .expect("task was in review");
            let id = self.tasks[i].id;
            match outcome {
                None => {}
                Some(ReviewOutcome::QmPassed) => {
                    step_events[i].qm_exit = true;
                    self.events.push(Event::QmPassed { time: end, task: id });
                }
                Some(ReviewOutcome::Reworked { u }) => {
                    step_events[i].client_exit = Some(ClientDecision::Reworked {
                        reexecute: self.tasks[i].remaining_effort,
                    });
                    self.events.push(Event::ReworkDraw {
                        time: end,
                        task: id,
                        u,
                        rework: true,
                    });
                }
                Some(ReviewOutcome::Approved { u }) => {
                    step_events[i].client_exit = Some(ClientDecision::Approved);
                    self.events.push(Event::ReworkDraw {
                        time: end,
                        task: id,
                        u,
                        rework: false,
                    });
                    let credited = self.tasks[i].last_worker;
                    if let Some(m) = credited {
                        self.members[m.index()].record_completion();
                    }
                    self.events.push(Event::Closed {
                        time: end,
                        task: id,
                        credited,
                    });
                    if let Some(holder) = self.tasks[i].holder {
                        self.release(holder, id, end);
                    }
                }
            }
        }

        // Phase 2: aggregation into the stock-flow layer.
        let flows = derive_flows(&step_events, &self.sd, dt);
        self.sd = euler_step(&self.sd, &flows, dt);
        self.step += 1;
        if self.sd.d_act.is_none() && self.all_closed() {
            self.sd.d_act = Some(end);
        }

        // Phase 3: feedback, effective from the next step's work.
        self.feedback(end);
        self.snapshot(active, busy)
    }

    pub fn into_trace(self, seed: u64, rows: Vec<TraceRow>) -> RunTrace {
        let completed = self.all_closed();
        RunTrace {
            seed,
            dt: self.cfg.timestep,
            deadline: self.cfg.deadline,
            horizon: self.cfg.effective_horizon(),
            team_size: self.cfg.team.size,
            efforts: self.tasks.iter().map(|t| t.effort).collect(),
            rework_fraction: self.cfg.rework_fraction,
            rows,
            events: self.events,
            d_act: self.sd.d_act,
            clamp_deficit: self.sd.clamp_deficit,
            final_tasks: self.tasks,
            final_members: self.members,
            completed,
        }
    }
}

/// Runs `cfg` from time 0 until every task is closed or the horizon is
/// reached. Identical `(cfg, seed)` give identical traces.
pub fn run_simulation(cfg: &ScenarioConfig, seed: u64) -> RunTrace {
    let mut world = World::new(cfg, seed);
    let mut rows = vec![world.initial_row()];
    let horizon = cfg.effective_horizon();
    while !world.all_closed() && world.time() < horizon - 1e-9 {
        rows.push(world.run_step());
    }
    world.into_trace(seed, rows)
}

/// `n_runs` independent runs; run `k` uses `mix_seed(master_seed, k)`.
/// Uses the current rayon pool; results are in run-index order.
pub fn monte_carlo(cfg: &ScenarioConfig, n_runs: u32, master_seed: u64) -> Vec<RunTrace> {
    (0..n_runs as u64)
        .into_par_iter()
        .map(|k| run_simulation(cfg, mix_seed(master_seed, k)))
        .collect()
}

/// [`monte_carlo`] on a dedicated pool of `threads` workers (0 = automatic).
pub fn monte_carlo_with_threads(cfg: &ScenarioConfig, n_runs: u32, master_seed: u64, threads: usize) -> Vec<RunTrace> {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| monte_carlo(cfg, n_runs, master_seed)),
        Err(_) => monte_carlo(cfg, n_runs, master_seed),
    }
}

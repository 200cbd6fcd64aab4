mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use rdsim_core::abm::{aggregate_efforts, TaskState};
use rdsim_core::scenario::{validate_scenario, AllocationPolicy};
use rdsim_core::spm::{
    monte_carlo, monte_carlo_with_threads, productivity_lookup, remaining_effort, run_simulation, schedule_pressure,
};
use rdsim_core::trace::Event;

use common::{arb_scenario, rel_close};

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn generated_scenarios_are_valid(cfg in arb_scenario()) {
        prop_assert!(validate_scenario(&cfg).is_empty());
    }

    #[test]
    fn every_task_is_in_exactly_one_state(cfg in arb_scenario(), seed in any::<u64>()) {
        let tr = run_simulation(&cfg, seed);
        for row in &tr.rows {
            let total: usize = TaskState::ALL.iter().map(|&s| row.count(s)).sum();
            prop_assert_eq!(total, cfg.tasks.len());
            prop_assert_eq!(row.count(TaskState::Closed), row.closed_count as usize);
        }
    }

    #[test]
    fn closed_count_never_decreases(cfg in arb_scenario(), seed in any::<u64>()) {
        let tr = run_simulation(&cfg, seed);
        for w in tr.rows.windows(2) {
            prop_assert!(w[1].closed_count >= w[0].closed_count);
        }
    }

    #[test]
    fn blocked_tasks_never_start(cfg in arb_scenario(), seed in any::<u64>()) {
        let tr = run_simulation(&cfg, seed);
        for w in tr.rows.windows(2) {
            for (i, spec) in cfg.tasks.iter().enumerate() {
                if w[1].active[i] == TaskState::InProgress {
                    for d in &spec.dependencies {
                        prop_assert_eq!(w[0].states[d.index()], TaskState::Closed);
                    }
                }
            }
        }
    }

    #[test]
    fn without_rework_each_task_is_reviewed_once(mut cfg in arb_scenario(), seed in any::<u64>()) {
        for t in &mut cfg.tasks {
            t.rework_probability = 0.0;
        }
        let tr = run_simulation(&cfg, seed);
        let mut qm = HashMap::new();
        let mut client = HashMap::new();
        for ev in &tr.events {
            match *ev {
                Event::EnteredQmReview { task, .. } => *qm.entry(task).or_insert(0) += 1,
                Event::ReworkDraw { task, rework, .. } => {
                    prop_assert!(!rework);
                    *client.entry(task).or_insert(0) += 1;
                }
                _ => {}
            }
        }
        if tr.completed {
            for t in &cfg.tasks {
                prop_assert_eq!(qm.get(&t.id), Some(&1));
                prop_assert_eq!(client.get(&t.id), Some(&1));
            }
            for (i, s) in tr.last().stocks.iter().enumerate() {
                prop_assert!(rel_close(s.wa, cfg.tasks[i].effort, 1e-12));
                prop_assert!(s.wip().abs() < 1e-9);
            }
        }
    }

    #[test]
    fn remaining_effort_only_rises_on_rework(cfg in arb_scenario(), seed in any::<u64>()) {
        let tr = run_simulation(&cfg, seed);
        for w in tr.rows.windows(2) {
            for (i, spec) in cfg.tasks.iter().enumerate() {
                if w[1].remaining[i] > w[0].remaining[i] {
                    prop_assert_eq!(w[1].states[i], TaskState::Rework);
                    prop_assert_eq!(w[1].remaining[i], cfg.rework_fraction * spec.effort);
                }
            }
        }
    }

    #[test]
    fn stocks_conserve_introduced_effort(cfg in arb_scenario(), seed in any::<u64>()) {
        let tr = run_simulation(&cfg, seed);
        for row in &tr.rows {
            let s = row.stock_totals();
            prop_assert!((s.total() - s.cumulative_wir).abs() < 1e-9);
            for (st, &rem) in row.stocks.iter().zip(&row.remaining) {
                if st.cumulative_wir > 0.0 {
                    prop_assert!((st.wtd - rem).abs() < 1e-9);
                }
            }
        }
        prop_assert!(tr.clamp_deficit < 1e-9);
    }

    #[test]
    fn approved_work_never_decreases(cfg in arb_scenario(), seed in any::<u64>()) {
        let tr = run_simulation(&cfg, seed);
        for w in tr.rows.windows(2) {
            prop_assert!(w[1].stock_totals().wa >= w[0].stock_totals().wa - 1e-12);
        }
    }

    #[test]
    fn actual_duration_is_last_close(cfg in arb_scenario(), seed in any::<u64>()) {
        let tr = run_simulation(&cfg, seed);
        let last_close = tr.final_tasks.iter().filter_map(|t| t.close_time).fold(None, |m: Option<f64>, t| Some(m.map_or(t, |m| m.max(t))));
        if tr.completed {
            prop_assert_eq!(tr.d_act, last_close);
            prop_assert_eq!(tr.d_act, Some(tr.last().time));
        } else {
            prop_assert_eq!(tr.d_act, None);
        }
    }

    #[test]
    fn pressure_is_capped(cfg in arb_scenario(), seed in any::<u64>()) {
        let tr = run_simulation(&cfg, seed);
        for row in &tr.rows {
            prop_assert!(row.schedule_pressure >= 0.0 && row.schedule_pressure <= cfg.pressure_cap);
        }
    }

    #[test]
    fn feedback_is_computed_from_post_update_states(cfg in arb_scenario(), seed in any::<u64>()) {
        let tr = run_simulation(&cfg, seed);
        for row in &tr.rows {
            let mut tasks = tr.final_tasks.clone();
            for (t, (&s, &r)) in tasks.iter_mut().zip(row.states.iter().zip(&row.remaining)) {
                t.state = s;
                t.remaining_effort = r;
            }
            prop_assert_eq!(aggregate_efforts(&tasks), row.aggregates);
            let e = remaining_effort(&tasks, cfg.pressure_includes_waiting);
            let sp = schedule_pressure(e, cfg.deadline - row.time, cfg.team.size, cfg.pressure_cap);
            prop_assert_eq!(sp, row.schedule_pressure);
            prop_assert_eq!(productivity_lookup(sp, &cfg.productivity_lookup), row.global_productivity);
        }
    }

    #[test]
    fn executed_work_matches_bookkeeping(cfg in arb_scenario(), seed in any::<u64>()) {
        let tr = run_simulation(&cfg, seed);
        if tr.completed {
            let expected: f64 = tr
                .final_tasks
                .iter()
                .map(|t| t.effort + cfg.rework_fraction * t.effort * t.rework_count as f64)
                .sum();
            prop_assert!(rel_close(tr.last().cumulative_work, expected, 1e-9));
        }
    }

    #[test]
    fn runs_are_reproducible(cfg in arb_scenario(), seed in any::<u64>()) {
        let a = run_simulation(&cfg, seed);
        let b = run_simulation(&cfg, seed);
        prop_assert_eq!(a.to_csv(), b.to_csv());
        prop_assert_eq!(a.events_json(), b.events_json());
    }
}

#[test]
fn monte_carlo_ignores_worker_count() {
    let mut cfg = rdsim_core::scenario::base_parallel();
    cfg.allocation_policy = AllocationPolicy::GreedyFirstEligible;
    let reference: Vec<String> = monte_carlo(&cfg, 16, 7).iter().map(|t| t.to_csv()).collect();
    for threads in [1, 2, 3, 8] {
        let got: Vec<String> = monte_carlo_with_threads(&cfg, 16, 7, threads)
            .iter()
            .map(|t| t.to_csv())
            .collect();
        assert_eq!(got, reference, "{threads} workers");
    }
}

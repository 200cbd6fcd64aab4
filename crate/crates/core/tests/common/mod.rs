#![allow(dead_code)]

pub mod oracles;

use proptest::prelude::*;
use rdsim_core::scenario::{AllocationPolicy, ScenarioConfig, TaskId, TaskSpec, TeamSpec};

/// Random acyclic task graph: each task may depend on lower ids only.
pub fn arb_tasks(max_tasks: usize) -> impl Strategy<Value = Vec<TaskSpec>> {
    (1..=max_tasks).prop_flat_map(|n| {
        proptest::collection::vec(
            (
                0.5f64..12.0,
                0.0f64..0.6,
                prop_oneof![Just(1.0), 0.5f64..3.0],
                prop_oneof![Just(2.5), 0.5f64..4.0],
                proptest::collection::vec(any::<prop::sample::Index>(), 0..3),
            ),
            n,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (effort, p, qm, client, deps))| {
                    let mut dependencies: Vec<TaskId> = if i == 0 {
                        Vec::new()
                    } else {
                        deps.iter().map(|d| TaskId(d.index(i) as u32 + 1)).collect()
                    };
                    dependencies.sort();
                    dependencies.dedup();
                    TaskSpec {
                        id: TaskId(i as u32 + 1),
                        effort,
                        rework_probability: p,
                        qm_delay: qm,
                        client_delay: client,
                        dependencies,
                    }
                })
                .collect()
        })
    })
}

pub fn arb_scenario() -> impl Strategy<Value = ScenarioConfig> {
    (
        arb_tasks(12),
        1u32..=6,
        any::<bool>(),
        any::<bool>(),
        prop_oneof![Just(1.0), Just(0.5), Just(0.25)],
        0.1f64..=1.0,
        10.0f64..200.0,
    )
        .prop_map(|(tasks, size, static_alloc, retain, dt, fraction, deadline)| {
            let mut cfg = ScenarioConfig::new(deadline, tasks, TeamSpec::with_size(size));
            cfg.timestep = dt;
            cfg.allocation_policy = if static_alloc {
                AllocationPolicy::StaticPartition
            } else {
                AllocationPolicy::GreedyFirstEligible
            };
            cfg.retain_during_review = retain;
            cfg.rework_fraction = fraction;
            cfg.horizon = Some(deadline.max(300.0));
            cfg
        })
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

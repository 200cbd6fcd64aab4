//! Per-task stock-flow layer integrated with explicit Euler steps.
//!
//! Stocks per task `i`:
//!
//! ```text
//! dWTD/dt = WIR - WR + RE_QM + RE_C + RE_A
//! dWQA/dt = WR - WIR_QM - RE_QM
//! dWCR/dt = WIR_QM - WAR - RE_C
//! dWA/dt  = WAR - RE_A
//! ```
//!
//! Flows are not closed-form; they are impulses derived from the agent
//! events of each step (amount moved / dt), so the stocks always mirror the
//! agent layer: WTD holds remaining effort, WQA the work executed in the
//! current pass, WCR the pass under client review and WA approved work.

use serde::{Deserialize, Serialize};

/// Stocks below zero by less than this are numerical noise.
pub const STOCK_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskStocks {
    pub wtd: f64,
    pub wqa: f64,
    pub wcr: f64,
    pub wa: f64,
    pub cumulative_wir: f64,
}

impl TaskStocks {
    pub fn wip(&self) -> f64 {
        self.wtd + self.wqa + self.wcr
    }

    pub fn total(&self) -> f64 {
        self.wtd + self.wqa + self.wcr + self.wa
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdState {
    pub tasks: Vec<TaskStocks>,
    /// Close time of the last task, once every task is approved.
    pub d_act: Option<f64>,
    /// Planned duration, weeks (reporting only).
    pub d_base: f64,
    /// Nominal team throughput, work-units/week (reporting only).
    pub gamma: f64,
    /// Total magnitude clamped away from negative stocks.
    pub clamp_deficit: f64,
}

impl SdState {
    pub fn new(n_tasks: usize, d_base: f64, gamma: f64) -> Self {
        Self {
            tasks: vec![TaskStocks::default(); n_tasks],
            d_act: None,
            d_base,
            gamma,
            clamp_deficit: 0.0,
        }
    }

    pub fn totals(&self) -> TaskStocks {
        self.tasks.iter().fold(TaskStocks::default(), |acc, s| TaskStocks {
            wtd: acc.wtd + s.wtd,
            wqa: acc.wqa + s.wqa,
            wcr: acc.wcr + s.wcr,
            wa: acc.wa + s.wa,
            cumulative_wir: acc.cumulative_wir + s.cumulative_wir,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskFlows {
    pub wir: f64,
    pub wr: f64,
    pub wir_qm: f64,
    pub war: f64,
    pub re_qm: f64,
    pub re_c: f64,
    pub re_a: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowRates {
    pub tasks: Vec<TaskFlows>,
}

/// Outcome of a client review finishing this step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClientDecision {
    Approved,
    /// Rejected; `reexecute` work-units return to the backlog.
    Reworked {
        reexecute: f64,
    },
}

/// What happened to one task during a step, as far as the stocks care.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskStepEvents {
    /// Effort introduced into the backlog this step (task instantiation).
    pub introduced: f64,
    pub work_done: f64,
    pub qm_exit: bool,
    pub client_exit: Option<ClientDecision>,
}

/// Flow rates for one step from the agent events of that step, evaluated
/// against the stocks at the start of the step.
pub fn derive_flows(events: &[TaskStepEvents], state: &SdState, dt: f64) -> FlowRates {
    let tasks = events
        .iter()
        .zip(&state.tasks)
        .map(|(ev, s)| {
            let mut f = TaskFlows {
                wir: ev.introduced / dt,
                wr: ev.work_done / dt,
                ..TaskFlows::default()
            };
            if ev.qm_exit {
                f.wir_qm = s.wqa / dt;
            }
            match ev.client_exit {
                Some(ClientDecision::Approved) => f.war = s.wcr / dt,
                Some(ClientDecision::Reworked { reexecute }) => {
                    let back = reexecute.min(s.wcr);
                    f.re_c = back / dt;
                    f.war = (s.wcr - back) / dt;
                }
                None => {}
            }
            f
        })
        .collect();
    FlowRates { tasks }
}

fn clamp(value: f64, deficit: &mut f64) -> f64 {
    if value < 0.0 {
        *deficit += -value;
        0.0
    } else {
        value
    }
}

/// One forward-Euler step: `stock += (inflows - outflows) * dt`.
pub fn euler_step(state: &SdState, flows: &FlowRates, dt: f64) -> SdState {
    let mut next = state.clone();
    let mut deficit = 0.0;
    for (s, f) in next.tasks.iter_mut().zip(&flows.tasks) {
        let wtd = s.wtd + (f.wir - f.wr + f.re_qm + f.re_c + f.re_a) * dt;
        let wqa = s.wqa + (f.wr - f.wir_qm - f.re_qm) * dt;
        let wcr = s.wcr + (f.wir_qm - f.war - f.re_c) * dt;
        let wa = s.wa + (f.war - f.re_a) * dt;
        s.wtd = clamp(wtd, &mut deficit);
        s.wqa = clamp(wqa, &mut deficit);
        s.wcr = clamp(wcr, &mut deficit);
        s.wa = clamp(wa, &mut deficit);
        s.cumulative_wir += f.wir * dt;
    }
    next.clamp_deficit += deficit;
    next
}

/// Work in process, total and per task.
pub fn wip(state: &SdState) -> (f64, Vec<f64>) {
    let per: Vec<f64> = state.tasks.iter().map(TaskStocks::wip).collect();
    (per.iter().sum(), per)
}

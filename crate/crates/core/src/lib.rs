//! Hybrid agent-based / system-dynamics simulator for R&D project execution.
//!
//! Each time step runs the agent layer (task and team-member state
//! machines), derives stock flows from the agent events, integrates the
//! stock-flow layer and recomputes schedule pressure and productivity, which
//! feed back into the next step's work.

pub mod abm;
pub mod error;
pub mod maturity;
pub mod metrics;
pub mod rng;
pub mod scenario;
pub mod sd;
pub mod spm;
pub mod trace;

pub use error::{Result, SimError};
pub use maturity::{maturity_curve, MaturityCurve};
pub use metrics::{compute_metrics, MetricsReport};
pub use scenario::{parse_scenario, validate_scenario, AllocationPolicy, Preset, ScenarioConfig};
pub use spm::{monte_carlo, run_simulation};
pub use trace::RunTrace;

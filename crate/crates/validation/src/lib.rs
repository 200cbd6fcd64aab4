//! Acceptance suite for the simulator; see `tests/acceptance.rs`.

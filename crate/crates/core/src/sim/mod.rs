//! Event-level Monte Carlo of the source, the two detectors, the delay
//! generator and the gating electronics.
//!
//! Timestamps are integer picoseconds. Photons of a pair are created at the
//! same instant; fixed arm delays shift the idler.

pub mod config;
pub mod engine;
pub mod report;
pub mod scan;
pub mod timetag;

pub use config::{
    Coupling, GatingMode, IdlerDetector, PumpMode, SignalDetector, SimConfig, DEFAULT_EVENT_BUDGET,
};
pub use engine::{
    detect_signal, gate_idler, generate_pairs, route_pair, run, run_pass, simulate_events, Event,
    EventStream, EventTag, GateRecord, SimRun, Tally, Window,
};
pub use report::{estimate_statistics, Estimate, GateStatistics, SimReport};
pub use scan::{
    delay_scan, pulsed_reference, simulate_measurements, sweep_pump_power, DelayPoint,
    SimulatedMeasurement, SweepPoint,
};

use thiserror::Error;

use crate::stats::StatsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {name} = {value} ({expected})")]
    InvalidConfig {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error(
        "event budget exceeded: {requested:e} pairs requested, budget {budget:e}; run aborted"
    )]
    EventBudget { requested: f64, budget: f64 },
    #[error("no gates were recorded")]
    EmptyReport,
    #[error(transparent)]
    Statistics(#[from] StatsError),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Runs `config` and summarizes it.
pub fn simulate(config: &SimConfig) -> Result<SimReport> {
    Ok(SimReport::from_run(&run(config)?))
}

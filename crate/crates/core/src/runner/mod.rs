//! Configuration, mission wiring, batches and result files.

mod batch;
mod config;
mod mission;

pub use batch::{
    execute, mean_std, run_batch, run_batch_with, runs_csv, seeds, stats_csv, trace_csv, BatchFailure, BatchOptions,
    BatchReport, BatchResult, BatchStats, MeanStd, PARTIAL_MARKER, RESULTS_JSON, RUNS_CSV, STATS_CSV,
};
pub use config::{ConfigError, RunConfig};
pub use mission::{run_once, Mission, MissionOptions, MissionOutcome, RunMetrics, TraceRow};

use thiserror::Error;

use crate::bus::BusError;
use crate::managed::ManagedError;
use crate::managing::ManagerBuildError;
use crate::simworld::WorldError;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("manager: {0}")]
    Manager(#[from] ManagerBuildError),
    #[error("world: {0}")]
    World(#[from] WorldError),
    #[error("bus: {0}")]
    Bus(#[from] BusError),
    #[error("managed subsystem: {0}")]
    Managed(#[from] ManagedError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl RunError {
    /// Errors caused by the configuration rather than by the simulation.
    pub fn is_config(&self) -> bool {
        matches!(self, RunError::Config(_) | RunError::Manager(ManagerBuildError::Config(_)))
    }
}

//! Managing subsystems: monitors plus the three adaptation strategies.
//!
//! Every manager serves `/mros/objective` so the mission coordinator is
//! wired identically in all three cases. Managers only touch the managed
//! system through the `/<node>/change_mode` services.

mod fixed;
mod metacontrol;
mod monitors;
mod random;

use std::collections::BTreeMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

pub use fixed::FixedManager;
pub use metacontrol::{design_mode, register_bridge, unground_mode, Metacontrol, KbSnapshot, BRIDGE_CLIENT, REASONER_CLIENT};
pub use monitors::{
    ThrusterMonitor, WaterVisibilityObserver, THRUSTER_MONITOR, WATER_VISIBILITY_KEY, WATER_VISIBILITY_OBSERVER,
};
pub use random::{RandomManager, RANDOM_CLIENT};

use crate::bus::{Bus, BusError, ObjectiveRequest, Port, ServiceRequest, ServiceResponse, OBJECTIVE_SERVICE};
use crate::managed::{node_for_function, ModeTable, GENERATE_SEARCH_PATH_NODE, MAINTAIN_MOTION_NODE, MODE_ALL_THRUSTERS, MODE_SPIRAL_MEDIUM};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManagerKind {
    None,
    Random,
    Metacontrol,
}

impl ManagerKind {
    pub fn name(self) -> &'static str {
        match self {
            ManagerKind::None => "none",
            ManagerKind::Random => "random",
            ManagerKind::Metacontrol => "metacontrol",
        }
    }
}

impl std::fmt::Display for ManagerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ManagerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(ManagerKind::None),
            "random" => Ok(ManagerKind::Random),
            "metacontrol" => Ok(ManagerKind::Metacontrol),
            other => Err(format!("unknown manager {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", default)]
pub struct ManagerConfig<S: Scalar> {
    pub kind: ManagerKind,
    /// Seconds between MAPE-K iterations.
    pub mape_period: S,
    /// Seconds between random reconfigurations.
    pub adaptation_period: S,
    /// Seconds between water visibility reports.
    pub observer_period: S,
    /// Node -> mode applied once at start by the `none` manager.
    pub fixed_modes: BTreeMap<String, String>,
    /// Nodes the random manager leaves alone.
    pub random_exclude: Vec<String>,
}

impl<S: Scalar> Default for ManagerConfig<S> {
    fn default() -> Self {
        Self {
            kind: ManagerKind::Metacontrol,
            mape_period: S::lit(1.0),
            adaptation_period: S::lit(15.0),
            observer_period: S::lit(0.5),
            fixed_modes: default_fixed_modes(),
            random_exclude: Vec::new(),
        }
    }
}

pub fn default_fixed_modes() -> BTreeMap<String, String> {
    [
        (GENERATE_SEARCH_PATH_NODE, MODE_SPIRAL_MEDIUM),
        (MAINTAIN_MOTION_NODE, MODE_ALL_THRUSTERS),
    ]
    .into_iter()
    .map(|(n, m)| (n.to_string(), m.to_string()))
    .collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ManagerConfigError {
    #[error("{field} must be a positive multiple of dt ({value} s)")]
    Period { field: &'static str, value: f64 },
    #[error("unknown node/mode {node}/{mode}")]
    UnknownMode { node: String, mode: String },
    #[error("unknown node {0}")]
    UnknownNode(String),
}

/// Converts a period in seconds to a whole number of ticks.
pub fn period_steps<S: Scalar>(field: &'static str, period: S, dt: S) -> Result<u64, ManagerConfigError> {
    let ratio = (period / dt).as_f64();
    let steps = ratio.round();
    if !(ratio.is_finite() && steps >= 1.0 && (ratio - steps).abs() < 1e-6) {
        return Err(ManagerConfigError::Period {
            field,
            value: period.as_f64(),
        });
    }
    Ok(steps as u64)
}

impl<S: Scalar> ManagerConfig<S> {
    pub fn validate(&self, dt: S) -> Result<(), ManagerConfigError> {
        period_steps("mape_period", self.mape_period, dt)?;
        period_steps("adaptation_period", self.adaptation_period, dt)?;
        period_steps("observer_period", self.observer_period, dt)?;
        let table = ModeTable::<S>::new();
        for (node, mode) in &self.fixed_modes {
            if table.lookup(node, mode).is_none() {
                return Err(ManagerConfigError::UnknownMode {
                    node: node.clone(),
                    mode: mode.clone(),
                });
            }
        }
        for node in &self.random_exclude {
            if table.modes_of(node).next().is_none() {
                return Err(ManagerConfigError::UnknownNode(node.clone()));
            }
        }
        Ok(())
    }
}

/// A managing subsystem driven by the mission clock.
pub trait Manager {
    fn kind(&self) -> ManagerKind;

    /// Whether the mission coordinator has to switch the follow node on by
    /// itself once the pipeline is found.
    fn coordinator_activates_follow(&self) -> bool {
        true
    }

    /// Called once per simulation tick after the monitors have published.
    fn tick(&mut self, step: u64) -> Result<(), BusError>;

    /// Bus client names the manager uses.
    fn clients(&self) -> Vec<&'static str>;

    /// KB snapshots collected so far (Metacontrol only).
    fn take_snapshots(&mut self) -> Vec<KbSnapshot> {
        Vec::new()
    }
}

/// Builds and wires the manager selected by `config.kind`.
///
/// `seed` feeds the random manager's private stream; `snapshot_kb` turns
/// on per-cycle KB snapshots for Metacontrol.
pub fn build_manager<S: Scalar>(
    bus: &Rc<Bus>,
    config: &ManagerConfig<S>,
    dt: S,
    seed: u64,
    snapshot_kb: bool,
) -> Result<Box<dyn Manager>, ManagerBuildError> {
    config.validate(dt)?;
    Ok(match config.kind {
        ManagerKind::None => Box::new(FixedManager::attach(bus, config.fixed_modes.clone())?),
        ManagerKind::Random => Box::new(RandomManager::<S>::attach(
            bus,
            period_steps("adaptation_period", config.adaptation_period, dt)?,
            config.random_exclude.clone(),
            seed,
        )?),
        ManagerKind::Metacontrol => Box::new(Metacontrol::<S>::attach(
            bus,
            period_steps("mape_period", config.mape_period, dt)?,
            snapshot_kb,
        )?),
    })
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ManagerBuildError {
    #[error(transparent)]
    Config(#[from] ManagerConfigError),
    #[error(transparent)]
    Bus(#[from] BusError),
}

/// Serves `/mros/objective`, answering with whatever `handle` decides.
/// Names that do not map to a lifecycle node are refused.
pub(crate) fn serve_objectives<F>(port: &Port, mut handle: F) -> Result<(), BusError>
where
    F: FnMut(&ObjectiveRequest) -> Result<(), String> + 'static,
{
    port.register_service(OBJECTIVE_SERVICE, move |req| {
        let ServiceRequest::Objective(req) = req else {
            return ServiceResponse::fail(format!("not an objective request: {req:?}"));
        };
        let (ObjectiveRequest::Set { function } | ObjectiveRequest::Remove { function }) = req;
        if node_for_function(function).is_none() {
            return ServiceResponse::fail(format!("unknown function {function:?}"));
        }
        match handle(req) {
            Ok(()) => ServiceResponse::ok("accepted"),
            Err(detail) => ServiceResponse::fail(detail),
        }
    })
}

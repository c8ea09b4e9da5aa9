//! Managed subsystem: the lifecycle nodes that fly the mission, the mode
//! manager that reconfigures them, and the mission coordinator.

mod coordinator;
mod modes;
mod nodes;
mod spiral;

use std::cell::RefCell;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

pub use coordinator::{MissionCoordinator, MissionPhase};
pub use modes::{
    node_for_function, register_mode_manager, LifecycleNode, LifecycleState, ModeRow, ModeTable, NodeSet,
    FOLLOW_PIPELINE_NODE, GENERATE_SEARCH_PATH_NODE, MAINTAIN_MOTION_NODE, MODE_ALL_THRUSTERS, MODE_FOLLOW_PIPELINE,
    MODE_RECOVER_THRUSTERS, MODE_SPIRAL_HIGH, MODE_SPIRAL_LOW, MODE_SPIRAL_MEDIUM, MODE_UNGROUND, NODES,
};
pub use nodes::{FollowBehaviour, FollowError, MaintainBehaviour, MaintainOutcome, SearchBehaviour};
pub use spiral::{path_length, spiral_through, spiral_waypoints, SpiralError, Waypoint};

use crate::bus::{BusError, DiagnosticLevel, DiagnosticStatus, Payload, Port, DIAGNOSTICS_TOPIC};
use crate::scalar::Scalar;
use crate::simworld::{Command, Detection, ThrusterStatus, World};
use crate::tomasys::THRUSTERS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", default)]
pub struct ManagedConfig<S: Scalar> {
    /// Seconds of continuous recovery mode before thrusters come back.
    pub recovery_duration: S,
    /// Follow altitude, m.
    pub inspection_altitude: S,
    /// Waypoint capture radius, m.
    pub capture_radius: S,
    /// Radius at which the search spiral ends, m.
    pub coverage_radius_limit: S,
    /// Follow carrot distance ahead of the furthest inspected point, m.
    pub follow_lookahead: S,
}

impl<S: Scalar> Default for ManagedConfig<S> {
    fn default() -> Self {
        Self {
            recovery_duration: S::lit(10.0),
            inspection_altitude: S::lit(1.0),
            capture_radius: S::lit(0.3),
            coverage_radius_limit: S::lit(30.0),
            follow_lookahead: S::lit(1.0),
        }
    }
}

/// Which behaviour moved the vehicle on a tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Driver {
    Recovery,
    Follow,
    Search,
    Idle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickReport<S: Scalar> {
    pub driver: Driver,
    pub inspected_delta: S,
    pub recovered: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ManagedError {
    #[error(transparent)]
    Bus(#[from] BusError),
    #[error(transparent)]
    Spiral(#[from] SpiralError),
}

/// The lifecycle nodes bound to the mode manager services, plus the
/// behaviour state each node keeps between ticks.
pub struct ManagedSubsystem<S: Scalar> {
    config: ManagedConfig<S>,
    nodes: Rc<RefCell<NodeSet<S>>>,
    port: Port,
    search: SearchBehaviour<S>,
    follow: FollowBehaviour<S>,
    maintain: MaintainBehaviour,
}

impl<S: Scalar> std::fmt::Debug for ManagedSubsystem<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManagedSubsystem")
            .field("nodes", &self.nodes.borrow().summary())
            .field("inspected", &self.follow.inspected())
            .finish()
    }
}

impl<S: Scalar> ManagedSubsystem<S> {
    /// Registers the mode manager services on `port`'s bus.
    pub fn attach(port: Port, config: ManagedConfig<S>) -> Result<Self, BusError> {
        let nodes = Rc::new(RefCell::new(NodeSet::default()));
        register_mode_manager(&port, &nodes)?;
        Ok(Self {
            config,
            nodes,
            port,
            search: SearchBehaviour::new(),
            follow: FollowBehaviour::new(),
            maintain: MaintainBehaviour::new(),
        })
    }

    pub fn config(&self) -> &ManagedConfig<S> {
        &self.config
    }

    pub fn nodes(&self) -> std::cell::Ref<'_, NodeSet<S>> {
        self.nodes.borrow()
    }

    pub fn search(&self) -> &SearchBehaviour<S> {
        &self.search
    }

    pub fn inspected(&self) -> S {
        self.follow.inspected()
    }

    pub fn pipeline_detected(&mut self, detection: Detection<S>) {
        self.follow.pipeline_detected(detection);
    }

    /// Runs maintain-motion, then follow or search, then steps the world.
    /// Recovery holds the vehicle; follow takes priority over search.
    pub fn tick(&mut self, world: &mut World<S>) -> Result<TickReport<S>, ManagedError> {
        let (search_node, follow_node, maintain_node) = {
            let nodes = self.nodes.borrow();
            (nodes.search().clone(), nodes.follow().clone(), nodes.maintain().clone())
        };
        let duration_steps = (self.config.recovery_duration / world.dt()).round().as_f64().max(0.0) as u64;
        let outcome = self.maintain.step(&maintain_node, world, duration_steps);
        if outcome.recovered > 0 {
            self.publish_recovered(world)?;
        }

        let mut report = TickReport {
            driver: Driver::Idle,
            inspected_delta: S::zero(),
            recovered: outcome.recovered,
        };
        let mut command = Command::Hold;
        if outcome.holding {
            report.driver = Driver::Recovery;
        } else {
            let cfg = self.config;
            let corridor = cfg.inspection_altitude * world.kinematics().detection_half_angle.tan();
            let follow = self
                .follow
                .step(&follow_node, world, cfg.inspection_altitude, corridor, cfg.follow_lookahead)
                .unwrap_or_else(|e| {
                    log::debug!("{e}");
                    None
                });
            if let Some((cmd, delta)) = follow {
                command = cmd;
                report.driver = Driver::Follow;
                report.inspected_delta = delta;
            } else {
                let spacing = world.kinematics().nominal_speed * world.dt() * S::lit(5.0);
                if let Some(cmd) =
                    self.search
                        .step(&search_node, world, cfg.coverage_radius_limit, spacing, cfg.capture_radius)?
                {
                    command = cmd;
                    report.driver = Driver::Search;
                }
            }
        }
        world.step(command);
        Ok(report)
    }

    fn publish_recovered(&self, world: &World<S>) -> Result<(), BusError> {
        let mut status = DiagnosticStatus::new(DiagnosticLevel::Ok, MAINTAIN_MOTION_NODE, "recovered");
        for (name, s) in THRUSTERS.iter().zip(world.thrusters()) {
            status.set(*name, thruster_label(*s));
        }
        self.port.publish(DIAGNOSTICS_TOPIC, Payload::Diagnostic(status))
    }
}

pub fn thruster_label(status: ThrusterStatus) -> &'static str {
    match status {
        ThrusterStatus::Available => "AVAILABLE",
        ThrusterStatus::Failed => "FAILED",
    }
}

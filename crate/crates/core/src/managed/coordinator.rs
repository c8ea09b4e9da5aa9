use serde::Serialize;

use super::modes::{FOLLOW_PIPELINE_NODE, MODE_FOLLOW_PIPELINE};
use super::ManagedSubsystem;
use crate::bus::{change_mode_service, BusError, ObjectiveRequest, Port, ServiceRequest, OBJECTIVE_SERVICE};
use crate::scalar::Scalar;
use crate::simworld::World;
use crate::tomasys;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MissionPhase {
    Search,
    Inspect,
    Done,
}

const MAINTAIN_MOTION: &str = "maintain_motion";
const GENERATE_SEARCH_PATH: &str = "generate_search_path";
const FOLLOW_PIPELINE: &str = "follow_pipeline";

/// Sequences the search task into the inspection task and sends the
/// adaptation goals for each.
#[derive(Debug)]
pub struct MissionCoordinator<S: Scalar> {
    port: Port,
    time_limit: S,
    activate_follow_on_detection: bool,
    phase: MissionPhase,
    started: bool,
    search_started: S,
    detected_at: Option<S>,
}

impl<S: Scalar> MissionCoordinator<S> {
    /// With `activate_follow_on_detection` the coordinator switches the
    /// follow node on itself when the pipeline is found; this is the
    /// hand-over used when no manager grounds the follow objective.
    pub fn new(port: Port, time_limit: S, activate_follow_on_detection: bool) -> Self {
        Self {
            port,
            time_limit,
            activate_follow_on_detection,
            phase: MissionPhase::Search,
            started: false,
            search_started: S::zero(),
            detected_at: None,
        }
    }

    pub fn phase(&self) -> MissionPhase {
        self.phase
    }

    pub fn detected_at(&self) -> Option<S> {
        self.detected_at
    }

    pub fn pipeline_found(&self) -> bool {
        self.detected_at.is_some()
    }

    /// Time from the start of the search to the detection, or the time
    /// limit when the pipeline was never found.
    pub fn search_time(&self) -> S {
        match self.detected_at {
            Some(t) => t - self.search_started,
            None => self.time_limit,
        }
    }

    fn send_objective(&self, request: ObjectiveRequest) -> Result<(), BusError> {
        match self.port.call_service(OBJECTIVE_SERVICE, ServiceRequest::Objective(request.clone())) {
            Ok(rsp) if !rsp.success => log::warn!("objective {request:?} rejected: {}", rsp.detail),
            Ok(_) => {}
            Err(BusError::NotFound(name)) => log::debug!("no adaptation goal endpoint {name}"),
            Err(e) => return Err(e),
        }
        Ok(())
    }

    pub fn mission_tick(
        &mut self,
        world: &World<S>,
        visibility: S,
        managed: &mut ManagedSubsystem<S>,
    ) -> Result<MissionPhase, BusError> {
        let now = world.clock();
        if self.phase == MissionPhase::Done {
            return Ok(self.phase);
        }
        if now >= self.time_limit - world.dt() * S::lit(1e-6) {
            self.phase = MissionPhase::Done;
            return Ok(self.phase);
        }
        if !self.started {
            self.started = true;
            self.search_started = now;
            debug_assert!(tomasys::init_kb::<S>().function_by_name(MAINTAIN_MOTION).is_some());
            self.send_objective(ObjectiveRequest::Set {
                function: MAINTAIN_MOTION.into(),
            })?;
            self.send_objective(ObjectiveRequest::Set {
                function: GENERATE_SEARCH_PATH.into(),
            })?;
        }
        if self.phase == MissionPhase::Search {
            if let Some(detection) = world.detect_pipeline(visibility) {
                self.detected_at = Some(now);
                self.phase = MissionPhase::Inspect;
                managed.pipeline_detected(detection);
                self.send_objective(ObjectiveRequest::Remove {
                    function: GENERATE_SEARCH_PATH.into(),
                })?;
                self.send_objective(ObjectiveRequest::Set {
                    function: FOLLOW_PIPELINE.into(),
                })?;
                if self.activate_follow_on_detection {
                    let rsp = self.port.call_service(
                        &change_mode_service(FOLLOW_PIPELINE_NODE),
                        ServiceRequest::ChangeMode {
                            node: FOLLOW_PIPELINE_NODE.into(),
                            mode: MODE_FOLLOW_PIPELINE.into(),
                        },
                    )?;
                    if !rsp.success {
                        log::warn!("follow activation failed: {}", rsp.detail);
                    }
                }
            }
        }
        Ok(self.phase)
    }
}

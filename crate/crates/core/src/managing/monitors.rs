//! Monitor nodes: both publish on `/diagnostics`.

use crate::bus::{format_value, BusError, DiagnosticLevel, DiagnosticStatus, Payload, Port, DIAGNOSTICS_TOPIC};
use crate::managed::thruster_label;
use crate::scalar::Scalar;
use crate::simworld::{ThrusterStatus, VisibilityProfile, World, THRUSTER_COUNT};
use crate::tomasys::THRUSTERS;

pub const WATER_VISIBILITY_OBSERVER: &str = "water_visibility_observer";
pub const THRUSTER_MONITOR: &str = "thruster_monitor";
pub const WATER_VISIBILITY_KEY: &str = "water_visibility";

/// Samples the visibility profile every `period_steps` ticks.
#[derive(Debug)]
pub struct WaterVisibilityObserver<S: Scalar> {
    port: Port,
    profile: VisibilityProfile<S>,
    period_steps: u64,
}

impl<S: Scalar> WaterVisibilityObserver<S> {
    pub fn new(port: Port, profile: VisibilityProfile<S>, period_steps: u64) -> Self {
        Self {
            port,
            profile,
            period_steps: period_steps.max(1),
        }
    }

    pub fn profile(&self) -> &VisibilityProfile<S> {
        &self.profile
    }

    pub fn status_at(&self, t: S) -> DiagnosticStatus {
        DiagnosticStatus::new(DiagnosticLevel::Ok, WATER_VISIBILITY_OBSERVER, "")
            .with(WATER_VISIBILITY_KEY, format_value(self.profile.at(t).as_f64()))
    }

    /// Publishes when `step` falls on the observer period.
    pub fn observe(&self, step: u64, t: S) -> Result<bool, BusError> {
        if !step.is_multiple_of(self.period_steps) {
            return Ok(false);
        }
        self.port
            .publish(DIAGNOSTICS_TOPIC, Payload::Diagnostic(self.status_at(t)))?;
        Ok(true)
    }
}

/// Edge-triggered thruster status reports: publishes once at start and on
/// every change.
#[derive(Debug)]
pub struct ThrusterMonitor {
    port: Port,
    last: Option<[ThrusterStatus; THRUSTER_COUNT]>,
}

impl ThrusterMonitor {
    pub fn new(port: Port) -> Self {
        Self { port, last: None }
    }

    pub fn status_for(statuses: &[ThrusterStatus; THRUSTER_COUNT]) -> DiagnosticStatus {
        let failed = statuses.contains(&ThrusterStatus::Failed);
        let (level, message) = if failed {
            (DiagnosticLevel::Error, "thruster failure")
        } else {
            (DiagnosticLevel::Ok, "all thrusters available")
        };
        let mut status = DiagnosticStatus::new(level, THRUSTER_MONITOR, message);
        for (name, s) in THRUSTERS.iter().zip(statuses) {
            status.set(*name, thruster_label(*s));
        }
        status
    }

    pub fn observe<S: Scalar>(&mut self, world: &World<S>) -> Result<bool, BusError> {
        let now = *world.thrusters();
        if self.last == Some(now) {
            return Ok(false);
        }
        self.last = Some(now);
        self.port
            .publish(DIAGNOSTICS_TOPIC, Payload::Diagnostic(Self::status_for(&now)))?;
        Ok(true)
    }
}

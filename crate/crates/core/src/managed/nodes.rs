//! Per-node behaviour: what each lifecycle node does with the vehicle in
//! its current mode.

use thiserror::Error;

use super::modes::{LifecycleNode, MODE_FOLLOW_PIPELINE, MODE_RECOVER_THRUSTERS};
use super::spiral::{spiral_through, SpiralError, Waypoint};
use crate::scalar::Scalar;
use crate::simworld::{Command, Detection, Point2, World};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FollowError {
    #[error("follow pipeline active before the pipeline was detected")]
    NoDetection,
}

/// Spiral search about a fixed center. The center is the vehicle position
/// when the search first runs; after a mode change the spiral is re-planned
/// with the new altitude, passing through the current position.
#[derive(Debug, Clone, Default)]
pub struct SearchBehaviour<S: Scalar> {
    center: Option<Point2<S>>,
    path: Vec<Waypoint<S>>,
    index: usize,
    revision: Option<u64>,
}

impl<S: Scalar> SearchBehaviour<S> {
    pub fn new() -> Self {
        Self {
            center: None,
            path: Vec::new(),
            index: 0,
            revision: None,
        }
    }

    pub fn center(&self) -> Option<Point2<S>> {
        self.center
    }

    pub fn path(&self) -> &[Waypoint<S>] {
        &self.path
    }

    pub fn current_index(&self) -> usize {
        self.index
    }

    /// Command for this tick, or `None` when the node is not searching.
    pub fn step(
        &mut self,
        node: &LifecycleNode<S>,
        world: &World<S>,
        radius_limit: S,
        spacing: S,
        capture_radius: S,
    ) -> Result<Option<Command<S>>, SpiralError> {
        let altitude = match (node.is_active(), node.altitude) {
            (true, Some(a)) => a,
            _ => return Ok(None),
        };
        let here = world.vehicle().horizontal();
        if self.revision != Some(node.revision) {
            let center = *self.center.get_or_insert(here);
            self.path = spiral_through(center, here, altitude, radius_limit, spacing)?;
            self.index = 0;
            self.revision = Some(node.revision);
        }
        // Skip waypoints that are captured, or that the vehicle has already
        // passed (the next one is no farther away).
        let dist = |i: usize| self.path[i].horizontal().distance(&here);
        while self.index + 1 < self.path.len()
            && (dist(self.index) <= capture_radius || dist(self.index + 1) <= dist(self.index))
        {
            self.index += 1;
        }
        if self.index + 1 == self.path.len() && dist(self.index) <= capture_radius {
            return Ok(Some(Command::Hold));
        }
        let wp = self.path[self.index];
        Ok(Some(Command::Waypoint {
            x: wp.x,
            y: wp.y,
            z: wp.z,
        }))
    }
}

/// Tracks the pipeline forward from the detection point and accumulates the
/// inspected arclength.
#[derive(Debug, Clone, Default)]
pub struct FollowBehaviour<S: Scalar> {
    detection: Option<Detection<S>>,
    furthest: S,
    inspected: S,
}

impl<S: Scalar> FollowBehaviour<S> {
    pub fn new() -> Self {
        Self {
            detection: None,
            furthest: S::zero(),
            inspected: S::zero(),
        }
    }

    /// First detection wins; later ones are ignored.
    pub fn pipeline_detected(&mut self, detection: Detection<S>) {
        if self.detection.is_none() {
            self.furthest = detection.arclength;
            self.detection = Some(detection);
        }
    }

    pub fn detection(&self) -> Option<&Detection<S>> {
        self.detection.as_ref()
    }

    pub fn inspected(&self) -> S {
        self.inspected
    }

    /// Returns the command for this tick and the newly inspected arclength.
    pub fn step(
        &mut self,
        node: &LifecycleNode<S>,
        world: &World<S>,
        altitude: S,
        corridor: S,
        lookahead: S,
    ) -> Result<Option<(Command<S>, S)>, FollowError> {
        if !(node.is_active() && node.mode == MODE_FOLLOW_PIPELINE) {
            return Ok(None);
        }
        if self.detection.is_none() {
            return Err(FollowError::NoDetection);
        }
        let pipeline = world.pipeline();
        let proj = pipeline.nearest(&world.vehicle().horizontal());
        let mut delta = S::zero();
        if proj.distance <= corridor && proj.arclength > self.furthest {
            delta = proj.arclength - self.furthest;
            self.furthest = proj.arclength;
            self.inspected += delta;
        }
        let end = pipeline.total_length();
        if self.furthest >= end {
            return Ok(Some((Command::Hold, delta)));
        }
        let target = pipeline.point_at((self.furthest + lookahead).min(end));
        Ok(Some((
            Command::Waypoint {
                x: target.x,
                y: target.y,
                z: altitude,
            },
            delta,
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MaintainOutcome {
    /// Recovery mode is active and the vehicle must hold position.
    pub holding: bool,
    /// Failed thrusters returned to service on this tick.
    pub recovered: usize,
}

/// Thruster recovery: after `duration_steps` consecutive ticks in recovery
/// mode every failed thruster is restored. Leaving the mode resets the
/// countdown.
#[derive(Debug, Clone, Default)]
pub struct MaintainBehaviour {
    entered: Option<(u64, u64)>,
}

impl MaintainBehaviour {
    pub fn new() -> Self {
        Self { entered: None }
    }

    /// Ticks spent in the current recovery episode.
    pub fn elapsed_steps<S: Scalar>(&self, world: &World<S>) -> Option<u64> {
        self.entered.map(|(step, _)| world.steps() - step)
    }

    pub fn step<S: Scalar>(
        &mut self,
        node: &LifecycleNode<S>,
        world: &mut World<S>,
        duration_steps: u64,
    ) -> MaintainOutcome {
        if node.mode != MODE_RECOVER_THRUSTERS {
            self.entered = None;
            return MaintainOutcome::default();
        }
        let now = world.steps();
        let (since, _) = match self.entered {
            Some((since, rev)) if rev == node.revision => (since, rev),
            _ => {
                self.entered = Some((now, node.revision));
                (now, node.revision)
            }
        };
        let mut recovered = 0;
        if now - since >= duration_steps {
            recovered = world.recover_thrusters();
            self.entered = Some((now, node.revision));
        }
        MaintainOutcome {
            holding: true,
            recovered,
        }
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::geometry::{Pipeline, PipelineError, Point2};
use crate::scalar::{normalize_angle, Scalar};

pub const THRUSTER_COUNT: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ThrusterStatus {
    Available,
    Failed,
}

/// Thruster `thruster` (1-based) fails at `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ThrusterEvent<S: Scalar> {
    pub time: S,
    pub thruster: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct VehicleState<S: Scalar> {
    pub x: S,
    pub y: S,
    /// Altitude above the seabed.
    pub z: S,
    /// Radians in `(-pi, pi]`.
    pub heading: S,
}

impl<S: Scalar> VehicleState<S> {
    pub fn horizontal(&self) -> Point2<S> {
        Point2::new(self.x, self.y)
    }
}

/// Kinematic limits and failure effects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", default)]
pub struct Kinematics<S: Scalar> {
    /// m/s with all thrusters available.
    pub nominal_speed: S,
    /// rad/s.
    pub max_turn_rate: S,
    /// m/s.
    pub vertical_speed: S,
    /// Speed multiplier per failed thruster.
    pub degradation: S,
    /// Heading noise bound per failed thruster, rad/s.
    pub heading_noise: S,
    /// Half-angle of the downward perception cone, radians.
    pub detection_half_angle: S,
}

impl<S: Scalar> Default for Kinematics<S> {
    fn default() -> Self {
        Self {
            nominal_speed: S::lit(0.5),
            max_turn_rate: S::lit(1.0),
            vertical_speed: S::lit(0.3),
            degradation: S::lit(0.5),
            heading_noise: S::lit(0.3),
            detection_half_angle: S::FRAC_PI_4(),
        }
    }
}

/// Motion request for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command<S: Scalar> {
    /// Steer toward `(x, y)` while moving to altitude `z`.
    Waypoint { x: S, y: S, z: S },
    /// Steer toward a heading while moving to an altitude.
    Velocity { heading: S, altitude: S },
    Hold,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("time step must be positive (got {0})")]
    TimeStep(f64),
    #[error("thruster index {0} outside 1..=6")]
    ThrusterIndex(usize),
    #[error("negative event time {0}")]
    EventTime(f64),
    #[error("thruster events must be sorted by time")]
    UnsortedEvents,
    #[error("invalid start pose: {0}")]
    StartPose(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// Pipeline layout and start-pose distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", default)]
pub struct Layout<S: Scalar> {
    /// Straight pipeline along +x from the origin.
    pub pipeline_length: S,
    /// Perpendicular start offset from the pipeline, uniform in `[min, max]`.
    pub start_offset_min: S,
    pub start_offset_max: S,
    /// Start position along the pipeline as fractions of its length.
    pub start_along_min: S,
    pub start_along_max: S,
    pub start_altitude: S,
}

impl<S: Scalar> Default for Layout<S> {
    fn default() -> Self {
        Self {
            pipeline_length: S::lit(60.0),
            start_offset_min: S::lit(5.0),
            start_offset_max: S::lit(15.0),
            start_along_min: S::lit(0.25),
            start_along_max: S::lit(0.75),
            start_altitude: S::lit(2.0),
        }
    }
}

impl<S: Scalar> Layout<S> {
    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: &str| Err(WorldError::StartPose(m.to_string()));
        if !(self.start_offset_min >= S::zero() && self.start_offset_min <= self.start_offset_max) {
            return bad("offset range must satisfy 0 <= min <= max");
        }
        if !(self.start_along_min >= S::zero()
            && self.start_along_min <= self.start_along_max
            && self.start_along_max <= S::one())
        {
            return bad("along-track range must lie in [0, 1]");
        }
        if !(self.start_altitude >= S::zero()) {
            return bad("start altitude must be non-negative");
        }
        Ok(())
    }

    /// Seeded start pose: random offset side, along-track position and
    /// bearing.
    pub fn sample_start(&self, rng: &mut ChaCha8Rng) -> VehicleState<S> {
        let uniform = |rng: &mut ChaCha8Rng, lo: S, hi: S| -> S {
            let u: f64 = rng.gen();
            lo + (hi - lo) * S::lit(u)
        };
        let along = uniform(rng, self.start_along_min, self.start_along_max) * self.pipeline_length;
        let offset = uniform(rng, self.start_offset_min, self.start_offset_max);
        let side = if rng.gen::<bool>() { S::one() } else { -S::one() };
        let heading = normalize_angle(uniform(rng, -S::PI(), S::PI()));
        VehicleState {
            x: along,
            y: side * offset,
            z: self.start_altitude,
            heading,
        }
    }
}

/// Pipeline detection by the mock perception system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection<S: Scalar> {
    pub point: Point2<S>,
    pub arclength: S,
}

/// Discrete-time world. The clock is `steps * dt`, so it advances by
/// exactly `dt` per step with no accumulated rounding.
#[derive(Debug, Clone)]
pub struct World<S: Scalar> {
    dt: S,
    steps: u64,
    vehicle: VehicleState<S>,
    pipeline: Pipeline<S>,
    thrusters: [ThrusterStatus; THRUSTER_COUNT],
    kinematics: Kinematics<S>,
    events: Vec<ThrusterEvent<S>>,
    next_event: usize,
    rng: ChaCha8Rng,
}

impl<S: Scalar> World<S> {
    pub fn new(
        dt: S,
        pipeline: Pipeline<S>,
        vehicle: VehicleState<S>,
        kinematics: Kinematics<S>,
        rng: ChaCha8Rng,
    ) -> Result<Self, WorldError> {
        if !(dt > S::zero()) {
            return Err(WorldError::TimeStep(dt.as_f64()));
        }
        Ok(Self {
            dt,
            steps: 0,
            vehicle: VehicleState {
                heading: normalize_angle(vehicle.heading),
                z: vehicle.z.max(S::zero()),
                ..vehicle
            },
            pipeline,
            thrusters: [ThrusterStatus::Available; THRUSTER_COUNT],
            kinematics,
            events: Vec::new(),
            next_event: 0,
            rng,
        })
    }

    /// World with the given layout; the start pose and all later noise come
    /// from `rng`.
    pub fn from_layout(
        dt: S,
        layout: &Layout<S>,
        kinematics: Kinematics<S>,
        mut rng: ChaCha8Rng,
    ) -> Result<Self, WorldError> {
        layout.validate()?;
        let pipeline = Pipeline::straight(layout.pipeline_length)?;
        let start = layout.sample_start(&mut rng);
        Self::new(dt, pipeline, start, kinematics, rng)
    }

    pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub fn set_failure_schedule(&mut self, events: Vec<ThrusterEvent<S>>) -> Result<(), WorldError> {
        for e in &events {
            if !(1..=THRUSTER_COUNT).contains(&e.thruster) {
                return Err(WorldError::ThrusterIndex(e.thruster));
            }
            if e.time < S::zero() {
                return Err(WorldError::EventTime(e.time.as_f64()));
            }
        }
        if events.windows(2).any(|w| w[0].time > w[1].time) {
            return Err(WorldError::UnsortedEvents);
        }
        self.events = events;
        self.next_event = 0;
        Ok(())
    }

    pub fn dt(&self) -> S {
        self.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn clock(&self) -> S {
        S::lit(self.steps as f64) * self.dt
    }

    pub fn vehicle(&self) -> &VehicleState<S> {
        &self.vehicle
    }

    pub fn pipeline(&self) -> &Pipeline<S> {
        &self.pipeline
    }

    pub fn kinematics(&self) -> &Kinematics<S> {
        &self.kinematics
    }

    pub fn thrusters(&self) -> &[ThrusterStatus; THRUSTER_COUNT] {
        &self.thrusters
    }

    pub fn failed_count(&self) -> usize {
        self.thrusters.iter().filter(|s| **s == ThrusterStatus::Failed).count()
    }

    /// Bit `i` set when thruster `i + 1` has failed.
    pub fn thruster_bitmask(&self) -> u8 {
        self.thrusters
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == ThrusterStatus::Failed)
            .fold(0, |m, (i, _)| m | (1 << i))
    }

    /// Applies every scheduled failure whose time has been reached.
    pub fn inject_failures(&mut self) -> usize {
        let now = self.clock() + self.dt * S::lit(1e-6);
        let mut applied = 0;
        while let Some(e) = self.events.get(self.next_event) {
            if e.time > now {
                break;
            }
            self.thrusters[e.thruster - 1] = ThrusterStatus::Failed;
            self.next_event += 1;
            applied += 1;
        }
        applied
    }

    /// Returns every failed thruster to service.
    pub fn recover_thrusters(&mut self) -> usize {
        let n = self.failed_count();
        self.thrusters = [ThrusterStatus::Available; THRUSTER_COUNT];
        n
    }

    /// Effective horizontal speed under the current failures.
    pub fn effective_speed(&self) -> S {
        self.kinematics.nominal_speed * self.kinematics.degradation.powi(self.failed_count() as i32)
    }

    /// Advances the clock by one `dt`, moving the vehicle per `command`.
    pub fn step(&mut self, command: Command<S>) {
        let dt = self.dt;
        let (desired_heading, target_z) = match command {
            Command::Hold => {
                self.steps += 1;
                return;
            }
            Command::Waypoint { x, y, z } => {
                let (dx, dy) = (x - self.vehicle.x, y - self.vehicle.y);
                let heading = if dx == S::zero() && dy == S::zero() {
                    self.vehicle.heading
                } else {
                    dy.atan2(dx)
                };
                (heading, z)
            }
            Command::Velocity { heading, altitude } => (heading, altitude),
        };
        let k = self.kinematics;
        let max_turn = k.max_turn_rate * dt;
        let error = normalize_angle(desired_heading - self.vehicle.heading);
        let mut heading = self.vehicle.heading + error.max(-max_turn).min(max_turn);
        for _ in 0..self.failed_count() {
            let u: f64 = self.rng.gen_range(-1.0..=1.0);
            heading += S::lit(u) * k.heading_noise * dt;
        }
        let heading = normalize_angle(heading);
        let v = self.effective_speed();
        self.vehicle.x += v * dt * heading.cos();
        self.vehicle.y += v * dt * heading.sin();
        self.vehicle.heading = heading;

        let max_dz = k.vertical_speed * dt;
        let dz = (target_z.max(S::zero()) - self.vehicle.z).max(-max_dz).min(max_dz);
        self.vehicle.z = (self.vehicle.z + dz).max(S::zero());
        self.steps += 1;
    }

    /// Mock perception: the pipeline is seen when the seabed is visible from
    /// the current altitude and the pipeline lies inside the perception cone.
    pub fn detect_pipeline(&self, visibility: S) -> Option<Detection<S>> {
        let z = self.vehicle.z;
        if z > visibility {
            return None;
        }
        let proj = self.pipeline.nearest(&self.vehicle.horizontal());
        let radius = z * self.kinematics.detection_half_angle.tan();
        // Tolerate rounding in tan(pi/4).
        (proj.distance <= radius * (S::one() + S::epsilon() * S::lit(16.0))).then_some(Detection {
            point: proj.point,
            arclength: proj.arclength,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn world_at(x: f64, y: f64, z: f64, heading: f64) -> World<f64> {
        World::new(
            0.1,
            Pipeline::straight(60.0).unwrap(),
            VehicleState { x, y, z, heading },
            Kinematics::default(),
            World::<f64>::seeded_rng(7),
        )
        .unwrap()
    }

    #[test]
    fn straight_run_displacement() {
        let mut w = world_at(0.0, 5.0, 1.0, 0.0);
        for _ in 0..100 {
            w.step(Command::Waypoint { x: 1000.0, y: 5.0, z: 1.0 });
        }
        assert_abs_diff_eq!(w.vehicle().x, 5.0, epsilon = 1e-9);
        assert_abs_diff_eq!(w.vehicle().y, 5.0, epsilon = 1e-9);
        assert_abs_diff_eq!(w.clock(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn degraded_speed() {
        let mut w = world_at(0.0, 5.0, 1.0, 0.0);
        w.set_failure_schedule(vec![ThrusterEvent { time: 0.0, thruster: 1 }]).unwrap();
        assert_eq!(w.inject_failures(), 1);
        assert_abs_diff_eq!(w.effective_speed(), 0.25);
        w.set_failure_schedule(vec![ThrusterEvent { time: 0.0, thruster: 4 }]).unwrap();
        w.inject_failures();
        assert_abs_diff_eq!(w.effective_speed(), 0.125);
        assert_eq!(w.thruster_bitmask(), 0b1001);
        assert_eq!(w.recover_thrusters(), 2);
        assert_abs_diff_eq!(w.effective_speed(), 0.5);
    }

    #[test]
    fn hold_keeps_pose() {
        let mut w = world_at(3.0, 4.0, 1.5, 0.3);
        let before = *w.vehicle();
        w.step(Command::Hold);
        assert_eq!(*w.vehicle(), before);
        assert_eq!(w.steps(), 1);
    }

    #[test]
    fn failure_schedule() {
        let mut w = world_at(0.0, 5.0, 1.0, 0.0);
        w.set_failure_schedule(vec![
            ThrusterEvent { time: 35.0, thruster: 1 },
            ThrusterEvent { time: 400.0, thruster: 2 },
        ])
        .unwrap();
        for _ in 0..350 {
            assert_eq!(w.inject_failures(), 0);
            w.step(Command::Hold);
        }
        assert_abs_diff_eq!(w.clock(), 35.0, epsilon = 1e-9);
        assert_eq!(w.inject_failures(), 1);
        assert_eq!(w.thrusters()[0], ThrusterStatus::Failed);
        for _ in 0..2650 {
            w.inject_failures();
            w.step(Command::Hold);
        }
        assert_eq!(w.thrusters()[1], ThrusterStatus::Available);
    }

    #[test]
    fn bad_schedules() {
        let mut w = world_at(0.0, 0.0, 0.0, 0.0);
        assert_eq!(
            w.set_failure_schedule(vec![ThrusterEvent { time: 1.0, thruster: 7 }]),
            Err(WorldError::ThrusterIndex(7))
        );
        assert_eq!(
            w.set_failure_schedule(vec![
                ThrusterEvent { time: 2.0, thruster: 1 },
                ThrusterEvent { time: 1.0, thruster: 2 }
            ]),
            Err(WorldError::UnsortedEvents)
        );
    }

    #[test]
    fn detection_cases() {
        assert!(world_at(10.0, 0.3, 2.0, 0.0).detect_pipeline(1.5).is_none());
        let d = world_at(10.0, 0.8, 1.0, 0.0).detect_pipeline(1.5).unwrap();
        assert_abs_diff_eq!(d.point.x, 10.0);
        assert_abs_diff_eq!(d.arclength, 10.0);
        assert!(world_at(10.0, 1.2, 1.0, 0.0).detect_pipeline(1.5).is_none());
        let above = world_at(22.0, 0.0, 1.0, 0.0).detect_pipeline(1.0).unwrap();
        assert_eq!(above.point, Point2::new(22.0, 0.0));
    }

    #[test]
    fn turn_rate_is_bounded() {
        let mut w = world_at(0.0, 0.0, 1.0, 0.0);
        w.step(Command::Waypoint { x: -10.0, y: 0.0, z: 1.0 });
        assert_abs_diff_eq!(w.vehicle().heading.abs(), 0.1, epsilon = 1e-12);
        w.step(Command::Velocity { heading: 0.0, altitude: 3.0 });
        assert_abs_diff_eq!(w.vehicle().z, 1.03, epsilon = 1e-12);
    }

    #[test]
    fn layout_sampling_respects_ranges() {
        let layout = Layout::<f64>::default();
        let mut rng = World::<f64>::seeded_rng(3);
        for _ in 0..200 {
            let s = layout.sample_start(&mut rng);
            assert!((5.0..=15.0).contains(&s.y.abs()));
            assert!((15.0..=45.0).contains(&s.x));
            assert!(s.heading > -std::f64::consts::PI && s.heading <= std::f64::consts::PI);
            assert_eq!(s.z, 2.0);
        }
    }
}

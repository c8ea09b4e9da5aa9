use std::rc::Rc;

use serde::Serialize;

use super::config::RunConfig;
use super::RunError;
use crate::bus::{Access, Bus};
use crate::managed::{Driver, ManagedSubsystem, MissionCoordinator, MissionPhase};
use crate::managing::{
    build_manager, period_steps, KbSnapshot, Manager, ThrusterMonitor, WaterVisibilityObserver, THRUSTER_MONITOR,
    WATER_VISIBILITY_OBSERVER,
};
use crate::simworld::{VisibilityProfile, World};

/// Metrics of one mission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub pipeline_found: bool,
    /// s; the time limit when the pipeline was never found.
    pub search_time: f64,
    /// m of pipeline arclength inspected.
    pub distance_inspected: f64,
}

/// One row of the optional trajectory trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub heading: f64,
    pub water_visibility: f64,
    pub thrusters: u8,
    pub phase: MissionPhase,
    pub driver: Driver,
    pub modes: String,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MissionOptions {
    pub trace: bool,
    pub snapshot_kb: bool,
    pub record_access: bool,
}

#[derive(Debug, Clone)]
pub struct MissionOutcome {
    pub metrics: RunMetrics,
    pub trace: Vec<TraceRow>,
    pub snapshots: Vec<KbSnapshot>,
    pub access_log: Vec<Access>,
}

/// A fully wired mission: world, managed subsystem, coordinator, monitors
/// and the selected manager, all on one bus.
///
/// Each tick runs, in order: failure injection, the mission coordinator
/// (which sees the current pose), the monitors, the manager, and finally
/// the managed subsystem, which steps the world.
pub struct Mission {
    seed: u64,
    bus: Rc<Bus>,
    world: World<f64>,
    profile: VisibilityProfile<f64>,
    managed: ManagedSubsystem<f64>,
    coordinator: MissionCoordinator<f64>,
    manager: Box<dyn Manager>,
    visibility: WaterVisibilityObserver<f64>,
    thrusters: ThrusterMonitor,
    trace: Option<Vec<TraceRow>>,
    snapshots: Vec<KbSnapshot>,
    last_driver: Driver,
}

impl std::fmt::Debug for Mission {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mission")
            .field("seed", &self.seed)
            .field("clock", &self.world.clock())
            .field("manager", &self.manager.kind())
            .finish()
    }
}

impl Mission {
    pub fn new(config: &RunConfig, seed: u64, options: MissionOptions) -> Result<Self, RunError> {
        Self::with_profile(config, seed, config.water_visibility.into(), options)
    }

    /// Like [`Mission::new`] but with an arbitrary visibility profile.
    pub fn with_profile(
        config: &RunConfig,
        seed: u64,
        profile: VisibilityProfile<f64>,
        options: MissionOptions,
    ) -> Result<Self, RunError> {
        config.validate()?;
        let bus = Bus::shared();
        bus.record_access(options.record_access);

        let mut world = World::from_layout(config.dt, &config.layout, config.kinematics, World::<f64>::seeded_rng(seed))?;
        world.set_failure_schedule(config.thruster_events.clone())?;

        let managed = ManagedSubsystem::attach(bus.port("mode_manager"), config.managed)?;
        let manager = build_manager(&bus, &config.manager, config.dt, seed, options.snapshot_kb)?;
        let coordinator = MissionCoordinator::new(
            bus.port("mission_coordinator"),
            config.time_limit,
            manager.coordinator_activates_follow(),
        );
        let observer_steps = period_steps("observer_period", config.manager.observer_period, config.dt)
            .map_err(crate::managing::ManagerBuildError::from)?;
        let visibility = WaterVisibilityObserver::new(bus.port(WATER_VISIBILITY_OBSERVER), profile.clone(), observer_steps);
        let thrusters = ThrusterMonitor::new(bus.port(THRUSTER_MONITOR));

        Ok(Self {
            seed,
            bus,
            world,
            profile,
            managed,
            coordinator,
            manager,
            visibility,
            thrusters,
            trace: options.trace.then(Vec::new),
            snapshots: Vec::new(),
            last_driver: Driver::Idle,
        })
    }

    pub fn bus(&self) -> &Rc<Bus> {
        &self.bus
    }

    pub fn world(&self) -> &World<f64> {
        &self.world
    }

    pub fn managed(&self) -> &ManagedSubsystem<f64> {
        &self.managed
    }

    pub fn coordinator(&self) -> &MissionCoordinator<f64> {
        &self.coordinator
    }

    pub fn manager(&self) -> &dyn Manager {
        self.manager.as_ref()
    }

    pub fn last_driver(&self) -> Driver {
        self.last_driver
    }

    /// Advances one step; returns the phase seen at the start of the tick.
    pub fn tick(&mut self) -> Result<MissionPhase, RunError> {
        let t = self.world.clock();
        let step = self.world.steps();
        self.bus.set_time(t);
        self.world.inject_failures();
        let wv = self.profile.at(t);
        let phase = self.coordinator.mission_tick(&self.world, wv, &mut self.managed)?;
        if phase == MissionPhase::Done {
            return Ok(phase);
        }
        self.visibility.observe(step, t)?;
        self.thrusters.observe(&self.world)?;
        self.manager.tick(step)?;
        self.snapshots.extend(self.manager.take_snapshots());

        let before = *self.world.vehicle();
        let thrusters = self.world.thruster_bitmask();
        let modes = self.trace.is_some().then(|| self.managed.nodes().summary());
        self.last_driver = self.managed.tick(&mut self.world)?.driver;
        if let (Some(trace), Some(modes)) = (self.trace.as_mut(), modes) {
            trace.push(TraceRow {
                t,
                x: before.x,
                y: before.y,
                z: before.z,
                heading: before.heading,
                water_visibility: wv,
                thrusters,
                phase,
                driver: self.last_driver,
                modes,
            });
        }
        Ok(phase)
    }

    pub fn metrics(&self) -> RunMetrics {
        RunMetrics {
            seed: self.seed,
            pipeline_found: self.coordinator.pipeline_found(),
            search_time: self.coordinator.search_time(),
            distance_inspected: self.managed.inspected(),
        }
    }

    /// Runs until the time limit.
    pub fn run(mut self) -> Result<MissionOutcome, RunError> {
        while self.tick()? != MissionPhase::Done {}
        Ok(MissionOutcome {
            metrics: self.metrics(),
            trace: self.trace.take().unwrap_or_default(),
            snapshots: std::mem::take(&mut self.snapshots),
            access_log: self.bus.access_log(),
        })
    }
}

/// Simulates one mission from t = 0 to the time limit.
pub fn run_once(config: &RunConfig, seed: u64) -> Result<RunMetrics, RunError> {
    Ok(Mission::new(config, seed, MissionOptions::default())?.run()?.metrics)
}

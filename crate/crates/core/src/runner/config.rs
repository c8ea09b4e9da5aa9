use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::managed::ManagedConfig;
use crate::managing::{ManagerConfig, ManagerConfigError};
use crate::simworld::{Kinematics, Layout, ThrusterEvent, VisibilityError, WaterVisibilityModel, WorldError, THRUSTER_COUNT};

/// Everything one batch needs. Field names are the JSON contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Mission duration, s.
    pub time_limit: f64,
    /// Simulation step, s.
    pub dt: f64,
    pub runs: usize,
    pub base_seed: u64,
    /// Output directory.
    pub output: PathBuf,
    pub water_visibility: WaterVisibilityModel<f64>,
    pub thruster_events: Vec<ThrusterEvent<f64>>,
    pub manager: ManagerConfig<f64>,
    pub kinematics: Kinematics<f64>,
    pub layout: Layout<f64>,
    pub managed: ManagedConfig<f64>,
    /// Write a per-step trajectory CSV for every run.
    pub trace: bool,
    /// Dump the knowledge base after each MAPE cycle (metacontrol only).
    pub snapshot_kb: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            time_limit: 300.0,
            dt: 0.1,
            runs: 20,
            base_seed: 1,
            output: PathBuf::from("results"),
            water_visibility: WaterVisibilityModel {
                min: 1.25,
                max: 3.75,
                period: 80.0,
                phase: 0.0,
            },
            thruster_events: vec![ThrusterEvent { time: 35.0, thruster: 1 }],
            manager: ManagerConfig::default(),
            kinematics: Kinematics::default(),
            layout: Layout::default(),
            managed: ManagedConfig::default(),
            trace: false,
            snapshot_kb: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("runs must be at least 1")]
    Runs,
    #[error("time_limit must be positive and finite (got {0})")]
    TimeLimit(f64),
    #[error("dt must be positive and finite (got {0})")]
    TimeStep(f64),
    #[error("water_visibility: {0}")]
    Visibility(#[from] VisibilityError),
    #[error("thruster_events: {0}")]
    Events(String),
    #[error("manager: {0}")]
    Manager(#[from] ManagerConfigError),
    #[error("{section}.{field} must be positive and finite (got {value})")]
    NotPositive {
        section: &'static str,
        field: &'static str,
        value: f64,
    },
    #[error("layout: {0}")]
    Layout(#[from] WorldError),
}

fn positive(section: &'static str, field: &'static str, value: f64, allow_zero: bool) -> Result<(), ConfigError> {
    let ok = value.is_finite() && (value > 0.0 || (allow_zero && value == 0.0));
    if ok {
        Ok(())
    } else {
        Err(ConfigError::NotPositive { section, field, value })
    }
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.runs < 1 {
            return Err(ConfigError::Runs);
        }
        if !(self.time_limit.is_finite() && self.time_limit > 0.0) {
            return Err(ConfigError::TimeLimit(self.time_limit));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ConfigError::TimeStep(self.dt));
        }
        self.water_visibility.validate()?;
        for e in &self.thruster_events {
            if !(1..=THRUSTER_COUNT).contains(&e.thruster) {
                return Err(ConfigError::Events(format!("thruster {} outside 1..={THRUSTER_COUNT}", e.thruster)));
            }
            if !(e.time.is_finite() && e.time >= 0.0) {
                return Err(ConfigError::Events(format!("bad event time {}", e.time)));
            }
        }
        if self.thruster_events.windows(2).any(|w| w[0].time > w[1].time) {
            return Err(ConfigError::Events("events must be sorted by time".into()));
        }
        self.manager.validate(self.dt)?;

        let k = &self.kinematics;
        positive("kinematics", "nominal_speed", k.nominal_speed, false)?;
        positive("kinematics", "max_turn_rate", k.max_turn_rate, false)?;
        positive("kinematics", "vertical_speed", k.vertical_speed, false)?;
        positive("kinematics", "degradation", k.degradation, false)?;
        positive("kinematics", "heading_noise", k.heading_noise, true)?;
        positive("kinematics", "detection_half_angle", k.detection_half_angle, false)?;
        if k.degradation > 1.0 {
            return Err(ConfigError::NotPositive {
                section: "kinematics",
                field: "degradation (at most 1)",
                value: k.degradation,
            });
        }
        if k.detection_half_angle >= std::f64::consts::FRAC_PI_2 {
            return Err(ConfigError::NotPositive {
                section: "kinematics",
                field: "detection_half_angle (below pi/2)",
                value: k.detection_half_angle,
            });
        }

        let m = &self.managed;
        positive("managed", "recovery_duration", m.recovery_duration, true)?;
        positive("managed", "inspection_altitude", m.inspection_altitude, false)?;
        positive("managed", "capture_radius", m.capture_radius, false)?;
        positive("managed", "coverage_radius_limit", m.coverage_radius_limit, false)?;
        positive("managed", "follow_lookahead", m.follow_lookahead, false)?;

        self.layout.validate()?;
        Ok(())
    }
}

//! Deterministic discrete-time world: vehicle kinematics, pipeline geometry,
//! water visibility, thruster failures and mock perception.

mod geometry;
mod visibility;
mod world;

pub use geometry::{Pipeline, PipelineError, Point2, Projection};
pub use visibility::{VisibilityError, VisibilityProfile, WaterVisibilityModel};
pub use world::{
    Command, Detection, Kinematics, Layout, ThrusterEvent, ThrusterStatus, VehicleState, World, WorldError,
    THRUSTER_COUNT,
};

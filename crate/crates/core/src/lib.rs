//! Deterministic desk-scale exemplar of a self-adaptive underwater vehicle
//! inspecting a seabed pipeline.
//!
//! * [`bus`]: in-process topics and services.
//! * [`tomasys`]: knowledge base, analyze and plan.
//! * [`simworld`]: vehicle kinematics, pipeline geometry, water visibility,
//!   thruster failures and mock perception.
//! * [`managed`]: lifecycle nodes, mode manager and mission coordinator.
//! * [`managing`]: monitors and the none / random / metacontrol managers.
//! * [`runner`]: configuration, mission wiring, batches and metrics.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the runner uses.

// `!(x > 0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bus;
pub mod managed;
pub mod managing;
pub mod runner;
pub mod scalar;
pub mod simworld;
pub mod tomasys;

pub use scalar::Scalar;

pub type KnowledgeBase = tomasys::KnowledgeBase<f64>;
pub type World = simworld::World<f64>;
pub type WaterVisibilityModel = simworld::WaterVisibilityModel<f64>;
pub type Pipeline = simworld::Pipeline<f64>;
pub type ManagedSubsystem = managed::ManagedSubsystem<f64>;
pub type Metacontrol = managing::Metacontrol<f64>;

pub use runner::{run_batch, run_once, RunConfig, RunMetrics};

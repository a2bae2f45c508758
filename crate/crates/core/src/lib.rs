//! Shared-control laws, multimodal Gaussian-process trajectory models, and a
//! deterministic planar simulator for comparing them.
//!
//! The numeric core (`gp`, `joint`, the command algebra in `control`) is
//! generic over [`Scalar`] (`f32` or `f64`); the simulation layers work in
//! `f64`. Type aliases for the `f64` instantiation are provided at the crate
//! root.

pub mod channel;
pub mod control;
pub mod error;
pub mod geom;
pub mod gp;
pub mod joint;
pub mod metrics;
pub mod rng;
pub mod scalar;
pub mod scenario;
pub mod sim;
pub mod world;

pub use channel::{channel_apply, staleness_weight, ChannelConfig, Delivery, TimedInput};
pub use control::{ControllerConfig, ControllerKind, SeedPolicy};
pub use error::{Error, Result};
pub use metrics::{compute_metrics, Metrics};
pub use scalar::Scalar;
pub use scenario::{build_scenario, ScenarioSpec, CATALOG};
pub use sim::{run_scenario, Outcome, Simulation, Trace, TraceRecord};
pub use world::WorldState;

pub type Point = geom::Vec2<f64>;
pub type Command = control::Command<f64>;
pub type BlendGains = control::BlendGains<f64>;
pub type KernelParams = gp::KernelParams<f64>;
pub type ObservationSet = gp::ObservationSet<f64>;
pub type ModeHypothesis = gp::ModeHypothesis<f64>;
pub type GpPosterior = gp::GpPosterior<f64>;
pub type TrajectorySample = gp::TrajectorySample<f64>;
pub type Distribution = gp::MultimodalTrajectoryDistribution<f64>;
pub type InteractionParams = joint::InteractionParams<f64>;
pub type JointModel = joint::JointModel<f64>;
pub type JointHypothesis = joint::JointHypothesis<f64>;

//! Cooperative relative positioning of mobile users.
//!
//! Each user carries an inertial unit reporting planar displacements and a
//! radio measuring ranges to peers. A particle filter per user fuses both
//! streams: displacements drive the prediction, ranges reweight particles
//! against the peers' current estimates, and a small share of particles is
//! drawn directly from the ranges so the filter can recover from failures.
//! Everything is generic over the scalar type; the `*64` aliases below fix it
//! to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod filter;
pub mod kde;
pub mod model;
pub mod motion;
pub mod ranging;
pub mod scalar;
pub mod sim;

pub use engine::{BatchReport, Engine, EngineConfig, Prior, RangingBatch};
pub use error::{Error, Result};
pub use filter::NeighborConstraint;
pub use kde::{BandwidthRule, KdeConfig, PositionKde};
pub use model::{
    Belief, DualTrigger, FilterConfig, InertialDelta, MeasurementEvent, MotionNoise, Particle,
    Pose, RangeObservation, RangingNoise, Replacement, Seconds, UserId,
};
pub use scalar::Scalar;
pub use sim::{DetectionModel, GroundTruth, ScenarioConfig, StartMode};

pub type Pose64 = Pose<f64>;
pub type Pose32 = Pose<f32>;
pub type Belief64 = Belief<f64>;
pub type Belief32 = Belief<f32>;
pub type FilterConfig64 = FilterConfig<f64>;
pub type EngineConfig64 = EngineConfig<f64>;
pub type Engine64 = Engine<f64>;
pub type Engine32 = Engine<f32>;
pub type Event64 = MeasurementEvent<f64>;
pub type ScenarioConfig64 = ScenarioConfig<f64>;
pub type GroundTruth64 = GroundTruth<f64>;

//! Constructive steering of reflected lattice paths into CUCZ balls.
//!
//! Every procedure acts through restarted inverse steps `F_a` with finitely
//! many imposed signs and returns a [`Certificate`] that replays bit-exactly.

pub mod bridge;
pub mod certificate;
pub mod engine;
pub mod greedy;
pub mod reset;
pub mod merge;
pub mod segment;
pub mod signed;

pub use certificate::{BallSpec, Certificate, ReplayError, Step};
pub use engine::Steerer;
pub use greedy::{greedy_orbit_search, GreedyOutcome, GreedyParams};
pub use bridge::{approximate_bridge, jack_lift, lift_split, BridgeParams, Built};
pub use merge::{build_excursion_height, excursion_height_holds, MergeOutcome};
pub use reset::{densify_zeros, reduce_oscillations, reset_after};
pub use signed::{approximate_signed_target, SignedOutcome};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SteerError {
    #[error("invalid argument: {0}")]
    BadArgument(String),
    #[error("no zero after {0} within the horizon")]
    NoZeroAfter(String),
    #[error("horizon {horizon} too short, need {needed}")]
    InsufficientHorizon { needed: String, horizon: String },
    #[error("{op} exceeded its iteration cap after {iterations} steps")]
    IterationCap { op: &'static str, iterations: usize },
    #[error("insufficient excursion mass: {0}")]
    InsufficientMass(String),
    #[error("stage {stage}: {source}")]
    Stage { stage: String, source: Box<SteerError> },
    #[error("{what}: no admissible family in {tries} tries")]
    SearchExhausted { what: String, tries: usize },
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("too coarse: {0}")]
    TooCoarse(String),
    #[error(transparent)]
    Metric(#[from] lattice::MetricError),
}

impl SteerError {
    pub fn at(self, stage: impl Into<String>) -> SteerError {
        SteerError::Stage { stage: stage.into(), source: Box::new(self) }
    }
}

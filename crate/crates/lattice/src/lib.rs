//! Exact lattice model for the Levy transformation of Brownian motion.
//!
//! Paths are scaled simple random walks stored as integer coordinates, so
//! zeros, excursions, running minima and sign actions are exact.

pub mod excursions;
pub mod exhaustive;
pub mod io;
pub mod levy;
pub mod metrics;
pub mod path;
pub mod rationals;
pub mod seeds;

pub use excursions::{apply_signs, decompose, extract_signs, hybrid, Cut, Excursion, SignBase, SignFamily};
pub use levy::{
    first_zero_after, inverse_step, inverse_step_after, levy_transform, run_chain, shift_after, ChainState,
    ChainStep, LevyError,
};
pub use metrics::{d_cu, d_cz, in_ball, in_bridge_ball, CuczBall, MetricError, Profile, Target, ZeroGeometry};
pub use path::{parse_time, sample_srw, LatticePath, PathError, PathKind, Time, ZeroSet};
pub use rationals::{enumerate, first_in_interval, RationalError, RationalIndex};

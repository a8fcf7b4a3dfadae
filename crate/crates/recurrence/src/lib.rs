//! Exact recurrence and accessibility for finite measure-preserving systems.
//!
//! A map `T` with invariant law `pi` on finitely many states, its
//! retrograde kernel `K`, the visit sets `U(B)`, `R(B)`, the accessible set
//! `A(B)`, and the equivalence between atteignability and strong
//! accessibility. All probabilities are exact rationals, so "null" means
//! exactly zero.

pub mod checks;
pub mod sets;
pub mod system;

pub use checks::{
    accessible_ae, check_atteignability_equivalence, check_chaining, check_poincare_refinement, forward_law,
    pi_kernel, reversed_law, sweep, AtteignabilityReport, ChainingReport, PoincareReport, SweepReport, Witness,
};
pub use sets::{accessible_set, infinitely_often_set, orbit_visit_set, positive_reach_sets};
pub use system::{cycles, parse_prob, FiniteSystem, Prob, StateSet, SystemError};

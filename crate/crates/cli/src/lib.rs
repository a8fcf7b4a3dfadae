//! Library side of the `levy` command: verification suites and the
//! canonical steering targets.

pub mod suites;
pub mod targets;

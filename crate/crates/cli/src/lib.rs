//! Experiment layer over `landscape-core`: configuration profiles, the
//! end-to-end experiment runner, the annealed structure-function sweep, and
//! seeded self-tests. The `landscape` binary is a thin argument-parsing
//! shell around these modules.

pub mod check;
pub mod config;
pub mod runner;
pub mod sweep;

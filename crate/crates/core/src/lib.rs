//! Certified spectral-gap lower bounds for left-invariant sub-Laplacians on
//! compact Lie groups, cross-checked against exact representation-theoretic
//! spectra.

pub mod bound;
pub mod config;
pub mod connections;
pub mod constants;
pub mod diagnostic;
pub mod geometry;
pub mod lie;
pub mod linalg;
pub mod peter_weyl;
pub mod report;
pub mod verify;

/// Default absolute tolerance for identity checks and variant gating.
pub const DEFAULT_TOL: f64 = 1e-9;

//! Identification of linear dynamical systems from state observations
//! corrupted by additive Gaussian noise.
//!
//! The crate provides a trajectory simulator, the naive least-squares,
//! instrumental-variable, bias-compensation and Ho-Kalman estimators,
//! checks for the stability/controllability/invertibility/input-strength
//! conditions the consistency guarantees rely on, evaluators for the
//! corresponding finite-sample bounds, and a seeded Monte-Carlo harness.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod numerics;
pub mod system;
pub mod theory;

pub use error::{Error, Result};

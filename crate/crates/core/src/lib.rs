//! Simulation of spin chains under a continuous sinusoidal control field.
//!
//! The crate builds static, driven and rotating-frame effective chain
//! Hamiltonians, propagates states stroboscopically, samples
//! Ornstein–Uhlenbeck local noise and evaluates transfer fidelity and
//! two-site concurrence.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

mod bessel;
pub mod dynamics;
pub mod error;
pub mod models;
pub mod noise;
pub mod observables;
pub mod operators;
mod propagator;
pub mod scenario;

pub use error::{Error, Result};

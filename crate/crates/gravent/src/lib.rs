//! gravent computes entanglement-generation and environmental-decoherence
//! rates for gravitationally coupled test masses, inverts the rate
//! inequalities into experimental bounds, runs desk-scale simulators of the
//! two entanglement protocols, and reproduces the worked numerical examples
//! as a regression suite.
//!
//! Modules:
//! - [`quantities`]: constants, units, and the shared domain types
//! - [`rates`]: closed-form rates and the per-channel budget
//! - [`protocols`]: branch-state and Gaussian oracle simulators
//! - [`feasibility`]: bound solver and the validation suite
//! - [`sweep`]: two-parameter grids, frontier extraction, CSV/SVG export
//! - [`config`]: strict JSON configuration schema

pub mod config;
pub mod error;
pub mod feasibility;
pub mod protocols;
pub mod quantities;
pub mod rates;
pub mod sweep;

pub use error::{Error, Result};

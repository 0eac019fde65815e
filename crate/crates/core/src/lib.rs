//! Six ways to learn a damped harmonic oscillator from daily case counts.
//!
//! The crate fits the worldwide 2021 daily new-case curve with
//!
//! - a plain feed-forward network ([`train::train_nn`]),
//! - a physics-informed network with a fixed data/physics weight ([`train::train_pinn`]),
//! - a self-adaptive variant that learns the weight over time ([`train::train_sapinn`]),
//! - Bayesian inference on the closed-form oscillator solution ([`bayes::BiPosterior`]),
//! - a Bayesian neural network ([`bayes::BnnPosterior`]),
//! - a Bayesian physics-informed network ([`bayes::BpinnPosterior`]),
//!
//! and compares them through the harness in [`experiments`].
//!
//! Units are millions of cases per day and years since 2021-01-01.

pub mod autodiff;
pub mod bayes;
pub mod error;
pub mod experiments;
pub mod network;
pub mod oscillator;
pub mod timeseries;
pub mod train;

pub use error::{Error, Result};

//! Exact derivatives for the training and sampling objectives.
//!
//! Time derivatives of the network output come from forward-mode [`Jet2`]
//! arithmetic; gradients with respect to parameters come from reverse mode,
//! either through the general scalar [`Tape`] or through the batched
//! layer-level backward pass in [`crate::network`]. The two reverse routes
//! are checked against each other and against finite differences in tests.

mod jet;
mod tape;

pub use jet::Jet2;
pub use tape::{check_gradient, grad, sum, JetVar, Tape, Var};

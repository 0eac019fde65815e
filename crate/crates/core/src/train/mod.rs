//! Deterministic full-batch training of the plain, physics-informed and
//! self-adaptive networks.

mod adam;
mod fit;
mod loss;
mod objective;

pub use adam::{Adam, AdamConfig};
pub use fit::{
    train_nn, train_pinn, train_sapinn, EpsRecord, HistoryRow, TrainConfig, TrainResult, PHYS_INIT,
    SA_EPS_INIT,
};
pub use loss::{
    amplitude, composite_loss, data_loss, evaluate, grid_indices, logit, physics_loss,
    report_from_curve, sigmoid, LossReport, LossWeights,
};
pub use objective::{phys_from_log, phys_to_log, Collocation, ObjectiveValue, N_PHYS};

//! Experiment harness: one configurable run per method, sweeps over the
//! data/physics weight, the training-set size and the network shape, the
//! residual-scaling comparison, and report assembly.
//!
//! Every run is deterministic given its configuration and seed.

mod config;
mod report;
mod run;
mod sweeps;

pub use config::{DataSource, ExperimentConfig, Method, BUNDLED_DATA, DEFAULT_EPS, SMOOTHING_WINDOW};
pub use report::{collect_results, comparison_table, emit_report};
pub use run::{run, ExperimentResult, BAND_QUANTILES};
pub use sweeps::{
    compare_scaling, grid_search, run_all, sweep_epsilon, sweep_trainsize, EPS_VALUES, GRID_LAYERS, GRID_NODES,
    SWEEP_EPOCHS, TRAINSIZE_METHODS, TRAIN_SIZES,
};

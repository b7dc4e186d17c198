//! Rate-distortion bound, weight-enumerator estimates from BP fixed points,
//! and the batch experiments behind the CLI sweeps.

mod bound;
mod experiment;
mod wef;

pub use bound::{binary_entropy, db_distance, rd_bound, rd_bound_inv};
pub use experiment::{
    b_sweep, bound_curve, gamma_sweep, rate_sweep, run_grid, wef_experiment, write_bound_curve, write_records,
    ExperimentConfig, GridPoint, RdPoint, SampleRecord, SweepOutput, WefRow,
};
pub use wef::{avg_distance, bethe_entropy, random_reference, wef_curve, wef_sweep, BetheEntropy, WefPoint};

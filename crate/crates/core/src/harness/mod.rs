//! Data generation, training, evaluation and ablation sweeps.

pub mod config;
pub mod eval;
pub mod sweep;
pub mod train;

pub use config::{OptimizerConfig, Paths, RunConfig};
pub use eval::{evaluate, predict_volume, run_eval, score_volume, Evaluation};
pub use sweep::{apply_value, run_sweep, write_sweep_csv, SweepAxis, SweepRow};
pub use train::{
    load_or_generate, run_train, train_on, EpochRecord, IterationRecord, TrainOutcome, TrainState,
    Trainer,
};

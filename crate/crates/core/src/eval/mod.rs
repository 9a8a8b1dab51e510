//! Splits, detection and classification metrics, and the experiment
//! harnesses.

mod experiments;
mod metrics;
mod split;

pub use experiments::{
    aircraft_dataset, message_dataset, run_attack_diversity, run_classification, sweep_num_classes,
    sweep_training_ratio, write_diversity_table, write_sweep_table, ClassificationRun,
    DiversityRow, ExperimentConfig, SweepRow,
};
pub use metrics::{pd_pfa, prf_scores, write_prf_table, ClassScores, ConfusionMatrix, PrfReport};
pub use split::{split_dataset, Split, SplitSpec};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Nn(#[from] crate::nn::NnError),
}

//! Cross-validated evaluation, metrics, forward selection and the channel
//! and feature-group analyses built on them.

mod analysis;
mod cv;
mod metrics;
mod sfs;

use thiserror::Error;

use crate::pnn::PnnError;

pub use analysis::{
    ablation, channel_relevance, default_ablation_groups, AblationRow, ChannelRelevance,
    FeatureGroup, RepeatedCv,
};
pub use cv::{
    kfold_cv, monte_carlo, ClassifierConfig, EvalReport, MonteCarloReport, RunMetrics,
    SigmaSelection,
};
pub use metrics::{accuracy, kappa, ConfusionMatrix};
pub use sfs::{
    sfs, sfs_pnn, FnCriterion, PnnCvCriterion, SelectionStep, SelectionTrace, SubsetCriterion,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no samples")]
    EmptyData,
    #[error("{0} labels for {1} rows")]
    LabelCount(usize, usize),
    #[error("rows have different lengths")]
    RaggedRows,
    #[error("class labels start at 1")]
    BadLabel,
    #[error("need at least 2 folds, got {0}")]
    BadFolds(usize),
    #[error("class {label} has {count} samples, fewer than {folds} folds")]
    TooFewSamples {
        label: usize,
        count: usize,
        folds: usize,
    },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("confusion matrix is not square or sizes differ")]
    BadShape,
    #[error("at least one Monte-Carlo run is required")]
    NoRuns,
    #[error("feature index {index} out of range for {features} features")]
    BadIndex { index: usize, features: usize },
    #[error("no features to select from")]
    NoFeatures,
    #[error("no feature groups given")]
    EmptyGroups,
    #[error("selected feature set is empty")]
    EmptySelection,
    #[error(transparent)]
    Pnn(#[from] PnnError),
}

//! Surface-EMG physical action classification.
//!
//! The pipeline runs recording ingestion ([`dataset`]), feature extraction
//! ([`features`]), a probabilistic neural network classifier ([`pnn`]) and
//! cross-validated evaluation with forward feature selection ([`eval`]).

pub mod config;
pub mod dataset;
pub mod eval;
pub mod features;
pub mod folds;
pub mod kv;
pub mod pnn;
pub mod synthetic;

pub use config::ExperimentConfig;
pub use dataset::{DatasetManifest, MultiChannelRecording, Pattern};
pub use features::{FeatureConfig, FeatureMatrix, FeatureRegistry};
pub use pnn::PnnModel;

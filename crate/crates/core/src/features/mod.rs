//! Per-pattern feature extraction.
//!
//! Five families are computed from each analysis window of each channel:
//! time-domain statistics, inter-channel maximum cross-correlation,
//! log moments of the Fourier spectrum, Burg-AR spectral band powers and
//! local binary pattern counts. [`assemble_features`] concatenates them in
//! [`FeatureRegistry`] order.

mod assemble;
mod burg;
mod fft;
mod ics;
mod lbp;
mod matrix;
mod registry;
mod spectrum;
mod tds;

use thiserror::Error;

pub use assemble::{assemble_features, extract_all, FeatureConfig, FeatureVector};
pub use burg::{ar_psd, band_powers, burg_ar, grid_frequency, ArModel};
pub use ics::{compute_ics, cross_correlation, ics_max_xcorr, DEFAULT_ICS_PAIRS};
pub use lbp::{lbp_codes, lbp_features};
pub use matrix::FeatureMatrix;
pub use registry::{
    published_selection, ChannelRef, FeatureDescriptor, FeatureRegistry, Modality,
    LBP_PER_CHANNEL, PUBLISHED_SELECTION, TDS_PER_CHANNEL,
};
pub use spectrum::{
    lmf_features, power_spectrum, spectral_moments, SpectralMoments, LMF_PER_CHANNEL, LOG_FLOOR,
    MOMENT_PAIRS,
};
pub use tds::{tds, TimeDomainStats};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("segments differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("channel pair ({0}, {1}) out of range")]
    BadPair(usize, usize),
    #[error("AR order {order} needs more than {len} samples")]
    OrderTooHigh { order: usize, len: usize },
    #[error("AR spectrum has a pole at w = {0}")]
    PoleOnGrid(f64),
    #[error("{bands} bands do not evenly divide a grid of {grid} points")]
    BadPartition { grid: usize, bands: usize },
    #[error("window of {window} samples does not fit a segment of {len}")]
    WindowTooLong { window: usize, len: usize },
    #[error("pattern has no samples or inconsistent channels")]
    EmptyPattern,
    #[error("feature {0} is not finite")]
    NonFinite(usize),
    #[error("channel {channel}, {modality}: {source}")]
    Context {
        channel: usize,
        modality: Modality,
        #[source]
        source: Box<FeatureError>,
    },
    #[error("feature matrix: {0}")]
    Csv(String),
}

impl From<csv::Error> for FeatureError {
    fn from(e: csv::Error) -> Self {
        FeatureError::Csv(e.to_string())
    }
}

impl From<std::io::Error> for FeatureError {
    fn from(e: std::io::Error) -> Self {
        FeatureError::Csv(e.to_string())
    }
}

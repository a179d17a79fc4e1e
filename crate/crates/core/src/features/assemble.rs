use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::burg::{ar_psd, band_powers, burg_ar};
use super::ics::{compute_ics, DEFAULT_ICS_PAIRS};
use super::lbp::lbp_features;
use super::registry::{FeatureRegistry, Modality, LBP_PER_CHANNEL, TDS_PER_CHANNEL};
use super::spectrum::{lmf_features, power_spectrum, spectral_moments, LMF_PER_CHANNEL};
use super::tds::tds;
use super::{FeatureError, FeatureMatrix};
use crate::dataset::{segment_channel, Pattern};

/// Extraction parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Analysis window in samples; `None` uses the whole trial.
    pub window: Option<usize>,
    pub ar_order: usize,
    /// PSD grid points; must be a multiple of `bands`.
    pub psd_grid: usize,
    pub bands: usize,
    pub lbp_window: usize,
    pub lbp_threshold: u64,
    /// 1-based channel pairs for the inter-channel features.
    pub ics_pairs: Vec<(usize, usize)>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            window: None,
            ar_order: 4,
            psd_grid: 100,
            bands: 10,
            lbp_window: 8,
            lbp_threshold: 127,
            ics_pairs: DEFAULT_ICS_PAIRS.to_vec(),
        }
    }
}

impl FeatureConfig {
    pub fn registry(&self, channels: usize) -> FeatureRegistry {
        FeatureRegistry::new(channels, &self.ics_pairs, self.bands)
    }
}

/// Feature vector of one pattern in registry order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: usize,
    pub subject_id: u32,
    pub trial_index: usize,
}

fn context(channel: usize, modality: Modality) -> impl Fn(FeatureError) -> FeatureError {
    move |e| FeatureError::Context {
        channel,
        modality,
        source: Box::new(e),
    }
}

fn accumulate(acc: &mut [f64], values: impl IntoIterator<Item = f64>) {
    for (a, v) in acc.iter_mut().zip(values) {
        *a += v;
    }
}

/// Per-channel blocks of one channel, averaged over its windows.
struct ChannelBlocks {
    tds: [f64; TDS_PER_CHANNEL],
    lmf: [f64; LMF_PER_CHANNEL],
    sbp: Vec<f64>,
    lbp: [f64; LBP_PER_CHANNEL],
}

fn channel_blocks(
    segments: &[Vec<f64>],
    channel: usize,
    config: &FeatureConfig,
) -> Result<ChannelBlocks, FeatureError> {
    let mut out = ChannelBlocks {
        tds: [0.0; TDS_PER_CHANNEL],
        lmf: [0.0; LMF_PER_CHANNEL],
        sbp: vec![0.0; config.bands],
        lbp: [0.0; LBP_PER_CHANNEL],
    };
    for seg in segments {
        accumulate(&mut out.tds, tds(seg).to_array());
        accumulate(&mut out.lmf, lmf_features(&spectral_moments(&power_spectrum(seg))));
        let sbp_ctx = context(channel, Modality::Sbp);
        let model = burg_ar(seg, config.ar_order).map_err(&sbp_ctx)?;
        let psd = ar_psd(&model, config.psd_grid).map_err(&sbp_ctx)?;
        accumulate(&mut out.sbp, band_powers(&psd, config.bands).map_err(&sbp_ctx)?);
        let lbp = lbp_features(seg, config.lbp_window, config.lbp_threshold)
            .map_err(context(channel, Modality::Lbp))?;
        accumulate(&mut out.lbp, lbp.map(|c| c as f64));
    }
    let n = segments.len() as f64;
    if segments.len() > 1 {
        out.tds.iter_mut().for_each(|v| *v /= n);
        out.lmf.iter_mut().for_each(|v| *v /= n);
        out.sbp.iter_mut().for_each(|v| *v /= n);
        out.lbp.iter_mut().for_each(|v| *v /= n);
    }
    Ok(out)
}

/// Full feature vector `[TDS | ICS | LMF | SBP | LBP]` of one pattern.
///
/// With more than one analysis window per trial, each feature is averaged
/// over the windows so the vector length does not depend on the window.
pub fn assemble_features(
    pattern: &Pattern,
    config: &FeatureConfig,
) -> Result<FeatureVector, FeatureError> {
    let m = pattern.num_channels();
    if m == 0 || pattern.is_empty() {
        return Err(FeatureError::EmptyPattern);
    }
    let window = config.window.unwrap_or(pattern.len());
    let segmented: Vec<Vec<Vec<f64>>> = pattern
        .channels
        .iter()
        .enumerate()
        .map(|(ch, x)| {
            segment_channel(x, window)
                .map(|segs| segs.into_iter().map(|s| s.values).collect())
                .map_err(|_| FeatureError::Context {
                    channel: ch + 1,
                    modality: Modality::Tds,
                    source: Box::new(FeatureError::WindowTooLong {
                        window,
                        len: x.len(),
                    }),
                })
        })
        .collect::<Result<_, _>>()?;
    let n_windows = segmented[0].len();

    let blocks: Vec<ChannelBlocks> = segmented
        .iter()
        .enumerate()
        .map(|(ch, segs)| channel_blocks(segs, ch + 1, config))
        .collect::<Result<_, _>>()?;

    let mut ics = vec![0.0; config.ics_pairs.len()];
    for w in 0..n_windows {
        let window_channels: Vec<&[f64]> = segmented.iter().map(|s| s[w].as_slice()).collect();
        let v = compute_ics(&window_channels, &config.ics_pairs)?;
        accumulate(&mut ics, v);
    }
    if n_windows > 1 {
        ics.iter_mut().for_each(|v| *v /= n_windows as f64);
    }

    let mut values = Vec::with_capacity(
        m * (TDS_PER_CHANNEL + LMF_PER_CHANNEL + config.bands + LBP_PER_CHANNEL) + ics.len(),
    );
    values.extend(blocks.iter().flat_map(|b| b.tds));
    values.extend(ics);
    values.extend(blocks.iter().flat_map(|b| b.lmf));
    values.extend(blocks.iter().flat_map(|b| b.sbp.iter().copied()));
    values.extend(blocks.iter().flat_map(|b| b.lbp));

    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(FeatureError::NonFinite(pos + 1));
    }
    Ok(FeatureVector {
        values,
        label: pattern.label,
        subject_id: pattern.subject_id,
        trial_index: pattern.trial_index,
    })
}

/// Extracts every pattern in parallel; rows keep input order.
pub fn extract_all(
    patterns: &[Pattern],
    config: &FeatureConfig,
) -> Result<FeatureMatrix, FeatureError> {
    let channels = patterns.first().map_or(0, Pattern::num_channels);
    if patterns.iter().any(|p| p.num_channels() != channels) {
        return Err(FeatureError::EmptyPattern);
    }
    let vectors: Vec<FeatureVector> = patterns
        .par_iter()
        .map(|p| assemble_features(p, config))
        .collect::<Result<_, _>>()?;
    let registry = config.registry(channels);
    Ok(FeatureMatrix::from_vectors(registry.names(), vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::registry::FeatureRegistry;

    fn pattern(seed: u64) -> Pattern {
        // cheap deterministic pseudo-noise
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        Pattern {
            channels: (0..8).map(|_| (0..666).map(|_| next()).collect()).collect(),
            label: 3,
            subject_id: 2,
            trial_index: 5,
        }
    }

    #[test]
    fn default_length_is_276() {
        let v = assemble_features(&pattern(1), &FeatureConfig::default()).unwrap();
        assert_eq!(v.values.len(), 276);
        assert_eq!(FeatureRegistry::default().len(), 276);
        assert_eq!((v.label, v.subject_id, v.trial_index), (3, 2, 5));
    }

    #[test]
    fn deterministic() {
        let cfg = FeatureConfig::default();
        let a = assemble_features(&pattern(9), &cfg).unwrap();
        let b = assemble_features(&pattern(9), &cfg).unwrap();
        assert_eq!(
            a.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn channel_swap_swaps_tds_blocks() {
        let cfg = FeatureConfig::default();
        let p = pattern(4);
        let mut q = p.clone();
        q.channels.swap(0, 1);
        let a = assemble_features(&p, &cfg).unwrap().values;
        let b = assemble_features(&q, &cfg).unwrap().values;
        assert_eq!(a[0..4], b[4..8]);
        assert_eq!(a[4..8], b[0..4]);
        assert_eq!(a[8..32], b[8..32]);
        let reg = FeatureRegistry::default();
        let lmf = reg.modality_range(Modality::Lmf);
        assert_eq!(a[lmf.start..lmf.start + 17], b[lmf.start + 17..lmf.start + 34]);
    }

    #[test]
    fn silent_pattern_is_finite() {
        let mut p = pattern(0);
        p.channels.iter_mut().for_each(|c| c.iter_mut().for_each(|v| *v = 0.0));
        let v = assemble_features(&p, &FeatureConfig::default()).unwrap().values;
        assert!(v.iter().all(|x| x.is_finite()));
        assert!(v[..32].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn windowed_extraction_keeps_length() {
        let cfg = FeatureConfig {
            window: Some(200),
            ..FeatureConfig::default()
        };
        assert_eq!(assemble_features(&pattern(2), &cfg).unwrap().values.len(), 276);
        let too_long = FeatureConfig {
            window: Some(1000),
            ..FeatureConfig::default()
        };
        assert!(assemble_features(&pattern(2), &too_long).is_err());
    }

    #[test]
    fn extractor_errors_carry_context() {
        let cfg = FeatureConfig {
            lbp_window: 700,
            ..FeatureConfig::default()
        };
        match assemble_features(&pattern(2), &cfg) {
            Err(FeatureError::Context { channel: 1, modality: Modality::Lbp, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}

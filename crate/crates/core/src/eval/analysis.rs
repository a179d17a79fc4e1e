use serde::{Deserialize, Serialize};

use super::cv::{monte_carlo, ClassifierConfig, MonteCarloReport};
use super::EvalError;
use crate::features::{FeatureRegistry, Modality};

fn columns(x: &[Vec<f64>], cols: &[usize]) -> Vec<Vec<f64>> {
    x.iter()
        .map(|r| cols.iter().map(|&c| r[c]).collect())
        .collect()
}

fn check_indices(x: &[Vec<f64>], cols: &[usize]) -> Result<(), EvalError> {
    let features = x.first().map_or(0, Vec::len);
    match cols.iter().find(|&&c| c >= features) {
        Some(&index) => Err(EvalError::BadIndex { index, features }),
        None => Ok(()),
    }
}

/// Shared settings for the repeated evaluations below.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedCv<'a> {
    pub folds: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub classifier: &'a ClassifierConfig,
}

fn evaluate(
    x: &[Vec<f64>],
    y: &[usize],
    cols: &[usize],
    cv: &RepeatedCv,
) -> Result<MonteCarloReport, EvalError> {
    monte_carlo(&columns(x, cols), y, cv.folds, cv.classifier, cv.runs, cv.base_seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRelevance {
    pub channel: usize,
    pub alpha: f64,
    pub kappa: f64,
    pub alpha_std: f64,
    pub kappa_std: f64,
    /// Selected features removed for this channel.
    pub dropped: usize,
}

/// Leave-one-channel-out analysis. For every channel, the selected features
/// that touch it (an inter-channel feature touches both of its channels) are
/// removed and the rest re-evaluated. A channel no selected feature touches
/// is logged and gets the full-set result.
pub fn channel_relevance(
    x: &[Vec<f64>],
    y: &[usize],
    selected: &[usize],
    registry: &FeatureRegistry,
    cv: &RepeatedCv,
) -> Result<Vec<ChannelRelevance>, EvalError> {
    if selected.is_empty() {
        return Err(EvalError::EmptySelection);
    }
    check_indices(x, selected)?;
    if let Some(&index) = selected.iter().find(|&&c| c >= registry.len()) {
        return Err(EvalError::BadIndex {
            index,
            features: registry.len(),
        });
    }
    let full = evaluate(x, y, selected, cv)?;
    let mut out = Vec::with_capacity(registry.channels());
    for m in 1..=registry.channels() {
        let kept: Vec<usize> = selected
            .iter()
            .copied()
            .filter(|&p| !registry.involves_channel(p, m))
            .collect();
        let dropped = selected.len() - kept.len();
        let report = if dropped == 0 {
            log::warn!("no selected feature involves channel {m}");
            full.clone()
        } else {
            evaluate(x, y, &kept, cv)?
        };
        out.push(ChannelRelevance {
            channel: m,
            alpha: report.alpha_mean,
            kappa: report.kappa_mean,
            alpha_std: report.alpha_std,
            kappa_std: report.kappa_std,
            dropped,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub name: String,
    pub features: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub name: String,
    /// Size of the cumulative feature set.
    pub features: usize,
    pub alpha: f64,
    pub kappa: f64,
    /// Change from the previous row; zero for the first.
    pub delta_alpha: f64,
    pub delta_kappa: f64,
}

/// Evaluates growing unions of the groups: the first group, then the first
/// two, and so on.
pub fn ablation(
    x: &[Vec<f64>],
    y: &[usize],
    groups: &[FeatureGroup],
    cv: &RepeatedCv,
) -> Result<Vec<AblationRow>, EvalError> {
    if groups.is_empty() {
        return Err(EvalError::EmptyGroups);
    }
    for g in groups {
        check_indices(x, &g.features)?;
    }
    let mut set: Vec<usize> = Vec::new();
    let mut rows: Vec<AblationRow> = Vec::with_capacity(groups.len());
    for g in groups {
        for &f in &g.features {
            if !set.contains(&f) {
                set.push(f);
            }
        }
        let r = evaluate(x, y, &set, cv)?;
        let (da, dk) = match rows.last() {
            Some(prev) => (r.alpha_mean - prev.alpha, r.kappa_mean - prev.kappa),
            None => (0.0, 0.0),
        };
        rows.push(AblationRow {
            name: g.name.clone(),
            features: set.len(),
            alpha: r.alpha_mean,
            kappa: r.kappa_mean,
            delta_alpha: da,
            delta_kappa: dk,
        });
    }
    Ok(rows)
}

/// Splits a selection into Baseline (everything except inter-channel
/// features and the new spectral-moment ratios and products), ICS and LMF.
pub fn default_ablation_groups(selected: &[usize], registry: &FeatureRegistry) -> Vec<FeatureGroup> {
    let ics = registry.modality_range(Modality::Ics);
    let is_ics = |p: &usize| ics.contains(p);
    let baseline = selected
        .iter()
        .copied()
        .filter(|p| !is_ics(p) && !registry.is_novel_lmf(*p))
        .collect();
    vec![
        FeatureGroup {
            name: "Baseline".into(),
            features: baseline,
        },
        FeatureGroup {
            name: "ICS".into(),
            features: selected.iter().copied().filter(is_ics).collect(),
        },
        FeatureGroup {
            name: "LMF".into(),
            features: selected
                .iter()
                .copied()
                .filter(|&p| registry.is_novel_lmf(p))
                .collect(),
        },
    ]
}

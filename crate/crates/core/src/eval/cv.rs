use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{accuracy, kappa, ConfusionMatrix};
use super::EvalError;
use crate::folds::{split, stratified_folds};
use crate::pnn::{select_sigma, PnnModel, DEFAULT_INNER_FOLDS, DEFAULT_SIGMA_GRID};

/// How each training fold chooses the PNN kernel width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SigmaSelection {
    Fixed(f64),
    /// Internal stratified cross-validation over a grid, on the training
    /// fold only.
    Grid { grid: Vec<f64>, inner_folds: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub sigma: SigmaSelection,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            sigma: SigmaSelection::Grid {
                grid: DEFAULT_SIGMA_GRID.to_vec(),
                inner_folds: DEFAULT_INNER_FOLDS,
            },
        }
    }
}

impl ClassifierConfig {
    pub fn fixed(sigma: f64) -> Self {
        Self {
            sigma: SigmaSelection::Fixed(sigma),
        }
    }
}

/// Result of one pooled k-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub alpha: f64,
    pub kappa: f64,
    pub seed: u64,
    pub folds: usize,
    pub runs: usize,
    /// Registry indices (1-based) of the feature columns, when known.
    pub selected: Vec<usize>,
    /// Kernel width used by each fold.
    pub sigmas: Vec<f64>,
}

pub(crate) fn validate(x: &[Vec<f64>], y: &[usize], k: usize) -> Result<usize, EvalError> {
    if x.is_empty() {
        return Err(EvalError::EmptyData);
    }
    if x.len() != y.len() {
        return Err(EvalError::LabelCount(y.len(), x.len()));
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(EvalError::RaggedRows);
    }
    if y.contains(&0) {
        return Err(EvalError::BadLabel);
    }
    if k < 2 {
        return Err(EvalError::BadFolds(k));
    }
    let classes = *y.iter().max().unwrap();
    let mut counts = vec![0usize; classes];
    for &l in y {
        counts[l - 1] += 1;
    }
    for (c, &n) in counts.iter().enumerate() {
        if n > 0 && n < k {
            return Err(EvalError::TooFewSamples {
                label: c + 1,
                count: n,
                folds: k,
            });
        }
    }
    Ok(classes)
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(fold as u64 + 1)
}

/// Stratified k-fold cross-validation with one pooled confusion matrix.
///
/// Samples are shuffled with `seed` and dealt into folds per class; each
/// fold trains a fresh network (normalization and kernel width come from
/// the training part only) and predicts the held-out part.
pub fn kfold_cv(
    x: &[Vec<f64>],
    y: &[usize],
    k: usize,
    config: &ClassifierConfig,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    let classes = validate(x, y, k)?;
    let assignment = stratified_folds(y, k, seed);
    let per_fold: Vec<(Vec<(usize, usize)>, f64)> = (0..k)
        .into_par_iter()
        .map(|f| {
            let (train, test) = split(&assignment, f);
            let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
            let ty: Vec<usize> = train.iter().map(|&i| y[i]).collect();
            let sigma = match &config.sigma {
                SigmaSelection::Fixed(s) => *s,
                SigmaSelection::Grid { grid, inner_folds } => {
                    select_sigma(&tx, &ty, grid, *inner_folds, fold_seed(seed, f))?
                }
            };
            let model = PnnModel::fit_with_classes(&tx, &ty, sigma, classes)?;
            let pairs = test
                .iter()
                .map(|&i| Ok((y[i], model.predict(&x[i])?.label)))
                .collect::<Result<Vec<_>, EvalError>>()?;
            Ok((pairs, sigma))
        })
        .collect::<Result<_, EvalError>>()?;

    let mut confusion = ConfusionMatrix::new(classes);
    let mut sigmas = Vec::with_capacity(k);
    for (pairs, sigma) in per_fold {
        for (t, p) in pairs {
            confusion.record(t, p);
        }
        sigmas.push(sigma);
    }
    Ok(EvalReport {
        alpha: accuracy(&confusion)?,
        kappa: kappa(&confusion)?,
        confusion,
        seed,
        folds: k,
        runs: 1,
        selected: Vec::new(),
        sigmas,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub alpha: f64,
    pub kappa: f64,
}

/// Repeated cross-validation with seeds `base_seed..base_seed + runs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub runs: Vec<RunMetrics>,
    pub alpha_mean: f64,
    pub alpha_std: f64,
    pub kappa_mean: f64,
    pub kappa_std: f64,
    /// Sum of every run's pooled confusion matrix.
    pub confusion_sum: ConfusionMatrix,
    /// Full report of the first run (seed `base_seed`).
    pub first: EvalReport,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs [`kfold_cv`] `runs` times and summarizes. The standard deviations
/// use the `n - 1` denominator and are 0 for a single run.
pub fn monte_carlo(
    x: &[Vec<f64>],
    y: &[usize],
    k: usize,
    config: &ClassifierConfig,
    runs: usize,
    base_seed: u64,
) -> Result<MonteCarloReport, EvalError> {
    if runs == 0 {
        return Err(EvalError::NoRuns);
    }
    let reports: Vec<EvalReport> = (0..runs as u64)
        .into_par_iter()
        .map(|r| kfold_cv(x, y, k, config, base_seed.wrapping_add(r)))
        .collect::<Result<_, _>>()?;
    let mut confusion_sum = ConfusionMatrix::new(reports[0].confusion.classes());
    for r in &reports {
        confusion_sum.merge(&r.confusion)?;
    }
    let alphas: Vec<f64> = reports.iter().map(|r| r.alpha).collect();
    let kappas: Vec<f64> = reports.iter().map(|r| r.kappa).collect();
    let (alpha_mean, alpha_std) = mean_std(&alphas);
    let (kappa_mean, kappa_std) = mean_std(&kappas);
    Ok(MonteCarloReport {
        runs: reports
            .iter()
            .map(|r| RunMetrics {
                seed: r.seed,
                alpha: r.alpha,
                kappa: r.kappa,
            })
            .collect(),
        alpha_mean,
        alpha_std,
        kappa_mean,
        kappa_std,
        confusion_sum,
        first: reports.into_iter().next().unwrap(),
    })
}

//! Probabilistic neural network: one Gaussian Parzen kernel per stored
//! training pattern, class scores from the averaged kernels, and the
//! label of the largest posterior.
//!
//! Features are z-scored with statistics of the training data before any
//! distance is taken. Scores are accumulated in the log domain, so very
//! small bandwidths behave like nearest-neighbour classification instead
//! of underflowing.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::folds::{min_class_count, split, stratified_folds};

/// Bandwidths tried by [`select_sigma`] when no grid is configured.
pub const DEFAULT_SIGMA_GRID: [f64; 8] = [0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0, 1.5];
pub const DEFAULT_INNER_FOLDS: usize = 5;

const MODEL_FORMAT: &str = "physact-pnn";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PnnError {
    #[error("training set is empty")]
    EmptyTraining,
    #[error("class {0} has no training exemplar")]
    EmptyClass(usize),
    #[error("kernel width must be positive and finite, got {0}")]
    NonPositiveSigma(f64),
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("class labels start at 1")]
    BadLabel,
    #[error("{0} labels for {1} training rows")]
    LabelCount(usize, usize),
    #[error("bandwidth grid is empty")]
    EmptyGrid,
    #[error("priors must be nonnegative and sum to a positive value")]
    BadPriors,
    #[error("unsupported model file (format {format:?}, version {version})")]
    UnsupportedVersion { format: String, version: u32 },
    #[error("model file: {0}")]
    Serde(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-feature z-scoring fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; zero marks a constant feature.
    pub std: Vec<f64>,
}

impl Normalizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
        Self { mean, std }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}

/// Class decision plus the normalized class posteriors (index `c - 1`
/// holds class `c`).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: usize,
    pub posterior: Vec<f64>,
}

/// Squared Euclidean distance, summed in index order.
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Turns per-class log scores into a decision. Ties go to the smallest
/// class id; when every score is `-inf` the posterior is uniform.
pub fn decide(log_scores: &[f64]) -> Prediction {
    let mut best = 0;
    for (c, &s) in log_scores.iter().enumerate() {
        if s > log_scores[best] {
            best = c;
        }
    }
    let top = log_scores[best];
    if !top.is_finite() {
        let n = log_scores.len() as f64;
        return Prediction {
            label: 1,
            posterior: vec![1.0 / n; log_scores.len()],
        };
    }
    let weights: Vec<f64> = log_scores.iter().map(|s| (s - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    Prediction {
        label: best + 1,
        posterior: weights.into_iter().map(|w| w / total).collect(),
    }
}

/// Log of `prior * mean_i exp(-d_i / (2 sigma^2))` for each class, from the
/// squared distances to the training exemplars.
pub fn log_scores_from_distances(
    sq_dist: &[(usize, f64)],
    class_counts: &[usize],
    log_priors: &[f64],
    sigma: f64,
) -> Vec<f64> {
    let num_classes = class_counts.len();
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut best = vec![f64::NEG_INFINITY; num_classes];
    for &(label, d) in sq_dist {
        let t = -d * inv;
        if t > best[label - 1] {
            best[label - 1] = t;
        }
    }
    let mut sums = vec![0.0; num_classes];
    for &(label, d) in sq_dist {
        let c = label - 1;
        sums[c] += (-d * inv - best[c]).exp();
    }
    (0..num_classes)
        .map(|c| {
            if class_counts[c] == 0 || !best[c].is_finite() {
                return f64::NEG_INFINITY;
            }
            log_priors[c] + best[c] + sums[c].ln() - (class_counts[c] as f64).ln()
        })
        .collect()
}

fn check_training(x: &[Vec<f64>], y: &[usize]) -> Result<(usize, usize), PnnError> {
    if x.is_empty() {
        return Err(PnnError::EmptyTraining);
    }
    if x.len() != y.len() {
        return Err(PnnError::LabelCount(y.len(), x.len()));
    }
    let dim = x[0].len();
    if let Some(r) = x.iter().find(|r| r.len() != dim) {
        return Err(PnnError::DimensionMismatch {
            expected: dim,
            got: r.len(),
        });
    }
    if y.contains(&0) {
        return Err(PnnError::BadLabel);
    }
    Ok((dim, *y.iter().max().unwrap()))
}

fn check_sigma(sigma: f64) -> Result<(), PnnError> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(PnnError::NonPositiveSigma(sigma))
    }
}

/// A fitted network. Immutable after fitting; prediction only reads it.
#[derive(Debug, Clone, PartialEq)]
pub struct PnnModel {
    normalizer: Normalizer,
    sigma: f64,
    priors: Vec<f64>,
    /// Normalized exemplars, `exemplars[c - 1]` for class `c`.
    exemplars: Vec<Vec<Vec<f64>>>,
}

impl PnnModel {
    /// Stores the z-scored training rows grouped by label. Classes are
    /// `1..=max(y)`; a class without exemplars is logged and can never be
    /// predicted. Priors are uniform over the classes that have exemplars.
    pub fn fit(x: &[Vec<f64>], y: &[usize], sigma: f64) -> Result<Self, PnnError> {
        let (_, num_classes) = check_training(x, y)?;
        Self::fit_with_classes(x, y, sigma, num_classes)
    }

    /// Like [`PnnModel::fit`] with an explicit class count.
    pub fn fit_with_classes(
        x: &[Vec<f64>],
        y: &[usize],
        sigma: f64,
        num_classes: usize,
    ) -> Result<Self, PnnError> {
        let (_, max_label) = check_training(x, y)?;
        check_sigma(sigma)?;
        let num_classes = num_classes.max(max_label);
        let normalizer = Normalizer::fit(x);
        let mut exemplars = vec![Vec::new(); num_classes];
        for (row, &label) in x.iter().zip(y) {
            exemplars[label - 1].push(normalizer.transform(row));
        }
        for (c, group) in exemplars.iter().enumerate() {
            if group.is_empty() {
                log::warn!("class {} has no training exemplar and cannot be predicted", c + 1);
            }
        }
        let present = exemplars.iter().filter(|g| !g.is_empty()).count() as f64;
        let priors = exemplars
            .iter()
            .map(|g| if g.is_empty() { 0.0 } else { 1.0 / present })
            .collect();
        Ok(Self {
            normalizer,
            sigma,
            priors,
            exemplars,
        })
    }

    /// Like [`PnnModel::fit_with_classes`] but every class must have an
    /// exemplar.
    pub fn fit_strict(
        x: &[Vec<f64>],
        y: &[usize],
        sigma: f64,
        num_classes: usize,
    ) -> Result<Self, PnnError> {
        let model = Self::fit_with_classes(x, y, sigma, num_classes)?;
        if let Some(c) = model.exemplars.iter().position(Vec::is_empty) {
            return Err(PnnError::EmptyClass(c + 1));
        }
        Ok(model)
    }

    /// Replaces the class priors; they are rescaled to sum to one.
    pub fn with_priors(mut self, priors: Vec<f64>) -> Result<Self, PnnError> {
        let total: f64 = priors.iter().sum();
        if priors.len() != self.num_classes()
            || priors.iter().any(|p| p.is_nan() || *p < 0.0)
            || !(total > 0.0 && total.is_finite())
        {
            return Err(PnnError::BadPriors);
        }
        self.priors = priors.into_iter().map(|p| p / total).collect();
        Ok(self)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn num_classes(&self) -> usize {
        self.exemplars.len()
    }

    pub fn dim(&self) -> usize {
        self.normalizer.dim()
    }

    /// Stored exemplars per class.
    pub fn class_sizes(&self) -> Vec<usize> {
        self.exemplars.iter().map(Vec::len).collect()
    }

    /// Total stored patterns, i.e. the number of pattern-layer neurons.
    pub fn num_exemplars(&self) -> usize {
        self.exemplars.iter().map(Vec::len).sum()
    }

    /// Classes with no exemplar.
    pub fn empty_classes(&self) -> Vec<usize> {
        (1..=self.num_classes())
            .filter(|&c| self.exemplars[c - 1].is_empty())
            .collect()
    }

    pub fn log_scores(&self, x: &[f64]) -> Result<Vec<f64>, PnnError> {
        if x.len() != self.dim() {
            return Err(PnnError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let z = self.normalizer.transform(x);
        let dists: Vec<(usize, f64)> = self
            .exemplars
            .iter()
            .enumerate()
            .flat_map(|(c, group)| {
                let z = &z;
                group.iter().map(move |e| (c + 1, squared_distance(z, e)))
            })
            .collect();
        let log_priors: Vec<f64> = self.priors.iter().map(|p| p.ln()).collect();
        Ok(log_scores_from_distances(
            &dists,
            &self.class_sizes(),
            &log_priors,
            self.sigma,
        ))
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction, PnnError> {
        Ok(decide(&self.log_scores(x)?))
    }

    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<Prediction>, PnnError> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    pub fn to_json(&self) -> Result<String, PnnError> {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            sigma: self.sigma,
            priors: self.priors.clone(),
            normalizer: self.normalizer.clone(),
            exemplars: self
                .exemplars
                .iter()
                .enumerate()
                .flat_map(|(c, g)| {
                    g.iter().map(move |v| StoredExemplar {
                        label: c + 1,
                        values: v.clone(),
                    })
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self, PnnError> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(PnnError::UnsupportedVersion {
                format: file.format,
                version: file.version,
            });
        }
        check_sigma(file.sigma)?;
        let num_classes = file.priors.len();
        let mut exemplars = vec![Vec::new(); num_classes];
        for e in file.exemplars {
            if e.label == 0 || e.label > num_classes {
                return Err(PnnError::BadLabel);
            }
            if e.values.len() != file.normalizer.dim() {
                return Err(PnnError::DimensionMismatch {
                    expected: file.normalizer.dim(),
                    got: e.values.len(),
                });
            }
            exemplars[e.label - 1].push(e.values);
        }
        Ok(Self {
            normalizer: file.normalizer,
            sigma: file.sigma,
            priors: file.priors,
            exemplars,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), PnnError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PnnError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct StoredExemplar {
    label: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    sigma: f64,
    priors: Vec<f64>,
    normalizer: Normalizer,
    exemplars: Vec<StoredExemplar>,
}

/// Picks the bandwidth with the best mean accuracy under an internal
/// stratified cross-validation of the training data. Ties go to the
/// smaller bandwidth.
///
/// The fold count is capped at the smallest class size; with fewer than
/// two patterns in some class no validation is possible and the smallest
/// grid value is returned.
pub fn select_sigma(
    x: &[Vec<f64>],
    y: &[usize],
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<f64, PnnError> {
    let (_, num_classes) = check_training(x, y)?;
    if grid.is_empty() {
        return Err(PnnError::EmptyGrid);
    }
    for &s in grid {
        check_sigma(s)?;
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() == 1 {
        return Ok(sorted[0]);
    }
    let k = folds.min(min_class_count(y));
    if k < 2 {
        return Ok(sorted[0]);
    }
    let assignment = stratified_folds(y, k, seed);
    let mut acc_sum = vec![0.0; sorted.len()];
    for f in 0..k {
        let (train, test) = split(&assignment, f);
        let train_rows: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
        let norm = Normalizer::fit(&train_rows);
        let z_train: Vec<Vec<f64>> = train_rows.iter().map(|r| norm.transform(r)).collect();
        let mut counts = vec![0usize; num_classes];
        for &i in &train {
            counts[y[i] - 1] += 1;
        }
        let present = counts.iter().filter(|&&n| n > 0).count() as f64;
        let log_priors: Vec<f64> = counts
            .iter()
            .map(|&n| if n > 0 { (1.0 / present).ln() } else { f64::NEG_INFINITY })
            .collect();
        let mut correct = vec![0usize; sorted.len()];
        for &t in &test {
            let z = norm.transform(&x[t]);
            let dists: Vec<(usize, f64)> = train
                .iter()
                .zip(&z_train)
                .map(|(&i, e)| (y[i], squared_distance(&z, e)))
                .collect();
            for (s, &sigma) in sorted.iter().enumerate() {
                let scores = log_scores_from_distances(
                    &dists,
                    &counts,
                    &log_priors,
                    sigma,
                );
                if decide(&scores).label == y[t] {
                    correct[s] += 1;
                }
            }
        }
        for (a, c) in acc_sum.iter_mut().zip(correct) {
            *a += c as f64 / test.len() as f64;
        }
    }
    let mut best = 0;
    for s in 1..sorted.len() {
        if acc_sum[s] > acc_sum[best] {
            best = s;
        }
    }
    Ok(sorted[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn two_class() -> (Vec<Vec<f64>>, Vec<usize>) {
        let x = vec![
            vec![0.0, 0.1],
            vec![0.2, -0.1],
            vec![-0.1, 0.0],
            vec![0.1, 0.2],
            vec![0.0, -0.2],
            vec![3.0, 3.1],
            vec![3.2, 2.9],
            vec![2.9, 3.0],
            vec![3.1, 3.2],
            vec![3.0, 2.8],
        ];
        let y = vec![1, 1, 1, 1, 1, 2, 2, 2, 2, 2];
        (x, y)
    }

    #[test]
    fn fit_groups_by_class() {
        let (x, mut y) = two_class();
        y[4] = 2;
        let m = PnnModel::fit(&x, &y, 0.5).unwrap();
        assert_eq!(m.class_sizes(), vec![4, 6]);
        assert_eq!(m.priors(), &[0.5, 0.5]);
    }

    #[test]
    fn rejects_bad_sigma() {
        let (x, y) = two_class();
        assert!(matches!(PnnModel::fit(&x, &y, 0.0), Err(PnnError::NonPositiveSigma(_))));
        assert!(matches!(PnnModel::fit(&x, &y, -1.0), Err(PnnError::NonPositiveSigma(_))));
        assert!(matches!(PnnModel::fit(&x, &y, f64::NAN), Err(PnnError::NonPositiveSigma(_))));
    }

    #[test]
    fn network_grows_with_training_set() {
        let (x, y) = two_class();
        let small = PnnModel::fit(&x[..6], &y[..6], 0.5).unwrap();
        let big = PnnModel::fit(&x, &y, 0.5).unwrap();
        assert_eq!(small.num_exemplars(), 6);
        assert_eq!(big.num_exemplars(), 10);
    }

    #[test]
    fn empty_class_is_reported() {
        let (x, y) = two_class();
        let y3: Vec<usize> = y.iter().map(|&l| if l == 2 { 3 } else { 1 }).collect();
        let m = PnnModel::fit(&x, &y3, 0.5).unwrap();
        assert_eq!(m.empty_classes(), vec![2]);
        assert_eq!(m.priors(), &[0.5, 0.0, 0.5]);
        let p = m.predict(&x[0]).unwrap();
        assert_eq!(p.posterior[1], 0.0);
        assert!(matches!(
            PnnModel::fit_strict(&x, &y3, 0.5, 3),
            Err(PnnError::EmptyClass(2))
        ));
    }

    #[test]
    fn exemplar_with_tiny_sigma() {
        let (x, y) = two_class();
        let m = PnnModel::fit(&x, &y, 0.01).unwrap();
        for (xi, &yi) in x.iter().zip(&y) {
            assert_eq!(m.predict(xi).unwrap().label, yi);
        }
    }

    #[test]
    fn equidistant_tie() {
        let x = vec![vec![-1.0], vec![1.0]];
        let m = PnnModel::fit(&x, &[1, 2], 0.7).unwrap();
        let p = m.predict(&[0.0]).unwrap();
        assert_eq!(p.label, 1);
        assert_eq!(p.posterior, vec![0.5, 0.5]);
    }

    #[test]
    fn huge_sigma_returns_priors() {
        let (x, y) = two_class();
        let m = PnnModel::fit(&x, &y, 1e6).unwrap();
        let p = m.predict(&[1.0, 1.0]).unwrap();
        // exp(-d / 2 sigma^2) = 1 - O(d / sigma^2); d is a few units
        assert_relative_eq!(p.posterior[0], 0.5, epsilon = 1e-10);
        assert_relative_eq!(p.posterior[1], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn dimension_mismatch() {
        let (x, y) = two_class();
        let m = PnnModel::fit(&x, &y, 1.0).unwrap();
        assert!(matches!(
            m.predict(&[1.0]),
            Err(PnnError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn all_underflow_gives_uniform() {
        let p = decide(&[f64::NEG_INFINITY; 4]);
        assert_eq!(p.label, 1);
        assert_eq!(p.posterior, vec![0.25; 4]);
    }

    #[test]
    fn normalizer_moments() {
        let (x, _) = two_class();
        let n = Normalizer::fit(&x);
        let z: Vec<Vec<f64>> = x.iter().map(|r| n.transform(r)).collect();
        for d in 0..2 {
            let mean: f64 = z.iter().map(|r| r[d]).sum::<f64>() / 10.0;
            let var: f64 = z.iter().map(|r| (r[d] - mean).powi(2)).sum::<f64>() / 10.0;
            assert!(mean.abs() < 1e-9);
            assert!((var - 1.0).abs() < 1e-9);
        }
        let constant = Normalizer::fit(&[vec![2.0], vec![2.0]]);
        assert_eq!(constant.transform(&[5.0]), vec![0.0]);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let (x, y) = two_class();
        let m = PnnModel::fit(&x, &y, 0.3)
            .unwrap()
            .with_priors(vec![0.3, 0.7])
            .unwrap();
        let back = PnnModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let bad = m.to_json().unwrap().replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(
            PnnModel::from_json(&bad),
            Err(PnnError::UnsupportedVersion { .. })
        ));
    }

    #[test]
    fn sigma_selection_rules() {
        let (x, y) = two_class();
        assert_eq!(select_sigma(&x, &y, &[0.1], 5, 0).unwrap(), 0.1);
        assert!(matches!(select_sigma(&x, &y, &[], 5, 0), Err(PnnError::EmptyGrid)));
        // separable blobs: every width classifies perfectly, smallest wins
        assert_eq!(select_sigma(&x, &y, &[1.5, 0.3, 0.8], 5, 0).unwrap(), 0.3);
    }

    proptest! {
        #[test]
        fn posterior_is_distribution(
            rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 4..20),
            q in prop::collection::vec(-10.0f64..10.0, 3),
            sigma in 0.01f64..5.0,
        ) {
            let y: Vec<usize> = (0..rows.len()).map(|i| i % 3 + 1).collect();
            let m = PnnModel::fit(&rows, &y, sigma).unwrap();
            let p = m.predict(&q).unwrap();
            prop_assert!(p.posterior.iter().all(|&v| v >= 0.0));
            prop_assert!((p.posterior.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn duplicating_training_set_keeps_label(
            rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 4..16),
            q in prop::collection::vec(-5.0f64..5.0, 2),
        ) {
            let y: Vec<usize> = (0..rows.len()).map(|i| i % 2 + 1).collect();
            let a = PnnModel::fit(&rows, &y, 0.4).unwrap().predict(&q).unwrap();
            let rows2: Vec<Vec<f64>> = rows.iter().chain(&rows).cloned().collect();
            let y2: Vec<usize> = y.iter().chain(&y).copied().collect();
            let b = PnnModel::fit(&rows2, &y2, 0.4).unwrap().predict(&q).unwrap();
            for (pa, pb) in a.posterior.iter().zip(&b.posterior) {
                prop_assert!((pa - pb).abs() < 1e-9);
            }
            let margin = (a.posterior[0] - a.posterior[1]).abs();
            prop_assume!(margin > 1e-9);
            prop_assert_eq!(a.label, b.label);
        }

        #[test]
        fn monotone_transform_keeps_argmax(
            scores in prop::collection::vec(-50.0f64..50.0, 2..10),
        ) {
            let a = decide(&scores);
            let shifted: Vec<f64> = scores.iter().map(|s| 3.0 * s + 7.0).collect();
            prop_assert_eq!(a.label, decide(&shifted).label);
        }
    }
}

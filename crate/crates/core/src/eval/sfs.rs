//! Sequential forward selection.
//!
//! Starting from the empty set, every remaining feature is tried as an
//! addition and the one with the best criterion joins the set. The search
//! stops when the best addition would lower the criterion, when it has
//! failed to raise it for `patience` consecutive steps, or when
//! `max_features` are selected. Additions made during a plateau are kept
//! only if a later step improves on the plateau.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::validate;
use super::EvalError;
use crate::folds::{split, stratified_folds};
use crate::pnn::{decide, log_scores_from_distances};

/// Scores feature subsets for the forward search.
pub trait SubsetCriterion {
    /// Criterion of `selected` extended by each candidate in turn.
    fn score_candidates(&self, selected: &[usize], candidates: &[usize]) -> Vec<f64>;

    /// Notification that `feature` joined the working set.
    fn accept(&mut self, _feature: usize) {}
}

/// Adapts a plain subset-scoring closure.
pub struct FnCriterion<F>(pub F);

impl<F: Fn(&[usize]) -> f64 + Sync> SubsetCriterion for FnCriterion<F> {
    fn score_candidates(&self, selected: &[usize], candidates: &[usize]) -> Vec<f64> {
        candidates
            .par_iter()
            .map(|&c| {
                let mut set = selected.to_vec();
                set.push(c);
                (self.0)(&set)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    /// 0-based feature position.
    pub feature: usize,
    pub criterion: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub steps: Vec<SelectionStep>,
}

impl SelectionTrace {
    pub fn features(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.feature).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn best(&self) -> Option<f64> {
        self.steps.last().map(|s| s.criterion)
    }
}

/// Greedy forward selection over features `0..num_features`. Ties between
/// candidates go to the smallest position.
pub fn sfs<C: SubsetCriterion + ?Sized>(
    criterion: &mut C,
    num_features: usize,
    max_features: usize,
    patience: usize,
) -> Result<SelectionTrace, EvalError> {
    if num_features == 0 {
        return Err(EvalError::NoFeatures);
    }
    let patience = patience.max(1);
    let mut trace = SelectionTrace::default();
    let mut pending: Vec<SelectionStep> = Vec::new();
    let mut working: Vec<usize> = Vec::new();
    let mut remaining: Vec<usize> = (0..num_features).collect();
    let mut best = f64::NEG_INFINITY;
    while working.len() < max_features && !remaining.is_empty() {
        let scores = criterion.score_candidates(&working, &remaining);
        let mut pick = 0;
        for i in 1..scores.len() {
            if scores[i] > scores[pick] {
                pick = i;
            }
        }
        let step = SelectionStep {
            feature: remaining[pick],
            criterion: scores[pick],
        };
        if step.criterion > best {
            trace.steps.append(&mut pending);
            trace.steps.push(step);
            best = step.criterion;
        } else if step.criterion == best && pending.len() + 1 < patience {
            pending.push(step);
        } else {
            break;
        }
        working.push(step.feature);
        remaining.remove(pick);
        criterion.accept(step.feature);
    }
    Ok(trace)
}

struct FoldCache {
    train: Vec<usize>,
    test: Vec<usize>,
    counts: Vec<usize>,
    log_priors: Vec<f64>,
    mean: Vec<f64>,
    std: Vec<f64>,
    /// Squared distances over the working set, `test x train` row-major.
    dist: Vec<f64>,
}

impl FoldCache {
    fn z(&self, x: &[Vec<f64>], f: usize, i: usize) -> f64 {
        if self.std[f] > 0.0 {
            (x[i][f] - self.mean[f]) / self.std[f]
        } else {
            0.0
        }
    }
}

/// Cross-validated PNN accuracy with a fixed kernel width and fixed folds.
///
/// Because the z-scoring is per feature, squared distances over the working
/// set are cached per fold and each candidate only adds its own term. The
/// scores equal [`super::kfold_cv`] with [`super::ClassifierConfig::fixed`]
/// on the columns `selected ++ [candidate]`, bit for bit.
pub struct PnnCvCriterion<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    sigma: f64,
    folds: Vec<FoldCache>,
}

impl<'a> PnnCvCriterion<'a> {
    pub fn new(
        x: &'a [Vec<f64>],
        y: &'a [usize],
        k: usize,
        sigma: f64,
        seed: u64,
    ) -> Result<Self, EvalError> {
        let classes = validate(x, y, k)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(EvalError::Pnn(crate::pnn::PnnError::NonPositiveSigma(sigma)));
        }
        let dim = x[0].len();
        let assignment = stratified_folds(y, k, seed);
        let folds = (0..k)
            .map(|f| {
                let (train, test) = split(&assignment, f);
                let n = train.len() as f64;
                let mut mean = vec![0.0; dim];
                for &i in &train {
                    for (m, v) in mean.iter_mut().zip(&x[i]) {
                        *m += v;
                    }
                }
                mean.iter_mut().for_each(|m| *m /= n);
                let mut var = vec![0.0; dim];
                for &i in &train {
                    for ((s, v), m) in var.iter_mut().zip(&x[i]).zip(&mean) {
                        *s += (v - m) * (v - m);
                    }
                }
                let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
                let mut counts = vec![0usize; classes];
                for &i in &train {
                    counts[y[i] - 1] += 1;
                }
                let present = counts.iter().filter(|&&c| c > 0).count() as f64;
                let log_priors = counts
                    .iter()
                    .map(|&c| if c > 0 { (1.0 / present).ln() } else { f64::NEG_INFINITY })
                    .collect();
                let dist = vec![0.0; test.len() * train.len()];
                FoldCache {
                    train,
                    test,
                    counts,
                    log_priors,
                    mean,
                    std,
                    dist,
                }
            })
            .collect();
        Ok(Self { x, y, sigma, folds })
    }

    fn correct_in_fold(&self, fold: &FoldCache, candidate: Option<usize>) -> usize {
        let ntr = fold.train.len();
        let cand_train: Vec<f64> = match candidate {
            Some(f) => fold.train.iter().map(|&i| fold.z(self.x, f, i)).collect(),
            None => Vec::new(),
        };
        let mut pairs = Vec::with_capacity(ntr);
        let mut correct = 0;
        for (t, &ti) in fold.test.iter().enumerate() {
            let base = &fold.dist[t * ntr..(t + 1) * ntr];
            let zt = candidate.map(|f| fold.z(self.x, f, ti));
            pairs.clear();
            // per-class sums run in training order, as in a fitted model
            for j in 0..ntr {
                let mut d = base[j];
                if let Some(zt) = zt {
                    let diff = zt - cand_train[j];
                    d += diff * diff;
                }
                pairs.push((self.y[fold.train[j]], d));
            }
            let scores = log_scores_from_distances(&pairs, &fold.counts, &fold.log_priors, self.sigma);
            if decide(&scores).label == self.y[ti] {
                correct += 1;
            }
        }
        correct
    }

    fn score(&self, candidate: Option<usize>) -> f64 {
        let correct: usize = self
            .folds
            .iter()
            .map(|f| self.correct_in_fold(f, candidate))
            .sum();
        correct as f64 / self.y.len() as f64
    }

    /// Criterion of the current working set alone.
    pub fn current(&self) -> f64 {
        self.score(None)
    }
}

impl SubsetCriterion for PnnCvCriterion<'_> {
    fn score_candidates(&self, _selected: &[usize], candidates: &[usize]) -> Vec<f64> {
        candidates.par_iter().map(|&c| self.score(Some(c))).collect()
    }

    fn accept(&mut self, feature: usize) {
        let x = self.x;
        self.folds.par_iter_mut().for_each(|fold| {
            let ntr = fold.train.len();
            let zt: Vec<f64> = fold.train.iter().map(|&i| fold.z(x, feature, i)).collect();
            for (t, &ti) in fold.test.iter().enumerate() {
                let z = fold.z(x, feature, ti);
                for (d, zj) in fold.dist[t * ntr..(t + 1) * ntr].iter_mut().zip(&zt) {
                    let diff = z - zj;
                    *d += diff * diff;
                }
            }
        });
    }
}

/// Forward selection driven by cross-validated PNN accuracy.
pub fn sfs_pnn(
    x: &[Vec<f64>],
    y: &[usize],
    k: usize,
    sigma: f64,
    seed: u64,
    max_features: usize,
    patience: usize,
) -> Result<SelectionTrace, EvalError> {
    let mut criterion = PnnCvCriterion::new(x, y, k, sigma, seed)?;
    sfs(&mut criterion, x[0].len(), max_features, patience)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::cv::{kfold_cv, ClassifierConfig};
    use crate::synthetic::{gaussian, seeded};

    #[test]
    fn one_informative_feature_is_picked_first() {
        let mut rng = seeded(3);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..80 {
            let label = i % 2 + 1;
            x.push(vec![
                gaussian(&mut rng),
                label as f64 * 4.0 + 0.2 * gaussian(&mut rng),
                gaussian(&mut rng),
            ]);
            y.push(label);
        }
        let trace = sfs_pnn(&x, &y, 10, 0.3, 0, 3, 1).unwrap();
        assert_eq!(trace.steps[0].feature, 1);
        assert_eq!(trace.steps[0].criterion, 1.0);
    }

    #[test]
    fn complementary_pair_is_found() {
        let mut rng = seeded(9);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..80 {
            let a = (i % 2) as f64;
            let b = ((i / 2) % 2) as f64;
            let label = if (a == 1.0) ^ (b == 1.0) { 2 } else { 1 };
            x.push(vec![a + 0.05 * gaussian(&mut rng), b + 0.05 * gaussian(&mut rng)]);
            y.push(label);
        }
        let trace = sfs_pnn(&x, &y, 10, 0.2, 1, 2, 1).unwrap();
        assert_eq!(trace.len(), 2);
        let mut got = trace.features();
        got.sort();
        assert_eq!(got, vec![0, 1]);
        assert_eq!(trace.best(), Some(1.0));
    }

    #[test]
    fn identical_features_stop_after_one() {
        let mut rng = seeded(4);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..60 {
            let label = i % 3 + 1;
            let v = label as f64 + 0.8 * gaussian(&mut rng);
            x.push(vec![v; 4]);
            y.push(label);
        }
        let trace = sfs_pnn(&x, &y, 5, 1e-3, 2, 4, 1).unwrap();
        assert_eq!(trace.features(), vec![0]);
    }

    #[test]
    fn plateau_patience() {
        // criterion: number of distinct "groups" covered, capped
        let groups = [0, 0, 1, 1, 2];
        let crit = |s: &[usize]| {
            let mut g: Vec<usize> = s.iter().map(|&f| groups[f]).collect();
            g.sort();
            g.dedup();
            g.len() as f64
        };
        let t = sfs(&mut FnCriterion(crit), 5, 10, 1).unwrap();
        assert_eq!(t.features(), vec![0, 2, 4]);
        let t = sfs(&mut FnCriterion(|s: &[usize]| if s.contains(&3) && s.len() > 3 { 2.0 } else { 1.0 }), 5, 10, 3).unwrap();
        // two plateau steps (0, 1) then 3 lifts the criterion
        assert_eq!(t.features(), vec![0, 1, 2, 3]);
        assert!(t.steps.windows(2).all(|w| w[1].criterion >= w[0].criterion));
        assert!(matches!(sfs(&mut FnCriterion(crit), 0, 3, 1), Err(EvalError::NoFeatures)));
        assert_eq!(sfs(&mut FnCriterion(crit), 5, 1, 1).unwrap().len(), 1);
    }

    #[test]
    fn cached_criterion_matches_fresh_cross_validation() {
        let mut rng = seeded(12);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..90 {
            let label = i % 3 + 1;
            x.push((0..5).map(|f| gaussian(&mut rng) + if f < 2 { label as f64 * 0.7 } else { 0.0 }).collect());
            y.push(label);
        }
        let mut crit = PnnCvCriterion::new(&x, &y, 5, 0.6, 77).unwrap();
        let mut selected = Vec::new();
        for &add in &[3usize, 0] {
            let cands: Vec<usize> = (0..5).filter(|c| !selected.contains(c)).collect();
            let fast = crit.score_candidates(&selected, &cands);
            for (&c, &score) in cands.iter().zip(&fast) {
                let mut cols = selected.clone();
                cols.push(c);
                let rows: Vec<Vec<f64>> = x.iter().map(|r| cols.iter().map(|&j| r[j]).collect()).collect();
                let slow = kfold_cv(&rows, &y, 5, &ClassifierConfig::fixed(0.6), 77).unwrap().alpha;
                assert_eq!(score, slow, "candidate {c} after {selected:?}");
            }
            crit.accept(add);
            selected.push(add);
        }
    }
}

//! Burg autoregressive modelling and spectral band powers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::FeatureError;

/// Autoregressive model `A(z) = sum_i a_i z^-i` with `a_0 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    /// `a_0..=a_order`.
    pub coefficients: Vec<f64>,
    /// Final forward/backward prediction-error power.
    pub noise_variance: f64,
    pub reflection: Vec<f64>,
}

impl ArModel {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    fn zero(order: usize) -> Self {
        let mut coefficients = vec![0.0; order + 1];
        coefficients[0] = 1.0;
        Self {
            coefficients,
            noise_variance: 0.0,
            reflection: vec![0.0; order],
        }
    }
}

/// Burg lattice recursion: each stage picks the reflection coefficient that
/// minimizes the summed forward and backward prediction error power.
pub fn burg_ar(segment: &[f64], order: usize) -> Result<ArModel, FeatureError> {
    let n = segment.len();
    if order == 0 || order >= n {
        return Err(FeatureError::OrderTooHigh { order, len: n });
    }
    let mut err = segment.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if err == 0.0 {
        return Ok(ArModel::zero(order));
    }
    let mut fwd = segment.to_vec();
    let mut bwd = segment.to_vec();
    let mut a = vec![1.0];
    let mut reflection = Vec::with_capacity(order);
    for m in 1..=order {
        let (mut num, mut den) = (0.0, 0.0);
        for t in m..n {
            num += fwd[t] * bwd[t - 1];
            den += fwd[t] * fwd[t] + bwd[t - 1] * bwd[t - 1];
        }
        let k = if den > 0.0 {
            (-2.0 * num / den).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        // Levinson update of the polynomial
        let prev = a.clone();
        a.push(0.0);
        for i in 1..=m {
            a[i] = prev.get(i).copied().unwrap_or(0.0) + k * prev[m - i];
        }
        // update prediction errors from the end so bwd[t - 1] is still old
        for t in (m..n).rev() {
            let f = fwd[t];
            fwd[t] = f + k * bwd[t - 1];
            bwd[t] = bwd[t - 1] + k * f;
        }
        err *= 1.0 - k * k;
        reflection.push(k);
    }
    Ok(ArModel {
        coefficients: a,
        noise_variance: err.max(0.0),
        reflection,
    })
}

/// Frequency of grid point `k` (1-based) on the half-open uniform grid over
/// `(0, pi)` with `grid` points.
pub fn grid_frequency(k: usize, grid: usize) -> f64 {
    PI * (k as f64 - 0.5) / grid as f64
}

/// `Psi(w) = sigma^2 / |A(e^{iw})|^2` on [`grid_frequency`] points.
pub fn ar_psd(model: &ArModel, grid: usize) -> Result<Vec<f64>, FeatureError> {
    if grid == 0 {
        return Err(FeatureError::BadPartition { grid, bands: 0 });
    }
    (1..=grid)
        .map(|k| {
            let w = grid_frequency(k, grid);
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &c) in model.coefficients.iter().enumerate() {
                let arg = w * i as f64;
                re += c * arg.cos();
                im -= c * arg.sin();
            }
            let mag = re * re + im * im;
            if mag.sqrt() < 1e-300 {
                return Err(FeatureError::PoleOnGrid(w));
            }
            Ok(model.noise_variance / mag)
        })
        .collect()
}

/// Sums `psd` over `bands` contiguous equal blocks.
pub fn band_powers(psd: &[f64], bands: usize) -> Result<Vec<f64>, FeatureError> {
    if bands == 0 || psd.is_empty() || !psd.len().is_multiple_of(bands) {
        return Err(FeatureError::BadPartition {
            grid: psd.len(),
            bands,
        });
    }
    Ok(psd
        .chunks_exact(psd.len() / bands)
        .map(|c| c.iter().sum())
        .collect())
}

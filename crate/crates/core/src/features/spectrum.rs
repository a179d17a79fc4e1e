//! Log moments of the Fourier spectrum.

use super::fft;

/// Floor applied to every logarithm argument so silent channels stay finite.
pub const LOG_FLOOR: f64 = 1e-12;

/// Moment pairs `(i, j)` with `i < j` over `1..=5`, in lexicographic order.
pub const MOMENT_PAIRS: [(usize, usize); 10] = [
    (1, 2),
    (1, 3),
    (1, 4),
    (1, 5),
    (2, 3),
    (2, 4),
    (2, 5),
    (3, 4),
    (3, 5),
    (4, 5),
];

pub const LMF_PER_CHANNEL: usize = 17;

/// Squared-magnitude DFT `psi(k) = |sum_l s(l) exp(-i 2 pi l k / L)|^2`
/// with 1-based `l` and `k = 1..=L`. Entry `k - 1` of the result holds
/// `psi(k)`; the last entry is the DC bin.
pub fn power_spectrum(segment: &[f64]) -> Vec<f64> {
    let l = segment.len();
    if l == 0 {
        return Vec::new();
    }
    // the 1-based sample index only adds a unit-modulus phase factor
    let spec = fft::forward_real(segment, l);
    (1..=l).map(|k| spec[k % l].norm_sqr()).collect()
}

/// `g(i) = sqrt(sum_k k^i psi(k))` for `i = 0..=6`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralMoments(pub [f64; 7]);

pub fn spectral_moments(psi: &[f64]) -> SpectralMoments {
    let mut sums = [0.0f64; 7];
    for (idx, &p) in psi.iter().enumerate() {
        let k = (idx + 1) as f64;
        let mut w = 1.0;
        for s in sums.iter_mut() {
            *s += w * p;
            w *= k;
        }
    }
    SpectralMoments(sums.map(|s| s.max(0.0).sqrt()))
}

fn ln(x: f64) -> f64 {
    x.max(LOG_FLOOR).ln()
}

/// The 17 log-moment features of one segment.
///
/// `f(4)` takes the magnitude of `g(0) - g(2)` and `g(0) - g(4)`: both
/// differences are never positive because the moments are nondecreasing.
pub fn lmf_features(g: &SpectralMoments) -> [f64; LMF_PER_CHANNEL] {
    let g = &g.0;
    let mut f = [0.0; LMF_PER_CHANNEL];
    f[0] = ln(g[0]);
    f[1] = ln(g[2]);
    f[2] = ln(g[4]);
    f[3] = ln(g[0]) - 0.5 * ln((g[0] - g[2]).abs()) - 0.5 * ln((g[0] - g[4]).abs());
    f[4] = ln(g[2]) - 0.5 * ln(g[0] * g[4]);
    f[5] = ln(g[0]) - 0.25 * ln(g[1] * g[3]);
    f[6] = ln(g[0]) - 0.25 * ln(g[2] * g[6]);
    for (n, &(i, j)) in MOMENT_PAIRS.iter().enumerate() {
        f[7 + n] = 0.5 * ln(g[i] * g[j]);
    }
    f
}

use super::fft;
use super::FeatureError;

/// Channel pairs (1-based) for the inter-channel features: six upper-limb
/// pairs followed by six lower-limb pairs.
pub const DEFAULT_ICS_PAIRS: [(usize, usize); 12] = [
    (3, 4),
    (2, 4),
    (2, 3),
    (1, 4),
    (1, 3),
    (1, 2),
    (7, 8),
    (6, 8),
    (6, 7),
    (5, 8),
    (4, 7),
    (5, 6),
];

/// Biased cross-correlation `r(d) = (1/L) sum_l a(l) b(l + d)` for every lag
/// `d` in `-(L-1)..=L-1`, returned in lag order.
pub fn cross_correlation(a: &[f64], b: &[f64]) -> Result<Vec<f64>, FeatureError> {
    if a.len() != b.len() {
        return Err(FeatureError::LengthMismatch(a.len(), b.len()));
    }
    let l = a.len();
    if l == 0 {
        return Ok(Vec::new());
    }
    let size = (2 * l - 1).next_power_of_two();
    let fa = fft::forward_real(a, size);
    let mut fb = fft::forward_real(b, size);
    for (x, y) in fb.iter_mut().zip(&fa) {
        *x *= y.conj();
    }
    fft::inverse_in_place(&mut fb);
    let scale = 1.0 / (size as f64 * l as f64);
    // negative lags wrap to the end of the circular buffer
    let neg = (1..l).rev().map(|d| fb[size - d].re * scale);
    let pos = (0..l).map(|d| fb[d].re * scale);
    Ok(neg.chain(pos).collect())
}

/// Maximum of the biased cross-correlation over all lags.
pub fn ics_max_xcorr(a: &[f64], b: &[f64]) -> Result<f64, FeatureError> {
    let r = cross_correlation(a, b)?;
    Ok(r.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Applies [`ics_max_xcorr`] to each listed channel pair (1-based indices).
pub fn compute_ics(
    channels: &[impl AsRef<[f64]>],
    pairs: &[(usize, usize)],
) -> Result<Vec<f64>, FeatureError> {
    let m = channels.len();
    pairs
        .iter()
        .map(|&(i, j)| {
            if i == 0 || j == 0 || i > m || j > m {
                return Err(FeatureError::BadPair(i, j));
            }
            ics_max_xcorr(channels[i - 1].as_ref(), channels[j - 1].as_ref())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // direct evaluation over all lags
    fn brute(a: &[f64], b: &[f64]) -> Vec<f64> {
        let l = a.len() as isize;
        (-(l - 1)..l)
            .map(|d| {
                let mut acc = 0.0;
                for i in 0..l {
                    let j = i + d;
                    if (0..l).contains(&j) {
                        acc += a[i as usize] * b[j as usize];
                    }
                }
                acc / l as f64
            })
            .collect()
    }

    #[test]
    fn self_correlation_of_alternating_signal() {
        let s = [1.0, -1.0, 1.0, -1.0];
        assert_relative_eq!(ics_max_xcorr(&s, &s).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_overlap() {
        let a = [1.0, 0.0, 0.0, 0.0];
        let b = [0.0, 0.0, 0.0, 1.0];
        let r = cross_correlation(&a, &b).unwrap();
        // lag +3 is the last entry
        assert_relative_eq!(r[6], 0.25, epsilon = 1e-12);
        assert_relative_eq!(ics_max_xcorr(&a, &b).unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn delayed_copy_peaks_at_the_delay() {
        let a = [0.3, -1.2, 2.0, 0.7, -0.4, 1.1, 0.9, -0.8];
        let mut b = [0.0; 8];
        b[2..].copy_from_slice(&a[..6]);
        let r = cross_correlation(&a, &b).unwrap();
        let oracle = brute(&a, &b);
        let (best, _) = oracle
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        assert_eq!(best as isize - 7, 2);
        let overlap_power: f64 = a[..6].iter().map(|v| v * v).sum::<f64>() / 6.0;
        assert_relative_eq!(r[best], 6.0 / 8.0 * overlap_power, epsilon = 1e-12);
        assert_relative_eq!(ics_max_xcorr(&a, &b).unwrap(), oracle[best], epsilon = 1e-12);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            ics_max_xcorr(&[1.0], &[1.0, 2.0]),
            Err(FeatureError::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn pair_list_and_bad_pair() {
        assert_eq!(DEFAULT_ICS_PAIRS.len(), 12);
        let ch = vec![vec![0.5, -1.0, 2.0, 0.25]; 8];
        let v = compute_ics(&ch, &DEFAULT_ICS_PAIRS).unwrap();
        assert_eq!(v.len(), 12);
        assert!(v.iter().all(|&x| (x - v[0]).abs() < 1e-12));
        assert!(matches!(
            compute_ics(&ch, &[(0, 9)]),
            Err(FeatureError::BadPair(0, 9))
        ));
    }

    proptest! {
        #[test]
        fn matches_direct_sum(
            (a, b) in (1usize..48).prop_flat_map(|l| (
                prop::collection::vec(-10.0f64..10.0, l),
                prop::collection::vec(-10.0f64..10.0, l),
            ))
        ) {
            let fast = cross_correlation(&a, &b).unwrap();
            let slow = brute(&a, &b);
            for (x, y) in fast.iter().zip(&slow) {
                prop_assert!((x - y).abs() <= 1e-9 * (1.0 + y.abs()));
            }
        }

        #[test]
        fn symmetric_and_zero_lag_dominant(
            (a, b) in (1usize..48).prop_flat_map(|l| (
                prop::collection::vec(-10.0f64..10.0, l),
                prop::collection::vec(-10.0f64..10.0, l),
            ))
        ) {
            let ab = ics_max_xcorr(&a, &b).unwrap();
            let ba = ics_max_xcorr(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab.abs()));
            let auto = cross_correlation(&a, &a).unwrap();
            let zero = auto[a.len() - 1];
            prop_assert!(auto.iter().all(|&v| v <= zero + 1e-9 * (1.0 + zero)));
            prop_assert!((ics_max_xcorr(&a, &a).unwrap() - zero).abs() <= 1e-9 * (1.0 + zero));
        }
    }
}

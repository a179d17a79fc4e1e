use super::FeatureError;

/// Codes of the 1-D local binary pattern over every window position.
///
/// Each window of `window` samples is compared against its own mean; bit
/// `j` is set when sample `j` is at or above the mean.
pub fn lbp_codes(segment: &[f64], window: usize) -> Result<Vec<u64>, FeatureError> {
    if window == 0 || window > 63 || window > segment.len() {
        return Err(FeatureError::WindowTooLong {
            window,
            len: segment.len(),
        });
    }
    Ok(segment
        .windows(window)
        .map(|w| {
            let center = w.iter().sum::<f64>() / window as f64;
            w.iter()
                .enumerate()
                .filter(|(_, &g)| g - center >= 0.0)
                .fold(0u64, |code, (j, _)| code | (1 << j))
        })
        .collect())
}

/// Counts of codes at or below and strictly above `threshold`.
pub fn lbp_features(
    segment: &[f64],
    window: usize,
    threshold: u64,
) -> Result<[usize; 2], FeatureError> {
    let codes = lbp_codes(segment, window)?;
    let low = codes.iter().filter(|&&c| c <= threshold).count();
    Ok([low, codes.len() - low])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_segment_sets_every_bit() {
        let f = lbp_features(&[2.5; 40], 8, 127).unwrap();
        assert_eq!(f, [0, 33]);
        assert!(lbp_codes(&[2.5; 40], 8).unwrap().iter().all(|&c| c == 255));
    }

    #[test]
    fn ramp_has_one_code() {
        let ramp: Vec<f64> = (0..50).map(|i| i as f64 * 0.3 - 2.0).collect();
        let codes = lbp_codes(&ramp, 8).unwrap();
        // the upper half of each window sits above its mean: bits 4..=7
        assert!(codes.iter().all(|&c| c == 0b1111_0000));
        assert_eq!(lbp_features(&ramp, 8, 127).unwrap(), [0, 43]);
    }

    #[test]
    fn window_longer_than_segment() {
        assert!(matches!(
            lbp_features(&[1.0; 4], 8, 127),
            Err(FeatureError::WindowTooLong { .. })
        ));
    }

    proptest! {
        #[test]
        fn counts_partition_positions(
            s in prop::collection::vec(-1e3f64..1e3, 8..200),
            window in 1usize..9,
            threshold in 0u64..512,
        ) {
            prop_assume!(window <= s.len());
            let f = lbp_features(&s, window, threshold).unwrap();
            prop_assert_eq!(f[0] + f[1], s.len() - window + 1);
        }
    }
}

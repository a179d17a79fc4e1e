/// Time-domain statistics of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomainStats {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

impl TimeDomainStats {
    pub fn to_array(self) -> [f64; 4] {
        [self.mean, self.variance, self.skewness, self.kurtosis]
    }
}

/// Population moments (divide by `L`). Skewness and kurtosis are 0 for a
/// constant segment.
pub fn tds(segment: &[f64]) -> TimeDomainStats {
    if segment.is_empty() {
        return TimeDomainStats {
            mean: 0.0,
            variance: 0.0,
            skewness: 0.0,
            kurtosis: 0.0,
        };
    }
    let n = segment.len() as f64;
    let mean = segment.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &s in segment {
        let d = s - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    } else {
        (0.0, 0.0)
    };
    TimeDomainStats {
        mean,
        variance: m2,
        skewness,
        kurtosis,
    }
}

//! Seeded synthetic data for tests, demos and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Pattern;
use crate::features::DEFAULT_ICS_PAIRS;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal draw (Box-Muller).
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Two-dimensional isotropic unit-variance blobs with centers on a grid of
/// spacing `separation`. Labels are `1..=classes`, interleaved.
pub fn gaussian_blobs(
    classes: usize,
    per_class: usize,
    separation: f64,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = seeded(seed);
    let side = (classes as f64).sqrt().ceil() as usize;
    let mut x = Vec::with_capacity(classes * per_class);
    let mut y = Vec::with_capacity(classes * per_class);
    for _ in 0..per_class {
        for c in 0..classes {
            let cx = (c % side) as f64 * separation;
            let cy = (c / side) as f64 * separation;
            x.push(vec![cx + gaussian(&mut rng), cy + gaussian(&mut rng)]);
            y.push(c + 1);
        }
    }
    (x, y)
}

/// A seeded permutation of `labels`.
pub fn shuffled_labels(labels: &[usize], seed: u64) -> Vec<usize> {
    let mut out = labels.to_vec();
    out.shuffle(&mut seeded(seed));
    out
}

/// Settings for [`ar_sinusoid_patterns`].
#[derive(Debug, Clone, PartialEq)]
pub struct ArSinusoidSpec {
    pub classes: usize,
    pub per_class: usize,
    pub channels: usize,
    pub samples: usize,
    /// 1-based channels whose content depends on the class.
    pub informative: Vec<usize>,
    pub seed: u64,
}

impl Default for ArSinusoidSpec {
    fn default() -> Self {
        Self {
            classes: 20,
            per_class: 60,
            channels: 8,
            samples: 1000,
            informative: vec![1],
            seed: 0,
        }
    }
}

fn ar2(rng: &mut ChaCha8Rng, n: usize, a1: f64, a2: f64) -> Vec<f64> {
    let burn = 100;
    let mut out = Vec::with_capacity(n + burn);
    let (mut p1, mut p2) = (0.0, 0.0);
    for _ in 0..n + burn {
        let v = a1 * p1 + a2 * p2 + gaussian(rng);
        out.push(v);
        p2 = p1;
        p1 = v;
    }
    out.split_off(burn)
}

fn resonance(angle: f64, radius: f64) -> (f64, f64) {
    (2.0 * radius * angle.cos(), -radius * radius)
}

/// Multi-channel patterns where each informative channel is a class-specific
/// AR(2) resonance plus a class-specific sinusoid, and every other channel
/// is an AR(2) process shared by all classes.
pub fn ar_sinusoid_patterns(spec: &ArSinusoidSpec) -> Vec<Pattern> {
    use std::f64::consts::PI;
    let mut rng = seeded(spec.seed);
    let classes = spec.classes.max(1);
    let span = (classes - 1).max(1) as f64;
    let mut out = Vec::with_capacity(classes * spec.per_class);
    for trial in 0..spec.per_class {
        for c in 0..classes {
            let (a1, a2) = resonance(PI * (0.08 + 0.84 * c as f64 / span), 0.85);
            let freq = PI * (0.1 + 0.8 * ((c * 7) % classes) as f64 / span);
            let channels = (1..=spec.channels)
                .map(|m| {
                    if spec.informative.contains(&m) {
                        let phase = std::f64::consts::TAU * rng.random::<f64>();
                        let gain = 1.0 + 0.1 * gaussian(&mut rng);
                        ar2(&mut rng, spec.samples, a1, a2)
                            .into_iter()
                            .enumerate()
                            .map(|(n, v)| gain * (v + 3.0 * (freq * n as f64 + phase).sin()))
                            .collect()
                    } else {
                        let (b1, b2) = resonance(PI * 0.3, 0.7);
                        ar2(&mut rng, spec.samples, b1, b2)
                    }
                })
                .collect();
            out.push(Pattern {
                channels,
                label: c + 1,
                subject_id: 1,
                trial_index: trial + 1,
            });
        }
    }
    out
}

/// Eight-channel white-noise patterns whose classes differ only in which
/// channel pair shares a common source: class `c` couples the `c`-th pair
/// of the default inter-channel pair list. Every channel has unit variance
/// and a flat spectrum in every class.
pub fn coupled_pair_patterns(
    classes: usize,
    per_class: usize,
    samples: usize,
    coupling: f64,
    seed: u64,
) -> Vec<Pattern> {
    let mut rng = seeded(seed);
    let own = (1.0 - coupling * coupling).max(0.0).sqrt();
    let mut out = Vec::with_capacity(classes * per_class);
    for trial in 0..per_class {
        for c in 0..classes {
            let (i, j) = DEFAULT_ICS_PAIRS[c % DEFAULT_ICS_PAIRS.len()];
            let shared: Vec<f64> = (0..samples).map(|_| gaussian(&mut rng)).collect();
            let channels = (1..=8)
                .map(|m| {
                    (0..samples)
                        .map(|n| {
                            let noise = gaussian(&mut rng);
                            if m == i || m == j {
                                own * noise + coupling * shared[n]
                            } else {
                                noise
                            }
                        })
                        .collect()
                })
                .collect();
            out.push(Pattern {
                channels,
                label: c + 1,
                subject_id: 1,
                trial_index: trial + 1,
            });
        }
    }
    out
}

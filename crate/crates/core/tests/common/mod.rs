#![allow(dead_code)]

use minmaxnet::spectra::{Dataset, Sign, Spectrum, Split};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Spectral shape of one synthetic class: a log-frequency tilt plus a bump.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub label: &'static str,
    pub tilt: f64,
    pub peak: usize,
    pub height: f64,
}

pub const FIVE: [Shape; 5] = [
    Shape { label: "aa", tilt: 0.0, peak: 20, height: 2.0 },
    Shape { label: "ao", tilt: 0.1, peak: 24, height: 2.0 },
    Shape { label: "dcl", tilt: -0.6, peak: 5, height: 1.0 },
    Shape { label: "iy", tilt: 0.6, peak: 66, height: 3.0 },
    Shape { label: "sh", tilt: 1.0, peak: 70, height: 1.0 },
];

/// Loudness varies per sample, noise per bin.
pub fn synthetic(shapes: &[Shape], n_points: usize, n_train: usize, n_test: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut samples = Vec::new();
    for (split, n) in [(Split::Train, n_train), (Split::Test, n_test)] {
        for shape in shapes {
            for j in 0..n {
                let loud: f64 = rng.random_range(-3.0..3.0);
                let values = (1..=n_points)
                    .map(|i| {
                        let bump = if i.abs_diff(shape.peak) < 5 { shape.height } else { 0.0 };
                        loud + shape.tilt * (i as f64).ln() + bump + noise.sample(&mut rng)
                    })
                    .collect();
                samples.push(
                    Spectrum::new(values, shape.label, split)
                        .with_id(format!("{}.{}.{j}", split, shape.label)),
                );
            }
        }
    }
    Dataset::from_samples(samples).unwrap()
}

pub fn refs(v: &[(Spectrum, Sign)]) -> Vec<(&Spectrum, Sign)> {
    v.iter().map(|(s, g)| (s, *g)).collect()
}

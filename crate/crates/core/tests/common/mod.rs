#![allow(dead_code)]

use dynmedian::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// `count` points from `components` unit-variance blobs with centers spread over a 100-wide cube.
pub fn gaussian_mixture(seed: u64, components: usize, dim: usize, count: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<Vec<f64>> = (0..components)
        .map(|_| (0..dim).map(|_| rng.random_range(0.0..100.0)).collect())
        .collect();
    let noise = Normal::new(0.0, 1.0).unwrap();
    (0..count)
        .map(|i| {
            let mean = &means[rng.random_range(0..components)];
            let coords = mean.iter().map(|m| m + noise.sample(&mut rng)).collect();
            Point::new(i as u64, coords)
        })
        .collect()
}

pub fn uniform_cloud(seed: u64, dim: usize, count: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| Point::new(i as u64, (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect()))
        .collect()
}

pub fn refs(points: &[Point]) -> Vec<&Point> {
    points.iter().collect()
}

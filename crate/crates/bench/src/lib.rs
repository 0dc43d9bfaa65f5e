//! Shared instance builders for the criterion benchmarks.

use rand::{Rng as _, SeedableRng as _};
use rand_chacha::ChaCha8Rng;
use stablecluster::{CenterPolicy, Instance, SourceMetric};

/// Uniform random points in a square.
pub fn uniform_instance(n: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| vec![rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0)])
        .collect();
    Instance::from_points(
        format!("uniform(n={n})"),
        points,
        SourceMetric::Euclidean,
        CenterPolicy::DataPointsOnly,
    )
    .expect("bench instance")
}

/// k tight groups far apart, so pruning runs on a stable tree.
pub fn grouped_instance(n: usize, k: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|i| {
            let g = (i % k) as f64;
            vec![
                1000.0 * g + rng.gen_range(-1.0..1.0),
                500.0 * g + rng.gen_range(-1.0..1.0),
            ]
        })
        .collect();
    Instance::from_points(
        format!("grouped(n={n},k={k})"),
        points,
        SourceMetric::Euclidean,
        CenterPolicy::DataPointsOnly,
    )
    .expect("bench instance")
}

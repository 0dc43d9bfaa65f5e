//! Timing sweep for the solver and the log-log scaling fit, shared by the
//! bench command and the acceptance suite.

use std::time::Instant;

use stablecluster::{mix_seed, solve, CenterPolicy, Instance, Objective, SourceMetric};

#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub n: usize,
    pub seconds: f64,
}

/// Uniform random points in a square, deterministic in (n, seed).
pub fn random_instance(n: usize, seed: u64) -> Instance {
    // splitmix-style stream; no rand dependency needed for plain uniforms
    let mut state = mix_seed(seed, n as u64);
    let mut next_unit = move || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    };
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![next_unit() * 1000.0, next_unit() * 1000.0])
        .collect();
    Instance::from_points(
        format!("bench(n={n},seed={seed})"),
        points,
        SourceMetric::Euclidean,
        CenterPolicy::DataPointsOnly,
    )
    .expect("bench instances are well-formed")
}

/// Median wall time of `solve` per size. Instance construction is excluded
/// from the timing.
pub fn scaling_sweep(
    sizes: &[usize],
    k: usize,
    obj: &Objective,
    seed: u64,
    reps: usize,
) -> Vec<SweepPoint> {
    sweep_with(sizes, k, obj, seed, reps, |times| times[times.len() / 2])
}

/// Like [`scaling_sweep`] but reporting the fastest repetition per size,
/// which is the robust estimate when other work shares the machine.
pub fn scaling_sweep_best(
    sizes: &[usize],
    k: usize,
    obj: &Objective,
    seed: u64,
    reps: usize,
) -> Vec<SweepPoint> {
    sweep_with(sizes, k, obj, seed, reps, |times| times[0])
}

fn sweep_with(
    sizes: &[usize],
    k: usize,
    obj: &Objective,
    seed: u64,
    reps: usize,
    pick: impl Fn(&[f64]) -> f64,
) -> Vec<SweepPoint> {
    let reps = reps.max(1);
    sizes
        .iter()
        .map(|&n| {
            let inst = random_instance(n, seed);
            let mut times: Vec<f64> = (0..reps)
                .map(|_| {
                    let start = Instant::now();
                    let clustering = solve(&inst, obj, k.min(n)).expect("bench solve");
                    let elapsed = start.elapsed().as_secs_f64();
                    std::hint::black_box(clustering.total_cost);
                    elapsed
                })
                .collect();
            times.sort_by(f64::total_cmp);
            SweepPoint {
                n,
                seconds: pick(&times),
            }
        })
        .collect()
}

/// Least-squares slope of log(seconds) against log(n); None below two
/// distinct sizes.
pub fn fit_exponent(points: &[SweepPoint]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.seconds.max(1e-9).ln()).collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    Some(sxy / sxx)
}

//! Shared oracles for the integration tests: brute-force searches and
//! enumeration solvers kept deliberately independent of the library's own
//! solution paths.
#![allow(dead_code)] // each test binary uses its own subset

use frontier_core::rng::SeedStream;
use frontier_core::{SpdMatrix, Vector};

/// Brute-force minimizer over the 2-simplex parameterized as (t, 1 - t):
/// scans t in [0, 1] at the given step and returns the best point.
pub fn grid_min_simplex2<F>(objective: F, step: f64) -> Vector
where
    F: Fn(&[f64]) -> f64,
{
    let mut best_t = 0.0;
    let mut best_v = f64::INFINITY;
    let steps = (1.0 / step).round() as usize;
    for i in 0..=steps {
        let t = (i as f64 * step).min(1.0);
        let v = objective(&[t, 1.0 - t]);
        if v < best_v {
            best_v = v;
            best_t = t;
        }
    }
    Vector::new(vec![best_t, 1.0 - best_t]).unwrap()
}

/// Exact Euclidean projection onto
/// {lower <= x <= upper, sum_lo <= sum x <= sum_hi} by active-set
/// enumeration; every coordinate is tried at its lower bound, upper bound,
/// or free, and the sum constraint inactive or tight at either end. Feasible
/// candidates compete on distance. Intended for dim <= 4.
pub fn box_band_projection_oracle(
    y: &[f64],
    lower: &[f64],
    upper: &[f64],
    sum_lo: f64,
    sum_hi: f64,
) -> Vec<f64> {
    let n = y.len();
    assert!(n <= 4, "enumeration oracle is for tiny dimensions");
    let mut best: Option<(f64, Vec<f64>)> = None;
    let combos = 3usize.pow(n as u32);
    for combo in 0..combos {
        let mut states = Vec::with_capacity(n);
        let mut c = combo;
        for _ in 0..n {
            states.push(c % 3); // 0 = lower, 1 = upper, 2 = free
            c /= 3;
        }
        for sum_state in 0..3 {
            // 0 = inactive, 1 = tight at sum_lo, 2 = tight at sum_hi
            let mut x = vec![0.0; n];
            let mut fixed_sum = 0.0;
            let mut free_idx = Vec::new();
            for i in 0..n {
                match states[i] {
                    0 => {
                        x[i] = lower[i];
                        fixed_sum += lower[i];
                    }
                    1 => {
                        x[i] = upper[i];
                        fixed_sum += upper[i];
                    }
                    _ => free_idx.push(i),
                }
            }
            if sum_state == 0 {
                for &i in &free_idx {
                    x[i] = y[i];
                }
            } else {
                let target = if sum_state == 1 { sum_lo } else { sum_hi };
                if free_idx.is_empty() {
                    let total: f64 = x.iter().sum();
                    if (total - target).abs() > 1e-9 {
                        continue;
                    }
                } else {
                    let free_y: f64 = free_idx.iter().map(|&i| y[i]).sum();
                    let tau = (free_y + fixed_sum - target) / free_idx.len() as f64;
                    for &i in &free_idx {
                        x[i] = y[i] - tau;
                    }
                }
            }
            // feasibility screen
            let total: f64 = x.iter().sum();
            let feasible = (0..n).all(|i| x[i] >= lower[i] - 1e-9 && x[i] <= upper[i] + 1e-9)
                && total >= sum_lo - 1e-9
                && total <= sum_hi + 1e-9;
            if !feasible {
                continue;
            }
            let dist: f64 = (0..n).map(|i| (x[i] - y[i]).powi(2)).sum();
            if best.as_ref().map_or(true, |(b, _)| dist < *b) {
                best = Some((dist, x));
            }
        }
    }
    best.expect("feasible candidate must exist").1
}

/// Random diagonal-shape simplex instance (the exact-correspondence family);
/// delegates to the shared generator.
pub fn diag_instance(seed: u64, n: usize) -> (Vector, SpdMatrix) {
    frontier_core::instances::diag_instance(seed, n)
}

/// Uniform point on the unit sphere via normalized Gaussians.
pub fn unit_sphere_sample(stream: &mut SeedStream, n: usize) -> Vec<f64> {
    loop {
        let z: Vec<f64> = (0..n).map(|_| stream.gaussian()).collect();
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return z.iter().map(|v| v / norm).collect();
        }
    }
}

//! Seeded instance generators shared by experiments, tests, and the CLI.

use crate::domains::{min_quadratic_over_domain, DomainSpec};
use crate::error::Result;
use crate::linalg::{Matrix, SpdMatrix, Vector};
use crate::rng::SeedStream;
use crate::saddle::RcwucInstance;

/// Diagonal-shape instance family: `a0 ~ U[-1, 1]^n`,
/// `Sigma = diag(u), u ~ U[0.5, 2]`. With a positive diagonal the
/// minimum-variance closed form always applies, so trajectories on the
/// simplex reproduce exact frontiers point for point.
pub fn diag_instance(seed: u64, n: usize) -> (Vector, SpdMatrix) {
    let mut stream = SeedStream::new(seed);
    let a0 = Vector::from_raw((0..n).map(|_| stream.uniform(-1.0, 1.0)).collect());
    let diag: Vec<f64> = (0..n).map(|_| stream.uniform(0.5, 2.0)).collect();
    (a0, SpdMatrix::diagonal(&diag).expect("positive diagonal"))
}

/// Uncertain-constraint instance whose constraints stay strictly slack at
/// the optimum along the returned radius grid. In that regime the
/// quadratic-penalized program solved by the alternating oracle and the
/// norm-reformulated program share their minimizer exactly, so the two
/// routes can be compared tightly. Right-hand sides are set from the cost
/// vector's favorite vertex with margin.
pub fn slack_rcwuc(seed: u64) -> Result<(RcwucInstance, Vec<f64>)> {
    let mut stream = SeedStream::new(seed);
    let n = 3 + (stream.next_u64() % 2) as usize; // 3..4
    let m = 1 + (stream.next_u64() % 3) as usize; // 1..3
    let c0 = Vector::from_raw((0..n).map(|_| stream.uniform(-1.0, 1.0)).collect());
    let diag: Vec<f64> = (0..n).map(|_| stream.uniform(0.5, 2.0)).collect();
    let sigma = SpdMatrix::diagonal(&diag)?;
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| stream.uniform(-0.5, 1.0)).collect())
        .collect();

    let vertex = (0..n)
        .min_by(|&i, &j| c0[i].partial_cmp(&c0[j]).unwrap())
        .unwrap();
    let q_vertex = sigma.get(vertex, vertex);
    let alphas = vec![0.1, 0.35, 0.7, 1.2];
    let alpha_max = *alphas.last().unwrap();
    let b: Vec<f64> = rows
        .iter()
        .map(|row| {
            let at_vertex = row[vertex] + alpha_max * q_vertex;
            let at_uniform: f64 = row.iter().sum::<f64>() / n as f64;
            at_vertex.max(at_uniform) + stream.uniform(0.2, 0.5)
        })
        .collect();
    let c_rows = Matrix::from_rows(&rows)?;
    let inst = RcwucInstance::new(c0, c_rows, Vector::from_raw(b), sigma)?;
    Ok((inst, alphas))
}

/// Uncertain-constraint instance with tight right-hand sides, so constraints
/// bind at the optimum over most of the feasible radius range.
pub fn active_rcwuc(seed: u64) -> Result<RcwucInstance> {
    let mut stream = SeedStream::new(seed);
    let n = 3 + (stream.next_u64() % 2) as usize;
    let m = 1 + (stream.next_u64() % 3) as usize;
    let c0 = Vector::from_raw((0..n).map(|_| stream.uniform(-1.0, 1.0)).collect());
    let diag: Vec<f64> = (0..n).map(|_| stream.uniform(0.5, 2.0)).collect();
    let sigma = SpdMatrix::diagonal(&diag)?;
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| stream.uniform(-0.5, 1.0)).collect())
        .collect();
    let b: Vec<f64> = rows
        .iter()
        .map(|row| {
            let at_uniform: f64 = row.iter().sum::<f64>() / n as f64;
            at_uniform + stream.uniform(0.3, 0.8)
        })
        .collect();
    let c_rows = Matrix::from_rows(&rows)?;
    RcwucInstance::new(c0, c_rows, Vector::from_raw(b), sigma)
}

/// Radii certified feasible for the instance through its minimum-variance
/// point: at each returned radius that point satisfies every penalized
/// constraint, so the radius range is nonempty.
pub fn rcwuc_feasible_grid(inst: &RcwucInstance) -> Result<Vec<f64>> {
    let simplex = DomainSpec::simplex(inst.dim())?;
    let x_mv = min_quadratic_over_domain(&inst.sigma, &simplex)?.x;
    let q = inst.sigma.quad_form(x_mv.as_slice())?;
    let cx = inst.c_rows.mul_vec(x_mv.as_slice())?;
    let alpha_max = (0..inst.count())
        .map(|i| (inst.b[i] - cx[i]) / q)
        .fold(f64::INFINITY, f64::min);
    Ok([0.15, 0.35, 0.6, 0.85].iter().map(|f| f * alpha_max).collect())
}

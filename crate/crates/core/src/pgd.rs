//! Spectral projected gradient engine.
//!
//! Minimizes a smooth convex function over a convex set given by a projection
//! oracle. Steps use the Barzilai-Borwein spectral length safeguarded by a
//! nonmonotone Armijo search (Grippo window). Convergence is measured by the
//! displacement of the projected-gradient fixed-point map at step 1/L, where
//! L is the largest curvature observed so far; at a solution the displacement
//! is zero for every step length, so the measure stays meaningful for very
//! stiff prox objectives. The best iterate seen is tracked and returned, and
//! a stall guard exits once the residual stops improving.

use crate::linalg::{norm_inf, Vector};

const ARMIJO_C: f64 = 1e-4;
const HISTORY: usize = 10;
const STEP_MIN: f64 = 1e-14;
const STEP_MAX: f64 = 1e14;
const STALL_WINDOW: usize = 1500;

pub(crate) struct PgdOutcome {
    pub x: Vector,
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) struct PgdOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Known upper bound on the gradient Lipschitz constant, if any.
    pub curvature_hint: Option<f64>,
}

impl Default for PgdOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 200_000,
            curvature_hint: None,
        }
    }
}

/// Minimize `fg` (value and gradient) over the set represented by `project`,
/// starting from the feasible point `x0`.
pub(crate) fn minimize_projected<FG, P>(
    fg: FG,
    project: P,
    x0: Vector,
    opts: &PgdOptions,
) -> PgdOutcome
where
    FG: Fn(&[f64]) -> (f64, Vec<f64>),
    P: Fn(&[f64]) -> Vector,
{
    let n = x0.dim();
    let mut x = x0;
    let (mut fx, mut gx) = fg(&x);
    let mut curvature = opts.curvature_hint.unwrap_or(0.0).max(1e-8);
    let mut step = 1.0 / curvature;
    let mut history = vec![fx];

    let mut best_x = x.clone();
    let mut best_f = fx;
    let mut best_residual = f64::INFINITY;
    let mut since_improvement = 0usize;
    let mut polish_left: i32 = -1;
    let mut iterations = 0usize;

    for iter in 0..opts.max_iters {
        iterations = iter;
        // fixed-point displacement at step 1/L
        let probe: Vec<f64> = (0..n).map(|i| x[i] - gx[i] / curvature).collect();
        let z = project(&probe);
        let residual = norm_inf(&(0..n).map(|i| x[i] - z[i]).collect::<Vec<f64>>());
        if residual < best_residual {
            best_residual = residual;
            best_x = x.clone();
            best_f = fx;
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }

        if residual <= opts.tol && polish_left < 0 {
            // run a short polish so downstream consumers sit well inside tol
            polish_left = 30;
        }
        let stop = (polish_left == 0)
            || (polish_left > 0 && residual <= opts.tol * 0.02)
            || since_improvement > STALL_WINDOW;
        if stop {
            break;
        }
        if polish_left > 0 {
            polish_left -= 1;
        }

        // spectral trial point and feasible direction
        let trial: Vec<f64> = (0..n).map(|i| x[i] - step * gx[i]).collect();
        let xt = project(&trial);
        let d: Vec<f64> = (0..n).map(|i| xt[i] - x[i]).collect();
        let gd: f64 = d.iter().zip(gx.iter()).map(|(a, b)| a * b).sum();
        if norm_inf(&d) == 0.0 {
            break;
        }

        let f_ref = history.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut lambda = 1.0;
        let (f_new, g_new, x_new);
        loop {
            let cand: Vec<f64> = (0..n).map(|i| x[i] + lambda * d[i]).collect();
            let (fc, gc) = fg(&cand);
            if fc <= f_ref + ARMIJO_C * lambda * gd || lambda < 1e-13 {
                f_new = fc;
                g_new = gc;
                x_new = cand;
                break;
            }
            lambda *= 0.5;
        }

        // BB1 step from the accepted displacement
        let mut sy = 0.0;
        let mut ss = 0.0;
        for i in 0..n {
            let si = x_new[i] - x[i];
            let yi = g_new[i] - gx[i];
            sy += si * yi;
            ss += si * si;
        }
        if sy > 0.0 && ss > 0.0 {
            curvature = curvature.max(sy / ss);
            step = (ss / sy).clamp(STEP_MIN, STEP_MAX);
        } else {
            step = (step * 2.0).clamp(STEP_MIN, STEP_MAX);
        }

        x = Vector::from_raw(x_new);
        fx = f_new;
        gx = g_new;
        history.push(fx);
        if history.len() > HISTORY {
            history.remove(0);
        }
    }

    PgdOutcome {
        x: best_x,
        value: best_f,
        residual: best_residual,
        iterations,
        converged: best_residual <= opts.tol,
    }
}

//! Log-barrier path following with Newton inner steps.
//!
//! Minimizes a smooth convex objective over {x : A x <= d} (optionally
//! intersected with the nonnegative orthant) by following the central path of
//!
//! ```text
//! f(x) - (1/t) [ sum_i log(d_i - <a_i, x>) + sum_j log x_j ]
//! ```
//!
//! for a geometrically increasing t. The duality gap at the stage-t center is
//! (number of inequalities) / t, which bounds the objective suboptimality of
//! the returned point.

use crate::error::{Error, Result};
use crate::linalg::{cholesky_factor, dot, norm_inf, Matrix, SpdMatrix, Vector};

/// Objective with dense derivatives.
pub(crate) trait SmoothObjective {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], g: &mut [f64]);
    /// Write the dense Hessian (row-major n*n) into `h`, overwriting it.
    fn hessian(&self, x: &[f64], h: &mut [f64]);
}

pub(crate) struct LinearObjective<'a> {
    pub a: &'a [f64],
}

impl SmoothObjective for LinearObjective<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        dot(self.a, x)
    }
    fn gradient(&self, _x: &[f64], g: &mut [f64]) {
        g.copy_from_slice(self.a);
    }
    fn hessian(&self, _x: &[f64], h: &mut [f64]) {
        h.fill(0.0);
    }
}

/// `<a0, x> + alpha sqrt(x' Sigma x + delta2)`.
pub(crate) struct RobustObjective<'a> {
    pub a0: &'a [f64],
    pub sigma: &'a SpdMatrix,
    pub alpha: f64,
    pub delta2: f64,
}

impl RobustObjective<'_> {
    fn root(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let sx = self.sigma.mul_vec(x).expect("dims checked");
        let q = dot(x, &sx) + self.delta2;
        (q.max(self.delta2.max(1e-300)).sqrt(), sx)
    }
}

impl SmoothObjective for RobustObjective<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        let (r, _) = self.root(x);
        dot(self.a0, x) + self.alpha * r
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        let (r, sx) = self.root(x);
        for i in 0..x.len() {
            g[i] = self.a0[i] + self.alpha * sx[i] / r;
        }
    }
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        let n = x.len();
        let (r, sx) = self.root(x);
        let c1 = self.alpha / r;
        let c2 = self.alpha / (r * r * r);
        for i in 0..n {
            let row = self.sigma.row(i);
            for j in 0..n {
                h[i * n + j] = c1 * row[j] - c2 * sx[i] * sx[j];
            }
        }
    }
}

/// Equality-constrained Newton direction for minimizing a function on the
/// affine slice `<e, x> = const`: solves `H dx + nu e = -g` with
/// `<e, dx> = residual`, where the residual corrects any accumulated drift
/// off the slice. A diagonal ridge escalates if the factorization balks.
pub(crate) fn equality_newton_direction(
    n: usize,
    hess: &[f64],
    grad: &[f64],
    residual: f64,
) -> Result<Vec<f64>> {
    let trace: f64 = (0..n).map(|i| hess[i * n + i]).sum();
    let mut ridge = 0.0;
    loop {
        let mut h = hess.to_vec();
        if ridge > 0.0 {
            for i in 0..n {
                h[i * n + i] += ridge;
            }
        }
        match cholesky_factor(n, &h) {
            Ok(l) => {
                let solve = |rhs: &[f64]| -> Vec<f64> {
                    let y = l.solve_forward(rhs);
                    l.solve_backward(&y)
                };
                let hg = solve(grad);
                let he = solve(&vec![1.0; n]);
                let nu = (-hg.iter().sum::<f64>() - residual) / he.iter().sum::<f64>();
                return Ok((0..n).map(|i| -hg[i] - nu * he[i]).collect());
            }
            Err(_) => {
                ridge = if ridge == 0.0 {
                    1e-14 * trace.max(1.0)
                } else {
                    ridge * 100.0
                };
                if ridge > 1e-2 * trace.max(1.0) {
                    return Err(Error::NotPositiveDefinite {
                        index: 0,
                        pivot: ridge,
                    });
                }
            }
        }
    }
}

/// Follow the central path of `obj` over the unit simplex: equality
/// `<e, x> = 1` handled by the constrained Newton step, positivity by the
/// log barrier.
pub(crate) fn barrier_minimize_simplex(
    obj: &dyn SmoothObjective,
    x0: Vector,
    opts: &BarrierOptions,
) -> Result<BarrierOutcome> {
    let n = x0.dim();
    let mut x: Vec<f64> = x0.as_slice().to_vec();
    if x.iter().any(|&v| v <= 0.0) {
        return Err(Error::InfeasibleDomain);
    }
    let mut t = opts.t0;
    let mut newton_steps = 0usize;
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n * n];

    let phi = |x: &[f64], t: f64| -> f64 {
        let mut v = obj.value(x);
        let inv_t = 1.0 / t;
        for &xi in x {
            if xi <= 0.0 {
                return f64::INFINITY;
            }
            v -= inv_t * xi.ln();
        }
        v
    };

    loop {
        for _ in 0..opts.max_newton_per_stage {
            newton_steps += 1;
            let inv_t = 1.0 / t;
            obj.gradient(&x, &mut grad);
            obj.hessian(&x, &mut hess);
            for p in 0..n {
                grad[p] -= inv_t / x[p];
                hess[p * n + p] += inv_t / (x[p] * x[p]);
            }
            let drift = 1.0 - x.iter().sum::<f64>();
            let dx = equality_newton_direction(n, &hess, &grad, drift)?;
            let decrement = -dot(&grad, &dx);
            if decrement * 0.5 <= (0.01 * n as f64 / t).max(1e-13) {
                break;
            }
            let mut eta: f64 = 1.0;
            for p in 0..n {
                if dx[p] < 0.0 {
                    eta = eta.min(0.99 * x[p] / -dx[p]);
                }
            }
            let phi0 = phi(&x, t);
            let mut accepted = false;
            while eta > 1e-16 {
                let cand: Vec<f64> = (0..n).map(|i| x[i] + eta * dx[i]).collect();
                if phi(&cand, t) <= phi0 - 1e-4 * eta * decrement {
                    x = cand;
                    accepted = true;
                    break;
                }
                eta *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if n as f64 / t <= opts.tol_gap {
            break;
        }
        t *= opts.mu;
    }
    Ok(BarrierOutcome {
        x: Vector::from_raw(x),
        gap: n as f64 / t,
        newton_steps,
    })
}

pub(crate) struct BarrierOptions {
    pub t0: f64,
    pub mu: f64,
    /// Stop once (inequality count) / t falls at or below this gap.
    pub tol_gap: f64,
    pub max_newton_per_stage: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            t0: 1.0,
            mu: 20.0,
            tol_gap: 1e-9,
            max_newton_per_stage: 80,
        }
    }
}

pub(crate) struct BarrierOutcome {
    pub x: Vector,
    /// Final duality gap bound (inequalities / t).
    pub gap: f64,
    pub newton_steps: usize,
}

/// Follow the central path of `obj` over {x : a x <= d} (and x >= 0 when
/// `nonneg`), starting from the strictly feasible `x0`.
pub(crate) fn barrier_minimize(
    obj: &dyn SmoothObjective,
    a: &Matrix,
    d: &[f64],
    nonneg: bool,
    x0: Vector,
    opts: &BarrierOptions,
) -> Result<BarrierOutcome> {
    let n = x0.dim();
    let m = a.rows();
    let m_total = (m + if nonneg { n } else { 0 }) as f64;

    let slacks = |x: &[f64]| -> Option<Vec<f64>> {
        let mut s = Vec::with_capacity(m);
        for i in 0..m {
            let si = d[i] - dot(a.row(i), x);
            if si <= 0.0 {
                return None;
            }
            s.push(si);
        }
        if nonneg && x.iter().any(|&v| v <= 0.0) {
            return None;
        }
        Some(s)
    };

    let mut x: Vec<f64> = x0.as_slice().to_vec();
    let mut s = slacks(&x).ok_or(Error::InfeasibleDomain)?;
    let mut t = opts.t0;
    let mut newton_steps = 0usize;

    let phi = |x: &[f64], s: &[f64], t: f64| -> f64 {
        let mut v = obj.value(x);
        let inv_t = 1.0 / t;
        for &si in s {
            v -= inv_t * si.ln();
        }
        if nonneg {
            for &xi in x {
                v -= inv_t * xi.ln();
            }
        }
        v
    };

    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n * n];
    let mut obj_grad = vec![0.0; n];

    loop {
        // centering for the current t
        for _ in 0..opts.max_newton_per_stage {
            newton_steps += 1;
            let inv_t = 1.0 / t;
            obj.gradient(&x, &mut obj_grad);
            obj.hessian(&x, &mut hess);
            grad.copy_from_slice(&obj_grad);
            // barrier terms accumulate into the lower triangle only; the
            // factorization never reads above the diagonal
            for i in 0..m {
                let row = a.row(i);
                let w1 = inv_t / s[i];
                let w2 = inv_t / (s[i] * s[i]);
                for p in 0..n {
                    grad[p] += w1 * row[p];
                    let rp = w2 * row[p];
                    if rp != 0.0 {
                        for q in 0..=p {
                            hess[p * n + q] += rp * row[q];
                        }
                    }
                }
            }
            if nonneg {
                for p in 0..n {
                    grad[p] -= inv_t / x[p];
                    hess[p * n + p] += inv_t / (x[p] * x[p]);
                }
            }

            // Newton direction with escalating ridge if the factorization balks
            let mut ridge = 0.0;
            let trace: f64 = (0..n).map(|i| hess[i * n + i]).sum();
            let dx = loop {
                let mut hridge = hess.clone();
                if ridge > 0.0 {
                    for i in 0..n {
                        hridge[i * n + i] += ridge;
                    }
                }
                match cholesky_factor(n, &hridge) {
                    Ok(l) => {
                        let y = l.solve_forward(&grad);
                        let mut dx = l.solve_backward(&y);
                        for v in dx.iter_mut() {
                            *v = -*v;
                        }
                        break dx;
                    }
                    Err(_) => {
                        ridge = if ridge == 0.0 {
                            1e-14 * trace.max(1.0)
                        } else {
                            ridge * 100.0
                        };
                        if ridge > 1e-2 * trace.max(1.0) {
                            return Err(Error::MaxIterationsExceeded {
                                iterations: newton_steps,
                                residual: norm_inf(&grad),
                                best: x,
                            });
                        }
                    }
                }
            };

            let decrement = -dot(&grad, &dx);
            if decrement * 0.5 <= (0.01 * m_total / t).max(1e-13) {
                break;
            }

            // fraction to boundary, then backtrack on the barrier value
            let mut eta: f64 = 1.0;
            for i in 0..m {
                let delta = dot(a.row(i), &dx);
                if delta > 0.0 {
                    eta = eta.min(0.99 * s[i] / delta);
                }
            }
            if nonneg {
                for p in 0..n {
                    if dx[p] < 0.0 {
                        eta = eta.min(0.99 * x[p] / (-dx[p]));
                    }
                }
            }
            let phi0 = phi(&x, &s, t);
            let mut accepted = false;
            while eta > 1e-16 {
                let cand: Vec<f64> = (0..n).map(|i| x[i] + eta * dx[i]).collect();
                if let Some(sc) = slacks(&cand) {
                    if phi(&cand, &sc, t) <= phi0 - 1e-4 * eta * decrement {
                        x = cand;
                        s = sc;
                        accepted = true;
                        break;
                    }
                }
                eta *= 0.5;
            }
            if !accepted {
                break;
            }
        }

        if m_total / t <= opts.tol_gap || m_total == 0.0 {
            break;
        }
        t *= opts.mu;
    }

    Ok(BarrierOutcome {
        x: Vector::from_raw(x),
        gap: if m_total == 0.0 { 0.0 } else { m_total / t },
        newton_steps,
    })
}

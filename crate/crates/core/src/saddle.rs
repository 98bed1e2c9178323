//! Robust counterparts with multiple uncertain linear constraints (all
//! sharing one ellipsoidal set), solved two ways.
//!
//! The saddle route alternates a projected multiplier ascent with an exact
//! simplex-constrained minimization of
//!
//! ```text
//! <c0 + C'lambda, x> + alpha <lambda, e> <x, Sigma x>
//! ```
//!
//! Written as a literal argmax, the multiplier update is an unbounded linear
//! program whenever any constraint is violated, so it is realized as
//! `lambda <- max(0, lambda + step (Cx + alpha <x,Sigma x> e - b))` with a
//! geometrically decaying step. The direct route solves the norm-reformulated
//! program `min <c0,x>` s.t. `<c_i,x> + beta sqrt(x' Sigma x) <= b_i` on the
//! simplex by a log-barrier path with equality-constrained Newton steps; the
//! two parameterizations meet at `beta = alpha sqrt(x' Sigma x)`.

use crate::barrier::equality_newton_direction;
use crate::domains::{solve_linear_plus_quadratic_tol, DomainSpec};
use crate::error::{Error, Result};
use crate::frontier::FrontierPoint;
use crate::linalg::{check_dim, dot, Matrix, SpdMatrix, Vector};

/// Default alternating rounds for the saddle oracle.
pub const DEFAULT_SADDLE_ITERS: usize = 8000;

/// Default initial multiplier step.
pub const DEFAULT_STEP_LAMBDA: f64 = 0.1;

/// Geometric decay applied to the multiplier step each round.
const STEP_DECAY: f64 = 0.999;

/// Divergence guard on the multiplier norm.
const LAMBDA_GUARD: f64 = 1e8;

/// Residual target for the exact inner x-minimization.
const INNER_TOLERANCE: f64 = 1e-9;

/// One robust problem with m uncertain linear constraints on the simplex.
#[derive(Debug, Clone)]
pub struct RcwucInstance {
    pub c0: Vector,
    /// Nominal constraint rows, m x n.
    pub c_rows: Matrix,
    pub b: Vector,
    /// Shared uncertainty shape for every constraint.
    pub sigma: SpdMatrix,
}

impl RcwucInstance {
    /// Validates dimensions and checks that the beta = 0 problem is feasible.
    pub fn new(c0: Vector, c_rows: Matrix, b: Vector, sigma: SpdMatrix) -> Result<Self> {
        let n = c0.dim();
        check_dim(n, c_rows.cols())?;
        check_dim(c_rows.rows(), b.dim())?;
        check_dim(n, sigma.dim())?;
        let inst = Self {
            c0,
            c_rows,
            b,
            sigma,
        };
        // nonempty at beta = 0 is a load-time contract
        inst.strictly_feasible_point(0.0)?;
        Ok(inst)
    }

    pub fn dim(&self) -> usize {
        self.c0.dim()
    }

    pub fn count(&self) -> usize {
        self.c_rows.rows()
    }

    /// Constraint values of the quadratic-penalized form
    /// `<c_i, x> + alpha <x, Sigma x> - b_i`.
    fn penalized_constraints(&self, x: &[f64], alpha: f64) -> Vec<f64> {
        let q = self.sigma.quad_form(x).expect("dims checked");
        let cx = self.c_rows.mul_vec(x).expect("dims checked");
        (0..self.count())
            .map(|i| cx[i] + alpha * q - self.b[i])
            .collect()
    }

    /// Constraint values of the norm form
    /// `<c_i, x> + beta sqrt(x' Sigma x) - b_i`.
    fn norm_constraints(&self, x: &[f64], beta: f64) -> Vec<f64> {
        let q = self.sigma.quad_form(x).expect("dims checked");
        let cx = self.c_rows.mul_vec(x).expect("dims checked");
        (0..self.count())
            .map(|i| cx[i] + beta * q.sqrt() - self.b[i])
            .collect()
    }
}

/// Saddle iterate: simplex point, nonnegative multipliers, and a reported
/// (not asserted) optimality gap estimate.
#[derive(Debug, Clone)]
pub struct SaddleState {
    pub x: Vector,
    pub lambda: Vector,
    /// Worst penalized-constraint violation at the final iterate plus the
    /// objective excess over the best feasible incumbent seen.
    pub gap_estimate: f64,
}

/// Alternating saddle-point oracle at radius parameter alpha.
pub fn saddle_oracle(
    inst: &RcwucInstance,
    alpha: f64,
    iters: usize,
    step_lambda: f64,
) -> Result<SaddleState> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha must be nonnegative, got {alpha}"
        )));
    }
    if iters == 0 {
        return Err(Error::InvalidConfig("iters must be >= 1".into()));
    }
    if !(step_lambda.is_finite() && step_lambda > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "step_lambda must be positive, got {step_lambda}"
        )));
    }
    let n = inst.dim();
    let m = inst.count();
    let simplex = DomainSpec::simplex(n)?;
    let zero = Vector::zeros(n);

    let mut x = vec![0.0; n];
    let mut lambda = vec![0.0; m];
    let mut step = step_lambda;
    let mut best_feasible: Option<f64> = None;

    for _ in 0..iters {
        // multiplier ascent on the penalized constraints
        let viol = inst.penalized_constraints(&x, alpha);
        for i in 0..m {
            lambda[i] = (lambda[i] + step * viol[i]).max(0.0);
        }
        let lnorm = lambda.iter().fold(0.0f64, |mx, v| mx.max(v.abs()));
        if lnorm > LAMBDA_GUARD {
            return Err(Error::DivergenceDetected { norm: lnorm });
        }

        // exact x-minimization given the fresh multipliers
        let lsum: f64 = lambda.iter().sum();
        let ct_lambda = inst.c_rows.mul_transpose_vec(&lambda)?;
        let c_hat = Vector::from_raw(
            (0..n)
                .map(|i| inst.c0[i] + ct_lambda[i])
                .collect::<Vec<_>>(),
        );
        let weight = alpha * lsum;
        x = if weight > 0.0 {
            solve_linear_plus_quadratic_tol(
                &c_hat,
                weight,
                &inst.sigma,
                &zero,
                &simplex,
                INNER_TOLERANCE,
                400_000,
            )?
            .x
            .into_vec()
        } else {
            simplex.lp_minimize(&c_hat)?.into_vec()
        };

        let cons = inst.penalized_constraints(&x, alpha);
        if cons.iter().all(|&c| c <= 1e-10) {
            let obj = dot(inst.c0.as_slice(), &x);
            best_feasible = Some(best_feasible.map_or(obj, |b: f64| b.min(obj)));
        }
        step *= STEP_DECAY;
    }

    let cons = inst.penalized_constraints(&x, alpha);
    let violation = cons.iter().fold(0.0f64, |mx, &c| mx.max(c));
    let obj = dot(inst.c0.as_slice(), &x);
    let excess = best_feasible.map_or(0.0, |b| (obj - b).max(0.0));
    Ok(SaddleState {
        x: Vector::from_raw(x),
        lambda: Vector::from_raw(lambda),
        gap_estimate: violation.max(0.0) + excess,
    })
}

/// Monotone reparameterization between the penalized and norm forms:
/// `beta = alpha sqrt(x_SP(alpha)' Sigma x_SP(alpha))`.
pub fn map_alpha_to_beta(inst: &RcwucInstance, alpha: f64) -> Result<f64> {
    let state = saddle_oracle(inst, alpha, DEFAULT_SADDLE_ITERS, DEFAULT_STEP_LAMBDA)?;
    let q = inst.sigma.quad_form(state.x.as_slice())?;
    if q == 0.0 {
        return Err(Error::ZeroIterate);
    }
    Ok(alpha * q.sqrt())
}

// ---------------------------------------------------------------------------
// direct route: log-barrier Newton on the simplex with smooth constraints
// ---------------------------------------------------------------------------

struct ConstraintDerivatives {
    values: Vec<f64>,
    grads: Vec<Vec<f64>>,
    /// Shared curvature of the sqrt term (identical for every constraint).
    sqrt_hessian: Vec<f64>,
}

fn constraint_derivatives(inst: &RcwucInstance, x: &[f64], beta: f64) -> ConstraintDerivatives {
    let n = x.len();
    let m = inst.count();
    let sx = inst.sigma.mul_vec(x).expect("dims checked");
    let q = dot(x, &sx).max(1e-300);
    let r = q.sqrt();
    let values = {
        let cx = inst.c_rows.mul_vec(x).expect("dims checked");
        (0..m)
            .map(|i| cx[i] + beta * r - inst.b[i])
            .collect::<Vec<_>>()
    };
    let grads = (0..m)
        .map(|i| {
            (0..n)
                .map(|j| inst.c_rows.get(i, j) + beta * sx[j] / r)
                .collect()
        })
        .collect();
    let mut sqrt_hessian = vec![0.0; n * n];
    let c1 = beta / r;
    let c2 = beta / (r * r * r);
    for i in 0..n {
        let row = inst.sigma.row(i);
        for j in 0..n {
            sqrt_hessian[i * n + j] = c1 * row[j] - c2 * sx[i] * sx[j];
        }
    }
    ConstraintDerivatives {
        values,
        grads,
        sqrt_hessian,
    }
}

impl RcwucInstance {
    /// A strictly feasible simplex point for the beta-norm constraints, via a
    /// phase-1 slack minimization when the uniform point does not qualify.
    fn strictly_feasible_point(&self, beta: f64) -> Result<Vector> {
        let n = self.dim();
        let uniform = vec![1.0 / n as f64; n];
        let margin = 1e-10;
        if self
            .norm_constraints(&uniform, beta)
            .iter()
            .all(|&g| g < -margin)
        {
            return Ok(Vector::from_raw(uniform));
        }

        // phase 1: min s subject to g_i(x) <= s on the simplex
        let m = self.count();
        let mut x = uniform;
        let mut s = self
            .norm_constraints(&x, beta)
            .iter()
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            + 1.0;
        let mut t = 1.0;
        for _stage in 0..40 {
            for _ in 0..60 {
                let der = constraint_derivatives(self, &x, beta);
                let inv_t = 1.0 / t;
                // phi = s - (1/t) [sum log(s - g_i) + sum log x_j]
                let mut grad_x = vec![0.0; n];
                let mut grad_s = 1.0;
                let mut hess = vec![0.0; n * n];
                let mut hess_xs = vec![0.0; n];
                let mut hess_ss = 0.0;
                for i in 0..m {
                    let gap = s - der.values[i];
                    let w1 = inv_t / gap;
                    let w2 = inv_t / (gap * gap);
                    for p in 0..n {
                        grad_x[p] += w1 * der.grads[i][p];
                        for q in 0..n {
                            hess[p * n + q] += w2 * der.grads[i][p] * der.grads[i][q]
                                + w1 * der.sqrt_hessian[p * n + q];
                        }
                        hess_xs[p] -= w2 * der.grads[i][p];
                    }
                    grad_s -= w1;
                    hess_ss += w2;
                }
                for p in 0..n {
                    grad_x[p] -= inv_t / x[p];
                    hess[p * n + p] += inv_t / (x[p] * x[p]);
                }

                // KKT on (x, s) with equality <e, x> = 1 (no s component):
                // eliminate s first: ds = -(grad_s + hess_xs' dx) / hess_ss
                // fold into the x block.
                let mut hx = hess.clone();
                let mut gx = grad_x.clone();
                if hess_ss > 0.0 {
                    for p in 0..n {
                        for q in 0..n {
                            hx[p * n + q] -= hess_xs[p] * hess_xs[q] / hess_ss;
                        }
                        gx[p] -= hess_xs[p] * grad_s / hess_ss;
                    }
                }
                let drift = 1.0 - x.iter().sum::<f64>();
                let dx = equality_newton_direction(n, &hx, &gx, drift)?;
                let ds = -(grad_s + dot(&hess_xs, &dx)) / hess_ss.max(1e-300);
                let decrement = -(dot(&grad_x, &dx) + grad_s * ds);
                if decrement.abs() * 0.5 <= (0.01 * (m + n) as f64 / t).max(1e-13) {
                    break;
                }

                let mut eta: f64 = 1.0;
                for p in 0..n {
                    if dx[p] < 0.0 {
                        eta = eta.min(0.99 * x[p] / -dx[p]);
                    }
                }
                // keep s - g_i positive along the step by backtracking
                let phi = |x: &[f64], s: f64| -> f64 {
                    let vals = self.norm_constraints(x, beta);
                    let mut v = s;
                    for &g in &vals {
                        let gap = s - g;
                        if gap <= 0.0 {
                            return f64::INFINITY;
                        }
                        v -= inv_t * gap.ln();
                    }
                    for &xi in x {
                        if xi <= 0.0 {
                            return f64::INFINITY;
                        }
                        v -= inv_t * xi.ln();
                    }
                    v
                };
                let phi0 = phi(&x, s);
                let mut accepted = false;
                while eta > 1e-16 {
                    let xc: Vec<f64> = (0..n).map(|i| x[i] + eta * dx[i]).collect();
                    let sc = s + eta * ds;
                    if phi(&xc, sc) <= phi0 - 1e-4 * eta * decrement.abs() {
                        x = xc;
                        s = sc;
                        accepted = true;
                        break;
                    }
                    eta *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            if s < -1e-7 {
                return Ok(Vector::from_raw(x));
            }
            if (m + n) as f64 / t <= 1e-10 {
                break;
            }
            t *= 20.0;
        }
        if s < -1e-9 {
            Ok(Vector::from_raw(x))
        } else {
            Err(Error::InfeasibleAtBeta { beta })
        }
    }
}

/// Direct solve of the norm-reformulated robust program at radius beta:
/// `min <c0, x>` s.t. `<c_i, x> + beta sqrt(x' Sigma x) <= b_i`, x on the
/// simplex. Log-barrier path with Newton steps on the simplex equality.
pub fn solve_rcwuc_direct(inst: &RcwucInstance, beta: f64) -> Result<FrontierPoint> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "beta must be nonnegative, got {beta}"
        )));
    }
    let n = inst.dim();
    let m = inst.count();
    let mut x = inst.strictly_feasible_point(beta)?.into_vec();
    let m_total = (m + n) as f64;
    let mut t: f64 = 1.0;

    loop {
        for _ in 0..60 {
            let der = constraint_derivatives(inst, &x, beta);
            let inv_t = 1.0 / t;
            let mut grad: Vec<f64> = inst.c0.as_slice().to_vec();
            let mut hess = vec![0.0; n * n];
            for i in 0..m {
                let neg = -der.values[i];
                let w1 = inv_t / neg;
                let w2 = inv_t / (neg * neg);
                for p in 0..n {
                    grad[p] += w1 * der.grads[i][p];
                    for q in 0..n {
                        hess[p * n + q] +=
                            w2 * der.grads[i][p] * der.grads[i][q] + w1 * der.sqrt_hessian[p * n + q];
                    }
                }
            }
            for p in 0..n {
                grad[p] -= inv_t / x[p];
                hess[p * n + p] += inv_t / (x[p] * x[p]);
            }
            let drift = 1.0 - x.iter().sum::<f64>();
            let dx = equality_newton_direction(n, &hess, &grad, drift)?;
            let decrement = -dot(&grad, &dx);
            if decrement * 0.5 <= (0.01 * m_total / t).max(1e-13) {
                break;
            }
            let mut eta: f64 = 1.0;
            for p in 0..n {
                if dx[p] < 0.0 {
                    eta = eta.min(0.99 * x[p] / -dx[p]);
                }
            }
            let phi = |x: &[f64]| -> f64 {
                let vals = inst.norm_constraints(x, beta);
                let mut v = dot(inst.c0.as_slice(), x);
                for &g in &vals {
                    if g >= 0.0 {
                        return f64::INFINITY;
                    }
                    v -= inv_t * (-g).ln();
                }
                for &xi in x {
                    if xi <= 0.0 {
                        return f64::INFINITY;
                    }
                    v -= inv_t * xi.ln();
                }
                v
            };
            let phi0 = phi(&x);
            let mut accepted = false;
            while eta > 1e-16 {
                let xc: Vec<f64> = (0..n).map(|i| x[i] + eta * dx[i]).collect();
                if phi(&xc) <= phi0 - 1e-4 * eta * decrement {
                    x = xc;
                    accepted = true;
                    break;
                }
                eta *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if m_total / t <= 1e-9 {
            break;
        }
        t *= 20.0;
    }

    FrontierPoint::evaluated(beta, None, Vector::from_raw(x), &inst.c0, &inst.sigma, beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_instance() -> RcwucInstance {
        let c0 = Vector::new(vec![-1.0, 0.2, 0.4]).unwrap();
        let c_rows = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.2, 0.8, 0.1]]).unwrap();
        let b = Vector::new(vec![0.6, 0.7]).unwrap();
        let sigma = SpdMatrix::diagonal(&[1.0, 0.8, 1.3]).unwrap();
        RcwucInstance::new(c0, c_rows, b, sigma).unwrap()
    }

    #[test]
    fn inactive_constraints_reduce_to_the_nominal_lp() {
        let c0 = Vector::new(vec![-1.0, 0.2]).unwrap();
        let c_rows = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let b = Vector::new(vec![1e9]).unwrap();
        let sigma = SpdMatrix::identity(2);
        let inst = RcwucInstance::new(c0, c_rows, b, sigma).unwrap();
        let state = saddle_oracle(&inst, 1.0, 500, 0.1).unwrap();
        assert!(state.lambda.norm_inf() < 1e-12);
        assert_eq!(state.x.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn alpha_zero_with_slack_constraint_matches_lp() {
        // constraint x1 + x2 <= 1.5 never binds on the simplex
        let c0 = Vector::new(vec![-1.0, 0.0]).unwrap();
        let c_rows = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let b = Vector::new(vec![1.5]).unwrap();
        let sigma = SpdMatrix::identity(2);
        let inst = RcwucInstance::new(c0, c_rows, b, sigma).unwrap();
        let state = saddle_oracle(&inst, 0.0, 2000, 0.1).unwrap();
        assert_eq!(state.x.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn direct_solve_at_zero_beta_is_the_constrained_lp() {
        let inst = small_instance();
        let p = solve_rcwuc_direct(&inst, 0.0).unwrap();
        // binding first constraint: x1 <= 0.6, rest goes to the second-best
        // coordinate (index 1 has cost 0.2 < 0.4)
        assert!((p.x[0] - 0.6).abs() < 1e-6, "{:?}", p.x.as_slice());
        assert!((p.x[1] - 0.4).abs() < 1e-5, "{:?}", p.x.as_slice());
    }

    #[test]
    fn infeasible_beta_is_reported() {
        let inst = small_instance();
        let err = solve_rcwuc_direct(&inst, 50.0).unwrap_err();
        assert!(matches!(err, Error::InfeasibleAtBeta { .. }), "{err}");
    }

    #[test]
    fn map_alpha_to_beta_zero_and_plugin() {
        let inst = small_instance();
        assert_eq!(map_alpha_to_beta(&inst, 0.0).unwrap(), 0.0);
        // plug-in identity: x with x' Sigma x = 0.25 and alpha = 2 gives beta = 1
        let q: f64 = 0.25;
        assert!((2.0 * q.sqrt() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn infeasible_instance_rejected_at_load() {
        let c0 = Vector::new(vec![0.0, 0.0]).unwrap();
        let c_rows = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let b = Vector::new(vec![0.5]).unwrap(); // sum x = 1 > 0.5 always
        let sigma = SpdMatrix::identity(2);
        let err = RcwucInstance::new(c0, c_rows, b, sigma).unwrap_err();
        assert!(matches!(err, Error::InfeasibleAtBeta { .. }), "{err}");
    }

    #[test]
    fn saddle_matches_direct_on_small_instance() {
        let inst = small_instance();
        let alpha = 0.8;
        let state = saddle_oracle(&inst, alpha, DEFAULT_SADDLE_ITERS, DEFAULT_STEP_LAMBDA).unwrap();
        let beta = alpha * inst.sigma.quad_form(state.x.as_slice()).unwrap().sqrt();
        let direct = solve_rcwuc_direct(&inst, beta).unwrap();
        for i in 0..inst.dim() {
            assert!(
                (state.x[i] - direct.x[i]).abs() < 1e-4,
                "saddle {:?} direct {:?}",
                state.x.as_slice(),
                direct.x.as_slice()
            );
        }
        // complementarity at convergence
        let slacks = inst.penalized_constraints(state.x.as_slice(), alpha);
        for (l, s) in state.lambda.iter().zip(&slacks) {
            assert!(l * s.abs() <= 1e-5, "lambda {l} slack {s}");
        }
    }
}

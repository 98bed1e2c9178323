//! Proximal point frontier generation.
//!
//! The trajectory starts at the minimum-variance point (the infinite-radius
//! robust solution) and repeatedly solves
//!
//! ```text
//! x_{k+1} = argmin over D of <a0, x> + lambda_k <x - x_k, Sigma (x - x_k)>
//! ```
//!
//! Each iterate coincides with the central-path point at barrier weight
//! `omega_k = 1 / sum_{j<k} (1/lambda_j)`, and on simplex domains with
//! `Sigma^{-1} e >= 0` it is exactly the Pareto-efficient robust solution at
//! radius `alpha(omega_k) = 2 omega_k sqrt(x_k' Sigma x_k)`. One
//! minimum-variance solve plus one prox solve per point replaces one full
//! robust solve per point.

use crate::domains::{
    min_quadratic_over_domain, project_domain, solve_linear_plus_quadratic_tol, DomainSpec,
    SUBPROBLEM_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::frontier::{FrontierPoint, Provenance};
use crate::linalg::{check_dim, SpdMatrix, Vector};

/// Step-size schedule for the proximal updates.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaSchedule {
    /// lambda_k = value for all k. Always satisfies the divergence condition
    /// sum 1/lambda_k = infinity.
    Constant(f64),
    /// Explicit finite list; accepted with a recorded warning since a finite
    /// list cannot certify the divergence condition.
    Explicit(Vec<f64>),
}

impl LambdaSchedule {
    fn get(&self, k: usize) -> Option<f64> {
        match self {
            LambdaSchedule::Constant(v) => Some(*v),
            LambdaSchedule::Explicit(vs) => vs.get(k).copied(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            LambdaSchedule::Constant(v) => {
                if !(v.is_finite() && *v > 0.0) {
                    return Err(Error::NonPositiveLambda {
                        index: 0,
                        value: *v,
                    });
                }
            }
            LambdaSchedule::Explicit(vs) => {
                if vs.is_empty() {
                    return Err(Error::InvalidConfig("lambda list is empty".into()));
                }
                for (i, v) in vs.iter().enumerate() {
                    if !(v.is_finite() && *v > 0.0) {
                        return Err(Error::NonPositiveLambda {
                            index: i,
                            value: *v,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// True when the schedule cannot certify `sum 1/lambda_k = infinity`.
    pub fn divergence_warning(&self) -> bool {
        matches!(self, LambdaSchedule::Explicit(_))
    }
}

/// Trajectory generation parameters.
#[derive(Debug, Clone)]
pub struct PpmConfig {
    pub lambdas: LambdaSchedule,
    pub max_steps: usize,
    pub subproblem_tolerance: f64,
    /// Stop once omega_k drops below this weight.
    pub omega_min: f64,
}

impl Default for PpmConfig {
    fn default() -> Self {
        Self {
            lambdas: LambdaSchedule::Constant(1.0),
            max_steps: 1000,
            subproblem_tolerance: SUBPROBLEM_TOLERANCE,
            omega_min: 1e-6,
        }
    }
}

impl PpmConfig {
    pub fn validate(&self) -> Result<()> {
        self.lambdas.validate()?;
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be >= 1".into()));
        }
        if !(self.subproblem_tolerance.is_finite() && self.subproblem_tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "subproblem tolerance must be positive, got {}",
                self.subproblem_tolerance
            )));
        }
        if !(self.omega_min.is_finite() && self.omega_min > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "omega_min must be positive, got {}",
                self.omega_min
            )));
        }
        Ok(())
    }
}

/// A proximal point trajectory with per-iterate frontier annotations.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// x_0, the most-robust starting point.
    pub start: Vector,
    /// Iterates k = 1, 2, ... with omega_k, alpha(omega_k), E and R.
    pub points: Vec<FrontierPoint>,
    pub config: PpmConfig,
    pub provenance: Provenance,
    /// Set when the schedule was an explicit finite list.
    pub schedule_warning: bool,
    /// Number of prox subproblem solves performed (one per point).
    pub prox_solves: usize,
    /// Number of most-robust start solves performed (always one).
    pub start_solves: usize,
    /// Radius every point's robustness was evaluated at.
    pub eval_radius: f64,
}

/// One proximal step: minimize `<a0,x> + lambda_k <x - x_k, Sigma (x - x_k)>`.
pub fn ppm_step(
    x_k: &Vector,
    lambda_k: f64,
    a0: &Vector,
    sigma: &SpdMatrix,
    domain: &DomainSpec,
) -> Result<Vector> {
    ppm_step_tol(x_k, lambda_k, a0, sigma, domain, SUBPROBLEM_TOLERANCE)
}

pub fn ppm_step_tol(
    x_k: &Vector,
    lambda_k: f64,
    a0: &Vector,
    sigma: &SpdMatrix,
    domain: &DomainSpec,
    tol: f64,
) -> Result<Vector> {
    if !(lambda_k.is_finite() && lambda_k > 0.0) {
        return Err(Error::NonPositiveLambda {
            index: 0,
            value: lambda_k,
        });
    }
    let sol = solve_linear_plus_quadratic_tol(a0, lambda_k, sigma, x_k, domain, tol, 400_000)?;
    Ok(sol.x)
}

/// The most-robust start x_R: the minimum-variance point of the domain (the
/// infinite-radius limit of the frontier).
pub fn most_robust_start(sigma: &SpdMatrix, domain: &DomainSpec) -> Result<Vector> {
    Ok(min_quadratic_over_domain(sigma, domain)?.x)
}

/// Barrier weights `omega_k = (sum_{j=0}^{k-1} 1/lambda_j)^{-1}`, k = 1..len.
pub fn omega_schedule(lambdas: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(lambdas.len());
    let mut inv_sum = 0.0;
    for (i, &l) in lambdas.iter().enumerate() {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::NonPositiveLambda { index: i, value: l });
        }
        inv_sum += 1.0 / l;
        out.push(1.0 / inv_sum);
    }
    Ok(out)
}

/// Radius at which the sqrt-scalarized problem shares the barrier-weighted
/// problem's minimizer: `alpha = 2 omega sqrt(x' Sigma x)`. At this radius
/// the gradients `alpha Sigma x / sqrt(x' Sigma x)` and `2 omega Sigma x`
/// coincide, so the two stationarity systems match.
pub fn alpha_of_omega(x_omega: &Vector, omega: f64, sigma: &SpdMatrix) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "omega must be positive, got {omega}"
        )));
    }
    let q = sigma.quad_form(x_omega.as_slice())?;
    if q == 0.0 {
        return Err(Error::ZeroIterate);
    }
    Ok(2.0 * omega * q.sqrt())
}

/// Run the full trajectory: solve the most-robust start once, then one prox
/// step per point until `max_steps` or `omega_k < omega_min`.
pub fn run_ppm_trajectory(
    a0: &Vector,
    sigma: &SpdMatrix,
    domain: &DomainSpec,
    config: &PpmConfig,
    alpha_eval: f64,
) -> Result<Trajectory> {
    config.validate()?;
    let n = domain.dim();
    check_dim(n, a0.dim())?;
    check_dim(n, sigma.dim())?;

    let start = most_robust_start(sigma, domain)?;
    let mut x = start.clone();
    let mut inv_sum = 0.0;
    let mut points = Vec::new();
    let mut prox_solves = 0usize;

    for k in 0..config.max_steps {
        let Some(lambda_k) = config.lambdas.get(k) else {
            break; // explicit schedule exhausted
        };
        let omega_next = 1.0 / (inv_sum + 1.0 / lambda_k);
        if omega_next < config.omega_min {
            break;
        }
        x = ppm_step_tol(&x, lambda_k, a0, sigma, domain, config.subproblem_tolerance)?;
        prox_solves += 1;
        inv_sum += 1.0 / lambda_k;
        let omega_k = 1.0 / inv_sum;
        let alpha_k = alpha_of_omega(&x, omega_k, sigma)?;
        points.push(FrontierPoint::evaluated(
            alpha_k,
            Some(omega_k),
            x.clone(),
            a0,
            sigma,
            alpha_eval,
        )?);
    }

    Ok(Trajectory {
        start,
        points,
        config: config.clone(),
        provenance: Provenance::Ppm,
        schedule_warning: config.lambdas.divergence_warning(),
        prox_solves,
        start_solves: 1,
        eval_radius: alpha_eval,
    })
}

impl Trajectory {
    /// Re-annotate every point's efficiency and robustness at a different
    /// evaluation radius (the iterates themselves are untouched).
    pub fn reevaluated(mut self, a0: &Vector, sigma: &SpdMatrix, alpha_eval: f64) -> Result<Self> {
        for p in &mut self.points {
            *p = FrontierPoint::evaluated(p.alpha, p.omega, p.x.clone(), a0, sigma, alpha_eval)?;
        }
        self.eval_radius = alpha_eval;
        Ok(self)
    }

    /// Largest annotated radius (the first point's, since omega decreases).
    pub fn max_alpha(&self) -> Option<f64> {
        self.points
            .iter()
            .map(|p| p.alpha)
            .fold(None, |m, a| Some(m.map_or(a, |v: f64| v.max(a))))
    }
}

/// Central-path point at barrier weight omega anchored at x0:
/// `argmin <a0,x> + omega <x - x0, Sigma (x - x0)>`.
pub fn central_path_point(
    omega: f64,
    x0: &Vector,
    a0: &Vector,
    sigma: &SpdMatrix,
    domain: &DomainSpec,
) -> Result<Vector> {
    central_path_point_tol(omega, x0, a0, sigma, domain, SUBPROBLEM_TOLERANCE)
}

pub fn central_path_point_tol(
    omega: f64,
    x0: &Vector,
    a0: &Vector,
    sigma: &SpdMatrix,
    domain: &DomainSpec,
    tol: f64,
) -> Result<Vector> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "omega must be positive, got {omega}"
        )));
    }
    let sol = solve_linear_plus_quadratic_tol(a0, omega, sigma, x0, domain, tol, 400_000)?;
    Ok(sol.x)
}

/// Projected extra-gradient iterates for a smooth convex objective given by a
/// value-and-gradient oracle: probe the gradient at the projected half step,
/// then step from the current point with that lookahead gradient.
pub fn extragradient_trajectory<F>(
    oracle: F,
    domain: &DomainSpec,
    start: &Vector,
    step: f64,
    iters: usize,
) -> Result<Vec<Vector>>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "step must be positive, got {step}"
        )));
    }
    let mut x = project_domain(start, domain)?;
    let mut out = Vec::with_capacity(iters);
    for iter in 0..iters {
        let (_, g) = oracle(x.as_slice());
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient { iteration: iter });
        }
        let half = x.add_scaled(-step, &Vector::from_raw(g))?;
        let x_half = project_domain(&half, domain)?;
        let (_, g_half) = oracle(x_half.as_slice());
        if g_half.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient { iteration: iter });
        }
        let full = x.add_scaled(-step, &Vector::from_raw(g_half))?;
        x = project_domain(&full, domain)?;
        out.push(x.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_schedule_harmonic_for_unit_lambdas() {
        let omegas = omega_schedule(&[1.0; 5]).unwrap();
        for (k, w) in omegas.iter().enumerate() {
            assert!((w - 1.0 / (k + 1) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn omega_schedule_mixed_lambdas() {
        let omegas = omega_schedule(&[1.0, 2.0]).unwrap();
        assert!((omegas[0] - 1.0).abs() < 1e-15);
        assert!((omegas[1] - 2.0 / 3.0).abs() < 1e-15);

        let omegas = omega_schedule(&[2.0, 2.0, 2.0]).unwrap();
        assert!((omegas[0] - 2.0).abs() < 1e-15);
        assert!((omegas[1] - 1.0).abs() < 1e-15);
        assert!((omegas[2] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn omega_schedule_rejects_nonpositive_lambda() {
        let err = omega_schedule(&[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveLambda { index: 1, .. }));
    }

    #[test]
    fn alpha_of_omega_examples() {
        let sigma = SpdMatrix::identity(2);
        let x = Vector::from_raw(vec![0.5, 0.5]);
        let a = alpha_of_omega(&x, 1.0, &sigma).unwrap();
        assert!((a - std::f64::consts::SQRT_2).abs() < 1e-15);
        // omega -> 0 drives alpha -> 0
        let a = alpha_of_omega(&x, 1e-9, &sigma).unwrap();
        assert!(a < 1e-8);
    }

    #[test]
    fn alpha_of_omega_rejects_zero_iterate() {
        let sigma = SpdMatrix::identity(2);
        let err = alpha_of_omega(&Vector::zeros(2), 1.0, &sigma).unwrap_err();
        assert!(matches!(err, Error::ZeroIterate));
    }

    #[test]
    fn ppm_step_with_zero_cost_stays_put() {
        let sigma = SpdMatrix::identity(2);
        let d = DomainSpec::simplex(2).unwrap();
        let x = Vector::from_raw(vec![0.3, 0.7]);
        let y = ppm_step(&x, 1.0, &Vector::zeros(2), &sigma, &d).unwrap();
        assert!((y[0] - 0.3).abs() < 1e-9);
        assert!((y[1] - 0.7).abs() < 1e-9);
    }

    #[test]
    fn ppm_step_with_dominant_penalty_stays_put() {
        let sigma = SpdMatrix::identity(2);
        let d = DomainSpec::simplex(2).unwrap();
        let x = Vector::from_raw(vec![0.3, 0.7]);
        let a0 = Vector::from_raw(vec![-1.0, 0.2]);
        let y = ppm_step(&x, 1e12, &a0, &sigma, &d).unwrap();
        assert!((y[0] - 0.3).abs() < 1e-6);
        assert!((y[1] - 0.7).abs() < 1e-6);
    }

    #[test]
    fn most_robust_start_matches_closed_form() {
        let sigma = SpdMatrix::identity(3);
        let d = DomainSpec::simplex(3).unwrap();
        let x = most_robust_start(&sigma, &d).unwrap();
        for v in x.iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-14);
        }
        let sigma = SpdMatrix::diagonal(&[1.0, 2.0]).unwrap();
        let d = DomainSpec::simplex(2).unwrap();
        let x = most_robust_start(&sigma, &d).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((x[1] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn trajectory_converges_to_nominal_solution() {
        let sigma = SpdMatrix::diagonal(&[1.0, 0.7]).unwrap();
        let a0 = Vector::from_raw(vec![-1.0, 0.5]);
        let d = DomainSpec::simplex(2).unwrap();
        let cfg = PpmConfig {
            lambdas: LambdaSchedule::Constant(1.0),
            max_steps: 10_000,
            subproblem_tolerance: 1e-10,
            omega_min: 1e-7,
        };
        let traj = run_ppm_trajectory(&a0, &sigma, &d, &cfg, 1.0).unwrap();
        let last = traj.points.last().unwrap();
        // nominal LP optimum is e_1 with cost -1
        assert!(
            (last.nominal_cost - (-1.0)).abs() < 1e-4,
            "nominal cost {}",
            last.nominal_cost
        );
        assert_eq!(traj.start_solves, 1);
        assert_eq!(traj.prox_solves, traj.points.len());
    }

    #[test]
    fn trajectory_omegas_recompute_from_lambdas() {
        let sigma = SpdMatrix::diagonal(&[1.0, 1.5, 0.8]).unwrap();
        let a0 = Vector::from_raw(vec![-0.5, 0.1, 0.3]);
        let d = DomainSpec::simplex(3).unwrap();
        let cfg = PpmConfig {
            lambdas: LambdaSchedule::Explicit(vec![1.0, 2.0, 4.0, 8.0]),
            max_steps: 50,
            subproblem_tolerance: 1e-10,
            omega_min: 1e-12,
        };
        let traj = run_ppm_trajectory(&a0, &sigma, &d, &cfg, 1.0).unwrap();
        assert!(traj.schedule_warning);
        assert_eq!(traj.points.len(), 4);
        let omegas = omega_schedule(&[1.0, 2.0, 4.0, 8.0]).unwrap();
        for (p, w) in traj.points.iter().zip(&omegas) {
            let stored = p.omega.unwrap();
            assert!(
                (stored - w).abs() <= 1e-14 * w.abs(),
                "omega drift: {stored} vs {w}"
            );
        }
        // omegas strictly decreasing
        for pair in traj.points.windows(2) {
            assert!(pair[1].omega.unwrap() < pair[0].omega.unwrap());
        }
    }

    use crate::linalg::norm_inf;

    #[test]
    fn first_step_with_huge_lambda_stays_at_start() {
        let sigma = SpdMatrix::diagonal(&[1.0, 2.0]).unwrap();
        let a0 = Vector::from_raw(vec![-1.0, 0.3]);
        let d = DomainSpec::simplex(2).unwrap();
        let cfg = PpmConfig {
            lambdas: LambdaSchedule::Explicit(vec![1e12]),
            max_steps: 1,
            subproblem_tolerance: 1e-10,
            omega_min: 1e-16,
        };
        let traj = run_ppm_trajectory(&a0, &sigma, &d, &cfg, 1.0).unwrap();
        let p = &traj.points[0];
        assert!(norm_inf(
            &p.x
                .iter()
                .zip(traj.start.iter())
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>()
        ) < 1e-6);
    }

    #[test]
    fn central_path_extremes() {
        let sigma = SpdMatrix::diagonal(&[1.0, 2.0]).unwrap();
        let a0 = Vector::from_raw(vec![-1.0, 0.3]);
        let d = DomainSpec::simplex(2).unwrap();
        let x0 = most_robust_start(&sigma, &d).unwrap();
        // huge weight pins to the anchor
        let x = central_path_point(1e12, &x0, &a0, &sigma, &d).unwrap();
        assert!((x[0] - x0[0]).abs() < 1e-6);
        // vanishing weight reaches the nominal LP solution
        let x = central_path_point(1e-12, &x0, &a0, &sigma, &d).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-4, "{:?}", x.as_slice());
    }

    #[test]
    fn extragradient_constant_under_zero_gradient() {
        let d = DomainSpec::simplex(2).unwrap();
        let start = Vector::from_raw(vec![0.5, 0.5]);
        let traj =
            extragradient_trajectory(|_| (0.0, vec![0.0, 0.0]), &d, &start, 0.1, 5).unwrap();
        for p in traj {
            assert_eq!(p.as_slice(), &[0.5, 0.5]);
        }
    }

    #[test]
    fn extragradient_rejects_non_finite_gradient() {
        let d = DomainSpec::simplex(2).unwrap();
        let start = Vector::from_raw(vec![0.5, 0.5]);
        let err = extragradient_trajectory(|_| (0.0, vec![f64::NAN, 0.0]), &d, &start, 0.1, 3)
            .unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { .. }));
    }
}

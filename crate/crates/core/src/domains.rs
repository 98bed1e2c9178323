//! Feasible regions and constrained subproblem solvers.
//!
//! Four region shapes cover everything the frontier machinery needs: the unit
//! simplex, the scaled simplex {x >= 0, <e,x> <= cap}, a box with an aggregate
//! cash band (weights plus cash sum to one), and a nonnegative polyhedron
//! {x >= 0, Ax <= d}. Simplex-family projections are exact sort/threshold
//! computations; the box-with-band projection reduces to a one-dimensional
//! monotone root find; polyhedron projections run Dykstra's alternating
//! scheme over the orthant and the halfspaces.

use crate::barrier::{self, LinearObjective};
use crate::error::{Error, Result};
use crate::linalg::{check_dim, dot, norm_inf, Matrix, SpdMatrix, Vector};
use crate::pgd::{minimize_projected, PgdOptions};

/// Feasibility slack used by `contains` checks.
pub const FEAS_TOLERANCE: f64 = 1e-9;

/// Default residual target for constrained subproblem solves.
pub const SUBPROBLEM_TOLERANCE: f64 = 1e-10;

const DYKSTRA_MAX_CYCLES: usize = 10_000;

/// A feasible region.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    /// {x >= 0, <e,x> = 1}
    Simplex { dim: usize },
    /// {x >= 0, <e,x> <= cap}
    ScaledSimplex { dim: usize, cap: f64 },
    /// {lower <= x <= upper, <e,x> + c = 1, cash_lower <= c <= cash_upper}
    BoxSimplex {
        lower: Vector,
        upper: Vector,
        cash_lower: f64,
        cash_upper: f64,
    },
    /// {x >= 0, A x <= d} with nonnegative A and positive d (contains 0)
    Polyhedron { a: Matrix, d: Vector },
}

impl DomainSpec {
    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("simplex dimension must be >= 1".into()));
        }
        Ok(DomainSpec::Simplex { dim })
    }

    pub fn scaled_simplex(dim: usize, cap: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("simplex dimension must be >= 1".into()));
        }
        if !(cap.is_finite() && cap > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "scaled simplex cap must be positive, got {cap}"
            )));
        }
        Ok(DomainSpec::ScaledSimplex { dim, cap })
    }

    pub fn box_simplex(
        lower: Vector,
        upper: Vector,
        cash_lower: f64,
        cash_upper: f64,
    ) -> Result<Self> {
        check_dim(lower.dim(), upper.dim())?;
        if lower.dim() == 0 {
            return Err(Error::InvalidConfig("box dimension must be >= 1".into()));
        }
        if cash_lower > cash_upper {
            return Err(Error::InvalidConfig(format!(
                "cash band is empty: [{cash_lower}, {cash_upper}]"
            )));
        }
        for i in 0..lower.dim() {
            if lower[i] > upper[i] {
                return Err(Error::InvalidConfig(format!(
                    "box bound {i} is empty: [{}, {}]",
                    lower[i], upper[i]
                )));
            }
        }
        // weights must be able to reach sum = 1 - c for some admissible c
        let (sum_lo, sum_hi) = (1.0 - cash_upper, 1.0 - cash_lower);
        if lower.sum() > sum_hi + FEAS_TOLERANCE || upper.sum() < sum_lo - FEAS_TOLERANCE {
            return Err(Error::InfeasibleDomain);
        }
        Ok(DomainSpec::BoxSimplex {
            lower,
            upper,
            cash_lower,
            cash_upper,
        })
    }

    pub fn polyhedron(a: Matrix, d: Vector) -> Result<Self> {
        check_dim(a.rows(), d.dim())?;
        if a.cols() == 0 {
            return Err(Error::InvalidConfig("polyhedron dimension must be >= 1".into()));
        }
        for i in 0..a.rows() {
            for (j, &v) in a.row(i).iter().enumerate() {
                if v < 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "polyhedron entry ({i}, {j}) is negative: {v}"
                    )));
                }
            }
            if d[i] <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "polyhedron right-hand side {i} must be positive, got {}",
                    d[i]
                )));
            }
        }
        Ok(DomainSpec::Polyhedron { a, d })
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Simplex { dim } | DomainSpec::ScaledSimplex { dim, .. } => *dim,
            DomainSpec::BoxSimplex { lower, .. } => lower.dim(),
            DomainSpec::Polyhedron { a, .. } => a.cols(),
        }
    }

    /// Whether the origin is feasible; drives smoothing of sqrt objectives.
    pub fn contains_origin(&self) -> bool {
        match self {
            DomainSpec::Simplex { .. } => false,
            DomainSpec::ScaledSimplex { .. } | DomainSpec::Polyhedron { .. } => true,
            DomainSpec::BoxSimplex {
                lower,
                upper,
                cash_lower,
                cash_upper,
            } => {
                let in_box = (0..lower.dim()).all(|i| lower[i] <= 0.0 && upper[i] >= 0.0);
                in_box && *cash_lower <= 1.0 && *cash_upper >= 1.0
            }
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            DomainSpec::Simplex { .. } => {
                x.iter().all(|&v| v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            DomainSpec::ScaledSimplex { cap, .. } => {
                x.iter().all(|&v| v >= -tol) && x.iter().sum::<f64>() <= cap + tol
            }
            DomainSpec::BoxSimplex {
                lower,
                upper,
                cash_lower,
                cash_upper,
            } => {
                let s: f64 = x.iter().sum();
                let c = 1.0 - s;
                (0..x.len()).all(|i| x[i] >= lower[i] - tol && x[i] <= upper[i] + tol)
                    && c >= cash_lower - tol
                    && c <= cash_upper + tol
            }
            DomainSpec::Polyhedron { a, d } => {
                x.iter().all(|&v| v >= -tol)
                    && (0..a.rows()).all(|i| dot(a.row(i), x) <= d[i] + tol)
            }
        }
    }

    /// Largest constraint violation at x (0 when feasible).
    pub fn violation(&self, x: &[f64]) -> f64 {
        match self {
            DomainSpec::Simplex { .. } => {
                let neg = x.iter().fold(0.0f64, |m, &v| m.max(-v));
                neg.max((x.iter().sum::<f64>() - 1.0).abs())
            }
            DomainSpec::ScaledSimplex { cap, .. } => {
                let neg = x.iter().fold(0.0f64, |m, &v| m.max(-v));
                neg.max((x.iter().sum::<f64>() - cap).max(0.0))
            }
            DomainSpec::BoxSimplex {
                lower,
                upper,
                cash_lower,
                cash_upper,
            } => {
                let mut v = 0.0f64;
                for i in 0..x.len() {
                    v = v.max(lower[i] - x[i]).max(x[i] - upper[i]);
                }
                let c = 1.0 - x.iter().sum::<f64>();
                v.max(cash_lower - c).max(c - cash_upper)
            }
            DomainSpec::Polyhedron { a, d } => {
                let mut v = x.iter().fold(0.0f64, |m, &xi| m.max(-xi));
                for i in 0..a.rows() {
                    v = v.max(dot(a.row(i), x) - d[i]);
                }
                v
            }
        }
    }

    /// A point strictly inside the region (used to seed interior methods).
    pub fn interior_point(&self) -> Vector {
        match self {
            DomainSpec::Simplex { dim } => Vector::constant(*dim, 1.0 / *dim as f64),
            DomainSpec::ScaledSimplex { dim, cap } => {
                Vector::constant(*dim, 0.5 * cap / *dim as f64)
            }
            DomainSpec::BoxSimplex {
                lower,
                upper,
                cash_lower,
                cash_upper,
            } => {
                // center of the box pulled into the sum band
                let mid: Vec<f64> = (0..lower.dim())
                    .map(|i| 0.5 * (lower[i] + upper[i]))
                    .collect();
                let target_lo = 1.0 - cash_upper;
                let target_hi = 1.0 - cash_lower;
                project_box_band(&mid, lower, upper, target_lo, target_hi)
            }
            DomainSpec::Polyhedron { a, d } => {
                let n = a.cols();
                let mut scale = f64::INFINITY;
                for i in 0..a.rows() {
                    let rs: f64 = a.row(i).iter().sum();
                    if rs > 0.0 {
                        scale = scale.min(d[i] / (2.0 * rs));
                    }
                }
                if !scale.is_finite() {
                    scale = 1.0;
                }
                Vector::constant(n, scale)
            }
        }
    }

    /// Minimize a linear objective over the region.
    ///
    /// Vertex domains break ties by the lowest index; the polyhedron path
    /// follows the log-barrier central path, which lands in the interior of
    /// the optimal face instead.
    pub fn lp_minimize(&self, a: &Vector) -> Result<Vector> {
        check_dim(self.dim(), a.dim())?;
        match self {
            DomainSpec::Simplex { dim } => {
                let mut best = 0usize;
                for i in 1..*dim {
                    if a[i] < a[best] {
                        best = i;
                    }
                }
                Ok(Vector::basis(*dim, best))
            }
            DomainSpec::ScaledSimplex { dim, cap } => {
                let mut best = 0usize;
                for i in 1..*dim {
                    if a[i] < a[best] {
                        best = i;
                    }
                }
                if cap * a[best] <= 0.0 {
                    Ok(Vector::basis(*dim, best).scale(*cap))
                } else {
                    Ok(Vector::zeros(*dim))
                }
            }
            DomainSpec::BoxSimplex {
                lower,
                upper,
                cash_lower,
                cash_upper,
            } => {
                let n = lower.dim();
                let mut x: Vec<f64> = (0..n)
                    .map(|i| if a[i] < 0.0 { upper[i] } else { lower[i] })
                    .collect();
                let sum_lo = 1.0 - cash_upper;
                let sum_hi = 1.0 - cash_lower;
                let mut s: f64 = x.iter().sum();
                if s < sum_lo {
                    // raise the cheapest coordinates first
                    let mut order: Vec<usize> = (0..n).filter(|&i| x[i] < upper[i]).collect();
                    order.sort_by(|&i, &j| a[i].partial_cmp(&a[j]).unwrap().then(i.cmp(&j)));
                    for i in order {
                        let room = upper[i] - x[i];
                        let need = sum_lo - s;
                        if need <= 0.0 {
                            break;
                        }
                        let add = room.min(need);
                        x[i] += add;
                        s += add;
                    }
                } else if s > sum_hi {
                    // cut the least profitable coordinates first
                    let mut order: Vec<usize> = (0..n).filter(|&i| x[i] > lower[i]).collect();
                    order.sort_by(|&i, &j| a[j].partial_cmp(&a[i]).unwrap().then(i.cmp(&j)));
                    for i in order {
                        let room = x[i] - lower[i];
                        let need = s - sum_hi;
                        if need <= 0.0 {
                            break;
                        }
                        let cut = room.min(need);
                        x[i] -= cut;
                        s -= cut;
                    }
                }
                Ok(Vector::from_raw(x))
            }
            DomainSpec::Polyhedron { a: mat, d } => {
                let obj = LinearObjective { a: a.as_slice() };
                let out = barrier::barrier_minimize(
                    &obj,
                    mat,
                    d.as_slice(),
                    true,
                    self.interior_point(),
                    &barrier::BarrierOptions::default(),
                )?;
                Ok(out.x)
            }
        }
    }
}

/// Euclidean projection onto the unit simplex, exact via sort and threshold.
pub fn project_simplex(y: &Vector) -> Vector {
    Vector::from_raw(threshold_to_sum(y.as_slice(), 1.0))
}

/// Euclidean projection onto {x >= 0, sum x = target}.
fn threshold_to_sum(y: &[f64], target: f64) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut tau = (u[0] - target).max(0.0); // placeholder, overwritten below
    let mut chosen = 0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - target) / (j + 1) as f64;
        if uj > t {
            tau = t;
            chosen = j + 1;
        }
    }
    debug_assert!(chosen >= 1);
    y.iter().map(|&v| (v - tau).max(0.0)).collect()
}

/// Euclidean projection onto {lower <= x <= upper, sum_lo <= sum x <= sum_hi}.
///
/// Exact: clamp to the box; if the sum constraint binds, shift by the
/// multiplier tau, locate it by bisection (the clamped sum is monotone in
/// tau), and close with one algebraic solve on the identified free set.
fn project_box_band(
    y: &[f64],
    lower: &Vector,
    upper: &Vector,
    sum_lo: f64,
    sum_hi: f64,
) -> Vector {
    let n = y.len();
    let clamp_at = |tau: f64| -> Vec<f64> {
        (0..n)
            .map(|i| (y[i] - tau).clamp(lower[i], upper[i]))
            .collect()
    };
    let base = clamp_at(0.0);
    let s0: f64 = base.iter().sum();
    if s0 >= sum_lo && s0 <= sum_hi {
        return Vector::from_raw(base);
    }
    let target = if s0 > sum_hi { sum_hi } else { sum_lo };
    let (mut lo, mut hi) = if s0 > sum_hi {
        let hi = (0..n).map(|i| y[i] - lower[i]).fold(0.0f64, f64::max);
        (0.0, hi)
    } else {
        let lo = (0..n).map(|i| y[i] - upper[i]).fold(0.0f64, f64::min);
        (lo, 0.0)
    };
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        let s: f64 = clamp_at(mid).iter().sum();
        if s > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
    }
    let tau = 0.5 * (lo + hi);
    // polish: solve sum_free (y_i - tau) + fixed_sum = target exactly on the
    // free set identified by the bisected tau
    let x = clamp_at(tau);
    let mut free_sum = 0.0;
    let mut fixed_sum = 0.0;
    let mut free = 0usize;
    for i in 0..n {
        if x[i] > lower[i] && x[i] < upper[i] {
            free_sum += y[i];
            free += 1;
        } else {
            fixed_sum += x[i];
        }
    }
    if free > 0 {
        let t = (free_sum - (target - fixed_sum)) / free as f64;
        return Vector::from_raw(clamp_at(t));
    }
    Vector::from_raw(x)
}

/// Euclidean projection onto a feasible region.
pub fn project_domain(y: &Vector, domain: &DomainSpec) -> Result<Vector> {
    check_dim(domain.dim(), y.dim())?;
    match domain {
        DomainSpec::Simplex { .. } => Ok(project_simplex(y)),
        DomainSpec::ScaledSimplex { cap, .. } => {
            let clamped: Vec<f64> = y.iter().map(|&v| v.max(0.0)).collect();
            if clamped.iter().sum::<f64>() <= *cap {
                Ok(Vector::from_raw(clamped))
            } else {
                Ok(Vector::from_raw(threshold_to_sum(y.as_slice(), *cap)))
            }
        }
        DomainSpec::BoxSimplex {
            lower,
            upper,
            cash_lower,
            cash_upper,
        } => Ok(project_box_band(
            y.as_slice(),
            lower,
            upper,
            1.0 - cash_upper,
            1.0 - cash_lower,
        )),
        DomainSpec::Polyhedron { a, d } => dykstra_orthant_halfspaces(y, a, d.as_slice()),
    }
}

/// Dykstra's alternating projection over the nonnegative orthant and the
/// halfspace rows of `a x <= d`.
pub(crate) fn dykstra_orthant_halfspaces(y: &Vector, a: &Matrix, d: &[f64]) -> Result<Vector> {
    let n = y.dim();
    let m = a.rows();
    let total_sets = 1 + m;
    let mut x: Vec<f64> = y.as_slice().to_vec();
    let mut incr = vec![vec![0.0; n]; total_sets];
    let scale = 1.0 + y.norm_inf();
    let mut last_disp = f64::INFINITY;
    let mut stall_count = 0usize;

    let row_norm2: Vec<f64> = (0..m).map(|i| dot(a.row(i), a.row(i))).collect();

    for cycle in 0..DYKSTRA_MAX_CYCLES {
        let snapshot = x.clone();
        for (set, q) in incr.iter_mut().enumerate() {
            // z = x + q, then project z onto this set
            for i in 0..n {
                x[i] += q[i];
            }
            match set {
                0 => {
                    for i in 0..n {
                        let proj = x[i].max(0.0);
                        q[i] = x[i] - proj;
                        x[i] = proj;
                    }
                }
                s => {
                    let row = a.row(s - 1);
                    let excess = dot(row, &x) - d[s - 1];
                    let nrm = row_norm2[s - 1];
                    if excess > 0.0 && nrm > 0.0 {
                        let t = excess / nrm;
                        for i in 0..n {
                            let proj = x[i] - t * row[i];
                            q[i] = x[i] - proj;
                            x[i] = proj;
                        }
                    } else {
                        for qi in q.iter_mut() {
                            *qi = 0.0;
                        }
                    }
                }
            }
        }
        let disp = (0..n)
            .map(|i| (x[i] - snapshot[i]).abs())
            .fold(0.0f64, f64::max);
        if disp <= 5e-14 * scale {
            polish_feasible(&mut x, a, d, scale);
            return Ok(Vector::from_raw(x));
        }
        // infeasibility heuristic: persistent violation with a stalled cycle
        if cycle >= 1000 {
            if disp > 0.5 * last_disp {
                stall_count += 1;
            } else {
                stall_count = 0;
            }
            let mut violation = x.iter().fold(0.0f64, |mx, &v| mx.max(-v));
            for i in 0..m {
                violation = violation.max(dot(a.row(i), &x) - d[i]);
            }
            if stall_count > 500 && violation > 1e-7 * scale {
                return Err(Error::InfeasibleDomain);
            }
        }
        last_disp = disp;
    }
    polish_feasible(&mut x, a, d, scale);
    Ok(Vector::from_raw(x))
}

/// Plain cyclic projections (no Dykstra increments) to push the converged
/// iterate inside every set; the shift is on the order of the residual
/// violation, far below the optimality tolerance.
fn polish_feasible(x: &mut [f64], a: &Matrix, d: &[f64], scale: f64) {
    let m = a.rows();
    for _ in 0..100 {
        let mut violation = 0.0f64;
        for xi in x.iter_mut() {
            if *xi < 0.0 {
                violation = violation.max(-*xi);
                *xi = 0.0;
            }
        }
        for i in 0..m {
            let row = a.row(i);
            let excess = dot(row, x) - d[i];
            let nrm = dot(row, row);
            if excess > 0.0 && nrm > 0.0 {
                violation = violation.max(excess);
                let t = excess / nrm;
                for (xi, ai) in x.iter_mut().zip(row) {
                    *xi -= t * ai;
                }
            }
        }
        if violation <= 1e-13 * scale {
            break;
        }
    }
}

/// Solution record for a constrained subproblem.
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub x: Vector,
    pub objective_value: f64,
    pub iterations: usize,
    /// Projected-gradient fixed-point residual at the returned iterate.
    pub residual: f64,
    /// True when a closed-form expression produced the solution.
    pub closed_form: bool,
}

/// Minimize `<a, x> + w (x - x_ref)' S (x - x_ref)` over the region.
pub fn solve_linear_plus_quadratic(
    a: &Vector,
    w: f64,
    s: &SpdMatrix,
    x_ref: &Vector,
    domain: &DomainSpec,
) -> Result<SubproblemSolution> {
    solve_linear_plus_quadratic_tol(a, w, s, x_ref, domain, SUBPROBLEM_TOLERANCE, 200_000)
}

/// Full-control variant of [`solve_linear_plus_quadratic`].
pub fn solve_linear_plus_quadratic_tol(
    a: &Vector,
    w: f64,
    s: &SpdMatrix,
    x_ref: &Vector,
    domain: &DomainSpec,
    tol: f64,
    max_iters: usize,
) -> Result<SubproblemSolution> {
    let n = domain.dim();
    check_dim(n, a.dim())?;
    check_dim(n, s.dim())?;
    check_dim(n, x_ref.dim())?;
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "quadratic weight must be positive, got {w}"
        )));
    }

    let fg = |x: &[f64]| {
        let diff: Vec<f64> = x.iter().zip(x_ref.iter()).map(|(xi, ri)| xi - ri).collect();
        let sd = s.mul_vec(&diff).expect("dims checked");
        let f = dot(a.as_slice(), x) + w * dot(&diff, &sd);
        let g: Vec<f64> = (0..x.len()).map(|i| a[i] + 2.0 * w * sd[i]).collect();
        (f, g)
    };
    let project = |y: &[f64]| {
        project_domain(&Vector::from_raw(y.to_vec()), domain).expect("projection failed")
    };
    let x0 = project_domain(x_ref, domain)?;
    let opts = PgdOptions {
        tol,
        max_iters,
        curvature_hint: Some(2.0 * w * s.max_eigen_bound()),
    };
    let out = minimize_projected(fg, project, x0, &opts);
    if !out.converged {
        return Err(Error::MaxIterationsExceeded {
            iterations: out.iterations,
            residual: out.residual,
            best: out.x.into_vec(),
        });
    }
    Ok(SubproblemSolution {
        x: out.x,
        objective_value: out.value,
        iterations: out.iterations,
        residual: out.residual,
        closed_form: false,
    })
}

/// Minimize the variance form `x' S x` over the region.
///
/// On the unit simplex with `S^{-1} e >= 0` the closed form
/// `S^{-1} e / <e, S^{-1} e>` applies and is returned with
/// `closed_form = true`; every other case runs the numeric path.
pub fn min_quadratic_over_domain(s: &SpdMatrix, domain: &DomainSpec) -> Result<SubproblemSolution> {
    let n = domain.dim();
    check_dim(n, s.dim())?;
    if let DomainSpec::Simplex { .. } = domain {
        let y = s.solve(&vec![1.0; n])?;
        if y.iter().all(|&v| v >= 0.0) {
            let total = y.sum();
            let x = y.scale(1.0 / total);
            let value = s.quad_form(x.as_slice())?;
            // report the same fixed-point residual the numeric path would
            let g = s.mul_vec(x.as_slice())?;
            let curv = (2.0 * s.max_eigen_bound()).max(1e-8);
            let probe: Vec<f64> = (0..n).map(|i| x[i] - 2.0 * g[i] / curv).collect();
            let back = project_simplex(&Vector::from_raw(probe));
            let residual = norm_inf(
                &(0..n)
                    .map(|i| x[i] - back[i])
                    .collect::<Vec<f64>>(),
            );
            return Ok(SubproblemSolution {
                x,
                objective_value: value,
                iterations: 0,
                residual,
                closed_form: true,
            });
        }
    }
    let zero = Vector::zeros(n);
    solve_linear_plus_quadratic(&zero, 1.0, s, &zero, domain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec2(a: f64, b: f64) -> Vector {
        Vector::from_raw(vec![a, b])
    }

    #[test]
    fn simplex_projection_uniform_shift() {
        let p = project_simplex(&vec2(0.5, 0.8));
        assert!((p[0] - 0.35).abs() < 1e-15);
        assert!((p[1] - 0.65).abs() < 1e-15);
    }

    #[test]
    fn simplex_projection_keeps_feasible_point() {
        let p = project_simplex(&Vector::from_raw(vec![1.0, 0.0, 0.0]));
        assert_eq!(p.as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn simplex_projection_thresholds_negative_coordinate() {
        let p = project_simplex(&vec2(2.0, -1.0));
        assert!((p[0] - 1.0).abs() < 1e-15);
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn scaled_simplex_keeps_interior_point() {
        let d = DomainSpec::scaled_simplex(2, 2.0).unwrap();
        let p = project_domain(&vec2(0.5, 0.5), &d).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn polyhedron_projection_halfspace() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let d = Vector::new(vec![1.0]).unwrap();
        let dom = DomainSpec::polyhedron(a, d).unwrap();
        let p = project_domain(&vec2(1.0, 1.0), &dom).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-9, "{:?}", p.as_slice());
        assert!((p[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn box_band_projection_respects_bounds() {
        let lower = Vector::new(vec![0.0, 0.0, 0.0]).unwrap();
        let upper = Vector::new(vec![0.4, 0.4, 0.4]).unwrap();
        let dom = DomainSpec::box_simplex(lower, upper, 0.0, 0.2).unwrap();
        let p = project_domain(&Vector::from_raw(vec![1.0, 0.9, -0.2]), &dom).unwrap();
        assert!(dom.contains(p.as_slice(), 1e-10), "{:?}", p.as_slice());
        let s: f64 = p.iter().sum();
        assert!((0.8..=1.0 + 1e-12).contains(&s), "sum {s}");
    }

    #[test]
    fn lp_on_simplex_breaks_ties_by_lowest_index() {
        let d = DomainSpec::simplex(3).unwrap();
        let x = d.lp_minimize(&Vector::from_raw(vec![0.5, -1.0, -1.0])).unwrap();
        assert_eq!(x.as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn lp_on_scaled_simplex_prefers_vertex_over_origin_only_when_negative() {
        let d = DomainSpec::scaled_simplex(2, 2.0).unwrap();
        let x = d.lp_minimize(&vec2(0.3, 0.7)).unwrap();
        assert_eq!(x.as_slice(), &[0.0, 0.0]);
        let x = d.lp_minimize(&vec2(0.3, -0.7)).unwrap();
        assert_eq!(x.as_slice(), &[0.0, 2.0]);
    }

    #[test]
    fn prox_with_zero_linear_term_returns_reference() {
        let s = SpdMatrix::identity(2);
        let d = DomainSpec::simplex(2).unwrap();
        let x_ref = vec2(0.25, 0.75);
        let out =
            solve_linear_plus_quadratic(&Vector::zeros(2), 3.0, &s, &x_ref, &d).unwrap();
        assert!((out.x[0] - 0.25).abs() < 1e-9);
        assert!((out.x[1] - 0.75).abs() < 1e-9);
    }

    #[test]
    fn prox_with_dominant_penalty_stays_at_reference() {
        let s = SpdMatrix::identity(2);
        let d = DomainSpec::simplex(2).unwrap();
        let x_ref = vec2(0.4, 0.6);
        let a = vec2(-1.0, 0.3);
        let out = solve_linear_plus_quadratic(&a, 1e12, &s, &x_ref, &d).unwrap();
        assert!((out.x[0] - 0.4).abs() < 1e-6);
        assert!((out.x[1] - 0.6).abs() < 1e-6);
    }

    #[test]
    fn min_variance_closed_form_on_simplex() {
        let s = SpdMatrix::identity(3);
        let d = DomainSpec::simplex(3).unwrap();
        let out = min_quadratic_over_domain(&s, &d).unwrap();
        assert!(out.closed_form);
        for v in out.x.iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-14);
        }

        let s = SpdMatrix::diagonal(&[1.0, 2.0]).unwrap();
        let d = DomainSpec::simplex(2).unwrap();
        let out = min_quadratic_over_domain(&s, &d).unwrap();
        assert!(out.closed_form);
        assert!((out.x[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((out.x[1] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn min_variance_numeric_when_closed_form_inapplicable() {
        // Sigma^{-1} e = (0.8, -0.2) / det: sign-mixed, so the numeric path runs
        let s = SpdMatrix::from_rows(&[vec![1.0, 1.2], vec![1.2, 2.0]]).unwrap();
        let y = s.solve(&[1.0, 1.0]).unwrap();
        assert!(y.iter().any(|&v| v < 0.0), "{:?}", y.as_slice());
        let d = DomainSpec::simplex(2).unwrap();
        let out = min_quadratic_over_domain(&s, &d).unwrap();
        assert!(!out.closed_form);
        assert!(d.contains(out.x.as_slice(), 1e-9));
    }

    #[test]
    fn projection_dimension_mismatch() {
        let d = DomainSpec::simplex(3).unwrap();
        let err = project_domain(&vec2(0.1, 0.2), &d).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }
}

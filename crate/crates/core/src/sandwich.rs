//! Monte Carlo verification that robustness on a random polyhedron is
//! sandwiched between two scaled-simplex frontiers.
//!
//! A polyhedron {x >= 0, Ax <= d e} with i.i.d. entries supported on [0, b]
//! and mean mu contains the simplex of cap d/b and, with probability at least
//! 1 - 1/m, is contained in its kappa-scaling with
//! kappa = b / (mu (1 - eps)), eps = (b/mu) sqrt(log m / n). Whenever that
//! geometric containment holds, the per-radius robustness values of the three
//! Pareto solutions are ordered, because each is the negated minimum of the
//! same scalarized objective over nested sets.

use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::frontier::solve_pe_scalarized;
use crate::linalg::{check_dim, dot, Matrix, SpdMatrix, Vector};
use crate::parallel;
use crate::rng::{keyed_unit, splitmix64, SeedStream};

/// Solver slack allowed when comparing robustness values.
pub const ORDERING_SLACK: f64 = 1e-7;

/// Residual target for the per-domain Pareto solves.
const SOLVE_TOLERANCE: f64 = 1e-9;

/// Configuration of one sandwich experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichConfig {
    /// Constraint count of each sampled polyhedron.
    pub m: usize,
    /// Dimension.
    pub n: usize,
    /// Upper support bound of the entry distribution.
    pub bound_b: f64,
    /// Right-hand side d in Ax <= d e.
    pub d_bar: f64,
    /// Entry mean; b/2 for the uniform distribution used here.
    pub mu: f64,
    pub trials: usize,
    pub seed: u64,
    /// Radii to solve at, strictly increasing and nonnegative.
    pub alphas: Vec<f64>,
}

impl SandwichConfig {
    /// Uniform-entry configuration (mu = b/2).
    pub fn uniform(
        m: usize,
        n: usize,
        bound_b: f64,
        d_bar: f64,
        trials: usize,
        seed: u64,
        alphas: Vec<f64>,
    ) -> Self {
        Self {
            m,
            n,
            bound_b,
            d_bar,
            mu: 0.5 * bound_b,
            trials,
            seed,
            alphas,
        }
    }

    /// eps = (b / mu) sqrt(log m / n).
    pub fn epsilon(&self) -> f64 {
        (self.bound_b / self.mu) * ((self.m as f64).ln() / self.n as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidConfig("m and n must be >= 1".into()));
        }
        if !(self.bound_b.is_finite() && self.bound_b > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "support bound must be positive, got {}",
                self.bound_b
            )));
        }
        if !(self.d_bar.is_finite() && self.d_bar > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "right-hand side must be positive, got {}",
                self.d_bar
            )));
        }
        if !(self.mu.is_finite() && self.mu > 0.0 && self.mu <= self.bound_b) {
            return Err(Error::InvalidConfig(format!(
                "entry mean must lie in (0, b], got {}",
                self.mu
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.alphas.is_empty() {
            return Err(Error::InvalidConfig("alpha grid is empty".into()));
        }
        for w in self.alphas.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidConfig(
                    "alpha grid must be strictly increasing".into(),
                ));
            }
        }
        if self.alphas[0] < 0.0 {
            return Err(Error::InvalidConfig("alpha grid must be nonnegative".into()));
        }
        let eps = self.epsilon();
        if eps >= 1.0 {
            let ratio = self.bound_b / self.mu;
            let min_n = (ratio * ratio * (self.m as f64).ln()).floor() as usize + 1;
            return Err(Error::EpsilonTooLarge {
                epsilon: eps,
                m: self.m,
                min_n,
            });
        }
        Ok(())
    }
}

/// Simplex cap d/b and scaling factor kappa = b / (mu (1 - eps)).
pub fn sandwich_factors(cfg: &SandwichConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let inner_cap = cfg.d_bar / cfg.bound_b;
    let kappa = cfg.bound_b / (cfg.mu * (1.0 - cfg.epsilon()));
    Ok((inner_cap, kappa))
}

/// Sample the trial's polyhedron. Entries are uniform on [0, b), drawn from a
/// counter keyed by (seed, trial, row, col), so the same key always yields
/// the same matrix regardless of evaluation order or thread count.
pub fn sample_random_polyhedron(cfg: &SandwichConfig, trial_index: usize) -> DomainSpec {
    let rows: Vec<Vec<f64>> = (0..cfg.m)
        .map(|i| {
            (0..cfg.n)
                .map(|j| cfg.bound_b * keyed_unit(cfg.seed, trial_index as u64, i as u64, j as u64))
                .collect()
        })
        .collect();
    let a = Matrix::from_rows(&rows).expect("rectangular by construction");
    let d = Vector::from_raw(vec![cfg.d_bar; cfg.m]);
    DomainSpec::polyhedron(a, d).expect("uniform entries are admissible")
}

/// Robustness comparison at one radius.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaRecord {
    pub alpha: f64,
    pub r_inner: f64,
    pub r_poly: f64,
    pub r_outer: f64,
    /// r_inner <= r_poly <= r_outer within [`ORDERING_SLACK`].
    pub ordering_holds: bool,
}

/// One Monte Carlo trial record.
#[derive(Debug, Clone)]
pub struct SandwichTrial {
    pub seed: u64,
    pub trial_index: usize,
    pub polyhedron: DomainSpec,
    pub kappa: f64,
    /// Geometric check: inner simplex inside the polyhedron inside the
    /// kappa-scaled simplex.
    pub containment: bool,
    pub per_alpha: Vec<AlphaRecord>,
    /// Solver failure for this trial, if any; the trial is kept either way.
    pub error: Option<String>,
}

impl SandwichTrial {
    pub fn ordering_holds_for_all_alphas(&self) -> bool {
        self.error.is_none() && self.per_alpha.iter().all(|r| r.ordering_holds)
    }
}

/// Companion instance generator: a seeded cost vector (negative entries, so
/// solutions are nontrivial) and a diagonal SPD shape of matching dimension.
pub fn seeded_instance(seed: u64, n: usize) -> (Vector, SpdMatrix) {
    let mut a_stream = SeedStream::new(splitmix64(seed ^ 0x00a0_c0de_0000_0001));
    let mut s_stream = SeedStream::new(splitmix64(seed ^ 0x0051_60a0_0000_0002));
    let a0 = Vector::from_raw((0..n).map(|_| -a_stream.uniform(0.5, 1.5)).collect());
    let diag: Vec<f64> = (0..n).map(|_| s_stream.uniform(0.5, 2.0)).collect();
    let sigma = SpdMatrix::diagonal(&diag).expect("positive diagonal");
    (a0, sigma)
}

/// Run the experiment: for every trial and radius, solve the Pareto problem
/// on the inner simplex, the sampled polyhedron, and the kappa-scaled
/// simplex, and record whether the per-radius robustness ordering holds.
/// Trials run independently (in parallel under the `parallel` feature) and
/// are reported in trial order.
pub fn run_sandwich_experiment(
    cfg: &SandwichConfig,
    a0: &Vector,
    sigma: &SpdMatrix,
) -> Result<Vec<SandwichTrial>> {
    cfg.validate()?;
    check_dim(cfg.n, a0.dim())?;
    check_dim(cfg.n, sigma.dim())?;
    let (inner_cap, kappa) = sandwich_factors(cfg)?;
    let inner = DomainSpec::scaled_simplex(cfg.n, inner_cap)?;
    let outer = DomainSpec::scaled_simplex(cfg.n, kappa * inner_cap)?;

    // the simplex sides do not depend on the trial; solve them once per radius
    let mut simplex_r = Vec::with_capacity(cfg.alphas.len());
    for &alpha in &cfg.alphas {
        let r_inner = pareto_robustness(a0, sigma, alpha, &inner)?;
        let r_outer = pareto_robustness(a0, sigma, alpha, &outer)?;
        simplex_r.push((r_inner, r_outer));
    }

    let trials: Vec<usize> = (0..cfg.trials).collect();
    let results = parallel::map_collect(trials, |trial_index| {
        run_trial(cfg, trial_index, a0, sigma, &simplex_r, inner_cap, kappa)
    });
    Ok(results)
}

/// Negated optimal value of the scalarized solve at the given radius; the
/// robustness of the Pareto point evaluated at its own radius.
fn pareto_robustness(
    a0: &Vector,
    sigma: &SpdMatrix,
    alpha: f64,
    domain: &DomainSpec,
) -> Result<f64> {
    let (x, _, _) = solve_pe_scalarized(a0, sigma, alpha, domain, SOLVE_TOLERANCE)?;
    let nominal = dot(a0.as_slice(), x.as_slice());
    let std_term = sigma.quad_form(x.as_slice())?.sqrt();
    Ok(-(nominal + alpha * std_term))
}

fn run_trial(
    cfg: &SandwichConfig,
    trial_index: usize,
    a0: &Vector,
    sigma: &SpdMatrix,
    simplex_r: &[(f64, f64)],
    inner_cap: f64,
    kappa: f64,
) -> SandwichTrial {
    let polyhedron = sample_random_polyhedron(cfg, trial_index);
    let containment = match containment_holds(&polyhedron, inner_cap, kappa) {
        Ok(c) => c,
        Err(e) => {
            return SandwichTrial {
                seed: cfg.seed,
                trial_index,
                polyhedron,
                kappa,
                containment: false,
                per_alpha: Vec::new(),
                error: Some(e.to_string()),
            }
        }
    };

    let mut per_alpha = Vec::with_capacity(cfg.alphas.len());
    let mut error = None;
    for (&alpha, &(r_inner, r_outer)) in cfg.alphas.iter().zip(simplex_r) {
        match pareto_robustness(a0, sigma, alpha, &polyhedron) {
            Ok(r_poly) => {
                let ordering_holds =
                    r_inner <= r_poly + ORDERING_SLACK && r_poly <= r_outer + ORDERING_SLACK;
                per_alpha.push(AlphaRecord {
                    alpha,
                    r_inner,
                    r_poly,
                    r_outer,
                    ordering_holds,
                });
            }
            Err(e) => {
                error = Some(format!("alpha {alpha}: {e}"));
                break;
            }
        }
    }

    SandwichTrial {
        seed: cfg.seed,
        trial_index,
        polyhedron,
        kappa,
        containment,
        per_alpha,
        error,
    }
}

/// Geometric containment check. The inner inclusion tests every simplex
/// vertex against every row (cap * A_ij <= d). The outer inclusion compares
/// the polyhedron's maximum coordinate sum, an LP solved on the barrier path,
/// against the scaled cap.
fn containment_holds(polyhedron: &DomainSpec, inner_cap: f64, kappa: f64) -> Result<bool> {
    let DomainSpec::Polyhedron { a, d } = polyhedron else {
        return Err(Error::InvalidConfig("expected a polyhedron".into()));
    };
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if inner_cap * a.get(i, j) > d[i] + 1e-12 {
                return Ok(false);
            }
        }
    }
    let neg_ones = Vector::from_raw(vec![-1.0; a.cols()]);
    let x = polyhedron.lp_minimize(&neg_ones)?;
    let max_sum: f64 = x.iter().sum();
    Ok(max_sum <= kappa * inner_cap + ORDERING_SLACK * (1.0 + kappa * inner_cap))
}

/// Fraction of trials whose ordering held at every radius.
pub fn ordering_frequency(trials: &[SandwichTrial]) -> f64 {
    if trials.is_empty() {
        return 0.0;
    }
    trials
        .iter()
        .filter(|t| t.ordering_holds_for_all_alphas())
        .count() as f64
        / trials.len() as f64
}

/// Fraction of trials where geometric containment held.
pub fn containment_frequency(trials: &[SandwichTrial]) -> f64 {
    if trials.is_empty() {
        return 0.0;
    }
    trials.iter().filter(|t| t.containment).count() as f64 / trials.len() as f64
}

/// One-sided Monte Carlo acceptance floor: 1 - 1/m minus Hoeffding slack at
/// the given trial count and confidence exponent ln(20).
pub fn containment_floor(m: usize, trials: usize) -> f64 {
    1.0 - 1.0 / m as f64 - 2.0 * ((20.0f64).ln() / (2.0 * trials as f64)).sqrt()
}

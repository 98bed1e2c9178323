//! Subcommand implementations.

use std::path::PathBuf;

use frontier_core::domains::{DomainSpec, SUBPROBLEM_TOLERANCE};
use frontier_core::frontier::{
    evaluate_point, solve_pareto_exact, sweep_exact_frontier, EllipsoidalSet, FrontierPoint,
    EXACT_SOLVE_TOLERANCE,
};
use frontier_core::portfolio::evaluate_out_of_sample;
use frontier_core::ppm::{run_ppm_trajectory, LambdaSchedule, PpmConfig, Trajectory};
use frontier_core::saddle::{saddle_oracle, solve_rcwuc_direct, RcwucInstance};
use frontier_core::sandwich::{
    containment_frequency, ordering_frequency, run_sandwich_experiment, sandwich_factors,
    seeded_instance, SandwichConfig,
};
use frontier_core::{Matrix, SpdMatrix, Vector};

use crate::config::{parse_f64_list, parse_matrix, Settings, UsageError, UsageResult};
use crate::instance::{build_domain, build_instance};
use crate::records::{
    render, write_atomic, CompareSummaryRecord, FrontierPointRecord, Header, MatchRecord,
    OutputFormat, PortfolioMetaRecord, PortfolioPointRecord, Record, SaddlePointRecord,
    SandwichAlphaEntry, SandwichSummaryRecord, SandwichTrialRecord, Tolerances, SCHEMA_VERSION,
};

/// Failure modes mapped to exit codes: usage = 1, solver = 2.
pub enum CliError {
    Usage(String),
    Solver(String),
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e.0)
    }
}

impl From<frontier_core::Error> for CliError {
    fn from(e: frontier_core::Error) -> Self {
        CliError::Solver(e.to_string())
    }
}

pub type CliResult = Result<(), CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Resolved run environment shared by all commands.
pub struct Run {
    pub settings: Settings,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
}

impl Run {
    pub fn new(settings: Settings) -> UsageResult<Self> {
        let seed = settings.get_u64("seed")?.unwrap_or(0);
        let format = match settings.get("format") {
            None => OutputFormat::JsonLines,
            Some(text) => OutputFormat::parse(text)
                .ok_or_else(|| UsageError(format!("format: expected jsonl or csv, got {text:?}")))?,
        };
        let out = settings.get("out").map(PathBuf::from);
        Ok(Self {
            settings,
            out,
            format,
            seed,
        })
    }

    fn header(&self, command: &str, subproblem_tol: f64) -> Header {
        Header {
            command: command.to_string(),
            schema_version: SCHEMA_VERSION,
            seed: self.seed,
            tolerances: Tolerances {
                subproblem: subproblem_tol,
                exact_solve: EXACT_SOLVE_TOLERANCE,
            },
        }
    }

    fn emit(&self, records: &[Record]) -> CliResult {
        let text = render(records, self.format);
        match &self.out {
            Some(path) => write_atomic(path, &text)
                .map_err(|e| CliError::Solver(format!("writing {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

const OUTPUT_KEYS: &[&str] = &["seed", "out", "format"];
const INSTANCE_KEYS: &[&str] = &[
    "a0",
    "sigma",
    "sigma_diag",
    "gen",
    "n",
    "domain",
    "poly_a",
    "poly_d",
    "returns",
    "split",
    "ridge",
];
const PPM_KEYS: &[&str] = &["lambda", "max_steps", "omega_min", "tol"];

fn allowed(extra: &[&'static str]) -> Vec<&'static str> {
    let mut keys = Vec::new();
    keys.extend_from_slice(OUTPUT_KEYS);
    keys.extend_from_slice(INSTANCE_KEYS);
    keys.extend_from_slice(extra);
    keys
}

fn parse_lambda(text: &str) -> UsageResult<LambdaSchedule> {
    if let Some(v) = text.strip_prefix("constant:") {
        let v: f64 = v
            .parse()
            .map_err(|_| UsageError(format!("lambda: bad constant {v:?}")))?;
        return Ok(LambdaSchedule::Constant(v));
    }
    if let Some(list) = text.strip_prefix("list:") {
        let vs = parse_f64_list(list).map_err(|e| UsageError(format!("lambda: {e}")))?;
        return Ok(LambdaSchedule::Explicit(vs));
    }
    let v: f64 = text
        .parse()
        .map_err(|_| UsageError(format!("lambda: expected constant:<v>, list:<v,..> or a number, got {text:?}")))?;
    Ok(LambdaSchedule::Constant(v))
}

fn ppm_config(settings: &Settings) -> UsageResult<PpmConfig> {
    let lambdas = match settings.get("lambda") {
        Some(text) => parse_lambda(text)?,
        None => LambdaSchedule::Constant(1.0),
    };
    Ok(PpmConfig {
        lambdas,
        max_steps: settings.get_usize("max_steps")?.unwrap_or(50),
        subproblem_tolerance: settings.get_f64("tol")?.unwrap_or(SUBPROBLEM_TOLERANCE),
        omega_min: settings.get_f64("omega_min")?.unwrap_or(1e-6),
    })
}

fn frontier_point_record(
    header: &Header,
    source: &'static str,
    k: Option<usize>,
    alpha_eval: f64,
    p: &FrontierPoint,
) -> Record {
    Record::FrontierPoint(FrontierPointRecord {
        header: header.clone(),
        kind: "point",
        source,
        k,
        alpha: p.alpha,
        omega: p.omega,
        alpha_eval,
        efficiency: p.efficiency,
        robustness: p.robustness,
        nominal_cost: p.nominal_cost,
        std_term: p.std_term,
        upsilon: p.upsilon,
        x: p.x.as_slice().to_vec(),
    })
}

pub fn run_frontier_exact(run: &Run) -> CliResult {
    run.settings
        .validate_keys(&allowed(&["alphas", "alpha_eval", "tol"]))?;
    let inst = build_instance(&run.settings, run.seed)?;
    let domain = build_domain(&run.settings, inst.a0.dim())?;
    let alphas = run
        .settings
        .get_f64_list("alphas")?
        .ok_or_else(|| usage("frontier-exact requires alphas"))?;
    let alpha_eval = run
        .settings
        .get_f64("alpha_eval")?
        .or_else(|| alphas.last().copied())
        .ok_or_else(|| usage("empty alphas"))?;
    let tol = run.settings.get_f64("tol")?.unwrap_or(SUBPROBLEM_TOLERANCE);
    let header = run.header("frontier-exact", tol);

    let set = sweep_exact_frontier(&inst.a0, &inst.sigma, &alphas, &domain, alpha_eval)?;
    let records: Vec<Record> = set
        .points
        .iter()
        .map(|p| frontier_point_record(&header, "exact", None, alpha_eval, p))
        .collect();
    run.emit(&records)
}

fn run_trajectory(run: &Run, inst_a0: &Vector, sigma: &SpdMatrix, domain: &DomainSpec) -> Result<(Trajectory, f64), CliError> {
    let cfg = ppm_config(&run.settings)?;
    let configured_eval = run.settings.get_f64("alpha_eval")?;
    // run first, then settle the evaluation radius: default is the
    // trajectory's own largest radius
    let traj = run_ppm_trajectory(inst_a0, sigma, domain, &cfg, configured_eval.unwrap_or(0.0))?;
    let alpha_eval = match configured_eval {
        Some(v) => v,
        None => traj.max_alpha().unwrap_or(0.0),
    };
    let traj = traj.reevaluated(inst_a0, sigma, alpha_eval)?;
    Ok((traj, alpha_eval))
}

pub fn run_frontier_ppm(run: &Run) -> CliResult {
    run.settings
        .validate_keys(&allowed(&[PPM_KEYS, &["alpha_eval"]].concat()))?;
    let inst = build_instance(&run.settings, run.seed)?;
    let domain = build_domain(&run.settings, inst.a0.dim())?;
    let tol = run.settings.get_f64("tol")?.unwrap_or(SUBPROBLEM_TOLERANCE);
    let header = run.header("frontier-ppm", tol);

    let (traj, alpha_eval) = run_trajectory(run, &inst.a0, &inst.sigma, &domain)?;
    let records: Vec<Record> = traj
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| frontier_point_record(&header, "ppm", Some(i + 1), alpha_eval, p))
        .collect();
    run.emit(&records)
}

pub fn run_compare(run: &Run) -> CliResult {
    run.settings
        .validate_keys(&allowed(&[PPM_KEYS, &["alpha_eval"]].concat()))?;
    let inst = build_instance(&run.settings, run.seed)?;
    let domain = build_domain(&run.settings, inst.a0.dim())?;
    let tol = run.settings.get_f64("tol")?.unwrap_or(SUBPROBLEM_TOLERANCE);
    let header = run.header("compare", tol);

    let (traj, alpha_eval) = run_trajectory(run, &inst.a0, &inst.sigma, &domain)?;
    let mut records = Vec::new();
    let mut max_x_gap = 0.0f64;
    let mut max_e_gap = 0.0f64;
    let mut max_r_gap = 0.0f64;
    for (i, p) in traj.points.iter().enumerate() {
        let u = EllipsoidalSet::new(inst.sigma.clone(), p.alpha)?;
        let exact = solve_pareto_exact(&inst.a0, &u, &domain)?;
        let (e_exact, r_exact) =
            evaluate_point(&exact.x, &inst.a0, &inst.sigma, alpha_eval)?;
        let x_gap = p
            .x
            .iter()
            .zip(exact.x.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let e_gap = (p.efficiency - e_exact).abs();
        let r_gap = (p.robustness - r_exact).abs();
        max_x_gap = max_x_gap.max(x_gap);
        max_e_gap = max_e_gap.max(e_gap);
        max_r_gap = max_r_gap.max(r_gap);
        records.push(frontier_point_record(&header, "ppm", Some(i + 1), alpha_eval, p));
        records.push(Record::Match(MatchRecord {
            header: header.clone(),
            kind: "match",
            k: i + 1,
            alpha: p.alpha,
            x_gap,
            efficiency_gap: e_gap,
            robustness_gap: r_gap,
        }));
    }
    records.push(Record::CompareSummary(CompareSummaryRecord {
        header: header.clone(),
        kind: "summary",
        points: traj.points.len(),
        max_x_gap,
        max_efficiency_gap: max_e_gap,
        max_robustness_gap: max_r_gap,
    }));
    run.emit(&records)
}

pub fn run_saddle(run: &Run) -> CliResult {
    let keys: Vec<&str> = [
        OUTPUT_KEYS,
        &["c0", "c_rows", "b", "sigma", "sigma_diag", "alphas", "iters", "step_lambda"],
    ]
    .concat();
    run.settings.validate_keys(&keys)?;
    let c0_text = run
        .settings
        .get("c0")
        .ok_or_else(|| usage("saddle requires c0"))?;
    let c0 = Vector::new(parse_f64_list(c0_text).map_err(|e| usage(format!("c0: {e}")))?)
        .map_err(|e| usage(format!("c0: {e}")))?;
    let rows_text = run
        .settings
        .get("c_rows")
        .ok_or_else(|| usage("saddle requires c_rows"))?;
    let rows = parse_matrix(rows_text).map_err(|e| usage(format!("c_rows: {e}")))?;
    let c_rows = Matrix::from_rows(&rows).map_err(|e| usage(format!("c_rows: {e}")))?;
    let b_text = run
        .settings
        .get("b")
        .ok_or_else(|| usage("saddle requires b"))?;
    let b = Vector::new(parse_f64_list(b_text).map_err(|e| usage(format!("b: {e}")))?)
        .map_err(|e| usage(format!("b: {e}")))?;
    let sigma = if let Some(d) = run.settings.get("sigma_diag") {
        SpdMatrix::diagonal(&parse_f64_list(d).map_err(|e| usage(format!("sigma_diag: {e}")))?)
            .map_err(|e| usage(format!("sigma_diag: {e}")))?
    } else if let Some(m) = run.settings.get("sigma") {
        SpdMatrix::from_rows(&parse_matrix(m).map_err(|e| usage(format!("sigma: {e}")))?)
            .map_err(|e| usage(format!("sigma: {e}")))?
    } else {
        return Err(usage("saddle requires sigma or sigma_diag"));
    };
    let alphas = run
        .settings
        .get_f64_list("alphas")?
        .ok_or_else(|| usage("saddle requires alphas"))?;
    let iters = run.settings.get_usize("iters")?.unwrap_or(
        frontier_core::saddle::DEFAULT_SADDLE_ITERS,
    );
    let step = run
        .settings
        .get_f64("step_lambda")?
        .unwrap_or(frontier_core::saddle::DEFAULT_STEP_LAMBDA);

    let inst = RcwucInstance::new(c0, c_rows, b, sigma)?;
    let header = run.header("saddle", 1e-9);
    let mut records = Vec::new();
    for &alpha in &alphas {
        let state = saddle_oracle(&inst, alpha, iters, step)?;
        let q = inst.sigma.quad_form(state.x.as_slice())?;
        let beta = alpha * q.sqrt();
        let direct = solve_rcwuc_direct(&inst, beta)?;
        let x_gap = state
            .x
            .iter()
            .zip(direct.x.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        records.push(Record::SaddlePoint(SaddlePointRecord {
            header: header.clone(),
            kind: "point",
            alpha,
            beta,
            objective: inst.c0.dot(&state.x)?,
            gap_estimate: state.gap_estimate,
            x: state.x.as_slice().to_vec(),
            lambda: state.lambda.as_slice().to_vec(),
            direct_x: direct.x.as_slice().to_vec(),
            x_gap,
        }));
    }
    run.emit(&records)
}

pub fn run_sandwich(run: &Run) -> CliResult {
    let keys: Vec<&str> = [OUTPUT_KEYS, &["m", "n", "bound_b", "d_bar", "trials", "alphas"]].concat();
    run.settings.validate_keys(&keys)?;
    let m = run
        .settings
        .get_usize("m")?
        .ok_or_else(|| usage("sandwich requires m"))?;
    let n = run
        .settings
        .get_usize("n")?
        .ok_or_else(|| usage("sandwich requires n"))?;
    let trials = run
        .settings
        .get_usize("trials")?
        .ok_or_else(|| usage("sandwich requires trials"))?;
    let bound_b = run.settings.get_f64("bound_b")?.unwrap_or(1.0);
    let d_bar = run.settings.get_f64("d_bar")?.unwrap_or(1.0);
    let alphas = run
        .settings
        .get_f64_list("alphas")?
        .unwrap_or_else(|| vec![0.1, 0.5, 1.0, 2.0]);

    let cfg = SandwichConfig::uniform(m, n, bound_b, d_bar, trials, run.seed, alphas);
    cfg.validate()?;
    let (inner_cap, kappa) = sandwich_factors(&cfg)?;
    let (a0, sigma) = seeded_instance(run.seed, n);
    let trials_out = run_sandwich_experiment(&cfg, &a0, &sigma)?;

    let header = run.header("sandwich", EXACT_SOLVE_TOLERANCE);
    let mut records = Vec::new();
    for t in &trials_out {
        records.push(Record::SandwichTrial(SandwichTrialRecord {
            header: header.clone(),
            kind: "trial",
            trial: t.trial_index,
            kappa: t.kappa,
            containment: t.containment,
            ordering_all: t.ordering_holds_for_all_alphas(),
            per_alpha: t
                .per_alpha
                .iter()
                .map(|e| SandwichAlphaEntry {
                    alpha: e.alpha,
                    r_inner: e.r_inner,
                    r_poly: e.r_poly,
                    r_outer: e.r_outer,
                    ordering_holds: e.ordering_holds,
                })
                .collect(),
            error: t.error.clone(),
        }));
    }
    records.push(Record::SandwichSummary(SandwichSummaryRecord {
        header: header.clone(),
        kind: "summary",
        trials: trials_out.len(),
        m,
        n,
        epsilon: cfg.epsilon(),
        kappa,
        inner_cap,
        ordering_frequency: ordering_frequency(&trials_out),
        containment_frequency: containment_frequency(&trials_out),
    }));
    run.emit(&records)
}

pub fn run_portfolio(run: &Run) -> CliResult {
    run.settings
        .validate_keys(&allowed(&[PPM_KEYS, &["alphas", "alpha_eval"]].concat()))?;
    let inst = build_instance(&run.settings, run.seed)?;
    let Some(pipeline) = &inst.returns else {
        return Err(usage(
            "portfolio requires returns = <path> or synthetic:<n>:<T>:<seed>",
        ));
    };
    let domain = build_domain(&run.settings, inst.a0.dim())?;
    let alphas = run.settings.get_f64_list("alphas")?.unwrap_or_else(|| {
        vec![0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0]
    });
    let alpha_eval = run
        .settings
        .get_f64("alpha_eval")?
        .or_else(|| alphas.last().copied())
        .ok_or_else(|| usage("empty alphas"))?;
    let tol = run.settings.get_f64("tol")?.unwrap_or(SUBPROBLEM_TOLERANCE);
    let header = run.header("portfolio", tol);

    let mut records = Vec::new();
    records.push(Record::PortfolioMeta(PortfolioMetaRecord {
        header: header.clone(),
        kind: "meta",
        alpha_eval,
        ridge_in: pipeline.in_moments.regularization,
        ridge_out: pipeline.out_moments.regularization,
        worst_case_shape: "out-of-sample",
        split: pipeline.split,
        periods: pipeline.periods,
        tickers: pipeline.tickers.clone(),
    }));

    let push_point = |records: &mut Vec<Record>,
                      source: &'static str,
                      k: Option<usize>,
                      p: &FrontierPoint|
     -> Result<(), CliError> {
        let (out_nominal, out_worst) =
            evaluate_out_of_sample(&p.x, &pipeline.out_moments, alpha_eval)?;
        records.push(Record::PortfolioPoint(PortfolioPointRecord {
            header: header.clone(),
            kind: "point",
            source,
            k,
            alpha: p.alpha,
            alpha_eval,
            in_nominal_return: -p.nominal_cost,
            in_worst_case_return: p.robustness,
            out_nominal_return: out_nominal,
            out_worst_case_return: out_worst,
            x: p.x.as_slice().to_vec(),
        }));
        Ok(())
    };

    let sweep = sweep_exact_frontier(&inst.a0, &inst.sigma, &alphas, &domain, alpha_eval)?;
    for p in &sweep.points {
        push_point(&mut records, "exact", None, p)?;
    }
    let cfg = ppm_config(&run.settings)?;
    let traj = run_ppm_trajectory(&inst.a0, &inst.sigma, &domain, &cfg, alpha_eval)?;
    for (i, p) in traj.points.iter().enumerate() {
        push_point(&mut records, "ppm", Some(i + 1), p)?;
    }
    run.emit(&records)
}

//! Returns ingestion and moment estimation for the portfolio experiment.
//!
//! The pipeline is: load a returns CSV (header `date,TICKER1,...`), estimate
//! mean and covariance on an in-sample window, build frontiers against the
//! loss vector `a0 = -mean`, then evaluate each candidate portfolio on
//! out-of-sample moments. Maximizing return is minimizing `<-mean, x>`, so
//! efficiency comes out as the nominal return and robustness as the
//! worst-case return at the evaluation radius.

use std::path::Path;

use crate::error::Error;
use crate::frontier::evaluate_point;
use crate::linalg::{Matrix, SpdMatrix, Vector};
use crate::rng::SeedStream;
use thiserror::Error as ThisError;

/// Hard ceiling on CSV size (total cells including the date column).
pub const MAX_CSV_CELLS: usize = 10_000_000;

/// Data ingestion and estimation errors.
#[derive(Debug, ThisError)]
pub enum DataError {
    #[error("line {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("line {row}: date {date:?} is not strictly increasing")]
    NonMonotoneDates { row: usize, date: String },

    #[error("need at least 2 return rows, got {rows}")]
    TooFewRows { rows: usize },

    #[error("file has {cells} cells, over the {limit} limit")]
    FileTooLarge { cells: usize, limit: usize },

    #[error("covariance is not positive definite even with ridge {ridge:.3e} (constant or collinear columns?)")]
    DegenerateCovariance { ridge: f64 },

    #[error("bad header: {0}")]
    BadHeader(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-period simple returns for a set of assets.
#[derive(Debug, Clone)]
pub struct ReturnsMatrix {
    pub tickers: Vec<String>,
    /// ISO-8601 date strings, strictly increasing.
    pub dates: Vec<String>,
    /// T x n, one row per period.
    pub values: Matrix,
}

impl ReturnsMatrix {
    pub fn periods(&self) -> usize {
        self.values.rows()
    }

    pub fn assets(&self) -> usize {
        self.values.cols()
    }

    /// Split into (first `t` rows, remainder).
    pub fn split_at(&self, t: usize) -> Result<(ReturnsMatrix, ReturnsMatrix), DataError> {
        if t < 2 || self.periods() - t < 2 {
            return Err(DataError::TooFewRows {
                rows: t.min(self.periods() - t.min(self.periods())),
            });
        }
        let head_rows: Vec<Vec<f64>> = (0..t).map(|i| self.values.row(i).to_vec()).collect();
        let tail_rows: Vec<Vec<f64>> =
            (t..self.periods()).map(|i| self.values.row(i).to_vec()).collect();
        Ok((
            ReturnsMatrix {
                tickers: self.tickers.clone(),
                dates: self.dates[..t].to_vec(),
                values: Matrix::from_rows(&head_rows).expect("rectangular"),
            },
            ReturnsMatrix {
                tickers: self.tickers.clone(),
                dates: self.dates[t..].to_vec(),
                values: Matrix::from_rows(&tail_rows).expect("rectangular"),
            },
        ))
    }
}

/// Estimated mean and covariance with the applied ridge recorded.
#[derive(Debug, Clone)]
pub struct MomentEstimate {
    pub mean: Vector,
    pub cov: SpdMatrix,
    pub sample_count: usize,
    /// Ridge added to the covariance diagonal (0 when none was needed).
    pub regularization: f64,
}

/// Parse a returns CSV: UTF-8, comma separated, header `date,T1,...,Tn`, one
/// row per period, returns as decimal fractions, no quoting, no gaps.
pub fn load_returns_csv(path: &Path) -> Result<ReturnsMatrix, DataError> {
    let text = std::fs::read_to_string(path)?;
    parse_returns_csv(&text)
}

pub fn parse_returns_csv(text: &str) -> Result<ReturnsMatrix, DataError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| DataError::BadHeader("empty file".into()))?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < 2 || fields[0].trim() != "date" {
        return Err(DataError::BadHeader(format!(
            "expected \"date,TICKER1,...\", got {header:?}"
        )));
    }
    let tickers: Vec<String> = fields[1..].iter().map(|s| s.trim().to_string()).collect();
    if tickers.iter().any(|t| t.is_empty()) {
        return Err(DataError::BadHeader("empty ticker name".into()));
    }
    let n = tickers.len();

    let line_count = text.lines().count();
    let cells = line_count * (n + 1);
    if cells > MAX_CSV_CELLS {
        return Err(DataError::FileTooLarge {
            cells,
            limit: MAX_CSV_CELLS,
        });
    }

    let mut dates: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        let row_no = idx + 1; // 1-based file line
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != n + 1 {
            return Err(DataError::Parse {
                row: row_no,
                col: cols.len().min(n + 1),
                message: format!("expected {} fields, got {}", n + 1, cols.len()),
            });
        }
        let date = cols[0].trim().to_string();
        if date.is_empty() {
            return Err(DataError::Parse {
                row: row_no,
                col: 1,
                message: "empty date".into(),
            });
        }
        if let Some(last) = dates.last() {
            if date <= *last {
                return Err(DataError::NonMonotoneDates { row: row_no, date });
            }
        }
        let mut row = Vec::with_capacity(n);
        for (j, cell) in cols[1..].iter().enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                return Err(DataError::Parse {
                    row: row_no,
                    col: j + 2,
                    message: "blank cell".into(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| DataError::Parse {
                row: row_no,
                col: j + 2,
                message: format!("not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(DataError::Parse {
                    row: row_no,
                    col: j + 2,
                    message: format!("non-finite value: {cell:?}"),
                });
            }
            row.push(v);
        }
        dates.push(date);
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(DataError::TooFewRows { rows: rows.len() });
    }
    Ok(ReturnsMatrix {
        tickers,
        dates,
        values: Matrix::from_rows(&rows).expect("rectangular"),
    })
}

/// Column means and the unbiased sample covariance (divisor T - 1) plus
/// `ridge` times the identity; positive definiteness is certified by the
/// Cholesky construction.
pub fn estimate_moments(r: &ReturnsMatrix, ridge: f64) -> Result<MomentEstimate, DataError> {
    let t = r.periods();
    let n = r.assets();
    if t < 2 {
        return Err(DataError::TooFewRows { rows: t });
    }
    let mut mean = vec![0.0; n];
    for i in 0..t {
        for (m, v) in mean.iter_mut().zip(r.values.row(i)) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= t as f64;
    }
    let mut cov = vec![0.0; n * n];
    for i in 0..t {
        let row = r.values.row(i);
        for p in 0..n {
            let dp = row[p] - mean[p];
            for q in p..n {
                cov[p * n + q] += dp * (row[q] - mean[q]);
            }
        }
    }
    let denom = (t - 1) as f64;
    for p in 0..n {
        for q in p..n {
            let v = cov[p * n + q] / denom + if p == q { ridge } else { 0.0 };
            cov[p * n + q] = v;
            cov[q * n + p] = v;
        }
    }
    match SpdMatrix::from_flat(n, cov) {
        Ok(spd) => Ok(MomentEstimate {
            mean: Vector::from_raw(mean),
            cov: spd,
            sample_count: t,
            regularization: ridge,
        }),
        Err(_) => Err(DataError::DegenerateCovariance { ridge }),
    }
}

/// Moment estimation with the default ridge policy: none when the raw
/// covariance is already positive definite, otherwise the minimal
/// `1e-8 * trace / n` bump, recorded in the estimate.
pub fn estimate_moments_auto(r: &ReturnsMatrix) -> Result<MomentEstimate, DataError> {
    match estimate_moments(r, 0.0) {
        Ok(e) => Ok(e),
        Err(DataError::DegenerateCovariance { .. }) => {
            let n = r.assets();
            let t = r.periods();
            // trace of the raw covariance = sum of column variances
            let mut mean = vec![0.0; n];
            for i in 0..t {
                for (m, v) in mean.iter_mut().zip(r.values.row(i)) {
                    *m += v;
                }
            }
            for m in mean.iter_mut() {
                *m /= t as f64;
            }
            let mut trace = 0.0;
            for i in 0..t {
                let row = r.values.row(i);
                for p in 0..n {
                    trace += (row[p] - mean[p]).powi(2);
                }
            }
            trace /= (t - 1) as f64;
            let ridge = 1e-8 * trace / n as f64;
            estimate_moments(r, ridge)
        }
        Err(e) => Err(e),
    }
}

/// Nominal and worst-case return of portfolio x under the given moments:
/// `(mean . x, mean . x - alpha_eval * sqrt(x' cov x))`.
pub fn evaluate_out_of_sample(
    x: &Vector,
    out: &MomentEstimate,
    alpha_eval: f64,
) -> Result<(f64, f64), Error> {
    let a0 = out.mean.scale(-1.0);
    evaluate_point(x, &a0, &out.cov, alpha_eval)
}

/// Synthetic daily returns from a small factor model, fully determined by the
/// seed: per-asset drifts, factor loadings, factor shocks, and idiosyncratic
/// noise all come from the same stream. Idiosyncratic variance dominates the
/// factor block, which keeps the sample covariance well conditioned.
pub fn synthetic_factor_returns(
    n: usize,
    periods: usize,
    factors: usize,
    seed: u64,
) -> ReturnsMatrix {
    let mut stream = SeedStream::new(seed);
    let drift: Vec<f64> = (0..n).map(|_| stream.uniform(0.0002, 0.0012)).collect();
    let loadings: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..factors).map(|_| stream.uniform(0.2, 1.0)).collect())
        .collect();
    let idio: Vec<f64> = (0..n).map(|_| stream.uniform(0.008, 0.02)).collect();
    let factor_vol = 0.004;

    let mut rows = Vec::with_capacity(periods);
    for _ in 0..periods {
        let shocks: Vec<f64> = (0..factors).map(|_| factor_vol * stream.gaussian()).collect();
        let row: Vec<f64> = (0..n)
            .map(|i| {
                let common: f64 = loadings[i]
                    .iter()
                    .zip(&shocks)
                    .map(|(l, s)| l * s)
                    .sum();
                drift[i] + common + idio[i] * stream.gaussian()
            })
            .collect();
        rows.push(row);
    }
    let dates: Vec<String> = (0..periods).map(synthetic_date).collect();
    let tickers: Vec<String> = (0..n).map(|i| format!("A{:02}", i + 1)).collect();
    ReturnsMatrix {
        tickers,
        dates,
        values: Matrix::from_rows(&rows).expect("rectangular"),
    }
}

/// Valid, strictly increasing ISO dates on a 28-day-month calendar.
fn synthetic_date(t: usize) -> String {
    let year = 2000 + t / 336;
    let month = 1 + (t % 336) / 28;
    let day = 1 + t % 28;
    format!("{year:04}-{month:02}-{day:02}")
}

/// Render a returns matrix back to the CSV interchange format.
pub fn returns_to_csv(r: &ReturnsMatrix) -> String {
    let mut out = String::from("date");
    for t in &r.tickers {
        out.push(',');
        out.push_str(t);
    }
    out.push('\n');
    for i in 0..r.periods() {
        out.push_str(&r.dates[i]);
        for v in r.values.row(i) {
            out.push(',');
            out.push_str(&format!("{v:.10}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_well_formed_two_by_two() {
        let r = parse_returns_csv("date,AA,BB\n2024-01-01,0.01,-0.02\n2024-01-02,0.00,0.03\n")
            .unwrap();
        assert_eq!(r.periods(), 2);
        assert_eq!(r.assets(), 2);
        assert_eq!(r.tickers, vec!["AA", "BB"]);
        assert_eq!(r.values.get(1, 1), 0.03);
    }

    #[test]
    fn blank_cell_names_row_and_column() {
        let err =
            parse_returns_csv("date,AA,BB\n2024-01-01,0.01,\n2024-01-02,0.0,0.0\n").unwrap_err();
        match err {
            DataError::Parse { row, col, .. } => {
                assert_eq!(row, 2);
                assert_eq!(col, 3);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicate_date_is_non_monotone() {
        let err = parse_returns_csv(
            "date,AA\n2024-01-01,0.01\n2024-01-01,0.02\n2024-01-03,0.0\n",
        )
        .unwrap_err();
        assert!(matches!(err, DataError::NonMonotoneDates { row: 3, .. }), "{err}");
    }

    #[test]
    fn single_row_is_too_few() {
        let err = parse_returns_csv("date,AA\n2024-01-01,0.01\n").unwrap_err();
        assert!(matches!(err, DataError::TooFewRows { rows: 1 }));
    }

    #[test]
    fn rank_one_covariance_is_degenerate_without_ridge() {
        let r = parse_returns_csv("date,AA,BB\n2024-01-01,0.0,0.0\n2024-01-02,2.0,2.0\n").unwrap();
        let err = estimate_moments(&r, 0.0).unwrap_err();
        assert!(matches!(err, DataError::DegenerateCovariance { .. }), "{err}");

        let est = estimate_moments(&r, 1e-6).unwrap();
        assert_eq!(est.mean.as_slice(), &[1.0, 1.0]);
        assert!((est.cov.get(0, 0) - (2.0 + 1e-6)).abs() < 1e-12);
        assert!((est.cov.get(0, 1) - 2.0).abs() < 1e-12);
        assert_eq!(est.regularization, 1e-6);
    }

    #[test]
    fn auto_ridge_applies_minimal_bump() {
        let r = parse_returns_csv("date,AA,BB\n2024-01-01,0.0,0.0\n2024-01-02,2.0,2.0\n").unwrap();
        let est = estimate_moments_auto(&r).unwrap();
        assert!(est.regularization > 0.0);
        assert!((est.regularization - 1e-8 * 4.0 / 2.0).abs() < 1e-20);
    }

    #[test]
    fn moments_match_independent_two_pass_computation() {
        let r = synthetic_factor_returns(5, 500, 2, 77);
        let est = estimate_moments(&r, 0.0).unwrap();
        let t = r.periods();
        let n = r.assets();
        // independent two-pass mean / covariance
        for p in 0..n {
            let mean: f64 = (0..t).map(|i| r.values.get(i, p)).sum::<f64>() / t as f64;
            assert!((mean - est.mean[p]).abs() < 1e-12);
            for q in 0..n {
                let mq: f64 = (0..t).map(|i| r.values.get(i, q)).sum::<f64>() / t as f64;
                let cov: f64 = (0..t)
                    .map(|i| (r.values.get(i, p) - mean) * (r.values.get(i, q) - mq))
                    .sum::<f64>()
                    / (t - 1) as f64;
                assert!(
                    (cov - est.cov.get(p, q)).abs() < 1e-12,
                    "cov({p},{q}) {} vs {}",
                    cov,
                    est.cov.get(p, q)
                );
            }
        }
    }

    #[test]
    fn moment_estimates_are_permutation_equivariant() {
        let r = synthetic_factor_returns(4, 60, 2, 3);
        let est = estimate_moments(&r, 0.0).unwrap();
        // swap columns 1 and 3
        let perm = [3usize, 1, 2, 0];
        let rows: Vec<Vec<f64>> = (0..r.periods())
            .map(|i| perm.iter().map(|&j| r.values.get(i, j)).collect())
            .collect();
        let permuted = ReturnsMatrix {
            tickers: perm.iter().map(|&j| r.tickers[j].clone()).collect(),
            dates: r.dates.clone(),
            values: Matrix::from_rows(&rows).unwrap(),
        };
        let est_p = estimate_moments(&permuted, 0.0).unwrap();
        for (a, &pa) in perm.iter().enumerate() {
            assert!((est_p.mean[a] - est.mean[pa]).abs() < 1e-15);
            for (b, &pb) in perm.iter().enumerate() {
                assert!((est_p.cov.get(a, b) - est.cov.get(pa, pb)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn out_of_sample_sign_convention() {
        let r = synthetic_factor_returns(3, 100, 1, 9);
        let est = estimate_moments(&r, 0.0).unwrap();
        let x = Vector::from_raw(vec![1.0, 0.0, 0.0]);
        let (nominal, worst) = evaluate_out_of_sample(&x, &est, 0.0).unwrap();
        assert!((nominal - est.mean[0]).abs() < 1e-15);
        assert_eq!(nominal, worst);
        let (nominal2, worst2) = evaluate_out_of_sample(&x, &est, 1.5).unwrap();
        assert_eq!(nominal, nominal2);
        let expected = nominal - 1.5 * est.cov.get(0, 0).sqrt();
        assert!((worst2 - expected).abs() < 1e-14);
    }

    #[test]
    fn in_sample_evaluation_reproduces_frontier_metrics() {
        use crate::domains::DomainSpec;
        use crate::frontier::{solve_pareto_exact, EllipsoidalSet};
        let r = synthetic_factor_returns(5, 300, 2, 21);
        let est = estimate_moments_auto(&r).unwrap();
        let a0 = est.mean.scale(-1.0);
        let domain = DomainSpec::simplex(5).unwrap();
        for alpha in [0.01, 0.05] {
            let u = EllipsoidalSet::new(est.cov.clone(), alpha).unwrap();
            let p = solve_pareto_exact(&a0, &u, &domain).unwrap();
            let (nominal, worst) = evaluate_out_of_sample(&p.x, &est, alpha).unwrap();
            assert!((nominal - p.efficiency).abs() <= 1e-10);
            assert!((worst - p.robustness).abs() <= 1e-10);
        }
    }

    #[test]
    fn csv_round_trip_is_stable() {
        let r = synthetic_factor_returns(3, 10, 1, 5);
        let text = returns_to_csv(&r);
        let back = parse_returns_csv(&text).unwrap();
        assert_eq!(back.tickers, r.tickers);
        assert_eq!(back.dates, r.dates);
        for i in 0..r.periods() {
            for j in 0..r.assets() {
                assert!((back.values.get(i, j) - r.values.get(i, j)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn oversized_file_is_rejected() {
        // header with 10_000 tickers and 1_001 lines exceeds the cell limit
        let mut text = String::from("date");
        for i in 0..10_000 {
            text.push_str(&format!(",T{i}"));
        }
        text.push('\n');
        let row = format!("2024-01-01{}\n", ",0.0".repeat(10_000));
        for _ in 0..1_000 {
            text.push_str(&row);
        }
        let err = parse_returns_csv(&text).unwrap_err();
        assert!(matches!(err, DataError::FileTooLarge { .. }), "{err}");
    }
}

//! Assembly of problem instances from configuration: inline vectors and
//! matrices, seeded generators, or a returns file split into in- and
//! out-of-sample windows.

use std::path::Path;

use frontier_core::domains::DomainSpec;
use frontier_core::portfolio::{
    estimate_moments, estimate_moments_auto, load_returns_csv, synthetic_factor_returns,
    MomentEstimate, ReturnsMatrix,
};
use frontier_core::{instances, Matrix, SpdMatrix, Vector};

use crate::config::{parse_f64_list, parse_matrix, Settings, UsageError, UsageResult};

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

/// Cost vector and uncertainty shape, with the returns pipeline metadata when
/// the instance came from data.
pub struct Instance {
    pub a0: Vector,
    pub sigma: SpdMatrix,
    pub returns: Option<ReturnsPipeline>,
}

/// Moments of the two data windows.
pub struct ReturnsPipeline {
    pub in_moments: MomentEstimate,
    pub out_moments: MomentEstimate,
    pub split: usize,
    pub periods: usize,
    pub tickers: Vec<String>,
}

/// Load returns from `returns = <path> | synthetic:<n>:<T>:<seed>`.
pub fn load_returns(spec: &str) -> UsageResult<ReturnsMatrix> {
    if let Some(rest) = spec.strip_prefix("synthetic:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(usage(format!(
                "returns: expected synthetic:<n>:<T>:<seed>, got {spec:?}"
            )));
        }
        let n: usize = parts[0]
            .parse()
            .map_err(|_| usage(format!("returns: bad asset count {:?}", parts[0])))?;
        let t: usize = parts[1]
            .parse()
            .map_err(|_| usage(format!("returns: bad period count {:?}", parts[1])))?;
        let seed: u64 = parts[2]
            .parse()
            .map_err(|_| usage(format!("returns: bad seed {:?}", parts[2])))?;
        Ok(synthetic_factor_returns(n, t, 3, seed))
    } else {
        load_returns_csv(Path::new(spec)).map_err(|e| usage(format!("returns {spec:?}: {e}")))
    }
}

/// Build moments for both windows, honoring `ridge = auto | <value>`.
pub fn build_pipeline(settings: &Settings) -> UsageResult<Option<ReturnsPipeline>> {
    let Some(spec) = settings.get("returns") else {
        return Ok(None);
    };
    let returns = load_returns(spec)?;
    let periods = returns.periods();
    let split = settings
        .get_usize("split")?
        .unwrap_or_else(|| periods * 4 / 5);
    let (head, tail) = returns
        .split_at(split)
        .map_err(|e| usage(format!("split {split}: {e}")))?;
    let ridge = settings.get("ridge").unwrap_or("auto");
    let estimate = |r: &ReturnsMatrix| -> UsageResult<MomentEstimate> {
        if ridge == "auto" {
            estimate_moments_auto(r).map_err(|e| usage(format!("moment estimation: {e}")))
        } else {
            let v: f64 = ridge
                .parse()
                .map_err(|_| usage(format!("ridge: expected auto or a number, got {ridge:?}")))?;
            estimate_moments(r, v).map_err(|e| usage(format!("moment estimation: {e}")))
        }
    };
    let in_moments = estimate(&head)?;
    let out_moments = estimate(&tail)?;
    Ok(Some(ReturnsPipeline {
        in_moments,
        out_moments,
        split,
        periods,
        tickers: returns.tickers,
    }))
}

/// Resolve the instance: a returns pipeline wins (loss convention
/// `a0 = -mean_in`, shape `Sigma_in`), then inline `a0`/`sigma`, then the
/// seeded generator `gen = diag`.
pub fn build_instance(settings: &Settings, seed: u64) -> UsageResult<Instance> {
    if let Some(pipeline) = build_pipeline(settings)? {
        let a0 = pipeline.in_moments.mean.scale(-1.0);
        let sigma = pipeline.in_moments.cov.clone();
        return Ok(Instance {
            a0,
            sigma,
            returns: Some(pipeline),
        });
    }

    if let Some(a0_text) = settings.get("a0") {
        let a0 = Vector::new(parse_f64_list(a0_text).map_err(|e| usage(format!("a0: {e}")))?)
            .map_err(|e| usage(format!("a0: {e}")))?;
        let sigma = if let Some(d) = settings.get("sigma_diag") {
            let diag = parse_f64_list(d).map_err(|e| usage(format!("sigma_diag: {e}")))?;
            SpdMatrix::diagonal(&diag).map_err(|e| usage(format!("sigma_diag: {e}")))?
        } else if let Some(m) = settings.get("sigma") {
            let rows = parse_matrix(m).map_err(|e| usage(format!("sigma: {e}")))?;
            SpdMatrix::from_rows(&rows).map_err(|e| usage(format!("sigma: {e}")))?
        } else {
            return Err(usage("a0 given without sigma or sigma_diag"));
        };
        if sigma.dim() != a0.dim() {
            return Err(usage(format!(
                "a0 has dimension {}, sigma {}",
                a0.dim(),
                sigma.dim()
            )));
        }
        return Ok(Instance {
            a0,
            sigma,
            returns: None,
        });
    }

    match settings.get("gen") {
        Some("diag") => {
            let n = settings
                .get_usize("n")?
                .ok_or_else(|| usage("gen = diag requires n"))?;
            let (a0, sigma) = instances::diag_instance(seed, n);
            Ok(Instance {
                a0,
                sigma,
                returns: None,
            })
        }
        Some(other) => Err(usage(format!("unknown generator {other:?} (try diag)"))),
        None => Err(usage(
            "no instance source: give returns, a0 + sigma/sigma_diag, or gen = diag with n",
        )),
    }
}

/// Parse `domain = simplex | scaled-simplex:<cap> |
/// box-simplex:<lo>:<hi>:<cash_lo>:<cash_hi>` or a polyhedron given by
/// `poly_a` rows and `poly_d`.
pub fn build_domain(settings: &Settings, n: usize) -> UsageResult<DomainSpec> {
    if let Some(rows_text) = settings.get("poly_a") {
        let rows = parse_matrix(rows_text).map_err(|e| usage(format!("poly_a: {e}")))?;
        let d_text = settings
            .get("poly_d")
            .ok_or_else(|| usage("poly_a given without poly_d"))?;
        let d = parse_f64_list(d_text).map_err(|e| usage(format!("poly_d: {e}")))?;
        let a = Matrix::from_rows(&rows).map_err(|e| usage(format!("poly_a: {e}")))?;
        if a.cols() != n {
            return Err(usage(format!("poly_a has {} columns, need {n}", a.cols())));
        }
        let d = Vector::new(d).map_err(|e| usage(format!("poly_d: {e}")))?;
        return DomainSpec::polyhedron(a, d).map_err(|e| usage(format!("polyhedron: {e}")));
    }
    let spec = settings.get("domain").unwrap_or("simplex");
    if spec == "simplex" {
        return DomainSpec::simplex(n).map_err(|e| usage(format!("domain: {e}")));
    }
    if let Some(cap) = spec.strip_prefix("scaled-simplex:") {
        let cap: f64 = cap
            .parse()
            .map_err(|_| usage(format!("domain: bad cap {cap:?}")))?;
        return DomainSpec::scaled_simplex(n, cap).map_err(|e| usage(format!("domain: {e}")));
    }
    if let Some(rest) = spec.strip_prefix("box-simplex:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 4 {
            return Err(usage(format!(
                "domain: expected box-simplex:<lo>:<hi>:<cash_lo>:<cash_hi>, got {spec:?}"
            )));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| usage(format!("domain: bad bound {p:?}")))
            })
            .collect::<UsageResult<_>>()?;
        return DomainSpec::box_simplex(
            Vector::constant(n, nums[0]),
            Vector::constant(n, nums[1]),
            nums[2],
            nums[3],
        )
        .map_err(|e| usage(format!("domain: {e}")));
    }
    Err(usage(format!("unknown domain {spec:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_instance_with_diagonal_shape() {
        let s = Settings::parse("a0 = -1, 0.5\nsigma_diag = 1, 2\n", "t").unwrap();
        let inst = build_instance(&s, 0).unwrap();
        assert_eq!(inst.a0.as_slice(), &[-1.0, 0.5]);
        assert_eq!(inst.sigma.get(1, 1), 2.0);
    }

    #[test]
    fn generator_requires_dimension() {
        let s = Settings::parse("gen = diag\n", "t").unwrap();
        assert!(build_instance(&s, 1).is_err());
        let s = Settings::parse("gen = diag\nn = 4\n", "t").unwrap();
        let inst = build_instance(&s, 7).unwrap();
        assert_eq!(inst.a0.dim(), 4);
    }

    #[test]
    fn synthetic_returns_pipeline_splits() {
        let s = Settings::parse("returns = synthetic:3:50:9\nsplit = 40\n", "t").unwrap();
        let inst = build_instance(&s, 0).unwrap();
        let p = inst.returns.unwrap();
        assert_eq!(p.in_moments.sample_count, 40);
        assert_eq!(p.out_moments.sample_count, 10);
        // loss convention
        assert_eq!(inst.a0[0], -p.in_moments.mean[0]);
    }

    #[test]
    fn domain_parsing_variants() {
        let s = Settings::parse("domain = scaled-simplex:2.5\n", "t").unwrap();
        match build_domain(&s, 3).unwrap() {
            DomainSpec::ScaledSimplex { dim, cap } => {
                assert_eq!(dim, 3);
                assert_eq!(cap, 2.5);
            }
            other => panic!("unexpected {other:?}"),
        }
        let s = Settings::parse("domain = box-simplex:-0.2:0.6:0:0.3\n", "t").unwrap();
        assert!(matches!(
            build_domain(&s, 3).unwrap(),
            DomainSpec::BoxSimplex { .. }
        ));
        let s = Settings::parse("poly_a = 1,1;0.5,2\npoly_d = 1,2\n", "t").unwrap();
        assert!(matches!(
            build_domain(&s, 2).unwrap(),
            DomainSpec::Polyhedron { .. }
        ));
    }
}

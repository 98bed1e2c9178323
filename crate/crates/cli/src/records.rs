//! Output records and file writing.
//!
//! Every record carries the command name, a schema version, the seed, and the
//! solver tolerances, then its own `kind`-specific payload. JSON-lines is the
//! default interchange format (one record per line, streamable); CSV keeps
//! point-like rows for spreadsheets and tucks the non-tabular records into
//! `#`-prefixed comment lines. Files are written to a temporary name and
//! renamed into place so a failed run never leaves a partial file.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Clone, Copy)]
pub struct Tolerances {
    pub subproblem: f64,
    pub exact_solve: f64,
}

#[derive(Serialize, Clone)]
pub struct Header {
    pub command: String,
    pub schema_version: u32,
    pub seed: u64,
    pub tolerances: Tolerances,
}

#[derive(Serialize)]
pub struct FrontierPointRecord {
    #[serde(flatten)]
    pub header: Header,
    pub kind: &'static str, // "point"
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    pub alpha_eval: f64,
    pub efficiency: f64,
    pub robustness: f64,
    pub nominal_cost: f64,
    pub std_term: f64,
    pub upsilon: f64,
    pub x: Vec<f64>,
}

#[derive(Serialize)]
pub struct MatchRecord {
    #[serde(flatten)]
    pub header: Header,
    pub kind: &'static str, // "match"
    pub k: usize,
    pub alpha: f64,
    pub x_gap: f64,
    pub efficiency_gap: f64,
    pub robustness_gap: f64,
}

#[derive(Serialize)]
pub struct CompareSummaryRecord {
    #[serde(flatten)]
    pub header: Header,
    pub kind: &'static str, // "summary"
    pub points: usize,
    pub max_x_gap: f64,
    pub max_efficiency_gap: f64,
    pub max_robustness_gap: f64,
}

#[derive(Serialize)]
pub struct SaddlePointRecord {
    #[serde(flatten)]
    pub header: Header,
    pub kind: &'static str, // "point"
    pub alpha: f64,
    pub beta: f64,
    pub objective: f64,
    pub gap_estimate: f64,
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub direct_x: Vec<f64>,
    pub x_gap: f64,
}

#[derive(Serialize, Clone)]
pub struct SandwichAlphaEntry {
    pub alpha: f64,
    pub r_inner: f64,
    pub r_poly: f64,
    pub r_outer: f64,
    pub ordering_holds: bool,
}

#[derive(Serialize)]
pub struct SandwichTrialRecord {
    #[serde(flatten)]
    pub header: Header,
    pub kind: &'static str, // "trial"
    pub trial: usize,
    pub kappa: f64,
    pub containment: bool,
    pub ordering_all: bool,
    pub per_alpha: Vec<SandwichAlphaEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Serialize)]
pub struct SandwichSummaryRecord {
    #[serde(flatten)]
    pub header: Header,
    pub kind: &'static str, // "summary"
    pub trials: usize,
    pub m: usize,
    pub n: usize,
    pub epsilon: f64,
    pub kappa: f64,
    pub inner_cap: f64,
    pub ordering_frequency: f64,
    pub containment_frequency: f64,
}

#[derive(Serialize)]
pub struct PortfolioMetaRecord {
    #[serde(flatten)]
    pub header: Header,
    pub kind: &'static str, // "meta"
    pub alpha_eval: f64,
    pub ridge_in: f64,
    pub ridge_out: f64,
    /// Which window's covariance shapes the worst-case evaluation.
    pub worst_case_shape: &'static str,
    pub split: usize,
    pub periods: usize,
    pub tickers: Vec<String>,
}

#[derive(Serialize)]
pub struct PortfolioPointRecord {
    #[serde(flatten)]
    pub header: Header,
    pub kind: &'static str, // "point"
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub alpha: f64,
    pub alpha_eval: f64,
    pub in_nominal_return: f64,
    pub in_worst_case_return: f64,
    pub out_nominal_return: f64,
    pub out_worst_case_return: f64,
    pub x: Vec<f64>,
}

/// One output record of any kind.
pub enum Record {
    FrontierPoint(FrontierPointRecord),
    Match(MatchRecord),
    CompareSummary(CompareSummaryRecord),
    SaddlePoint(SaddlePointRecord),
    SandwichTrial(SandwichTrialRecord),
    SandwichSummary(SandwichSummaryRecord),
    PortfolioMeta(PortfolioMetaRecord),
    PortfolioPoint(PortfolioPointRecord),
}

impl Record {
    pub fn to_json(&self) -> String {
        match self {
            Record::FrontierPoint(r) => serde_json::to_string(r),
            Record::Match(r) => serde_json::to_string(r),
            Record::CompareSummary(r) => serde_json::to_string(r),
            Record::SaddlePoint(r) => serde_json::to_string(r),
            Record::SandwichTrial(r) => serde_json::to_string(r),
            Record::SandwichSummary(r) => serde_json::to_string(r),
            Record::PortfolioMeta(r) => serde_json::to_string(r),
            Record::PortfolioPoint(r) => serde_json::to_string(r),
        }
        .expect("records serialize")
    }

    /// CSV projection: tabular kinds yield (header, row); the rest become
    /// comment lines carrying their JSON form.
    fn to_csv(&self) -> CsvLine {
        fn join(xs: &[f64]) -> String {
            xs.iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(";")
        }
        match self {
            Record::FrontierPoint(r) => CsvLine::Row {
                header: "kind,source,k,alpha,omega,alpha_eval,efficiency,robustness,nominal_cost,std_term,upsilon,x",
                row: format!(
                    "point,{},{},{},{},{},{},{},{},{},{},{}",
                    r.source,
                    r.k.map_or(String::new(), |k| k.to_string()),
                    r.alpha,
                    r.omega.map_or(String::new(), |w| w.to_string()),
                    r.alpha_eval,
                    r.efficiency,
                    r.robustness,
                    r.nominal_cost,
                    r.std_term,
                    r.upsilon,
                    join(&r.x)
                ),
            },
            Record::Match(r) => CsvLine::Row {
                header: "kind,k,alpha,x_gap,efficiency_gap,robustness_gap",
                row: format!(
                    "match,{},{},{},{},{}",
                    r.k, r.alpha, r.x_gap, r.efficiency_gap, r.robustness_gap
                ),
            },
            Record::SaddlePoint(r) => CsvLine::Row {
                header: "kind,alpha,beta,objective,gap_estimate,x,lambda,direct_x,x_gap",
                row: format!(
                    "point,{},{},{},{},{},{},{},{}",
                    r.alpha,
                    r.beta,
                    r.objective,
                    r.gap_estimate,
                    join(&r.x),
                    join(&r.lambda),
                    join(&r.direct_x),
                    r.x_gap
                ),
            },
            Record::PortfolioPoint(r) => CsvLine::Row {
                header: "kind,source,k,alpha,alpha_eval,in_nominal_return,in_worst_case_return,out_nominal_return,out_worst_case_return,x",
                row: format!(
                    "point,{},{},{},{},{},{},{},{},{}",
                    r.source,
                    r.k.map_or(String::new(), |k| k.to_string()),
                    r.alpha,
                    r.alpha_eval,
                    r.in_nominal_return,
                    r.in_worst_case_return,
                    r.out_nominal_return,
                    r.out_worst_case_return,
                    join(&r.x)
                ),
            },
            Record::SandwichTrial(r) => {
                let mut rows = Vec::new();
                for e in &r.per_alpha {
                    rows.push(format!(
                        "trial,{},{},{},{},{},{},{},{}",
                        r.trial,
                        r.kappa,
                        r.containment,
                        e.alpha,
                        e.r_inner,
                        e.r_poly,
                        e.r_outer,
                        e.ordering_holds
                    ));
                }
                CsvLine::Rows {
                    header: "kind,trial,kappa,containment,alpha,r_inner,r_poly,r_outer,ordering_holds",
                    rows,
                }
            }
            other => CsvLine::Comment(other.to_json()),
        }
    }
}

enum CsvLine {
    Row { header: &'static str, row: String },
    Rows { header: &'static str, rows: Vec<String> },
    Comment(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OutputFormat {
    JsonLines,
    Csv,
}

impl OutputFormat {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "jsonl" | "json-lines" => Some(OutputFormat::JsonLines),
            "csv" => Some(OutputFormat::Csv),
            _ => None,
        }
    }
}

/// Render all records in the requested format.
pub fn render(records: &[Record], format: OutputFormat) -> String {
    match format {
        OutputFormat::JsonLines => {
            let mut out = String::new();
            for r in records {
                out.push_str(&r.to_json());
                out.push('\n');
            }
            out
        }
        OutputFormat::Csv => {
            let mut out = String::new();
            let mut wrote_header: Option<&'static str> = None;
            for r in records {
                match r.to_csv() {
                    CsvLine::Comment(text) => {
                        out.push_str("# ");
                        out.push_str(&text);
                        out.push('\n');
                    }
                    CsvLine::Row { header, row } => {
                        if wrote_header != Some(header) {
                            out.push_str(header);
                            out.push('\n');
                            wrote_header = Some(header);
                        }
                        out.push_str(&row);
                        out.push('\n');
                    }
                    CsvLine::Rows { header, rows } => {
                        if wrote_header != Some(header) {
                            out.push_str(header);
                            out.push('\n');
                            wrote_header = Some(header);
                        }
                        for row in rows {
                            out.push_str(&row);
                            out.push('\n');
                        }
                    }
                }
            }
            out
        }
    }
}

/// Write to `<path>.tmp` then rename over the target.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

//! On-disk formats. JSON reals use the shortest representation that
//! round-trips; CSV reals use 17 significant digits.

use std::fmt::Write as _;

use odeig::{Eigenpair, MatchReport, Matrix, OrthoDiagDecomp, StabilityReport};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompFile {
    pub schema: u32,
    pub order: usize,
    pub dim: usize,
    pub rank: usize,
    pub lambdas: Vec<f64>,
    pub u_columns: Vec<Vec<f64>>,
}

impl DecompFile {
    pub fn from_decomp(d: &OrthoDiagDecomp) -> Self {
        Self {
            schema: SCHEMA,
            order: d.order(),
            dim: d.dim(),
            rank: d.rank(),
            lambdas: d.lambdas().to_vec(),
            u_columns: (0..d.rank()).map(|i| d.column(i)).collect(),
        }
    }

    /// Checks every field against the header, then the decomposition
    /// invariants.
    pub fn into_decomp(self) -> Result<OrthoDiagDecomp, CliError> {
        if self.schema != SCHEMA {
            return Err(CliError::new(format!(
                "schema: unsupported version {} (expected {SCHEMA})",
                self.schema
            )));
        }
        if self.order < 3 {
            return Err(CliError::new(format!(
                "order: tensor order m must be >= 3 (got {})",
                self.order
            )));
        }
        if self.rank == 0 || self.rank > self.dim {
            return Err(CliError::new(format!(
                "rank: need 1 <= rank <= dim (got rank {}, dim {})",
                self.rank, self.dim
            )));
        }
        if self.lambdas.len() != self.rank {
            return Err(CliError::new(format!(
                "lambdas: expected {} entries, found {}",
                self.rank,
                self.lambdas.len()
            )));
        }
        if self.u_columns.len() != self.rank {
            return Err(CliError::new(format!(
                "u_columns: expected {} columns, found {}",
                self.rank,
                self.u_columns.len()
            )));
        }
        for (i, c) in self.u_columns.iter().enumerate() {
            if c.len() != self.dim {
                return Err(CliError::new(format!(
                    "u_columns[{i}]: expected {} entries, found {}",
                    self.dim,
                    c.len()
                )));
            }
        }
        let u = Matrix::from_columns(&self.u_columns)
            .map_err(|e| CliError::new(format!("u_columns: {e}")))?;
        let d = OrthoDiagDecomp::new(self.order, u, self.lambdas)?;
        let violations = d.validate();
        if !violations.is_empty() {
            let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(CliError::new(format!(
                "invalid decomposition: {}",
                list.join("; ")
            )));
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairRow {
    pub k: usize,
    /// 1-based.
    pub indices: Vec<usize>,
    pub signs: Option<Vec<i8>>,
    pub lambda: f64,
    pub u: Vec<f64>,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum_predicted: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum_computed: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrity_failure: Option<String>,
}

impl PairRow {
    pub fn from_pair(p: &Eigenpair) -> Self {
        Self {
            k: p.k(),
            indices: p.selection.indices().iter().map(|i| i + 1).collect(),
            signs: p.signs.clone(),
            lambda: p.eigenvalue,
            u: p.eigenvector.clone(),
            residual: p.residual,
            classification: None,
            spectrum_predicted: None,
            spectrum_computed: None,
            spectrum_error: None,
            integrity_failure: None,
        }
    }

    pub fn with_stability(mut self, rep: &StabilityReport) -> Self {
        self.classification = Some(rep.classification.label().to_string());
        self.spectrum_predicted = Some(rep.predicted.values());
        self.spectrum_computed = Some(rep.computed_spectrum.eigenvalues.clone());
        self.spectrum_error = Some(rep.spectrum_match_error);
        self.integrity_failure = rep.integrity_failure.clone();
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairReport {
    pub schema: u32,
    pub order: usize,
    pub dim: usize,
    pub rank: usize,
    pub real_class_count: usize,
    pub complex_class_count: u128,
    pub bound: u128,
    pub max_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrity_failures: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    pub pairs: Vec<PairRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscoveredRow {
    pub lambda: f64,
    pub u: Vec<f64>,
    pub restart: usize,
    pub hits: usize,
    pub residual: f64,
    /// `matched`, `unmatched` or `null-space`.
    pub status: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchRow {
    /// Position in `discovered`.
    pub discovered: usize,
    /// Position in the reference pair list.
    pub enumerated: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub order: usize,
    pub dim: usize,
    pub rank: usize,
    pub restarts: usize,
    pub seed: u64,
    pub shift: f64,
    pub nonconverged: usize,
    pub coverage: f64,
    pub complete: bool,
    pub discovered: Vec<DiscoveredRow>,
    pub matched: Vec<MatchRow>,
    pub unmatched_discovered: Vec<usize>,
    pub null_discovered: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_dump: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
}

impl VerifyReport {
    pub fn new(d: &OrthoDiagDecomp, seed: u64, rep: &MatchReport) -> Self {
        let discovered = rep
            .discovered
            .iter()
            .enumerate()
            .map(|(i, p)| DiscoveredRow {
                lambda: p.eigenvalue,
                u: p.eigenvector.clone(),
                restart: p.restart,
                hits: p.hits,
                residual: p.residual,
                status: if rep.unmatched_discovered.contains(&i) {
                    "unmatched"
                } else if rep.null_discovered.contains(&i) {
                    "null-space"
                } else {
                    "matched"
                },
            })
            .collect();
        Self {
            schema: SCHEMA,
            order: d.order(),
            dim: d.dim(),
            rank: d.rank(),
            restarts: rep.restarts,
            seed,
            shift: rep.shift,
            nonconverged: rep.nonconverged,
            coverage: rep.coverage,
            complete: rep.is_complete(),
            discovered,
            matched: rep
                .matched
                .iter()
                .map(|m| MatchRow {
                    discovered: m.discovered,
                    enumerated: m.enumerated,
                    distance: m.distance,
                })
                .collect(),
            unmatched_discovered: rep.unmatched_discovered.clone(),
            null_discovered: rep.null_discovered.clone(),
            trace_dump: None,
            generated_at_unix: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub order: usize,
    pub dim: usize,
    pub rank: usize,
    pub bound: u128,
    pub complex_class_count: u128,
    pub real_class_count: u128,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::new(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn reals(xs: &[f64]) -> String {
    xs.iter().map(|&x| real(x)).collect::<Vec<_>>().join(";")
}

fn signs_field(signs: &Option<Vec<i8>>) -> String {
    match signs {
        Some(s) => s
            .iter()
            .map(|&x| if x < 0 { "-" } else { "+" })
            .collect::<Vec<_>>()
            .join(";"),
        None => String::new(),
    }
}

fn csv_string(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::new(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::new(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::new(e.to_string()))
}

pub fn pairs_csv(report: &PairReport) -> Result<String, CliError> {
    let classified = report.pairs.iter().any(|p| p.classification.is_some());
    let mut header = vec!["k", "indices", "signs", "lambda", "u", "residual"];
    if classified {
        header.extend([
            "classification",
            "spectrum_predicted",
            "spectrum_computed",
            "spectrum_error",
            "integrity_failure",
        ]);
    }
    let rows = report.pairs.iter().map(|p| {
        let idx: Vec<String> = p.indices.iter().map(|i| i.to_string()).collect();
        let mut row = vec![
            p.k.to_string(),
            idx.join(";"),
            signs_field(&p.signs),
            real(p.lambda),
            reals(&p.u),
            real(p.residual),
        ];
        if classified {
            row.push(p.classification.clone().unwrap_or_default());
            row.push(
                p.spectrum_predicted
                    .as_deref()
                    .map(reals)
                    .unwrap_or_default(),
            );
            row.push(
                p.spectrum_computed
                    .as_deref()
                    .map(reals)
                    .unwrap_or_default(),
            );
            row.push(p.spectrum_error.map(real).unwrap_or_default());
            row.push(p.integrity_failure.clone().unwrap_or_default());
        }
        row
    });
    csv_string(&header, rows)
}

pub fn pairs_table(report: &PairReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "order {}  dim {}  rank {}  real classes {}  complex classes {}  bound {}  max residual {:.3e}",
        report.order,
        report.dim,
        report.rank,
        report.real_class_count,
        report.complex_class_count,
        report.bound,
        report.max_residual
    );
    let _ = writeln!(
        out,
        "{:>3}  {:<14}  {:<14}  {:>12}  {:>10}  classification",
        "k", "indices", "signs", "lambda", "residual"
    );
    for p in &report.pairs {
        let idx: Vec<String> = p.indices.iter().map(|i| i.to_string()).collect();
        let signs = match &p.signs {
            Some(_) => signs_field(&p.signs).replace(';', ""),
            None => "-".into(),
        };
        let _ = writeln!(
            out,
            "{:>3}  {:<14}  {:<14}  {:>12.6}  {:>10.2e}  {}",
            p.k,
            format!("{{{}}}", idx.join(",")),
            signs,
            p.lambda,
            p.residual,
            p.classification.as_deref().unwrap_or("")
        );
    }
    out
}

pub fn verify_csv(report: &VerifyReport) -> Result<String, CliError> {
    let header = [
        "discovered",
        "status",
        "lambda",
        "u",
        "restart",
        "hits",
        "residual",
    ];
    let rows = report.discovered.iter().enumerate().map(|(i, p)| {
        vec![
            i.to_string(),
            p.status.to_string(),
            real(p.lambda),
            reals(&p.u),
            p.restart.to_string(),
            p.hits.to_string(),
            real(p.residual),
        ]
    });
    csv_string(&header, rows)
}

pub fn verify_table(report: &VerifyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "restarts {}  seed {}  shift {:.6}  nonconverged {}  coverage {:.3}  complete {}",
        report.restarts,
        report.seed,
        report.shift,
        report.nonconverged,
        report.coverage,
        report.complete
    );
    let _ = writeln!(
        out,
        "{:>4}  {:<10}  {:>12}  {:>6}  {:>10}",
        "#", "status", "lambda", "hits", "residual"
    );
    for (i, p) in report.discovered.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>4}  {:<10}  {:>12.6}  {:>6}  {:>10.2e}",
            i, p.status, p.lambda, p.hits, p.residual
        );
    }
    out
}

pub fn count_csv(c: &CountReport) -> Result<String, CliError> {
    csv_string(
        &[
            "order",
            "dim",
            "rank",
            "bound",
            "complex_class_count",
            "real_class_count",
        ],
        [vec![
            c.order.to_string(),
            c.dim.to_string(),
            c.rank.to_string(),
            c.bound.to_string(),
            c.complex_class_count.to_string(),
            c.real_class_count.to_string(),
        ]],
    )
}

pub fn count_table(c: &CountReport) -> String {
    format!(
        "m = {}, n = {}, r = {}\nbound M(m, n)          {}\ncomplex classes        {}\nreal classes           {}\n",
        c.order, c.dim, c.rank, c.bound, c.complex_class_count, c.real_class_count
    )
}

/// One row per restart; vector entries get their own columns.
pub fn traces_csv(rep: &MatchReport, dim: usize) -> Result<String, CliError> {
    let mut header: Vec<String> = [
        "restart",
        "converged",
        "iterations",
        "eigenvalue",
        "residual",
        "shift",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=dim).map(|i| format!("start_{i}")));
    header.extend((1..=dim).map(|i| format!("u_{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = rep.traces.iter().enumerate().map(|(i, t)| {
        let mut row = vec![
            i.to_string(),
            t.converged.to_string(),
            t.iterations.to_string(),
            real(t.eigenvalue),
            real(t.residual),
            real(t.shift),
        ];
        row.extend(t.start.iter().map(|&x| real(x)));
        row.extend(t.eigenvector.iter().map(|&x| real(x)));
        row
    });
    csv_string(&header_refs, rows)
}

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use odeig::odt::DEFAULT_LAMBDA_RANGE;
use odeig::{
    classify, coefficients_for, count_complex_classes, discover_from_starts, enumerate_real,
    random_decomp, random_starts, real_class_count, theoretical_bound, Eigenpair, IndexSelection,
    Matrix, OrthoDiagDecomp,
};

use crate::args::{Basis, CountArgs, Format, GenArgs, GlobalOpts, VerifyArgs};
use crate::formats::{self, CountReport, DecompFile, PairReport, PairRow, VerifyReport};
use crate::CliError;

pub const EXIT_INTEGRITY: u8 = 2;
pub const EXIT_SHORTFALL: u8 = 3;

/// What a command produced: the text for the output sink, an optional
/// note for stderr, and the exit code.
pub struct Outcome {
    pub text: String,
    pub notice: Option<String>,
    pub code: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self {
            text,
            notice: None,
            code: 0,
        }
    }
}

fn timestamp(g: &GlobalOpts) -> Option<u64> {
    if g.no_timestamp {
        return None;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs())
}

pub fn read_decomp(path: &Path) -> Result<OrthoDiagDecomp, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::new(format!("{}: {e}", path.display())))?;
    let file: DecompFile = serde_json::from_str(&text)
        .map_err(|e| CliError::new(format!("{}: {e}", path.display())))?;
    file.into_decomp()
        .map_err(|e| CliError::new(format!("{}: {e}", path.display())))
}

fn check_lambda_range(range: &[f64]) -> Result<(f64, f64), CliError> {
    match *range {
        [lo, hi] if lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi => Ok((lo, hi)),
        _ => Err(CliError::new(format!(
            "invalid --lambda-range {range:?}: expected lo,hi with 0 < lo < hi"
        ))),
    }
}

pub fn gen(g: &GlobalOpts, a: &GenArgs) -> Result<Outcome, CliError> {
    if g.format != Format::Json {
        return Err(CliError::new("gen writes JSON only"));
    }
    if a.m < 3 {
        return Err(CliError::new(format!(
            "invalid --m: tensor order m must be >= 3 (got {})",
            a.m
        )));
    }
    if a.n == 0 || a.r == 0 || a.r > a.n {
        return Err(CliError::new(format!(
            "invalid --r/--n: need 1 <= r <= n (got r = {}, n = {})",
            a.r, a.n
        )));
    }
    let range = match &a.lambda_range {
        Some(v) => check_lambda_range(v)?,
        None => DEFAULT_LAMBDA_RANGE,
    };
    if let Some(l) = &a.lambdas {
        if l.len() != a.r {
            return Err(CliError::new(format!(
                "invalid --lambdas: expected {} values, got {}",
                a.r,
                l.len()
            )));
        }
        if let Some(bad) = l.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(CliError::new(format!(
                "invalid --lambdas: every weight must be > 0 (got {bad})"
            )));
        }
    }

    let drawn = random_decomp(a.n, a.r, a.m, range, a.seed)?;
    let lambdas = a
        .lambdas
        .clone()
        .unwrap_or_else(|| drawn.lambdas().to_vec());
    let u = match a.basis {
        Basis::Random => drawn.u_matrix().clone(),
        Basis::Identity => {
            let cols: Vec<Vec<f64>> = (0..a.r)
                .map(|i| (0..a.n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            Matrix::from_columns(&cols).map_err(odeig::Error::from)?
        }
    };
    let d = OrthoDiagDecomp::new(a.m, u, lambdas)?;
    d.ensure_valid()?;
    Ok(Outcome::ok(formats::to_json(&DecompFile::from_decomp(&d))?))
}

fn render_pairs(g: &GlobalOpts, report: &PairReport) -> Result<String, CliError> {
    match g.format {
        Format::Json => formats::to_json(report),
        Format::Csv => formats::pairs_csv(report),
        Format::Table => Ok(formats::pairs_table(report)),
    }
}

fn pair_report(
    g: &GlobalOpts,
    d: &OrthoDiagDecomp,
) -> Result<(PairReport, Vec<Eigenpair>), CliError> {
    let e = enumerate_real(d)?;
    let report = PairReport {
        schema: formats::SCHEMA,
        order: e.order,
        dim: e.dim,
        rank: e.rank,
        real_class_count: e.real_class_count,
        complex_class_count: e.complex_class_count,
        bound: e.bound,
        max_residual: e.max_residual,
        integrity_failures: None,
        generated_at_unix: timestamp(g),
        pairs: e.pairs.iter().map(PairRow::from_pair).collect(),
    };
    Ok((report, e.pairs))
}

pub fn enumerate(g: &GlobalOpts, file: &Path) -> Result<Outcome, CliError> {
    let d = read_decomp(file)?;
    let (report, _) = pair_report(g, &d)?;
    Ok(Outcome::ok(render_pairs(g, &report)?))
}

pub fn classify_cmd(g: &GlobalOpts, file: &Path) -> Result<Outcome, CliError> {
    let d = read_decomp(file)?;
    let s = d.materialize()?;
    let (mut report, pairs) = pair_report(g, &d)?;
    let mut failures = Vec::new();
    for (row, p) in report.pairs.iter_mut().zip(&pairs) {
        let st = classify(&s, p)?;
        if let Some(f) = &st.integrity_failure {
            failures.push(format!("pair {:?}: {f}", row.indices));
        }
        *row = row.clone().with_stability(&st);
    }
    report.integrity_failures = Some(failures.len());
    let mut out = Outcome::ok(render_pairs(g, &report)?);
    if !failures.is_empty() {
        out.code = EXIT_INTEGRITY;
        out.notice = Some(format!("integrity failure: {}", failures.join("; ")));
    }
    Ok(out)
}

/// Rebuilds reference pairs from an enumerate/classify report.
fn reference_pairs(path: &Path, d: &OrthoDiagDecomp) -> Result<Vec<Eigenpair>, CliError> {
    let ctx = |e: String| CliError::new(format!("{}: {e}", path.display()));
    let text = fs::read_to_string(path).map_err(|e| ctx(e.to_string()))?;
    let report: PairReport = serde_json::from_str(&text).map_err(|e| ctx(e.to_string()))?;
    if (report.order, report.dim, report.rank) != (d.order(), d.dim(), d.rank()) {
        return Err(ctx(format!(
            "report is for (m, n, r) = ({}, {}, {}), decomposition is ({}, {}, {})",
            report.order,
            report.dim,
            report.rank,
            d.order(),
            d.dim(),
            d.rank()
        )));
    }
    report
        .pairs
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let row_ctx = |e: String| ctx(format!("pairs[{i}]: {e}"));
            if row.indices.contains(&0) {
                return Err(row_ctx("indices are 1-based".into()));
            }
            if row.u.len() != d.dim() {
                return Err(row_ctx(format!(
                    "u: expected {} entries, found {}",
                    d.dim(),
                    row.u.len()
                )));
            }
            let sel = IndexSelection::new(row.indices.iter().map(|x| x - 1).collect(), d.rank())
                .map_err(|e| row_ctx(e.to_string()))?;
            let coefficients = coefficients_for(&sel, d.lambdas(), d.order(), row.signs.as_deref())
                .map_err(|e| row_ctx(e.to_string()))?;
            Ok(Eigenpair {
                eigenvalue: row.lambda,
                eigenvector: row.u,
                selection: sel,
                coefficients,
                signs: row.signs,
                residual: row.residual,
            })
        })
        .collect()
}

fn default_trace_path(g: &GlobalOpts, file: &Path) -> PathBuf {
    let base = g.output.as_deref().unwrap_or(file);
    let mut name = base
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".traces.csv");
    base.with_file_name(name)
}

pub fn verify(g: &GlobalOpts, a: &VerifyArgs) -> Result<Outcome, CliError> {
    if a.restarts == 0 {
        return Err(CliError::new("invalid --restarts: need at least 1"));
    }
    let d = read_decomp(&a.file)?;
    let s = d.materialize()?;
    let reference = match &a.against {
        Some(p) => reference_pairs(p, &d)?,
        None => enumerate_real(&d)?.pairs,
    };
    let starts = random_starts(d.dim(), a.restarts, a.seed);
    let rep = discover_from_starts(&s, &starts, 1.0 + d.max_lambda(), &reference)?;

    let mut report = VerifyReport::new(&d, a.seed, &rep);
    report.generated_at_unix = timestamp(g);
    let mut notice = None;
    let mut code = 0;
    if !rep.is_complete() {
        let path = a
            .trace_dump
            .clone()
            .unwrap_or_else(|| default_trace_path(g, &a.file));
        fs::write(&path, formats::traces_csv(&rep, d.dim())?)
            .map_err(|e| CliError::new(format!("{}: {e}", path.display())))?;
        notice = Some(format!(
            "verification shortfall: {} unmatched discoveries, coverage {}; traces written to {}",
            rep.unmatched_discovered.len(),
            rep.coverage,
            path.display()
        ));
        report.trace_dump = Some(path.display().to_string());
        code = EXIT_SHORTFALL;
    }
    let text = match g.format {
        Format::Json => formats::to_json(&report)?,
        Format::Csv => formats::verify_csv(&report)?,
        Format::Table => formats::verify_table(&report),
    };
    Ok(Outcome { text, notice, code })
}

pub fn count(g: &GlobalOpts, a: &CountArgs) -> Result<Outcome, CliError> {
    if a.m < 3 {
        return Err(CliError::new(format!(
            "invalid --m: tensor order m must be >= 3 (got {})",
            a.m
        )));
    }
    let r = a.r.unwrap_or(a.n);
    if a.n == 0 || r == 0 || r > a.n {
        return Err(CliError::new(format!(
            "invalid --r/--n: need 1 <= r <= n (got r = {r}, n = {})",
            a.n
        )));
    }
    let c = CountReport {
        order: a.m,
        dim: a.n,
        rank: r,
        bound: theoretical_bound(a.m, a.n)?,
        complex_class_count: count_complex_classes(a.m, r)?,
        real_class_count: real_class_count(a.m, r)?,
    };
    let text = match g.format {
        Format::Json => formats::to_json(&c)?,
        Format::Csv => formats::count_csv(&c)?,
        Format::Table => formats::count_table(&c),
    };
    Ok(Outcome::ok(text))
}

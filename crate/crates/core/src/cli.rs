//! Command implementations behind the `georeg` binary.
//!
//! Each command returns a report value; the binary only parses flags, picks
//! a rendering and maps errors to exit codes.

use std::path::Path;

use thiserror::Error;

use crate::error::GeoError;
use crate::geometric::{self, geometric_fit, r_squared_subset};
use crate::io::{self, CorrelationInput, Dataset, InputError, Table};
use crate::linalg;
use crate::ols;
use crate::report::{
    AnalysisReport, EquivalenceSection, GeometricSection, InputEcho, InputMode, OlsSection,
    Rounder, SpectralSection, SubsetRow, SubsetTable, SummarySection,
};
use crate::spectral::{self, spectral_report};
use crate::stats::{self, GeometricSummary, InterceptMode, ValidationReport};

/// Above this many regressors an unbounded subset sweep is refused.
pub const MAX_EXHAUSTIVE_SUBSET_VARS: usize = 20;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Input(#[from] InputError),

    #[error(transparent)]
    Analysis(#[from] GeoError),

    #[error("invalid correlation input:\n{}", format_violations(.0))]
    InvalidCorrelation(ValidationReport),

    #[error("{0}")]
    Usage(String),

    #[error("classical and geometric fits disagree: {0}")]
    Equivalence(String),
}

fn format_violations(r: &ValidationReport) -> String {
    r.violations
        .iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl CliError {
    fn from_geo(e: GeoError) -> Self {
        match e {
            GeoError::InvalidCorrelation(report) => CliError::InvalidCorrelation(report),
            other => CliError::Analysis(other),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub mode: InterceptMode,
    pub precision: usize,
    /// `Some(None)` sweeps every subset size; `Some(Some(k))` stops at `k`.
    pub subsets: Option<Option<usize>>,
    /// Turn a failed equivalence check into an error.
    pub check_equivalence: bool,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            mode: InterceptMode::Centered,
            precision: crate::report::DEFAULT_PRECISION,
            subsets: None,
            check_equivalence: false,
        }
    }
}

/// Where a subset sweep reads its statistics from.
#[derive(Debug, Clone)]
pub enum Source<'a> {
    Data {
        path: &'a Path,
        response: &'a str,
        regressors: Option<&'a [String]>,
    },
    Correlation {
        path: &'a Path,
        n: Option<usize>,
    },
}

/// Names the regressors involved in a near-linear dependence: the dominant
/// entries of the eigenvector for the smallest eigenvalue of `Θ`.
fn collinear_names(data: &Dataset, mode: InterceptMode) -> Option<Vec<String>> {
    let cols: Vec<Vec<f64>> = data
        .xs
        .iter()
        .map(|x| match mode {
            InterceptMode::Centered => linalg::center(x).map(|c| c.0),
            InterceptMode::None => Ok(x.clone()),
        })
        .collect::<Result<_, _>>()
        .ok()?;
    let m = cols.len();
    let mut theta = linalg::Matrix::identity(m);
    for i in 0..m {
        for k in (i + 1)..m {
            let r = linalg::cosine(&cols[i], &cols[k]).ok()?;
            theta[(i, k)] = r;
            theta[(k, i)] = r;
        }
    }
    let eig = spectral::eigh(&theta).ok()?;
    let v = eig.vectors.last()?;
    let peak = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    Some(
        v.iter()
            .zip(&data.regressors)
            .filter(|(x, _)| x.abs() >= 0.1 * peak)
            .map(|(_, name)| name.clone())
            .collect(),
    )
}

fn summarize_dataset(data: &Dataset, mode: InterceptMode) -> Result<GeometricSummary, CliError> {
    stats::summarize_named(&data.y, &data.xs, &data.response, &data.regressors, mode).map_err(
        |e| match e {
            GeoError::Collinear(detail) => match collinear_names(data, mode) {
                Some(names) => CliError::Analysis(GeoError::Collinear(format!(
                    "{detail}; involved variables: {}",
                    names.join(", ")
                ))),
                None => CliError::Analysis(GeoError::Collinear(detail)),
            },
            other => CliError::from_geo(other),
        },
    )
}

pub fn load_dataset(
    path: &Path,
    response: &str,
    regressors: Option<&[String]>,
) -> Result<Dataset, CliError> {
    let table = Table::parse(&io::read_file(path)?)?;
    Ok(table.select(response, regressors)?)
}

pub fn load_correlation(
    path: &Path,
    n: Option<usize>,
    mode: InterceptMode,
) -> Result<(GeometricSummary, String, Vec<String>), CliError> {
    let input = CorrelationInput::parse(&io::read_file(path)?)?;
    summary_from_input(input, n, mode)
}

pub fn summary_from_input(
    input: CorrelationInput,
    n: Option<usize>,
    mode: InterceptMode,
) -> Result<(GeometricSummary, String, Vec<String>), CliError> {
    let n = n.or(input.n).ok_or_else(|| {
        CliError::Usage("sample size missing: add an `n` line to the file or pass --n".into())
    })?;
    let (response, regressors) = input.variable_names();
    let summary =
        stats::from_correlations_with_mode(&input.theta, &input.omega, n, input.norms, mode)
            .map_err(CliError::from_geo)?;
    Ok((summary, response, regressors))
}

/// Every subset of up to `max_size` regressors, sorted by `R²` descending.
pub fn subset_rows(
    s: &GeometricSummary,
    names: &[String],
    max_size: Option<usize>,
    rounder: &Rounder,
) -> Result<Vec<SubsetRow>, CliError> {
    let m = s.m();
    let max_size = match max_size {
        Some(0) => return Err(CliError::Usage("subset size must be at least 1".into())),
        Some(k) => k.min(m),
        None if m > MAX_EXHAUSTIVE_SUBSET_VARS => {
            return Err(CliError::Usage(format!(
                "{m} regressors give too many subsets; pass a maximum subset size"
            )))
        }
        None => m,
    };
    let mut rows = Vec::new();
    let mut current = Vec::new();
    collect_subsets(0, m, max_size, &mut current, &mut |subset: &[usize]| {
        let r2 = r_squared_subset(s, subset)?;
        let marginal: f64 = subset.iter().map(|&i| s.omega[i] * s.omega[i]).sum();
        rows.push((subset.to_vec(), r2, r2 - marginal));
        Ok(())
    })
    .map_err(CliError::from_geo)?;
    rows.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(a.0.len().cmp(&b.0.len()))
            .then(a.0.cmp(&b.0))
    });
    Ok(rows
        .into_iter()
        .map(|(idx, r2, diff)| SubsetRow {
            variables: idx.iter().map(|&i| names[i].clone()).collect(),
            indices: idx.iter().map(|i| i + 1).collect(),
            r_squared: rounder.num(r2),
            enhancement_difference: rounder.num(diff),
        })
        .collect())
}

fn collect_subsets(
    start: usize,
    m: usize,
    max_size: usize,
    current: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> Result<(), GeoError>,
) -> Result<(), GeoError> {
    for i in start..m {
        current.push(i);
        visit(current)?;
        if current.len() < max_size {
            collect_subsets(i + 1, m, max_size, current, visit)?;
        }
        current.pop();
    }
    Ok(())
}

fn analyze(
    summary: &GeometricSummary,
    input: InputEcho,
    classical: Option<&ols::RegressionFit>,
    opts: &Options,
) -> Result<AnalysisReport, CliError> {
    let rounder = Rounder::new(opts.precision);
    let fit = geometric_fit(summary).map_err(CliError::from_geo)?;
    let spectral = spectral_report(summary).map_err(CliError::from_geo)?;
    let subsets = match opts.subsets {
        Some(max) => Some(subset_rows(summary, &input.regressors, max, &rounder)?),
        None => None,
    };
    let equivalence = classical.map(|c| geometric::equivalence(c, &fit, summary));
    if opts.check_equivalence {
        if let Some(e) = &equivalence {
            if !e.passed() {
                let worst = e.worst().map(|f| f.field.as_str()).unwrap_or("?");
                return Err(CliError::Equivalence(format!(
                    "max relative discrepancy {:e} in `{worst}` exceeds {:e}",
                    e.max_relative, e.tolerance
                )));
            }
        }
    }
    Ok(AnalysisReport {
        summary: SummarySection::new(summary, &rounder),
        ols: classical.map(|c| OlsSection::new(c, &rounder)),
        geometric: GeometricSection::new(&fit, &rounder),
        spectral: SpectralSection::new(&spectral, &rounder),
        subsets,
        equivalence: equivalence.as_ref().map(|e| EquivalenceSection::new(e, &rounder)),
        warnings: fit.warnings.clone(),
        input,
    })
}

/// Full analysis of a CSV dataset: summary, both fits, spectral
/// decomposition and the path-equivalence check.
pub fn cmd_fit(
    path: &Path,
    response: &str,
    regressors: Option<&[String]>,
    opts: &Options,
) -> Result<AnalysisReport, CliError> {
    let data = load_dataset(path, response, regressors)?;
    fit_dataset(&data, opts)
}

pub fn fit_dataset(data: &Dataset, opts: &Options) -> Result<AnalysisReport, CliError> {
    let summary = summarize_dataset(data, opts.mode)?;
    let classical =
        ols::fit_ols_with_mode(&data.y, &data.xs, opts.mode).map_err(CliError::from_geo)?;
    let input = InputEcho::new(
        InputMode::Data,
        &summary,
        &data.response,
        &data.regressors,
        opts.precision,
    );
    analyze(&summary, input, Some(&classical), opts)
}

/// Scale-free analysis from a correlation file. Scale-dependent fields are
/// filled only when the file supplies norms.
pub fn cmd_from_correlation(
    path: &Path,
    n: Option<usize>,
    opts: &Options,
) -> Result<AnalysisReport, CliError> {
    let (summary, response, regressors) = load_correlation(path, n, opts.mode)?;
    let input = InputEcho::new(
        InputMode::Correlation,
        &summary,
        &response,
        &regressors,
        opts.precision,
    );
    analyze(&summary, input, None, opts)
}

pub fn cmd_subsets(
    source: &Source<'_>,
    max_size: Option<usize>,
    opts: &Options,
) -> Result<SubsetTable, CliError> {
    let (summary, response, regressors, mode) = match source {
        Source::Data {
            path,
            response,
            regressors,
        } => {
            let data = load_dataset(path, response, *regressors)?;
            let summary = summarize_dataset(&data, opts.mode)?;
            (summary, data.response, data.regressors, InputMode::Data)
        }
        Source::Correlation { path, n } => {
            let (s, r, x) = load_correlation(path, *n, opts.mode)?;
            (s, r, x, InputMode::Correlation)
        }
    };
    let rounder = Rounder::new(opts.precision);
    let rows = subset_rows(&summary, &regressors, max_size, &rounder)?;
    Ok(SubsetTable {
        input: InputEcho::new(mode, &summary, &response, &regressors, opts.precision),
        rows,
    })
}

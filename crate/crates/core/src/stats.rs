//! Geometric sufficient statistics of a regression problem.
//!
//! Everything a least-squares fit reports is a function of the response
//! length `‖y‖`, the explanatory lengths `‖x_i‖`, the response correlations
//! `Ω` and the design correlation matrix `Θ`. [`GeometricSummary`] holds
//! exactly those, either computed from raw columns ([`summarize`]) or
//! supplied as correlations ([`from_correlations`]).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::linalg::{self, Matrix};
use crate::spectral;

/// Minimum eigenvalue of `Θ` below which the design is rejected as collinear.
pub const COLLINEARITY_TOL: f64 = 1e-10;
pub const SYMMETRY_TOL: f64 = 1e-9;
pub const DIAGONAL_TOL: f64 = 1e-9;
pub const RANGE_TOL: f64 = 1e-12;
/// Relative norm below which a centered column counts as constant.
const DEGENERATE_TOL: f64 = 1e-12;

/// Accepted negative eigenvalue magnitude for a correlation matrix with `m`
/// explanatory variables. Four-decimal rounded inputs can be marginally
/// indefinite.
pub fn psd_tolerance(m: usize) -> f64 {
    1e-9 * m.max(1) as f64
}

/// How the intercept enters the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterceptMode {
    /// Columns are mean-adjusted; the intercept is absorbed by centering.
    #[default]
    Centered,
    /// No centering and no intercept; degrees of freedom grow by one.
    None,
}

impl InterceptMode {
    /// Observations consumed before the regressors (1 for the intercept).
    pub fn offset(self) -> usize {
        match self {
            InterceptMode::Centered => 1,
            InterceptMode::None => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub y: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Means {
    pub y: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricSummary {
    pub n: usize,
    pub mode: InterceptMode,
    /// Response–regressor correlations `R_i`.
    pub omega: Vec<f64>,
    /// Regressor–regressor correlations `R_ik`.
    pub theta: Matrix,
    /// `None` for a correlation-only summary.
    pub norms: Option<Norms>,
    /// Centering means, present only when built from raw centered data.
    pub means: Option<Means>,
}

impl GeometricSummary {
    pub fn m(&self) -> usize {
        self.omega.len()
    }

    pub fn is_correlation_only(&self) -> bool {
        self.norms.is_none()
    }

    pub fn norms(&self) -> Result<&Norms> {
        self.norms.as_ref().ok_or(GeoError::MissingNorms)
    }

    pub fn df_total(&self) -> usize {
        self.n - self.mode.offset()
    }

    pub fn df_regression(&self) -> usize {
        self.m()
    }

    pub fn df_residual(&self) -> usize {
        self.n - self.m() - self.mode.offset()
    }

    /// The bordered matrix `Φ = [[1, Ωᵀ], [Ω, Θ]]`.
    pub fn phi(&self) -> CorrelationMatrix {
        CorrelationMatrix(border(&self.omega, &self.theta))
    }
}

fn border(omega: &[f64], theta: &Matrix) -> Matrix {
    let m = omega.len();
    Matrix::from_fn(m + 1, m + 1, |i, j| match (i, j) {
        (0, 0) => 1.0,
        (0, j) => omega[j - 1],
        (i, 0) => omega[i - 1],
        (i, j) => theta[(i - 1, j - 1)],
    })
}

fn check_sample_size(n: usize, m: usize, mode: InterceptMode) -> Result<()> {
    let required = m + mode.offset() + 1;
    if n < required {
        return Err(GeoError::InsufficientData { n, m, required });
    }
    Ok(())
}

fn check_collinearity(theta: &Matrix) -> Result<()> {
    let eig = spectral::eigh(theta)?;
    let min = eig.values.last().copied().unwrap_or(1.0);
    if min < COLLINEARITY_TOL {
        return Err(GeoError::Collinear(format!(
            "smallest eigenvalue of the design correlation matrix is {min:e}"
        )));
    }
    Ok(())
}

/// [`summarize_named`] with default names `y`, `x1`, …, `xm` and centering.
pub fn summarize(y: &[f64], xs: &[Vec<f64>]) -> Result<GeometricSummary> {
    let names: Vec<String> = (1..=xs.len()).map(|i| format!("x{i}")).collect();
    summarize_named(y, xs, "y", &names, InterceptMode::Centered)
}

/// Computes the sufficient statistics of raw columns. Names are only used in
/// error messages.
pub fn summarize_named(
    y: &[f64],
    xs: &[Vec<f64>],
    response: &str,
    regressors: &[String],
    mode: InterceptMode,
) -> Result<GeometricSummary> {
    let m = xs.len();
    if m == 0 {
        return Err(GeoError::NoExplanatory);
    }
    if regressors.len() != m {
        return Err(GeoError::Dimension(format!(
            "{} names for {m} regressors",
            regressors.len()
        )));
    }
    let n = y.len();
    for (x, name) in xs.iter().zip(regressors) {
        if x.len() != n {
            return Err(GeoError::Dimension(format!(
                "column `{name}` has length {}, response has length {n}",
                x.len()
            )));
        }
    }
    check_sample_size(n, m, mode)?;
    linalg::check_finite(y, response)?;
    for (x, name) in xs.iter().zip(regressors) {
        linalg::check_finite(x, name)?;
    }

    let prepare = |v: &[f64], name: &str| -> Result<(Vec<f64>, f64, f64)> {
        let (adj, mean) = match mode {
            InterceptMode::Centered => linalg::center(v)?,
            InterceptMode::None => (v.to_vec(), 0.0),
        };
        let len = linalg::norm(&adj);
        let raw_scale = linalg::norm(v).max(f64::MIN_POSITIVE);
        if len == 0.0 || len <= DEGENERATE_TOL * raw_scale {
            return Err(GeoError::DegenerateVariable(name.to_string()));
        }
        Ok((adj, mean, len))
    };

    let (yc, y_mean, y_norm) = prepare(y, response)?;
    let mut cols = Vec::with_capacity(m);
    let mut x_means = Vec::with_capacity(m);
    let mut x_norms = Vec::with_capacity(m);
    for (x, name) in xs.iter().zip(regressors) {
        let (c, mean, len) = prepare(x, name)?;
        cols.push(c);
        x_means.push(mean);
        x_norms.push(len);
    }

    let omega = cols
        .iter()
        .map(|c| linalg::cosine(&yc, c))
        .collect::<Result<Vec<_>>>()?;
    let mut theta = Matrix::identity(m);
    for i in 0..m {
        for k in (i + 1)..m {
            let r = linalg::cosine(&cols[i], &cols[k])?;
            theta[(i, k)] = r;
            theta[(k, i)] = r;
        }
    }
    check_collinearity(&theta)?;

    let means = match mode {
        InterceptMode::Centered => Some(Means {
            y: y_mean,
            x: x_means,
        }),
        InterceptMode::None => None,
    };
    Ok(GeometricSummary {
        n,
        mode,
        omega,
        theta,
        norms: Some(Norms {
            y: y_norm,
            x: x_norms,
        }),
        means,
    })
}

/// Builds a summary from correlations alone (plus optional lengths), with
/// the intercept absorbed by centering.
pub fn from_correlations(
    theta: &Matrix,
    omega: &[f64],
    n: usize,
    norms: Option<Norms>,
) -> Result<GeometricSummary> {
    from_correlations_with_mode(theta, omega, n, norms, InterceptMode::Centered)
}

pub fn from_correlations_with_mode(
    theta: &Matrix,
    omega: &[f64],
    n: usize,
    norms: Option<Norms>,
    mode: InterceptMode,
) -> Result<GeometricSummary> {
    let m = omega.len();
    if m == 0 {
        return Err(GeoError::NoExplanatory);
    }
    if theta.rows() != m || theta.cols() != m {
        return Err(GeoError::Shape(format!(
            "design correlation matrix is {}x{} but there are {m} response correlations",
            theta.rows(),
            theta.cols()
        )));
    }
    linalg::check_finite(omega, "response correlations")?;
    if theta.max_asymmetry() > SYMMETRY_TOL {
        return Err(GeoError::Shape(format!(
            "design correlation matrix is not symmetric (max |a_ij - a_ji| = {:e})",
            theta.max_asymmetry()
        )));
    }
    check_sample_size(n, m, mode)?;
    if let Some(norms) = &norms {
        if norms.x.len() != m {
            return Err(GeoError::Dimension(format!(
                "{} explanatory norms for {m} variables",
                norms.x.len()
            )));
        }
        if !(norms.y > 0.0 && norms.y.is_finite()) {
            return Err(GeoError::Domain(format!(
                "response norm must be positive, got {}",
                norms.y
            )));
        }
        if let Some(bad) = norms.x.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(GeoError::Domain(format!(
                "explanatory norms must be positive, got {bad}"
            )));
        }
    }

    let phi = border(omega, theta);
    let report = validate_correlation_matrix(&phi);
    if !report.is_valid() {
        return Err(GeoError::InvalidCorrelation(report));
    }
    check_collinearity(theta)?;

    Ok(GeometricSummary {
        n,
        mode,
        omega: omega.to_vec(),
        theta: theta.clone(),
        norms,
        means: None,
    })
}

/// One violated property of a candidate correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotSquare { rows: usize, cols: usize },
    NonFinite { row: usize, col: usize },
    Asymmetric { row: usize, col: usize, difference: f64 },
    NonUnitDiagonal { index: usize, value: f64 },
    OutOfRange { row: usize, col: usize, value: f64 },
    NegativeEigenvalue { value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSquare { rows, cols } => write!(f, "not square ({rows}x{cols})"),
            Violation::NonFinite { row, col } => {
                write!(f, "non-finite entry at ({row}, {col})")
            }
            Violation::Asymmetric {
                row,
                col,
                difference,
            } => write!(
                f,
                "asymmetric: entries ({row}, {col}) and ({col}, {row}) differ by {difference:e}"
            ),
            Violation::NonUnitDiagonal { index, value } => {
                write!(f, "non-unit diagonal: entry ({index}, {index}) = {value}")
            }
            Violation::OutOfRange { row, col, value } => {
                write!(f, "out-of-range entry: ({row}, {col}) = {value} is outside [-1, 1]")
            }
            Violation::NegativeEigenvalue { value } => {
                write!(f, "negative eigenvalue {value:.6e} (matrix is not positive semidefinite)")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Smallest eigenvalue of the symmetrized matrix, when computable.
    pub min_eigenvalue: Option<f64>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid correlation matrix");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks symmetry, unit diagonal, entry range and positive
/// semidefiniteness. Violations are returned, never raised.
pub fn validate_correlation_matrix(phi: &Matrix) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !phi.is_square() {
        report.violations.push(Violation::NotSquare {
            rows: phi.rows(),
            cols: phi.cols(),
        });
        return report;
    }
    let n = phi.rows();
    for i in 0..n {
        for j in 0..n {
            if !phi[(i, j)].is_finite() {
                report.violations.push(Violation::NonFinite { row: i, col: j });
            }
        }
    }
    if !report.violations.is_empty() {
        return report;
    }
    for i in 0..n {
        if (phi[(i, i)] - 1.0).abs() > DIAGONAL_TOL {
            report.violations.push(Violation::NonUnitDiagonal {
                index: i,
                value: phi[(i, i)],
            });
        }
        for j in (i + 1)..n {
            let difference = (phi[(i, j)] - phi[(j, i)]).abs();
            if difference > SYMMETRY_TOL {
                report.violations.push(Violation::Asymmetric {
                    row: i,
                    col: j,
                    difference,
                });
            }
            // the lower entry is only reported separately when it differs
            let mut cells = vec![(i, j)];
            if difference > SYMMETRY_TOL {
                cells.push((j, i));
            }
            for (row, col) in cells {
                let value = phi[(row, col)];
                if value.abs() > 1.0 + RANGE_TOL {
                    report.violations.push(Violation::OutOfRange { row, col, value });
                }
            }
        }
    }
    let sym = Matrix::from_fn(n, n, |i, j| 0.5 * (phi[(i, j)] + phi[(j, i)]));
    if let Ok(eig) = spectral::eigh(&sym) {
        let min = eig.values.last().copied().unwrap_or(0.0);
        report.min_eigenvalue = Some(min);
        if min < -psd_tolerance(n.saturating_sub(1)) {
            report.violations.push(Violation::NegativeEigenvalue { value: min });
        }
    }
    report
}

/// A validated correlation matrix with the response in row/column 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix(Matrix);

impl CorrelationMatrix {
    pub fn new(phi: Matrix) -> Result<Self> {
        let report = validate_correlation_matrix(&phi);
        if report.is_valid() {
            Ok(Self(phi))
        } else {
            Err(GeoError::InvalidCorrelation(report))
        }
    }

    /// Borders `Θ` with the response correlations `Ω`.
    pub fn assemble(omega: &[f64], theta: &Matrix) -> Result<Self> {
        if theta.rows() != omega.len() || theta.cols() != omega.len() {
            return Err(GeoError::Shape(format!(
                "cannot border a {}x{} matrix with {} correlations",
                theta.rows(),
                theta.cols(),
                omega.len()
            )));
        }
        Self::new(border(omega, theta))
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    /// Splits into `(Ω, Θ)`: the first column below the diagonal and the
    /// principal submatrix without the response.
    pub fn partition(&self) -> Result<(Vec<f64>, Matrix)> {
        let d = self.dim();
        if d < 2 {
            return Err(GeoError::NoExplanatory);
        }
        let omega = (1..d).map(|i| self.0[(i, 0)]).collect();
        let idx: Vec<usize> = (1..d).collect();
        Ok((omega, self.0.principal_submatrix(&idx)))
    }
}

/// Splits a correlation matrix with the response first into `(Ω, Θ)`.
pub fn partition(phi: &CorrelationMatrix) -> Result<(Vec<f64>, Matrix)> {
    phi.partition()
}

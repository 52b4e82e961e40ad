//! Spectral decomposition of the design correlation matrix.
//!
//! Writing `Θ = V Λ Vᵀ`, the coefficient of determination splits over the
//! principal components `z_k = x̂ v_k` as `R² = Σ S_k²`, where
//! `S_k = (Ω · v_k) / √λ_k` is the correlation between the response and the
//! k-th component. The gap between `R²` and the sum of the squared pairwise
//! correlations `Σ R_i²` is `Σ (1 − λ_k) S_k²`; a positive gap is
//! *enhancement*.

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::geometric::quadratic_form;
use crate::linalg::{self, Matrix};
use crate::stats::{GeometricSummary, InterceptMode, COLLINEARITY_TOL};

/// Off-diagonal Frobenius norm at which Jacobi sweeps stop, relative to `‖A‖_F`.
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Differences at or below this are treated as numerical noise.
pub const ENHANCEMENT_TOL: f64 = 1e-12;
const SIGN_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-9;

/// Eigenvalues in descending order with matching unit eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the eigenvector for `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

impl Eigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvector matrix with `v_k` in column `k`.
    pub fn vector_matrix(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, k| self.vectors[k][i])
    }

    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.values[k] * self.vectors[k][i] * self.vectors[k][j])
                .sum()
        })
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues come back sorted descending; each eigenvector is oriented so
/// its first entry with magnitude above 1e-12 is positive.
pub fn eigh(a: &Matrix) -> Result<Eigen> {
    if !a.is_square() {
        return Err(GeoError::Shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(GeoError::NonFinite("matrix".into()));
    }
    let scale = a.frobenius_norm().max(1.0);
    if a.max_asymmetry() > SYMMETRY_TOL * scale {
        return Err(GeoError::Shape(format!(
            "matrix is not symmetric (max |a_ij - a_ji| = {:e})",
            a.max_asymmetry()
        )));
    }

    let n = a.rows();
    // symmetrize so rounding asymmetry does not leak into the rotations
    let mut m = Matrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = Matrix::identity(n);
    let target = JACOBI_TOL * m.frobenius_norm();

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&m) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > target {
        return Err(GeoError::NoConvergence(JACOBI_MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&k| m[(k, k)]).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let mut col = v.column(k);
            orient(&mut col);
            col
        })
        .collect();
    Ok(Eigen { values, vectors })
}

fn off_diagonal_norm(m: &Matrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation annihilating `m[p][q]`, accumulated into `v`.
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = m[(p, p)];
    let aqq = m[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

fn orient(v: &mut [f64]) {
    if let Some(&lead) = v.iter().find(|x| x.abs() > SIGN_TOL) {
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Correlations `S_k = (Ω · v_k) / √λ_k` between the response and each
/// principal component.
pub fn pc_correlations(s: &GeometricSummary, eig: &Eigen) -> Result<Vec<f64>> {
    if eig.dim() != s.m() {
        return Err(GeoError::Dimension(format!(
            "eigendecomposition has dimension {}, summary has m = {}",
            eig.dim(),
            s.m()
        )));
    }
    eig.values
        .iter()
        .zip(&eig.vectors)
        .enumerate()
        .map(|(k, (&lambda, v))| {
            if lambda < COLLINEARITY_TOL {
                return Err(GeoError::Collinear(format!(
                    "eigenvalue {} of the design correlation matrix is {lambda:e}",
                    k + 1
                )));
            }
            Ok(linalg::dot(&s.omega, v)? / lambda.sqrt())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enhancement {
    /// `R² − Σ R_i²`, accumulated as `Σ (1 − λ_k) S_k²`.
    pub difference: f64,
    /// `(1 − λ_k) S_k²` per component.
    pub per_component: Vec<f64>,
    pub flag: bool,
    /// `ΩᵀΘ⁻¹Ω − ‖Ω‖²` computed without the eigendecomposition.
    pub direct_difference: f64,
}

fn enhancement_from(
    s: &GeometricSummary,
    eig: &Eigen,
    s_values: &[f64],
) -> Result<Enhancement> {
    let per_component: Vec<f64> = eig
        .values
        .iter()
        .zip(s_values)
        .map(|(lambda, sk)| (1.0 - lambda) * sk * sk)
        .collect();
    let difference = per_component.iter().sum::<f64>();
    let omega_sq = s.omega.iter().map(|r| r * r).sum::<f64>();
    let direct_difference = quadratic_form(&s.theta, &s.omega)? - omega_sq;
    Ok(Enhancement {
        difference,
        per_component,
        flag: difference > ENHANCEMENT_TOL,
        direct_difference,
    })
}

/// Enhancement difference `R² − Σ R_i²` decomposed over principal components.
pub fn enhancement(s: &GeometricSummary) -> Result<Enhancement> {
    let eig = eigh(&s.theta)?;
    let sv = pc_correlations(s, &eig)?;
    enhancement_from(s, &eig, &sv)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub eigen: Eigen,
    pub s_values: Vec<f64>,
    /// `S_k²`, summing to `R²`.
    pub contributions: Vec<f64>,
    pub r_squared: f64,
    /// `Σ R_i² = ‖Ω‖²`.
    pub sum_squared_correlations: f64,
    pub enhancement: Enhancement,
}

pub fn spectral_report(s: &GeometricSummary) -> Result<SpectralReport> {
    let eigen = eigh(&s.theta)?;
    let s_values = pc_correlations(s, &eigen)?;
    let contributions: Vec<f64> = s_values.iter().map(|x| x * x).collect();
    let r_squared = contributions.iter().sum();
    let sum_squared_correlations = s.omega.iter().map(|r| r * r).sum();
    let enhancement = enhancement_from(s, &eigen, &s_values)?;
    Ok(SpectralReport {
        eigen,
        s_values,
        contributions,
        r_squared,
        sum_squared_correlations,
        enhancement,
    })
}

fn check_triple(r1: f64, r2: f64, r12: f64) -> Result<()> {
    for (name, r) in [("R1", r1), ("R2", r2), ("R12", r12)] {
        if !r.is_finite() || r.abs() > 1.0 {
            return Err(GeoError::Domain(format!("{name} = {r} is not a correlation")));
        }
    }
    if r12.abs() == 1.0 {
        return Err(GeoError::Collinear(
            "the two explanatory variables are perfectly correlated".into(),
        ));
    }
    let det = 1.0 + 2.0 * r1 * r2 * r12 - r1 * r1 - r2 * r2 - r12 * r12;
    if det < -crate::stats::psd_tolerance(2) {
        let phi = Matrix::from_rows(&[[1.0, r1, r2], [r1, 1.0, r12], [r2, r12, 1.0]])?;
        return Err(GeoError::InvalidCorrelation(
            crate::stats::validate_correlation_matrix(&phi),
        ));
    }
    Ok(())
}

/// Two-regressor coefficient of determination,
/// `(R₁² + R₂² − 2 R₁₂ R₁ R₂) / (1 − R₁₂²)`.
pub fn two_var_r_squared(r1: f64, r2: f64, r12: f64) -> Result<f64> {
    check_triple(r1, r2, r12)?;
    Ok((r1 * r1 + r2 * r2 - 2.0 * r12 * r1 * r2) / (1.0 - r12 * r12))
}

/// The same quantity written as the two principal-component contributions
/// `(R₁ − R₂)² / (2(1 − R₁₂)) + (R₁ + R₂)² / (2(1 + R₁₂))`.
pub fn two_var_r_squared_eigen(r1: f64, r2: f64, r12: f64) -> Result<f64> {
    check_triple(r1, r2, r12)?;
    let diff = r1 - r2;
    let sum = r1 + r2;
    Ok(diff * diff / (2.0 * (1.0 - r12)) + sum * sum / (2.0 * (1.0 + r12)))
}

/// Principal components `z_k = x̂ v_k` of the normed design.
///
/// `xs` are the raw explanatory columns; they are centered (under
/// [`InterceptMode::Centered`]) and scaled to unit length before projection.
pub fn principal_components(
    xs: &[Vec<f64>],
    mode: InterceptMode,
    eig: &Eigen,
) -> Result<Vec<Vec<f64>>> {
    if xs.is_empty() {
        return Err(GeoError::MissingData);
    }
    if xs.len() != eig.dim() {
        return Err(GeoError::Dimension(format!(
            "{} columns but eigendecomposition of dimension {}",
            xs.len(),
            eig.dim()
        )));
    }
    let mut normed = Vec::with_capacity(xs.len());
    for (j, x) in xs.iter().enumerate() {
        let x = match mode {
            InterceptMode::Centered => linalg::center(x)?.0,
            InterceptMode::None => x.clone(),
        };
        let len = linalg::norm(&x);
        if len == 0.0 {
            return Err(GeoError::DegenerateVariable(format!("x{}", j + 1)));
        }
        normed.push(x.into_iter().map(|e| e / len).collect::<Vec<_>>());
    }
    let design = Matrix::from_columns(&normed)?;
    eig.vectors.iter().map(|v| design.mat_vec(v)).collect()
}

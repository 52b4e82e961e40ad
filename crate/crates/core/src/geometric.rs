//! Regression output computed from lengths and angles only.
//!
//! With `w = Θ⁻¹Ω`:
//!
//! * `R² = Ω · w`
//! * `β̂_k = (‖y‖ / ‖x_k‖) w_k`
//! * `SS_Reg = ‖y‖² R²`, `SS_Res = ‖y‖² (1 − R²)`
//! * `F = ((n − m − 1) / m) · R² / (1 − R²)`
//!
//! `R²`, `F` and `p` need no lengths at all, so they are available for
//! correlation-only summaries.

use crate::error::{GeoError, Result};
use crate::linalg::{self, Cholesky, Matrix};
use crate::ols::{self, AnovaTable};
use crate::stats::{self, GeometricSummary, InterceptMode};

/// Rounded inputs may push `R²` slightly past 1; up to this much is clamped.
pub const R_SQUARED_CLAMP_TOL: f64 = 1e-9;
/// Maximum relative discrepancy accepted by [`compare_paths`].
pub const EQUIVALENCE_TOL: f64 = 1e-8;

fn factor_theta(theta: &Matrix) -> Result<Cholesky> {
    Cholesky::new(theta).map_err(|e| match e {
        GeoError::Singular { pivot, value } => GeoError::Collinear(format!(
            "design correlation matrix is singular at pivot {pivot} ({value:e})"
        )),
        other => other,
    })
}

/// `Ωᵀ Θ⁻¹ Ω` via a Cholesky solve.
pub fn quadratic_form(theta: &Matrix, omega: &[f64]) -> Result<f64> {
    let w = factor_theta(theta)?.solve(omega)?;
    linalg::dot(omega, &w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricFit {
    /// Standardized coefficients `Θ⁻¹Ω`.
    pub standardized: Vec<f64>,
    pub r_squared: f64,
    /// `+inf` for a perfect fit.
    pub f_stat: f64,
    pub p_value: f64,
    pub df_tot: usize,
    pub df_reg: usize,
    pub df_res: usize,
    pub beta_hat: Option<Vec<f64>>,
    pub beta0_hat: Option<f64>,
    pub anova: Option<AnovaTable>,
    pub scale_free_only: bool,
    pub warnings: Vec<String>,
}

impl GeometricFit {
    pub fn beta_hat(&self) -> Result<&[f64]> {
        self.beta_hat.as_deref().ok_or(GeoError::MissingNorms)
    }

    pub fn anova(&self) -> Result<&AnovaTable> {
        self.anova.as_ref().ok_or(GeoError::MissingNorms)
    }

    pub fn multiple_correlation(&self) -> f64 {
        self.r_squared.sqrt()
    }
}

fn checked_r_squared(raw: f64, warnings: &mut Vec<String>) -> Result<f64> {
    if raw > 1.0 + R_SQUARED_CLAMP_TOL {
        return Err(GeoError::RSquaredOutOfRange(raw));
    }
    if raw > 1.0 {
        warnings.push(format!(
            "R² = {raw:.12} exceeds 1 by rounding; clamped to 1"
        ));
        return Ok(1.0);
    }
    if raw < 0.0 {
        // Θ⁻¹ is positive definite, so only rounding can get here
        return Ok(0.0);
    }
    Ok(raw)
}

pub fn geometric_fit(s: &GeometricSummary) -> Result<GeometricFit> {
    let m = s.m();
    let (df_tot, df_reg, df_res) = ols::degrees_of_freedom(s.n, m, s.mode)?;
    let w = factor_theta(&s.theta)?.solve(&s.omega)?;
    let mut warnings = Vec::new();
    let r_squared = checked_r_squared(linalg::dot(&s.omega, &w)?, &mut warnings)?;
    let (f_stat, p_value) = ols::f_test_from_r_squared(r_squared, df_reg, df_res)?;

    let (beta_hat, beta0_hat, anova) = match &s.norms {
        Some(norms) => {
            let beta: Vec<f64> = w
                .iter()
                .zip(&norms.x)
                .map(|(wk, xk)| norms.y / xk * wk)
                .collect();
            let beta0 = s.means.as_ref().map(|means| {
                means.y
                    - beta
                        .iter()
                        .zip(&means.x)
                        .map(|(b, xm)| b * xm)
                        .sum::<f64>()
            });
            let beta0 = match s.mode {
                InterceptMode::None => Some(0.0),
                InterceptMode::Centered => beta0,
            };
            let table =
                AnovaTable::from_r_squared(norms.y * norms.y, r_squared, s.n, m, s.mode)?;
            (Some(beta), beta0, Some(table))
        }
        None => (None, None, None),
    };

    Ok(GeometricFit {
        standardized: w,
        r_squared,
        f_stat,
        p_value,
        df_tot,
        df_reg,
        df_res,
        beta_hat,
        beta0_hat,
        anova,
        scale_free_only: s.is_correlation_only(),
        warnings,
    })
}

/// `R²` of the regression on a subset of the explanatory variables
/// (0-based indices), from the matching sub-vector of `Ω` and principal
/// submatrix of `Θ`.
pub fn r_squared_subset(s: &GeometricSummary, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(GeoError::Subset("subset is empty".into()));
    }
    let m = s.m();
    let mut seen = vec![false; m];
    for &i in subset {
        if i >= m {
            return Err(GeoError::Subset(format!(
                "index {i} out of range for {m} variables"
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(GeoError::Subset(format!("index {i} repeated")));
        }
    }
    let omega: Vec<f64> = subset.iter().map(|&i| s.omega[i]).collect();
    let theta = s.theta.principal_submatrix(subset);
    let mut warnings = Vec::new();
    checked_r_squared(quadratic_form(&theta, &omega)?, &mut warnings)
}

/// The summary restricted to a subset of the explanatory variables.
pub fn sub_summary(s: &GeometricSummary, subset: &[usize]) -> Result<GeometricSummary> {
    if subset.iter().any(|&i| i >= s.m()) {
        return Err(GeoError::Subset("index out of range".into()));
    }
    let omega: Vec<f64> = subset.iter().map(|&i| s.omega[i]).collect();
    let theta = s.theta.principal_submatrix(subset);
    let norms = s.norms.as_ref().map(|nm| stats::Norms {
        y: nm.y,
        x: subset.iter().map(|&i| nm.x[i]).collect(),
    });
    let means = s.means.as_ref().map(|mn| stats::Means {
        y: mn.y,
        x: subset.iter().map(|&i| mn.x[i]).collect(),
    });
    let mut out = stats::from_correlations_with_mode(&theta, &omega, s.n, norms, s.mode)?;
    out.means = means;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDiscrepancy {
    pub field: String,
    pub ols: f64,
    pub geometric: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub fields: Vec<FieldDiscrepancy>,
    pub max_relative: f64,
    pub tolerance: f64,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.max_relative <= self.tolerance
    }

    pub fn worst(&self) -> Option<&FieldDiscrepancy> {
        self.fields
            .iter()
            .max_by(|a, b| a.relative.total_cmp(&b.relative))
    }
}

/// `|a − b| / max(|a|, |b|, scale)`; equal infinities agree exactly.
pub fn relative_discrepancy(a: f64, b: f64, scale: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if !a.is_finite() || !b.is_finite() {
        return f64::INFINITY;
    }
    let denom = a.abs().max(b.abs()).max(scale.abs());
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

/// Runs both the classical and the geometric fit on the same data and
/// records the relative discrepancy of every reported quantity.
pub fn compare_paths(y: &[f64], xs: &[Vec<f64>]) -> Result<EquivalenceReport> {
    compare_paths_with_mode(y, xs, InterceptMode::Centered)
}

pub fn compare_paths_with_mode(
    y: &[f64],
    xs: &[Vec<f64>],
    mode: InterceptMode,
) -> Result<EquivalenceReport> {
    let classical = ols::fit_ols_with_mode(y, xs, mode)?;
    let names: Vec<String> = (1..=xs.len()).map(|i| format!("x{i}")).collect();
    let summary = stats::summarize_named(y, xs, "y", &names, mode)?;
    let geo = geometric_fit(&summary)?;
    Ok(equivalence(&classical, &geo, &summary))
}

pub(crate) fn equivalence(
    classical: &ols::RegressionFit,
    geo: &GeometricFit,
    summary: &GeometricSummary,
) -> EquivalenceReport {
    let mut fields = Vec::new();
    let mut push = |name: &str, a: f64, b: f64, scale: f64| {
        fields.push(FieldDiscrepancy {
            field: name.to_string(),
            ols: a,
            geometric: b,
            relative: relative_discrepancy(a, b, scale),
        });
    };
    let a = &classical.anova;
    if let Some(g) = &geo.anova {
        // SS_Reg and SS_Res partition SS_Tot; a near-zero part is measured
        // against the whole so rounding noise in a perfect fit is not flagged
        let ms_scale = a.ss_tot / a.df_res.max(1) as f64;
        push("ss_tot", a.ss_tot, g.ss_tot, 0.0);
        push("ss_reg", a.ss_reg, g.ss_reg, a.ss_tot);
        push("ss_res", a.ss_res, g.ss_res, a.ss_tot);
        push("ms_tot", a.ms_tot, g.ms_tot, 0.0);
        push("ms_reg", a.ms_reg, g.ms_reg, a.ss_tot / a.df_reg.max(1) as f64);
        push("ms_res", a.ms_res, g.ms_res, ms_scale);
        push("sigma2_y_hat", a.sigma2_y_hat, g.sigma2_y_hat, a.ms_tot);
        push("sigma2_hat", a.sigma2_hat, g.sigma2_hat, ms_scale);
    }
    push("df_tot", a.df_tot as f64, geo.df_tot as f64, 0.0);
    push("df_reg", a.df_reg as f64, geo.df_reg as f64, 0.0);
    push("df_res", a.df_res as f64, geo.df_res as f64, 0.0);
    push("r_squared", a.r_squared, geo.r_squared, 1.0);
    push("f_stat", a.f_stat, geo.f_stat, 0.0);
    push("p_value", a.p_value, geo.p_value, 0.0);
    if let Some(beta) = &geo.beta_hat {
        for (k, (b1, b2)) in classical.beta_hat.iter().zip(beta).enumerate() {
            push(&format!("beta_{}", k + 1), *b1, *b2, 0.0);
        }
    }
    if let (Some(b0), Some(means)) = (geo.beta0_hat, &summary.means) {
        // the intercept is a difference of terms; measure error against their size
        let scale = means.y.abs()
            + classical
                .beta_hat
                .iter()
                .zip(&means.x)
                .map(|(b, xm)| (b * xm).abs())
                .sum::<f64>();
        push("beta_0", classical.beta0_hat, b0, scale);
    }
    let max_relative = fields.iter().map(|f| f.relative).fold(0.0, f64::max);
    EquivalenceReport {
        fields,
        max_relative,
        tolerance: EQUIVALENCE_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn example() -> GeometricSummary {
        let theta = Matrix::from_rows(&[
            [1.0000, 0.2956, 0.4333, -0.0199],
            [0.2956, 1.0000, 0.0275, 0.1866],
            [0.4333, 0.0275, 1.0000, 0.1287],
            [-0.0199, 0.1866, 0.1287, 1.0000],
        ])
        .unwrap();
        stats::from_correlations(&theta, &[0.1158, 0.1106, -0.1720, -0.2776], 53, None).unwrap()
    }

    #[test]
    fn four_regressor_fit() {
        let fit = geometric_fit(&example()).unwrap();
        assert_abs_diff_eq!(fit.r_squared, 0.1437, epsilon = 5e-4);
        assert_abs_diff_eq!(fit.f_stat, 2.0138, epsilon = 5e-3);
        assert_abs_diff_eq!(fit.p_value, 0.1075, epsilon = 5e-4);
        assert!(fit.scale_free_only);
        assert_eq!(fit.beta_hat(), Err(GeoError::MissingNorms));
        assert!(fit.anova().is_err());
    }

    #[test]
    fn identity_design_sums_squares() {
        let omega = [0.3, -0.2, 0.5];
        let s = stats::from_correlations(&Matrix::identity(3), &omega, 20, None).unwrap();
        let fit = geometric_fit(&s).unwrap();
        assert_abs_diff_eq!(fit.r_squared, 0.09 + 0.04 + 0.25, epsilon = 1e-15);
    }

    #[test]
    fn single_regressor() {
        let s = stats::from_correlations(&Matrix::identity(1), &[-0.7], 12, None).unwrap();
        assert_abs_diff_eq!(geometric_fit(&s).unwrap().r_squared, 0.49, epsilon = 1e-15);
    }

    #[test]
    fn subsets() {
        let s = example();
        let full = geometric_fit(&s).unwrap().r_squared;
        assert_abs_diff_eq!(r_squared_subset(&s, &[0, 1, 2, 3]).unwrap(), full, epsilon = 1e-15);
        assert_abs_diff_eq!(
            r_squared_subset(&s, &[2]).unwrap(),
            0.1720 * 0.1720,
            epsilon = 1e-15
        );
        assert!(matches!(r_squared_subset(&s, &[]), Err(GeoError::Subset(_))));
        assert!(matches!(r_squared_subset(&s, &[4]), Err(GeoError::Subset(_))));
        assert!(matches!(r_squared_subset(&s, &[1, 1]), Err(GeoError::Subset(_))));
    }

    #[test]
    fn rounding_overshoot_is_clamped() {
        let mut warnings = Vec::new();
        assert_eq!(checked_r_squared(1.0 + 5e-10, &mut warnings).unwrap(), 1.0);
        assert_eq!(warnings.len(), 1);
        assert!(matches!(
            checked_r_squared(1.0 + 1e-6, &mut warnings),
            Err(GeoError::RSquaredOutOfRange(_))
        ));
    }

    #[test]
    fn exact_fit_both_paths() {
        let x1 = vec![1.0, 2.0, 3.0, 4.0, 6.0];
        let x2 = vec![0.0, 1.0, 0.0, 2.0, 1.0];
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 3.0 * a - b + 1.0).collect();
        let rep = compare_paths(&y, &[x1, x2]).unwrap();
        let r2 = rep.fields.iter().find(|f| f.field == "r_squared").unwrap();
        assert_abs_diff_eq!(r2.ols, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r2.geometric, 1.0, epsilon = 1e-12);
        let f = rep.fields.iter().find(|f| f.field == "f_stat").unwrap();
        assert!(f.ols.is_infinite() && f.geometric.is_infinite());
    }

    #[test]
    fn orthogonal_design_both_paths() {
        let x1 = vec![1.0, -1.0, 1.0, -1.0, 0.0];
        let x2 = vec![1.0, 1.0, -1.0, -1.0, 0.0];
        let y = vec![0.5, 2.0, -1.0, 0.3, 1.1];
        let rep = compare_paths(&y, &[x1.clone(), x2.clone()]).unwrap();
        assert!(rep.passed(), "{:?}", rep.worst());
        let s = stats::summarize(&y, &[x1, x2]).unwrap();
        let sum_sq: f64 = s.omega.iter().map(|r| r * r).sum();
        let r2 = rep.fields.iter().find(|f| f.field == "r_squared").unwrap();
        assert_abs_diff_eq!(r2.ols, sum_sq, epsilon = 1e-14);
        assert_abs_diff_eq!(r2.geometric, sum_sq, epsilon = 1e-14);
    }

    #[test]
    fn discrepancy_measure() {
        assert_eq!(relative_discrepancy(f64::INFINITY, f64::INFINITY, 0.0), 0.0);
        assert_eq!(relative_discrepancy(1.0, f64::INFINITY, 0.0), f64::INFINITY);
        assert_eq!(relative_discrepancy(0.0, 0.0, 0.0), 0.0);
        assert_abs_diff_eq!(relative_discrepancy(1.0, 1.1, 0.0), 0.1 / 1.1, epsilon = 1e-15);
    }
}

//! Classical least squares on the raw (mean-adjusted) design.
//!
//! This path never looks at correlations: it solves the normal equations
//! `xᵀx β = xᵀy` and builds the ANOVA table from the fitted and residual
//! vectors. It doubles as the independent check on [`crate::geometric`].

use crate::error::{GeoError, Result};
use crate::linalg::{self, Cholesky, Matrix};
use crate::special::{f_sf, FParams};
use crate::stats::InterceptMode;

/// A residual sum of squares at or below this fraction of the total is a
/// perfect fit: `F` is reported as infinite and `p` as 0.
pub const PERFECT_FIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaTable {
    pub ss_tot: f64,
    pub ss_reg: f64,
    pub ss_res: f64,
    pub df_tot: usize,
    pub df_reg: usize,
    pub df_res: usize,
    pub ms_tot: f64,
    pub ms_reg: f64,
    pub ms_res: f64,
    /// `σ̂²_Y`, the response variance estimate (equal to `ms_tot`).
    pub sigma2_y_hat: f64,
    /// `σ̂²`, the error variance estimate (equal to `ms_res`).
    pub sigma2_hat: f64,
    pub r_squared: f64,
    /// `+inf` for a perfect fit.
    pub f_stat: f64,
    pub p_value: f64,
}

impl AnovaTable {
    pub fn is_perfect_fit(&self) -> bool {
        self.f_stat.is_infinite()
    }

    /// Table for a response of squared length `ss_tot` explained to the
    /// fraction `r_squared`. Used by the geometric path, where only `‖y‖`
    /// and `R²` are known.
    pub fn from_r_squared(
        ss_tot: f64,
        r_squared: f64,
        n: usize,
        m: usize,
        mode: InterceptMode,
    ) -> Result<Self> {
        let (df_tot, df_reg, df_res) = degrees_of_freedom(n, m, mode)?;
        let ss_reg = ss_tot * r_squared;
        let ss_res = ss_tot * (1.0 - r_squared);
        let (f_stat, p_value) = f_test_from_r_squared(r_squared, df_reg, df_res)?;
        Ok(Self {
            ss_tot,
            ss_reg,
            ss_res,
            df_tot,
            df_reg,
            df_res,
            ms_tot: ss_tot / df_tot as f64,
            ms_reg: ss_reg / df_reg as f64,
            ms_res: ss_res / df_res as f64,
            sigma2_y_hat: ss_tot / df_tot as f64,
            sigma2_hat: ss_res / df_res as f64,
            r_squared,
            f_stat,
            p_value,
        })
    }
}

pub(crate) fn degrees_of_freedom(
    n: usize,
    m: usize,
    mode: InterceptMode,
) -> Result<(usize, usize, usize)> {
    let required = m + mode.offset() + 1;
    if m == 0 {
        return Err(GeoError::NoExplanatory);
    }
    if n < required {
        return Err(GeoError::InsufficientData { n, m, required });
    }
    let df_tot = n - mode.offset();
    Ok((df_tot, m, df_tot - m))
}

/// `F = (df_res / df_reg) · R² / (1 − R²)` and its upper-tail probability.
pub(crate) fn f_test_from_r_squared(
    r_squared: f64,
    df_reg: usize,
    df_res: usize,
) -> Result<(f64, f64)> {
    if 1.0 - r_squared <= PERFECT_FIT_TOL {
        return Ok((f64::INFINITY, 0.0));
    }
    let f = (df_res as f64 / df_reg as f64) * r_squared / (1.0 - r_squared);
    let f = f.max(0.0);
    Ok((f, f_sf(f, FParams::new(df_reg, df_res)?)?))
}

/// ANOVA table from the adjusted response and its decomposition
/// `y = ŷ + r`.
pub fn anova(
    y_adj: &[f64],
    fitted: &[f64],
    residuals: &[f64],
    m: usize,
    mode: InterceptMode,
) -> Result<AnovaTable> {
    let n = y_adj.len();
    if fitted.len() != n || residuals.len() != n {
        return Err(GeoError::Dimension(format!(
            "response, fitted and residual vectors have lengths {n}, {}, {}",
            fitted.len(),
            residuals.len()
        )));
    }
    let (df_tot, df_reg, df_res) = degrees_of_freedom(n, m, mode)?;
    let ss_tot = linalg::norm(y_adj).powi(2);
    let ss_reg = linalg::norm(fitted).powi(2);
    let ss_res = linalg::norm(residuals).powi(2);
    let ms_tot = ss_tot / df_tot as f64;
    let ms_reg = ss_reg / df_reg as f64;
    let ms_res = ss_res / df_res as f64;
    let r_squared = ss_reg / ss_tot;
    let (f_stat, p_value) = if ss_res <= PERFECT_FIT_TOL * ss_tot {
        (f64::INFINITY, 0.0)
    } else {
        let f = ms_reg / ms_res;
        (f, f_sf(f, FParams::new(df_reg, df_res)?)?)
    };
    Ok(AnovaTable {
        ss_tot,
        ss_reg,
        ss_res,
        df_tot,
        df_reg,
        df_res,
        ms_tot,
        ms_reg,
        ms_res,
        sigma2_y_hat: ms_tot,
        sigma2_hat: ms_res,
        r_squared,
        f_stat,
        p_value,
    })
}

/// Adjusted design matrix with its Gram matrix factored once. Applies the
/// hat matrix `h = x (xᵀx)⁻¹ xᵀ` and annihilator `a = I − h` without forming
/// either.
#[derive(Debug, Clone)]
pub struct OlsDesign {
    x: Matrix,
    means: Vec<f64>,
    gram: Cholesky,
    mode: InterceptMode,
}

impl OlsDesign {
    pub fn new(xs: &[Vec<f64>], mode: InterceptMode) -> Result<Self> {
        if xs.is_empty() {
            return Err(GeoError::NoExplanatory);
        }
        let mut cols = Vec::with_capacity(xs.len());
        let mut means = Vec::with_capacity(xs.len());
        for (j, x) in xs.iter().enumerate() {
            linalg::check_finite(x, &format!("x{}", j + 1))?;
            let (c, mean) = match mode {
                InterceptMode::Centered => linalg::center(x)?,
                InterceptMode::None => (x.clone(), 0.0),
            };
            if linalg::norm(&c) == 0.0 {
                return Err(GeoError::DegenerateVariable(format!("x{}", j + 1)));
            }
            cols.push(c);
            means.push(mean);
        }
        let x = Matrix::from_columns(&cols)?;
        let gram = x.transpose().matmul(&x)?;
        let gram = Cholesky::new(&gram).map_err(|e| match e {
            GeoError::Singular { pivot, value } => GeoError::Collinear(format!(
                "Gram matrix pivot {pivot} is {value:e}; column x{} is (nearly) a combination of the others",
                pivot + 1
            )),
            other => other,
        })?;
        Ok(Self {
            x,
            means,
            gram,
            mode,
        })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn m(&self) -> usize {
        self.x.cols()
    }

    pub fn mode(&self) -> InterceptMode {
        self.mode
    }

    /// The adjusted (centered, unless in no-intercept mode) design matrix.
    pub fn matrix(&self) -> &Matrix {
        &self.x
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// `(xᵀx)⁻¹ xᵀ v`, the least-squares coefficients of `v`.
    pub fn coefficients(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.gram.solve(&self.x.tr_mat_vec(v)?)
    }

    pub fn hat_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let b = self.coefficients(v)?;
        self.x.mat_vec(&b)
    }

    pub fn annihilator_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let h = self.hat_apply(v)?;
        Ok(v.iter().zip(h).map(|(a, b)| a - b).collect())
    }

    /// Explicit `n x n` hat matrix. Quadratic in `n`; intended for checks on
    /// small problems.
    pub fn hat_matrix(&self) -> Result<Matrix> {
        let n = self.n();
        let mut h = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.hat_apply(&e)?;
            for (i, v) in col.into_iter().enumerate() {
                h[(i, j)] = v;
            }
            e[j] = 0.0;
        }
        Ok(h)
    }
}

pub fn hat_apply(xs: &[Vec<f64>], v: &[f64]) -> Result<Vec<f64>> {
    OlsDesign::new(xs, InterceptMode::Centered)?.hat_apply(v)
}

pub fn annihilator_apply(xs: &[Vec<f64>], v: &[f64]) -> Result<Vec<f64>> {
    OlsDesign::new(xs, InterceptMode::Centered)?.annihilator_apply(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub beta_hat: Vec<f64>,
    /// `ȳ − Σ β̂_k x̄_k`; zero in no-intercept mode.
    pub beta0_hat: f64,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    /// The adjusted response the fit decomposes.
    pub y_adjusted: Vec<f64>,
    pub anova: AnovaTable,
}

/// Least-squares fit with the intercept absorbed by centering.
pub fn fit_ols(y: &[f64], xs: &[Vec<f64>]) -> Result<RegressionFit> {
    fit_ols_with_mode(y, xs, InterceptMode::Centered)
}

pub fn fit_ols_with_mode(
    y: &[f64],
    xs: &[Vec<f64>],
    mode: InterceptMode,
) -> Result<RegressionFit> {
    let m = xs.len();
    if m == 0 {
        return Err(GeoError::NoExplanatory);
    }
    let n = y.len();
    if let Some(bad) = xs.iter().find(|x| x.len() != n) {
        return Err(GeoError::Dimension(format!(
            "regressor has length {}, response has length {n}",
            bad.len()
        )));
    }
    degrees_of_freedom(n, m, mode)?;
    linalg::check_finite(y, "y")?;

    let design = OlsDesign::new(xs, mode)?;
    let (y_adj, y_mean) = match mode {
        InterceptMode::Centered => linalg::center(y)?,
        InterceptMode::None => (y.to_vec(), 0.0),
    };
    if linalg::norm(&y_adj) == 0.0 {
        return Err(GeoError::DegenerateVariable("y".into()));
    }
    let beta_hat = design.coefficients(&y_adj)?;
    let fitted = design.matrix().mat_vec(&beta_hat)?;
    let residuals: Vec<f64> = y_adj.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let beta0_hat = match mode {
        InterceptMode::Centered => {
            y_mean
                - beta_hat
                    .iter()
                    .zip(design.means())
                    .map(|(b, xm)| b * xm)
                    .sum::<f64>()
        }
        InterceptMode::None => 0.0,
    };
    let anova = anova(&y_adj, &fitted, &residuals, m, mode)?;
    Ok(RegressionFit {
        beta_hat,
        beta0_hat,
        fitted,
        residuals,
        y_adjusted: y_adj,
        anova,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_fit() {
        let x = vec![1.0, 2.0, 4.0, 7.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let fit = fit_ols(&y, &[x]).unwrap();
        assert_abs_diff_eq!(fit.beta_hat[0], 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(fit.beta0_hat, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.anova.r_squared, 1.0, epsilon = 1e-14);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
        assert!(fit.anova.is_perfect_fit());
        assert_eq!(fit.anova.p_value, 0.0);
    }

    #[test]
    fn unrelated_response() {
        // centered x = (-1, 0, 1, 0), centered y = (0, 1, 0, -1): orthogonal
        let x = vec![0.0, 1.0, 2.0, 1.0];
        let y = vec![3.0, 4.0, 3.0, 2.0];
        let fit = fit_ols(&y, &[x]).unwrap();
        assert_eq!(fit.beta_hat, vec![0.0]);
        assert_eq!(fit.anova.r_squared, 0.0);
        assert_eq!(fit.anova.f_stat, 0.0);
        assert_eq!(fit.anova.p_value, 1.0);
    }

    #[test]
    fn intercept_recovered() {
        let x1 = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x2 = vec![2.0, 1.0, 0.0, 1.0, 3.0, 2.0];
        let y: Vec<f64> = x1
            .iter()
            .zip(&x2)
            .map(|(a, b)| 5.0 + 0.5 * a - 1.5 * b)
            .collect();
        let fit = fit_ols(&y, &[x1, x2]).unwrap();
        assert_abs_diff_eq!(fit.beta0_hat, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.beta_hat[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.beta_hat[1], -1.5, epsilon = 1e-12);
    }

    #[test]
    fn projection_fixes_column_space() {
        let x1 = vec![-2.0, -1.0, 0.0, 1.0, 2.0];
        let x2 = vec![1.0, -1.0, 0.5, -0.5, 0.0];
        let xs = vec![x1.clone(), x2];
        let h = hat_apply(&xs, &x1).unwrap();
        for (a, b) in h.iter().zip(&x1) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
        let a = annihilator_apply(&xs, &x1).unwrap();
        assert!(a.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn anova_from_rounded_r_squared() {
        let t = AnovaTable::from_r_squared(1.0, 0.1437, 53, 4, InterceptMode::Centered).unwrap();
        assert_eq!((t.df_tot, t.df_reg, t.df_res), (52, 4, 48));
        assert_abs_diff_eq!(t.f_stat, 2.0138, epsilon = 5e-4);
        assert_abs_diff_eq!(t.p_value, 0.1075, epsilon = 5e-4);
    }

    #[test]
    fn collinear_and_short_designs() {
        let x1 = vec![1.0, 2.0, 3.0, 5.0, 4.0];
        let x2: Vec<f64> = x1.iter().map(|v| -2.0 * v).collect();
        let y = vec![1.0, 0.0, 2.0, 1.0, 3.0];
        assert!(matches!(
            fit_ols(&y, &[x1.clone(), x2]),
            Err(GeoError::Collinear(_))
        ));
        assert!(matches!(
            fit_ols(&y[..2], &[x1[..2].to_vec()]),
            Err(GeoError::InsufficientData { .. })
        ));
        assert!(matches!(
            fit_ols(&y, &[vec![3.0; 5]]),
            Err(GeoError::DegenerateVariable(_))
        ));
    }

    #[test]
    fn no_intercept_degrees_of_freedom() {
        let x = vec![1.0, 2.0, 3.0];
        let y = vec![1.0, 2.5, 2.9];
        let fit = fit_ols_with_mode(&y, &[x], InterceptMode::None).unwrap();
        assert_eq!(fit.anova.df_tot, 3);
        assert_eq!(fit.anova.df_res, 2);
        assert_eq!(fit.beta0_hat, 0.0);
        // through-origin slope Σxy / Σx²
        assert_abs_diff_eq!(fit.beta_hat[0], (1.0 + 5.0 + 8.7) / 14.0, epsilon = 1e-14);
    }
}

//! Serializable analysis reports and their text rendering.
//!
//! Every number is rounded to the configured count of significant digits
//! when the report is built, so the JSON and text renderings carry the same
//! values and a JSON report parses back to an identical struct.

use std::fmt::{self, Write as _};

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::geometric::{EquivalenceReport, GeometricFit};
use crate::ols::{AnovaTable, RegressionFit};
use crate::spectral::SpectralReport;
use crate::stats::{GeometricSummary, InterceptMode};

pub const DEFAULT_PRECISION: usize = 6;
pub const MAX_PRECISION: usize = 17;

/// A statistic that may be infinite (the `F` of a perfect fit). Serialized
/// as a JSON number, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stat {
    Finite(f64),
    Infinite,
}

impl Stat {
    pub fn value(self) -> f64 {
        match self {
            Stat::Finite(v) => v,
            Stat::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stat::Finite(v) => f.write_str(&fmt_num(*v)),
            Stat::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Stat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Stat::Finite(v) => s.serialize_f64(*v),
            Stat::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Stat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct StatVisitor;

        impl Visitor<'_> for StatVisitor {
            type Value = Stat;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Stat, E> {
                Ok(Stat::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Stat, E> {
                Ok(Stat::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Stat, E> {
                Ok(Stat::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Stat, E> {
                if v == "inf" {
                    Ok(Stat::Infinite)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        d.deserialize_any(StatVisitor)
    }
}

/// Rounds to a fixed number of significant digits.
#[derive(Debug, Clone, Copy)]
pub struct Rounder {
    digits: usize,
}

impl Rounder {
    pub fn new(digits: usize) -> Self {
        Self {
            digits: digits.clamp(1, MAX_PRECISION),
        }
    }

    pub fn digits(&self) -> usize {
        self.digits
    }

    pub fn num(&self, x: f64) -> f64 {
        if x == 0.0 || !x.is_finite() {
            return x;
        }
        format!("{:.*e}", self.digits - 1, x)
            .parse()
            .expect("formatted float parses")
    }

    pub fn vec(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|&x| self.num(x)).collect()
    }

    pub fn mat(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.vec(r)).collect()
    }

    pub fn stat(&self, x: f64) -> Stat {
        if x.is_infinite() {
            Stat::Infinite
        } else {
            Stat::Finite(self.num(x))
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e12).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    Data,
    Correlation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub mode: InputMode,
    pub n: usize,
    pub m: usize,
    pub response: String,
    pub regressors: Vec<String>,
    pub intercept: bool,
    pub precision: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarySection {
    /// Full correlation matrix, response first.
    pub phi: Vec<Vec<f64>>,
    pub omega: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
    pub y_norm: Option<f64>,
    pub x_norms: Option<Vec<f64>>,
    pub y_mean: Option<f64>,
    pub x_means: Option<Vec<f64>>,
}

impl SummarySection {
    pub fn new(s: &GeometricSummary, r: &Rounder) -> Self {
        Self {
            phi: r.mat(&s.phi().as_matrix().to_rows()),
            omega: r.vec(&s.omega),
            theta: r.mat(&s.theta.to_rows()),
            y_norm: s.norms.as_ref().map(|n| r.num(n.y)),
            x_norms: s.norms.as_ref().map(|n| r.vec(&n.x)),
            y_mean: s.means.as_ref().map(|m| r.num(m.y)),
            x_means: s.means.as_ref().map(|m| r.vec(&m.x)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaSection {
    pub ss_tot: f64,
    pub ss_reg: f64,
    pub ss_res: f64,
    pub df_tot: usize,
    pub df_reg: usize,
    pub df_res: usize,
    pub ms_tot: f64,
    pub ms_reg: f64,
    pub ms_res: f64,
    pub sigma2_y_hat: f64,
    pub sigma2_hat: f64,
    pub r_squared: f64,
    pub f_stat: Stat,
    pub p_value: f64,
}

impl AnovaSection {
    pub fn new(t: &AnovaTable, r: &Rounder) -> Self {
        Self {
            ss_tot: r.num(t.ss_tot),
            ss_reg: r.num(t.ss_reg),
            ss_res: r.num(t.ss_res),
            df_tot: t.df_tot,
            df_reg: t.df_reg,
            df_res: t.df_res,
            ms_tot: r.num(t.ms_tot),
            ms_reg: r.num(t.ms_reg),
            ms_res: r.num(t.ms_res),
            sigma2_y_hat: r.num(t.sigma2_y_hat),
            sigma2_hat: r.num(t.sigma2_hat),
            r_squared: r.num(t.r_squared),
            f_stat: r.stat(t.f_stat),
            p_value: r.num(t.p_value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsSection {
    pub beta_hat: Vec<f64>,
    pub beta0_hat: f64,
    pub anova: AnovaSection,
}

impl OlsSection {
    pub fn new(fit: &RegressionFit, r: &Rounder) -> Self {
        Self {
            beta_hat: r.vec(&fit.beta_hat),
            beta0_hat: r.num(fit.beta0_hat),
            anova: AnovaSection::new(&fit.anova, r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricSection {
    pub r_squared: f64,
    pub multiple_correlation: f64,
    pub f_stat: Stat,
    pub p_value: f64,
    pub df_tot: usize,
    pub df_reg: usize,
    pub df_res: usize,
    /// `Θ⁻¹Ω`.
    pub standardized: Vec<f64>,
    /// Absent when the summary carries no lengths.
    pub beta_hat: Option<Vec<f64>>,
    pub beta0_hat: Option<f64>,
    pub anova: Option<AnovaSection>,
}

impl GeometricSection {
    pub fn new(fit: &GeometricFit, r: &Rounder) -> Self {
        Self {
            r_squared: r.num(fit.r_squared),
            multiple_correlation: r.num(fit.multiple_correlation()),
            f_stat: r.stat(fit.f_stat),
            p_value: r.num(fit.p_value),
            df_tot: fit.df_tot,
            df_reg: fit.df_reg,
            df_res: fit.df_res,
            standardized: r.vec(&fit.standardized),
            beta_hat: fit.beta_hat.as_ref().map(|b| r.vec(b)),
            beta0_hat: fit.beta0_hat.map(|b| r.num(b)),
            anova: fit.anova.as_ref().map(|t| AnovaSection::new(t, r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSection {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Response–component correlations `S_k`.
    pub s_values: Vec<f64>,
    /// `S_k²`.
    pub contributions: Vec<f64>,
    pub r_squared: f64,
    pub sum_squared_correlations: f64,
    /// `(1 − λ_k) S_k²`.
    pub enhancement_terms: Vec<f64>,
    pub enhancement_difference: f64,
    pub enhancement_direct: f64,
    pub enhancement: bool,
}

impl SpectralSection {
    pub fn new(s: &SpectralReport, r: &Rounder) -> Self {
        Self {
            eigenvalues: r.vec(&s.eigen.values),
            eigenvectors: r.mat(&s.eigen.vectors),
            s_values: r.vec(&s.s_values),
            contributions: r.vec(&s.contributions),
            r_squared: r.num(s.r_squared),
            sum_squared_correlations: r.num(s.sum_squared_correlations),
            enhancement_terms: r.vec(&s.enhancement.per_component),
            enhancement_difference: r.num(s.enhancement.difference),
            enhancement_direct: r.num(s.enhancement.direct_difference),
            enhancement: s.enhancement.flag,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetRow {
    pub variables: Vec<String>,
    /// 1-based positions among the regressors.
    pub indices: Vec<usize>,
    pub r_squared: f64,
    /// `R²_S − Σ_{i∈S} R_i²`.
    pub enhancement_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceField {
    pub field: String,
    pub ols: Stat,
    pub geometric: Stat,
    pub relative: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceSection {
    pub passed: bool,
    pub max_relative: Stat,
    pub tolerance: f64,
    pub fields: Vec<EquivalenceField>,
}

impl EquivalenceSection {
    pub fn new(e: &EquivalenceReport, r: &Rounder) -> Self {
        Self {
            passed: e.passed(),
            max_relative: r.stat(e.max_relative),
            tolerance: e.tolerance,
            fields: e
                .fields
                .iter()
                .map(|f| EquivalenceField {
                    field: f.field.clone(),
                    ols: r.stat(f.ols),
                    geometric: r.stat(f.geometric),
                    relative: r.stat(f.relative),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub input: InputEcho,
    pub summary: SummarySection,
    /// Classical fit, present for raw-data input.
    pub ols: Option<OlsSection>,
    pub geometric: GeometricSection,
    pub spectral: SpectralSection,
    pub subsets: Option<Vec<SubsetRow>>,
    pub equivalence: Option<EquivalenceSection>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetTable {
    pub input: InputEcho,
    pub rows: Vec<SubsetRow>,
}

impl InputEcho {
    pub fn new(
        mode: InputMode,
        s: &GeometricSummary,
        response: &str,
        regressors: &[String],
        precision: usize,
    ) -> Self {
        Self {
            mode,
            n: s.n,
            m: s.m(),
            response: response.to_string(),
            regressors: regressors.to_vec(),
            intercept: s.mode == InterceptMode::Centered,
            precision,
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join("  ")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_else(|| "unavailable".into())
}

fn write_anova(out: &mut String, a: &AnovaSection) {
    let _ = writeln!(out, "  {:<12} {:>16} {:>6} {:>16}", "source", "SS", "df", "MS");
    for (name, ss, df, ms) in [
        ("regression", a.ss_reg, a.df_reg, a.ms_reg),
        ("residual", a.ss_res, a.df_res, a.ms_res),
        ("total", a.ss_tot, a.df_tot, a.ms_tot),
    ] {
        let _ = writeln!(
            out,
            "  {:<12} {:>16} {:>6} {:>16}",
            name,
            fmt_num(ss),
            df,
            fmt_num(ms)
        );
    }
    let _ = writeln!(out, "  sigma2_y_hat = {}", fmt_num(a.sigma2_y_hat));
    let _ = writeln!(out, "  sigma2_hat   = {}", fmt_num(a.sigma2_hat));
    let _ = writeln!(out, "  R^2 = {}   F = {}   p = {}", fmt_num(a.r_squared), a.f_stat, fmt_num(a.p_value));
}

fn write_subsets(out: &mut String, rows: &[SubsetRow]) {
    let _ = writeln!(out, "  {:<32} {:>14} {:>14}", "subset", "R^2", "enhancement");
    for r in rows {
        let _ = writeln!(
            out,
            "  {:<32} {:>14} {:>14}",
            r.variables.join(","),
            fmt_num(r.r_squared),
            fmt_num(r.enhancement_difference)
        );
    }
}

fn write_input(out: &mut String, i: &InputEcho) {
    let mode = match i.mode {
        InputMode::Data => "data",
        InputMode::Correlation => "correlation",
    };
    let _ = writeln!(out, "input: {mode}, n = {}, m = {}, intercept = {}", i.n, i.m, i.intercept);
    let _ = writeln!(out, "response: {}", i.response);
    let _ = writeln!(out, "regressors: {}", i.regressors.join(", "));
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write_input(&mut out, &self.input);

        let s = &self.summary;
        let _ = writeln!(out, "\n[correlation matrix Phi] (response first)");
        let decimals = self.input.precision.max(4);
        for row in &s.phi {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:>w$.decimals$}", w = decimals + 3)).collect();
            let _ = writeln!(out, "  {}", cells.join(" "));
        }
        let _ = writeln!(out, "goodness-of-fit vector Omega: {}", join(&s.omega));
        let _ = writeln!(out, "response norm: {}", opt(s.y_norm));
        let _ = writeln!(
            out,
            "regressor norms: {}",
            s.x_norms.as_deref().map(join).unwrap_or_else(|| "unavailable".into())
        );
        if let (Some(ym), Some(xm)) = (s.y_mean, &s.x_means) {
            let _ = writeln!(out, "means: response {}, regressors {}", fmt_num(ym), join(xm));
        }

        if let Some(o) = &self.ols {
            let _ = writeln!(out, "\n[classical least squares]");
            let _ = writeln!(out, "  beta_hat: {}", join(&o.beta_hat));
            let _ = writeln!(out, "  beta0_hat: {}", fmt_num(o.beta0_hat));
            write_anova(&mut out, &o.anova);
        }

        let g = &self.geometric;
        let _ = writeln!(out, "\n[geometric fit]");
        let _ = writeln!(out, "  R^2 = {}", fmt_num(g.r_squared));
        let _ = writeln!(out, "  multiple correlation = {}", fmt_num(g.multiple_correlation));
        let _ = writeln!(out, "  F = {} on ({}, {}) df", g.f_stat, g.df_reg, g.df_res);
        let _ = writeln!(out, "  p = {}", fmt_num(g.p_value));
        let _ = writeln!(out, "  standardized coefficients: {}", join(&g.standardized));
        let _ = writeln!(
            out,
            "  beta_hat: {}",
            g.beta_hat.as_deref().map(join).unwrap_or_else(|| "unavailable (no norms)".into())
        );
        let _ = writeln!(out, "  beta0_hat: {}", opt(g.beta0_hat));
        if let Some(a) = &g.anova {
            write_anova(&mut out, a);
        }

        let sp = &self.spectral;
        let _ = writeln!(out, "\n[principal components of Theta]");
        let _ = writeln!(
            out,
            "  {:>3} {:>14} {:>14} {:>14} {:>14}",
            "k", "eigenvalue", "S_k", "S_k^2", "(1-l_k)S_k^2"
        );
        for k in 0..sp.eigenvalues.len() {
            let _ = writeln!(
                out,
                "  {:>3} {:>14} {:>14} {:>14} {:>14}",
                k + 1,
                fmt_num(sp.eigenvalues[k]),
                fmt_num(sp.s_values[k]),
                fmt_num(sp.contributions[k]),
                fmt_num(sp.enhancement_terms[k])
            );
        }
        for (k, v) in sp.eigenvectors.iter().enumerate() {
            let _ = writeln!(out, "  v{} = {}", k + 1, join(v));
        }
        let _ = writeln!(out, "  sum S_k^2 = {}", fmt_num(sp.r_squared));
        let _ = writeln!(out, "  sum R_i^2 = {}", fmt_num(sp.sum_squared_correlations));
        let _ = writeln!(
            out,
            "  enhancement difference = {} (direct {})",
            fmt_num(sp.enhancement_difference),
            fmt_num(sp.enhancement_direct)
        );
        let _ = writeln!(
            out,
            "  enhancement: {}",
            if sp.enhancement { "yes" } else { "no" }
        );

        if let Some(rows) = &self.subsets {
            let _ = writeln!(out, "\n[subsets]");
            write_subsets(&mut out, rows);
        }

        if let Some(e) = &self.equivalence {
            let _ = writeln!(out, "\n[path equivalence]");
            let _ = writeln!(
                out,
                "  {} (max relative discrepancy {} , tolerance {})",
                if e.passed { "PASS" } else { "FAIL" },
                e.max_relative,
                fmt_num(e.tolerance)
            );
            for f in &e.fields {
                let _ = writeln!(
                    out,
                    "  {:<14} {:>16} {:>16} {:>12}",
                    f.field, f.ols, f.geometric, f.relative
                );
            }
        }

        for w in &self.warnings {
            let _ = writeln!(out, "\nwarning: {w}");
        }
        out
    }
}

impl SubsetTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("subset table serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write_input(&mut out, &self.input);
        out.push('\n');
        write_subsets(&mut out, &self.rows);
        out
    }
}

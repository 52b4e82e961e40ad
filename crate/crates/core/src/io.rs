//! Input formats.
//!
//! * Datasets: CSV with a header row, `,` separators, `.` decimals, UTF-8,
//!   and optional `#` comment lines. Missing values are an error.
//! * Correlations, plain text:
//!
//!   ```text
//!   # comment
//!   n 53
//!   norms 12.5 3.1 4.0        (optional: ‖y‖ then ‖x_1‖ … ‖x_m‖)
//!   names rate a b            (optional: response then regressors)
//!   0.1158 0.1106             (Ω, one row of m values)
//!   1.0000 0.2956             (Θ, m rows of m values)
//!   0.2956 1.0000
//!   ```
//!
//!   A square block of `m + 1` rows is read as the full matrix `Φ` with the
//!   response first. Values may be separated by whitespace or commas.
//! * Correlations, JSON: an object with `n`, `omega` + `theta` or `phi`,
//!   and optional `y_norm`, `x_norms`, `names`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::stats::Norms;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: missing value in column `{column}`")]
    MissingValue { line: usize, column: String },

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("{0}")]
    Format(String),
}

pub fn read_file(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A parsed CSV table: header plus string cells, with the source line of
/// every record kept for error messages.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    records: Vec<(usize, Vec<String>)>,
}

/// Response and regressor columns pulled out of a [`Table`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub response: String,
    pub regressors: Vec<String>,
    pub y: Vec<f64>,
    pub xs: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers: Vec<String> = reader
            .headers()
            .map_err(csv_error)?
            .iter()
            .map(str::to_string)
            .collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(InputError::Format("CSV has no header row".into()));
        }
        for (i, h) in headers.iter().enumerate() {
            if h.is_empty() {
                return Err(InputError::Format(format!("header column {} is empty", i + 1)));
            }
            if headers[..i].contains(h) {
                return Err(InputError::Format(format!("duplicate column name `{h}`")));
            }
        }
        let mut records = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(csv_error)?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            if rec.len() != headers.len() {
                return Err(InputError::Parse {
                    line,
                    msg: format!("expected {} fields, found {}", headers.len(), rec.len()),
                });
            }
            records.push((line, rec.iter().map(str::to_string).collect()));
        }
        if records.is_empty() {
            return Err(InputError::Format("CSV has no data rows".into()));
        }
        Ok(Self { headers, records })
    }

    pub fn rows(&self) -> usize {
        self.records.len()
    }

    fn index_of(&self, name: &str) -> Result<usize, InputError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| InputError::UnknownColumn(name.to_string()))
    }

    /// A column counts as numeric when every non-empty cell parses.
    fn is_numeric(&self, j: usize) -> bool {
        self.records
            .iter()
            .all(|(_, r)| is_missing(&r[j]) || r[j].parse::<f64>().is_ok())
    }

    fn numeric_column(&self, j: usize) -> Result<Vec<f64>, InputError> {
        let name = &self.headers[j];
        self.records
            .iter()
            .map(|(line, r)| {
                let cell = &r[j];
                if is_missing(cell) {
                    return Err(InputError::MissingValue {
                        line: *line,
                        column: name.clone(),
                    });
                }
                let v: f64 = cell.parse().map_err(|_| InputError::Parse {
                    line: *line,
                    msg: format!("`{cell}` in column `{name}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(InputError::Parse {
                        line: *line,
                        msg: format!("non-finite value `{cell}` in column `{name}`"),
                    });
                }
                Ok(v)
            })
            .collect()
    }

    /// Selects the response and regressors. Without an explicit list every
    /// other numeric column is a regressor.
    pub fn select(
        &self,
        response: &str,
        regressors: Option<&[String]>,
    ) -> Result<Dataset, InputError> {
        let ri = self.index_of(response)?;
        let cols: Vec<usize> = match regressors {
            Some(names) => {
                let mut idx = Vec::with_capacity(names.len());
                for name in names {
                    let j = self.index_of(name)?;
                    if j == ri {
                        return Err(InputError::Format(format!(
                            "`{name}` is the response and cannot also be a regressor"
                        )));
                    }
                    if idx.contains(&j) {
                        return Err(InputError::Format(format!("regressor `{name}` listed twice")));
                    }
                    idx.push(j);
                }
                idx
            }
            None => (0..self.headers.len())
                .filter(|&j| j != ri && self.is_numeric(j))
                .collect(),
        };
        if cols.is_empty() {
            return Err(InputError::Format("no numeric regressor columns".into()));
        }
        Ok(Dataset {
            response: response.to_string(),
            regressors: cols.iter().map(|&j| self.headers[j].clone()).collect(),
            y: self.numeric_column(ri)?,
            xs: cols
                .iter()
                .map(|&j| self.numeric_column(j))
                .collect::<Result<_, _>>()?,
        })
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan")
}

fn csv_error(e: csv::Error) -> InputError {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    InputError::Parse {
        line,
        msg: e.to_string(),
    }
}

/// Correlation-level input: `Ω`, `Θ`, and whatever else the file supplies.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationInput {
    pub n: Option<usize>,
    pub names: Option<Vec<String>>,
    pub norms: Option<Norms>,
    pub omega: Vec<f64>,
    pub theta: Matrix,
}

impl CorrelationInput {
    pub fn m(&self) -> usize {
        self.omega.len()
    }

    /// Response name followed by regressor names.
    pub fn variable_names(&self) -> (String, Vec<String>) {
        match &self.names {
            Some(names) => (names[0].clone(), names[1..].to_vec()),
            None => (
                "y".to_string(),
                (1..=self.m()).map(|i| format!("x{i}")).collect(),
            ),
        }
    }

    /// Parses either format, choosing JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self, InputError> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_text(text)
        }
    }

    pub fn parse_text(text: &str) -> Result<Self, InputError> {
        let mut n = None;
        let mut norms_line: Option<(usize, Vec<f64>)> = None;
        let mut names = None;
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .collect();
            match tokens[0].to_ascii_lowercase().as_str() {
                "n" => {
                    if tokens.len() != 2 {
                        return Err(parse_err(line_no, "expected `n <count>`"));
                    }
                    let v: usize = tokens[1]
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("invalid sample size `{}`", tokens[1])))?;
                    n = Some(v);
                }
                "norms" => norms_line = Some((line_no, parse_numbers(line_no, &tokens[1..])?)),
                "names" => names = Some(tokens[1..].iter().map(|t| t.to_string()).collect::<Vec<_>>()),
                _ => rows.push((line_no, parse_numbers(line_no, &tokens)?)),
            }
        }

        let Some((first_line, first)) = rows.first() else {
            return Err(InputError::Format("no correlation rows found".into()));
        };
        let width = first.len();
        for (line, r) in &rows {
            if r.len() != width {
                return Err(parse_err(
                    *line,
                    format!("row has {} values, expected {width}", r.len()),
                ));
            }
        }
        let (omega, theta) = if rows.len() == width + 1 {
            let theta: Vec<Vec<f64>> = rows[1..].iter().map(|(_, r)| r.clone()).collect();
            (first.clone(), theta)
        } else if rows.len() == width && width >= 2 {
            split_phi(rows.iter().map(|(_, r)| r.clone()).collect())
        } else {
            return Err(parse_err(
                *first_line,
                format!(
                    "{} rows of width {width}: expected Ω plus {width} rows of Θ, or a square Φ",
                    rows.len()
                ),
            ));
        };
        let m = omega.len();
        let norms = match norms_line {
            Some((line, v)) => {
                if v.len() != m + 1 {
                    return Err(parse_err(
                        line,
                        format!("norms line needs {} values (‖y‖ then {m} regressors), found {}", m + 1, v.len()),
                    ));
                }
                Some(Norms {
                    y: v[0],
                    x: v[1..].to_vec(),
                })
            }
            None => None,
        };
        build(n, names, norms, omega, theta)
    }

    pub fn parse_json(text: &str) -> Result<Self, InputError> {
        let doc: CorrelationJson = serde_json::from_str(text).map_err(|e| InputError::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        let (omega, theta) = match (doc.omega, doc.theta, doc.phi) {
            (Some(o), Some(t), None) => (o, t),
            (None, None, Some(phi)) => {
                let d = phi.len();
                if d < 2 || phi.iter().any(|r| r.len() != d) {
                    return Err(InputError::Format("`phi` must be a square matrix of size >= 2".into()));
                }
                split_phi(phi)
            }
            _ => {
                return Err(InputError::Format(
                    "provide either `omega` and `theta`, or `phi`".into(),
                ))
            }
        };
        let norms = match (doc.y_norm, doc.x_norms) {
            (Some(y), Some(x)) => Some(Norms { y, x }),
            (None, None) => None,
            _ => {
                return Err(InputError::Format(
                    "`y_norm` and `x_norms` must be given together".into(),
                ))
            }
        };
        build(doc.n, doc.names, norms, omega, theta)
    }

    pub fn to_json(&self) -> String {
        let doc = CorrelationJson {
            n: self.n,
            names: self.names.clone(),
            omega: Some(self.omega.clone()),
            theta: Some(self.theta.to_rows()),
            phi: None,
            y_norm: self.norms.as_ref().map(|n| n.y),
            x_norms: self.norms.as_ref().map(|n| n.x.clone()),
        };
        serde_json::to_string_pretty(&doc).expect("correlation input serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorrelationJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x_norms: Option<Vec<f64>>,
}

/// Splits a response-first `Φ` without validating it; validation happens
/// when the summary is built so that every violation can be reported.
fn split_phi(phi: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let omega = phi[1..].iter().map(|r| r[0]).collect();
    let theta = phi[1..].iter().map(|r| r[1..].to_vec()).collect();
    (omega, theta)
}

fn build(
    n: Option<usize>,
    names: Option<Vec<String>>,
    norms: Option<Norms>,
    omega: Vec<f64>,
    theta: Vec<Vec<f64>>,
) -> Result<CorrelationInput, InputError> {
    let m = omega.len();
    if m == 0 {
        return Err(InputError::Format("no explanatory variables".into()));
    }
    if theta.len() != m || theta.iter().any(|r| r.len() != m) {
        return Err(InputError::Format(format!(
            "Θ must be {m}x{m} to match {m} response correlations"
        )));
    }
    if let Some(names) = &names {
        if names.len() != m + 1 {
            return Err(InputError::Format(format!(
                "names must list the response and {m} regressors ({} given)",
                names.len()
            )));
        }
    }
    let theta = Matrix::from_rows(&theta).map_err(|e| InputError::Format(e.to_string()))?;
    if omega.iter().any(|v| !v.is_finite()) {
        return Err(InputError::Format("non-finite response correlation".into()));
    }
    Ok(CorrelationInput {
        n,
        names,
        norms,
        omega,
        theta,
    })
}

fn parse_err(line: usize, msg: impl Into<String>) -> InputError {
    InputError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_numbers(line: usize, tokens: &[&str]) -> Result<Vec<f64>, InputError> {
    tokens
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| parse_err(line, format!("`{t}` is not a number")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE_TEXT: &str = "\
# four regressors
n 53
0.1158 0.1106 -0.1720 -0.2776
1.0000 0.2956 0.4333 -0.0199
0.2956 1.0000 0.0275 0.1866
0.4333 0.0275 1.0000 0.1287
-0.0199 0.1866 0.1287 1.0000
";

    #[test]
    fn text_omega_theta() {
        let c = CorrelationInput::parse(EXAMPLE_TEXT).unwrap();
        assert_eq!(c.n, Some(53));
        assert_eq!(c.omega, vec![0.1158, 0.1106, -0.1720, -0.2776]);
        assert_eq!(c.theta[(2, 3)], 0.1287);
        assert_eq!(c.variable_names().1, vec!["x1", "x2", "x3", "x4"]);
    }

    #[test]
    fn text_phi_and_extras() {
        let text = "n 10\nnorms 2.0, 1.0, 3.0\nnames rate a b\n1, 0.2, 0.3\n0.2, 1, 0.1\n0.3, 0.1, 1\n";
        let c = CorrelationInput::parse(text).unwrap();
        assert_eq!(c.omega, vec![0.2, 0.3]);
        assert_eq!(c.theta.to_rows(), vec![vec![1.0, 0.1], vec![0.1, 1.0]]);
        assert_eq!(c.norms.as_ref().unwrap().x, vec![1.0, 3.0]);
        assert_eq!(c.variable_names().0, "rate");
    }

    #[test]
    fn json_round_trip() {
        let c = CorrelationInput::parse(EXAMPLE_TEXT).unwrap();
        let back = CorrelationInput::parse(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn text_errors_carry_lines() {
        let err = CorrelationInput::parse("n 5\n0.1 0.2\n1 abc\n0.3 1\n").unwrap_err();
        assert!(matches!(err, InputError::Parse { line: 3, .. }), "{err}");
        let err = CorrelationInput::parse("n 5\n0.1 0.2\n1 0.3\n0.3 1\n0.5 0.5\n").unwrap_err();
        assert!(matches!(err, InputError::Parse { line: 2, .. }), "{err}");
        assert!(CorrelationInput::parse("# nothing\n").is_err());
    }

    #[test]
    fn csv_selection() {
        let t = Table::parse("# header comment\ny,a,label,b\n1,2,u,3\n2,1,v,5\n4,0,w,1\n").unwrap();
        let d = t.select("y", None).unwrap();
        assert_eq!(d.regressors, vec!["a", "b"]);
        assert_eq!(d.xs[1], vec![3.0, 5.0, 1.0]);
        let d = t.select("y", Some(&["b".to_string()])).unwrap();
        assert_eq!(d.regressors, vec!["b"]);
        assert!(matches!(t.select("z", None), Err(InputError::UnknownColumn(_))));
        assert!(matches!(
            t.select("y", Some(&["label".to_string()])),
            Err(InputError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn csv_missing_value_is_error() {
        let t = Table::parse("y,a\n1,2\n2,\n3,4\n").unwrap();
        match t.select("y", Some(&["a".to_string()])) {
            Err(InputError::MissingValue { line, column }) => {
                assert_eq!(line, 3);
                assert_eq!(column, "a");
            }
            other => panic!("expected missing value, got {other:?}"),
        }
    }
}

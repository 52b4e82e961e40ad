//! Multiple linear regression through its geometric sufficient statistics.
//!
//! A least-squares fit with an intercept is fully determined by the lengths
//! of the centered input vectors and the angles between them. This crate
//! computes those statistics ([`stats`]), reproduces the classical fit and
//! ANOVA table from them alone ([`geometric`]), checks the result against a
//! direct normal-equations fit ([`ols`]), and decomposes `R²` over the
//! principal components of the design correlation matrix ([`spectral`]),
//! which exposes *enhancement*: `R²` exceeding the sum of the squared
//! pairwise response correlations.
//!
//! ```
//! use georeg::{geometric::geometric_fit, linalg::Matrix, stats::from_correlations};
//!
//! let theta = Matrix::from_rows(&[[1.0, 0.5], [0.5, 1.0]]).unwrap();
//! let summary = from_correlations(&theta, &[0.4, 0.0], 30, None).unwrap();
//! let fit = geometric_fit(&summary).unwrap();
//! // (0.16 + 0 - 0) / (1 - 0.25)
//! assert!((fit.r_squared - 0.16 / 0.75).abs() < 1e-12);
//! ```

pub mod cli;
pub mod error;
pub mod geometric;
pub mod io;
pub mod linalg;
pub mod ols;
pub mod report;
pub mod special;
pub mod spectral;
pub mod stats;

pub use error::{GeoError, Result};
pub use geometric::{compare_paths, geometric_fit, r_squared_subset, GeometricFit};
pub use linalg::Matrix;
pub use ols::{fit_ols, AnovaTable, RegressionFit};
pub use spectral::{eigh, enhancement, spectral_report, Eigen, SpectralReport};
pub use stats::{from_correlations, summarize, GeometricSummary, InterceptMode};

//! Parametric quantile regression for unit-interval responses under the
//! median-based unit Rayleigh (MBUR) distribution.
//!
//! The MBUR family has one shape parameter and a closed-form quantile
//! function, so any quantile of the response can be modeled directly: a link
//! function carries the linear predictor to the modeled quantile, and the
//! reparameterization alpha^2 = ln(quantile) / ln(c(u)) turns that quantile
//! into the distribution's shape, observation by observation. Fitting is
//! maximum likelihood via Nelder-Mead, with covariance from the
//! finite-difference observed information.
//!
//! The crate covers the full analysis pipeline for bounded-response data:
//!
//! - [`mbur`]: density, CDF, quantile function, sampling, one-sample MLE
//! - [`links`]: logit, complementary log-log, and log-log quantile links
//! - [`qreg`]: the regression model, Wald tests, quantile-curve prediction
//! - [`inference`]: information criteria, likelihood-ratio tests, pseudo R^2,
//!   drop-one model ladders
//! - [`diagnostics`]: quantile and Cox-Snell residuals, KS adequacy tests,
//!   homoscedasticity checks
//! - [`association`]: descriptive statistics, Kendall correlation matrices,
//!   VIF and condition indices
//! - [`dataio`]: CSV tables, the divide-by-100-log transformation, and the
//!   bundled OECD indicator extract
//! - [`report`]: ready-made analysis reports and plot-data files, also
//!   exposed through the `mburq` command-line tool
//!
//! Start with the runnable programs under `examples/` — there is one per
//! capability.

pub mod association;
pub mod dataio;
pub mod diagnostics;
pub mod error;
pub mod inference;
pub mod links;
pub mod mbur;
pub mod numerics;
pub mod optimizer;
pub mod qreg;
pub mod report;

pub use error::{Error, Result};
pub use links::LinkKind;
pub use mbur::{MburParams, QuantileLevel};
pub use optimizer::NmOptions;
pub use qreg::{DesignData, FitResult, ModelSpec};

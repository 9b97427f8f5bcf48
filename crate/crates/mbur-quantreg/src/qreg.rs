//! Parametric MBUR quantile regression: likelihood, fitting, covariance,
//! Wald tests, and quantile-curve prediction.
//!
//! Each observation gets its own shape alpha_i^2 = ln(m_i) / ln(c(u)) where
//! m_i = inv_link(x_i . beta) is the modeled u-quantile. Maximizing the
//! resulting likelihood makes the fitted linear predictor the conditional
//! quantile curve.

use crate::association;
use crate::error::{Error, Result};
use crate::links::{self, LinkKind};
use crate::mbur::{self, QuantileLevel};
use crate::numerics::{self, Matrix};
use crate::optimizer::{nelder_mead_minimize, NmOptions};
use serde::Serialize;

const LN_6: f64 = 1.791_759_469_228_055;

/// What to regress on what, through which link, at which quantile level.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub response: String,
    pub predictors: Vec<String>,
    pub link: LinkKind,
    pub level: QuantileLevel,
}

impl ModelSpec {
    /// A median-regression spec. Predictor names must be distinct and must
    /// not include the response.
    pub fn new(response: &str, predictors: &[&str], link: LinkKind) -> Result<Self> {
        Self::at_level(response, predictors, link, QuantileLevel::median())
    }

    pub fn at_level(
        response: &str,
        predictors: &[&str],
        link: LinkKind,
        level: QuantileLevel,
    ) -> Result<Self> {
        for (i, p) in predictors.iter().enumerate() {
            if *p == response {
                return Err(Error::Domain(format!(
                    "model: response '{response}' also appears as a predictor"
                )));
            }
            if predictors[..i].contains(p) {
                return Err(Error::Domain(format!("model: duplicate predictor '{p}'")));
            }
        }
        Ok(ModelSpec {
            response: response.to_string(),
            predictors: predictors.iter().map(|s| s.to_string()).collect(),
            link,
            level,
        })
    }

    /// Same response and rows, some predictors removed.
    pub fn without_predictors(&self, removed: &[String]) -> ModelSpec {
        ModelSpec {
            response: self.response.clone(),
            predictors: self
                .predictors
                .iter()
                .filter(|p| !removed.contains(p))
                .cloned()
                .collect(),
            link: self.link,
            level: self.level,
        }
    }
}

/// A ready-to-fit design: response strictly inside (0,1), design matrix with
/// a leading intercept column, and the surviving row labels.
#[derive(Debug, Clone)]
pub struct DesignData {
    pub y: Vec<f64>,
    pub x: Matrix,
    pub row_labels: Vec<String>,
    pub n: usize,
    pub k: usize,
}

impl DesignData {
    pub fn new(y: Vec<f64>, x: Matrix, row_labels: Vec<String>) -> Result<Self> {
        let n = y.len();
        if x.rows() != n || row_labels.len() != n {
            return Err(Error::Domain(
                "design: response, matrix and labels disagree on n".into(),
            ));
        }
        if x.cols() == 0 {
            return Err(Error::Domain("design: no columns".into()));
        }
        for i in 0..n {
            if x[(i, 0)] != 1.0 {
                return Err(Error::Domain("design: first column must be ones".into()));
            }
        }
        if let Some(bad) = y.iter().position(|v| !(*v > 0.0 && *v < 1.0)) {
            return Err(Error::Domain(format!(
                "design: response at row '{}' is outside (0,1)",
                row_labels[bad]
            )));
        }
        let k = x.cols() - 1;
        Ok(DesignData {
            y,
            x,
            row_labels,
            n,
            k,
        })
    }
}

/// A fitted model.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub beta_hat: Vec<f64>,
    /// Inverse observed information; absent when the Hessian could not be
    /// inverted (the likelihood statistics remain valid).
    pub vcov: Option<Matrix>,
    pub vcov_note: Option<String>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub n: usize,
    /// Parameter count, k + 1.
    pub p: usize,
    pub iterations: usize,
}

/// One coefficient's Wald test.
#[derive(Debug, Clone, Serialize)]
pub struct WaldRow {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_two_sided: f64,
}

fn log_pdf_with_shape(y: f64, alpha_sq: f64) -> f64 {
    let ln_y = y.ln();
    let one_minus_pow = -f64::exp_m1(ln_y / alpha_sq);
    LN_6 - alpha_sq.ln() + one_minus_pow.ln() + (2.0 / alpha_sq - 1.0) * ln_y
}

/// Negative log-likelihood of `beta`. Non-finite intermediates map to +inf
/// so the optimizer treats the domain boundary as a barrier.
pub fn neg_log_likelihood(spec: &ModelSpec, beta: &[f64], data: &DesignData) -> f64 {
    debug_assert_eq!(beta.len(), data.k + 1);
    let mut total = 0.0;
    for i in 0..data.n {
        let phi: f64 = data
            .x
            .row(i)
            .iter()
            .zip(beta)
            .map(|(a, b)| a * b)
            .sum();
        let alpha_sq = match links::alpha_sq_from_phi(spec.link, phi, &spec.level) {
            Ok(v) => v,
            Err(_) => return f64::INFINITY,
        };
        let ll = log_pdf_with_shape(data.y[i], alpha_sq);
        if !ll.is_finite() {
            return f64::INFINITY;
        }
        total -= ll;
    }
    total
}

/// First row whose likelihood contribution is non-finite at `beta`, if any.
/// Companion diagnostic to the +inf sentinel of [`neg_log_likelihood`].
pub fn first_nonfinite_row(spec: &ModelSpec, beta: &[f64], data: &DesignData) -> Option<usize> {
    for i in 0..data.n {
        let phi: f64 = data
            .x
            .row(i)
            .iter()
            .zip(beta)
            .map(|(a, b)| a * b)
            .sum();
        let ok = links::alpha_sq_from_phi(spec.link, phi, &spec.level)
            .map(|a2| log_pdf_with_shape(data.y[i], a2).is_finite())
            .unwrap_or(false);
        if !ok {
            return Some(i);
        }
    }
    None
}

/// Maximum-likelihood fit by Nelder-Mead from the documented start: the
/// intercept at link(sample median of y), all slopes at zero.
pub fn fit(spec: &ModelSpec, data: &DesignData, options: &NmOptions) -> Result<FitResult> {
    if data.n < data.k + 2 {
        return Err(Error::InsufficientData(format!(
            "fit: n = {} observations for {} parameters",
            data.n,
            data.k + 1
        )));
    }
    let median_y = association::sample_quantile(&data.y, 0.5);
    let mut start = vec![0.0; data.k + 1];
    start[0] = links::link(spec.link, median_y)?;

    let objective = |beta: &[f64]| neg_log_likelihood(spec, beta, data);
    let outcome = nelder_mead_minimize(objective, &start, options)?;

    let (vcov, vcov_note) = {
        let steps = numerics::default_hessian_steps(&outcome.minimizer);
        match numerics::hessian_central_diff(objective, &outcome.minimizer, &steps) {
            Ok(h) => match numerics::mat_inverse(&h) {
                Ok(inv) => (Some(inv), None),
                Err(e) => (None, Some(format!("information matrix not invertible: {e}"))),
            },
            Err(e) => (None, Some(format!("Hessian evaluation failed: {e}"))),
        }
    };

    Ok(FitResult {
        spec: spec.clone(),
        beta_hat: outcome.minimizer,
        vcov,
        vcov_note,
        log_likelihood: -outcome.minimum,
        converged: outcome.converged,
        n: data.n,
        p: data.k + 1,
        iterations: outcome.iterations,
    })
}

/// Wald z-statistics and two-sided normal p-values per coefficient.
pub fn wald_tests(fit: &FitResult) -> Result<Vec<WaldRow>> {
    let vcov = fit.vcov.as_ref().ok_or_else(|| {
        Error::Domain(
            fit.vcov_note
                .clone()
                .unwrap_or_else(|| "wald_tests: no covariance available".into()),
        )
    })?;
    let mut names = vec!["(Intercept)".to_string()];
    names.extend(fit.spec.predictors.iter().cloned());
    let mut rows = Vec::with_capacity(fit.p);
    for (j, name) in names.into_iter().enumerate() {
        let var = vcov[(j, j)];
        if var <= 0.0 {
            return Err(Error::Domain(format!(
                "wald_tests: nonpositive variance for coefficient '{name}'"
            )));
        }
        let se = var.sqrt();
        let z = fit.beta_hat[j] / se;
        let p = 2.0 * (1.0 - numerics::std_normal_cdf(z.abs())?);
        rows.push(WaldRow {
            name,
            estimate: fit.beta_hat[j],
            std_error: se,
            z,
            p_two_sided: p,
        });
    }
    Ok(rows)
}

/// The fitted u-quantile at a design row (intercept included):
/// c(u)^(alpha_hat^2) with alpha_hat^2 from the row's linear predictor.
pub fn predict_quantile(fit: &FitResult, x_row: &[f64], u: f64) -> Result<f64> {
    if x_row.len() != fit.p {
        return Err(Error::Domain(format!(
            "predict_quantile: row has {} entries, model has {}",
            x_row.len(),
            fit.p
        )));
    }
    let phi: f64 = x_row.iter().zip(&fit.beta_hat).map(|(a, b)| a * b).sum();
    let alpha_sq = links::alpha_sq_from_phi(fit.spec.link, phi, &fit.spec.level)?;
    let c = mbur::c_factor(u)?;
    Ok((alpha_sq * c.ln()).exp())
}

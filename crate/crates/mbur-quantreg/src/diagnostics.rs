//! Residual construction and model-adequacy tests.
//!
//! Quantile residuals Phi^-1(F(y_i)) are standard normal under a correctly
//! specified model; Cox-Snell residuals -ln(1 - F(y_i)) are standard
//! exponential. Both are monotone transforms of the same fitted CDF values,
//! so their goodness-of-fit distances coincide exactly.

use crate::association;
use crate::error::{Error, Result};
use crate::links;
use crate::numerics;
use crate::qreg::{DesignData, FitResult};
use serde::Serialize;

/// Which residual scale a statistic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResidualKind {
    Rq,
    Cs,
}

/// Residuals of a fitted model.
#[derive(Debug, Clone)]
pub struct ResidualSet {
    /// Quantile residuals Phi^-1(F_i).
    pub rq: Vec<f64>,
    /// Cox-Snell residuals -ln(1 - F_i), nonnegative.
    pub cs: Vec<f64>,
    /// Fitted CDF values F(y_i; alpha_i).
    pub fitted_cdf: Vec<f64>,
    /// How many CDF values were clipped away from {0, 1} to keep the
    /// residuals finite.
    pub clipped: usize,
}

const CDF_CLIP: f64 = 1e-12;

/// Computes both residual sets from a fitted model.
pub fn residuals(fit: &FitResult, data: &DesignData) -> Result<ResidualSet> {
    if data.n != fit.n || data.x.cols() != fit.p {
        return Err(Error::Domain(
            "residuals: data does not match the fitted design".into(),
        ));
    }
    let mut rq = Vec::with_capacity(data.n);
    let mut cs = Vec::with_capacity(data.n);
    let mut fitted_cdf = Vec::with_capacity(data.n);
    let mut clipped = 0;
    for i in 0..data.n {
        let phi: f64 = data
            .x
            .row(i)
            .iter()
            .zip(&fit.beta_hat)
            .map(|(a, b)| a * b)
            .sum();
        let alpha_sq = links::alpha_sq_from_phi(fit.spec.link, phi, &fit.spec.level)?;
        let t = (data.y[i].ln() / alpha_sq).exp();
        let mut f = t * t * (3.0 - 2.0 * t);
        if !(CDF_CLIP..=1.0 - CDF_CLIP).contains(&f) {
            f = f.clamp(CDF_CLIP, 1.0 - CDF_CLIP);
            clipped += 1;
        }
        fitted_cdf.push(f);
        rq.push(numerics::std_normal_quantile(f)?);
        cs.push(-f64::ln_1p(-f));
    }
    Ok(ResidualSet {
        rq,
        cs,
        fitted_cdf,
        clipped,
    })
}

fn ks_statistic<C>(sorted: &[f64], cdf: C) -> f64
where
    C: Fn(f64) -> f64,
{
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &v) in sorted.iter().enumerate() {
        let f = cdf(v);
        let upper = (i as f64 + 1.0) / n - f;
        let lower = f - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    d
}

/// One-sample KS test of `r` against the standard normal distribution.
pub fn ks_test_normal(r: &[f64]) -> Result<(f64, f64)> {
    if r.len() < 5 {
        return Err(Error::Domain(format!(
            "ks_test_normal: need at least 5 values, got {}",
            r.len()
        )));
    }
    let mut s = r.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = ks_statistic(&s, |v| numerics::std_normal_cdf(v).unwrap_or(f64::NAN));
    let p = numerics::ks_p_value(d, r.len())?;
    Ok((d, p))
}

/// One-sample KS test of `r` against the standard exponential distribution.
pub fn ks_test_exponential(r: &[f64]) -> Result<(f64, f64)> {
    if r.len() < 5 {
        return Err(Error::Domain(format!(
            "ks_test_exponential: need at least 5 values, got {}",
            r.len()
        )));
    }
    if let Some(bad) = r.iter().find(|v| **v < 0.0) {
        return Err(Error::Domain(format!(
            "ks_test_exponential: negative residual {bad}"
        )));
    }
    let mut s = r.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = ks_statistic(&s, |v| -f64::exp_m1(-v));
    let p = numerics::ks_p_value(d, r.len())?;
    Ok((d, p))
}

/// Kendall tau-b between a residual sequence and a predictor column.
pub fn residual_predictor_tau(r: &[f64], x: &[f64]) -> Result<(f64, f64)> {
    if r.len() < 5 {
        return Err(Error::Domain(format!(
            "residual_predictor_tau: need at least 5 pairs, got {}",
            r.len()
        )));
    }
    association::kendall_tau(r, x)
}

/// Outcome of the squared-residual auxiliary regression.
#[derive(Debug, Clone, Serialize)]
pub struct HomoscedasticityResult {
    /// Two-sided slope p-value: small values indicate a variance trend.
    pub p_value: f64,
    /// R^2 of the auxiliary regression.
    pub r_squared: f64,
    pub residual_kind: ResidualKind,
}

/// OLS of squared residuals on (intercept, x); the slope test addresses the
/// null hypothesis of constant variance.
pub fn homoscedasticity_test(
    r: &[f64],
    x: &[f64],
    kind: ResidualKind,
) -> Result<HomoscedasticityResult> {
    let n = r.len();
    if n < 5 {
        return Err(Error::Domain(format!(
            "homoscedasticity_test: need at least 5 rows, got {n}"
        )));
    }
    if x.len() != n {
        return Err(Error::Domain(
            "homoscedasticity_test: residuals and predictor lengths differ".into(),
        ));
    }
    let squared: Vec<f64> = r.iter().map(|v| v * v).collect();
    if squared.iter().all(|v| *v == squared[0]) {
        return Ok(HomoscedasticityResult {
            p_value: 1.0,
            r_squared: 0.0,
            residual_kind: kind,
        });
    }
    let mut entries = Vec::with_capacity(2 * n);
    for &xi in x {
        entries.push(1.0);
        entries.push(xi);
    }
    let design = numerics::Matrix::new(n, 2, entries)?;
    let ols = numerics::ols_fit(&design, &squared)?;
    Ok(HomoscedasticityResult {
        p_value: ols.slope_p_values[0],
        r_squared: ols.r_squared,
        residual_kind: kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::links::LinkKind;
    use crate::numerics::Matrix;
    use crate::optimizer::NmOptions;
    use crate::qreg::{self, ModelSpec};
    use approx::assert_abs_diff_eq;

    fn fitted_toy() -> (FitResult, DesignData) {
        let n = 30;
        let mut entries = Vec::new();
        let mut y = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            entries.extend_from_slice(&[1.0, t - 0.5]);
            // deterministic wiggle around an increasing trend
            let wiggle = 0.08 * ((i * 7 % 11) as f64 / 11.0 - 0.5);
            y.push((0.25 + 0.5 * t + wiggle).clamp(0.05, 0.95));
            labels.push(format!("r{i}"));
        }
        let data = DesignData::new(y, Matrix::new(n, 2, entries).unwrap(), labels).unwrap();
        let spec = ModelSpec::new("y", &["x"], LinkKind::Logit).unwrap();
        let fit = qreg::fit(&spec, &data, &NmOptions::default()).unwrap();
        (fit, data)
    }

    #[test]
    fn residual_definitions() {
        let (fit, data) = fitted_toy();
        let res = residuals(&fit, &data).unwrap();
        assert_eq!(res.rq.len(), data.n);
        assert_eq!(res.clipped, 0);
        for i in 0..data.n {
            let f = res.fitted_cdf[i];
            assert_abs_diff_eq!(
                res.rq[i],
                numerics::std_normal_quantile(f).unwrap(),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(res.cs[i], -(1.0 - f).ln(), epsilon = 1e-12);
            assert!(res.cs[i] >= 0.0);
        }
        // a CDF value of one half maps to a zero quantile residual and a
        // Cox-Snell value of ln 2; 1 - e^-1 maps to exactly 1
        assert_abs_diff_eq!(
            numerics::std_normal_quantile(0.5).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            -f64::ln_1p(-(1.0 - (-1.0_f64).exp())),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn ks_distances_coincide_for_both_scales() {
        let (fit, data) = fitted_toy();
        let res = residuals(&fit, &data).unwrap();
        let (d_rq, p_rq) = ks_test_normal(&res.rq).unwrap();
        let (d_cs, p_cs) = ks_test_exponential(&res.cs).unwrap();
        // the same sup-distance in probability space
        assert_abs_diff_eq!(d_rq, d_cs, epsilon = 1e-14);
        assert_eq!(p_rq, p_cs);
    }

    #[test]
    fn ks_plug_in_grid() {
        // r_i = Phi^-1((i - 0.5)/n) has d = 0.5/n by construction
        let n = 40;
        let r: Vec<f64> = (1..=n)
            .map(|i| numerics::std_normal_quantile((i as f64 - 0.5) / n as f64).unwrap())
            .collect();
        let (d, p) = ks_test_normal(&r).unwrap();
        assert_abs_diff_eq!(d, 0.5 / n as f64, epsilon = 1e-12);
        assert!(p > 0.999);

        let e: Vec<f64> = (1..=n)
            .map(|i| -(1.0 - (i as f64 - 0.5) / n as f64).ln())
            .collect();
        let (d, _) = ks_test_exponential(&e).unwrap();
        assert_abs_diff_eq!(d, 0.5 / n as f64, epsilon = 1e-12);
    }

    #[test]
    fn ks_degenerate_misfit() {
        let r = vec![5.0; 20];
        let (_, p) = ks_test_normal(&r).unwrap();
        assert!(p < 1e-6);
        assert!(ks_test_exponential(&[-1.0, 1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(ks_test_normal(&[0.0; 4]).is_err());
    }

    #[test]
    fn tau_identity_and_monotone_match() {
        let (fit, data) = fitted_toy();
        let res = residuals(&fit, &data).unwrap();
        let x: Vec<f64> = (0..data.n).map(|i| data.x[(i, 1)]).collect();
        let (t_rq, p_rq) = residual_predictor_tau(&res.rq, &x).unwrap();
        let (t_cs, p_cs) = residual_predictor_tau(&res.cs, &x).unwrap();
        // Cox-Snell is a strictly increasing transform of the quantile
        // residual, so Kendall statistics agree exactly
        assert_eq!(t_rq, t_cs);
        assert_eq!(p_rq, p_cs);

        let r: Vec<f64> = x.clone();
        let (tau, _) = residual_predictor_tau(&r, &x).unwrap();
        assert_eq!(tau, 1.0);
    }

    #[test]
    fn homoscedasticity_flat_and_trend() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 / 20.0).collect();
        let flat = vec![0.3; 20];
        let h = homoscedasticity_test(&flat, &x, ResidualKind::Rq).unwrap();
        assert_eq!(h.p_value, 1.0);
        assert_eq!(h.r_squared, 0.0);

        // strongly increasing spread
        let trending: Vec<f64> = x.iter().map(|&v| (1.0 + 5.0 * v).sqrt()).collect();
        let h = homoscedasticity_test(&trending, &x, ResidualKind::Cs).unwrap();
        assert!(h.p_value < 1e-6);
        assert!(h.r_squared > 0.9);
        assert_eq!(h.residual_kind, ResidualKind::Cs);
    }
}

//! Model-selection statistics and the nested-model comparison ladder.

use crate::error::{Error, Result};
use crate::numerics;
use crate::optimizer::NmOptions;
use crate::qreg::{self, DesignData, FitResult, ModelSpec};
use serde::Serialize;

/// The four information criteria used for model comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IcSet {
    pub aic: f64,
    pub caic: f64,
    pub bic: f64,
    pub hqic: f64,
}

/// AIC = -2 ll + 2p, CAIC = AIC + 2p(p+1)/(n-p-1), BIC = -2 ll + p ln n,
/// HQIC = -2 ll + 2p ln(ln n).
pub fn information_criteria(ll: f64, p: usize, n: usize) -> Result<IcSet> {
    if n <= p + 1 {
        return Err(Error::Domain(format!(
            "information_criteria: CAIC undefined for n = {n}, p = {p}"
        )));
    }
    let (pf, nf) = (p as f64, n as f64);
    let aic = -2.0 * ll + 2.0 * pf;
    Ok(IcSet {
        aic,
        caic: aic + 2.0 * pf * (pf + 1.0) / (nf - pf - 1.0),
        bic: -2.0 * ll + pf * nf.ln(),
        hqic: -2.0 * ll + 2.0 * pf * nf.ln().ln(),
    })
}

/// Likelihood-ratio statistic 2(ll_full - ll_nested), floored at zero, with
/// its upper-tail chi-squared p-value on `df` degrees of freedom.
pub fn lrt(ll_full: f64, ll_nested: f64, df: usize) -> Result<(f64, f64)> {
    if df == 0 {
        return Err(Error::Domain("lrt: df must be >= 1".into()));
    }
    let stat = (2.0 * (ll_full - ll_nested)).max(0.0);
    let p = numerics::chi_squared_sf(stat, df)?;
    Ok((stat, p))
}

/// Likelihood-based pseudo R^2: 1 - exp((2/n)(ll_null - ll_full)).
pub fn pseudo_r2(ll_null: f64, ll_full: f64, n: usize) -> f64 {
    1.0 - ((2.0 / n as f64) * (ll_null - ll_full)).exp()
}

/// One reduced model in a drop-one (or drop-many) comparison ladder.
#[derive(Debug, Clone)]
pub struct LadderRow {
    /// Human-readable description of what was removed.
    pub label: String,
    /// The removed predictor names (empty for the full model itself).
    pub removed: Vec<String>,
    pub fit: FitResult,
    /// 2(ll_full - ll_row), floored at zero.
    pub lrt_vs_full: f64,
    pub lrt_p: f64,
    /// Whether every retained slope keeps the sign it has in the
    /// corresponding single-predictor fit under the same link.
    pub sign_preserved: bool,
}

/// A fitted ladder: the full model plus one row per requested removal.
#[derive(Debug)]
pub struct Ladder {
    pub full: FitResult,
    pub rows: Vec<LadderRow>,
    /// Rows that could not be fitted, as (label, error) pairs.
    pub failures: Vec<(String, String)>,
}

fn reduced_design(data: &DesignData, spec: &ModelSpec, keep: &[String]) -> DesignData {
    let mut cols = vec![0usize]; // intercept
    for name in keep {
        let idx = spec.predictors.iter().position(|p| p == name).unwrap();
        cols.push(idx + 1);
    }
    let mut entries = Vec::with_capacity(data.n * cols.len());
    for r in 0..data.n {
        for &c in &cols {
            entries.push(data.x[(r, c)]);
        }
    }
    DesignData::new(
        data.y.clone(),
        numerics::Matrix::new(data.n, cols.len(), entries).expect("shape"),
        data.row_labels.clone(),
    )
    .expect("reduced design inherits a valid full design")
}

/// Fits the full model and each requested reduced model on the same rows,
/// testing every reduction against the full model with df = number of
/// removed predictors.
///
/// Each entry of `subsets` lists predictors to remove: the empty set
/// reproduces the full model (LRT 0), the complete set is the null model.
pub fn drop_one_ladder(
    spec: &ModelSpec,
    data: &DesignData,
    subsets: &[Vec<String>],
    options: &NmOptions,
) -> Result<Ladder> {
    for subset in subsets {
        for name in subset {
            if !spec.predictors.contains(name) {
                return Err(Error::UnknownColumn(format!(
                    "ladder subset names '{name}', which is not a model predictor"
                )));
            }
        }
    }

    let full = qreg::fit(spec, data, options)?;

    // single-predictor reference fits for the sign-preservation column
    let mut single_signs = std::collections::BTreeMap::new();
    for name in &spec.predictors {
        let single_spec = spec.without_predictors(
            &spec
                .predictors
                .iter()
                .filter(|p| *p != name)
                .cloned()
                .collect::<Vec<_>>(),
        );
        let single_data = reduced_design(data, spec, &[name.clone()]);
        match qreg::fit(&single_spec, &single_data, options) {
            Ok(f) => {
                single_signs.insert(name.clone(), f.beta_hat[1].signum());
            }
            Err(e) => {
                return Err(Error::Domain(format!(
                    "ladder: single-predictor reference fit for '{name}' failed: {e}"
                )))
            }
        }
    }

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for subset in subsets {
        let mut removed: Vec<String> = Vec::new();
        for p in &spec.predictors {
            if subset.contains(p) {
                removed.push(p.clone());
            }
        }
        let keep: Vec<String> = spec
            .predictors
            .iter()
            .filter(|p| !removed.contains(p))
            .cloned()
            .collect();
        let label = if removed.is_empty() {
            "full".to_string()
        } else if keep.is_empty() {
            "null".to_string()
        } else {
            format!("drop {}", removed.join("+"))
        };

        let row_spec = spec.without_predictors(&removed);
        let row_data = reduced_design(data, spec, &keep);
        let fit = match qreg::fit(&row_spec, &row_data, options) {
            Ok(f) => f,
            Err(e) => {
                failures.push((label, e.to_string()));
                continue;
            }
        };
        debug_assert_eq!(fit.n, full.n);

        let (stat, p) = if removed.is_empty() {
            (0.0, 1.0)
        } else {
            lrt(full.log_likelihood, fit.log_likelihood, removed.len())?
        };
        let sign_preserved = keep.iter().enumerate().all(|(i, name)| {
            let slope = fit.beta_hat[i + 1];
            slope.signum() == single_signs[name] || slope == 0.0
        });
        rows.push(LadderRow {
            label,
            removed,
            fit,
            lrt_vs_full: stat,
            lrt_p: p,
            sign_preserved,
        });
    }

    Ok(Ladder {
        full,
        rows,
        failures,
    })
}

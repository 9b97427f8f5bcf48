//! Assembled analysis reports and their machine-readable artifacts.
//!
//! Everything the `mburq` command line emits is built here so the same
//! bundles can be produced programmatically. All outputs are deterministic:
//! reports carry no timestamps unless a stamp is passed in explicitly, JSON
//! key order follows the struct definitions, and numbers are written in
//! shortest round-trip form so every value is recomputable bit-exactly.

use crate::association::{self, DescriptiveStats};
use crate::dataio::{self, DataTable, TransformKind, TransformSpec};
use crate::diagnostics::{self, ResidualKind};
use crate::error::{Error, Result};
use crate::inference::{self, IcSet};
use crate::links::LinkKind;
use crate::mbur::QuantileLevel;
use crate::numerics::Matrix;
use crate::optimizer::NmOptions;
use crate::qreg::{self, DesignData, FitResult, ModelSpec};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Knobs shared by all report runners.
#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub nm: NmOptions,
    pub transforms: TransformSpec,
    /// Modeled quantile level.
    pub tau: f64,
    /// Optional provenance stamp copied verbatim into reports; omitted by
    /// default so identical runs produce identical bytes.
    pub stamp: Option<String>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            nm: NmOptions::default(),
            transforms: TransformSpec::standard(),
            tau: 0.5,
            stamp: None,
        }
    }
}

fn tool_version() -> String {
    format!("mburq {}", env!("CARGO_PKG_VERSION"))
}

// ---------------------------------------------------------------------------
// Fit reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ModelEcho {
    pub response: String,
    pub predictors: Vec<String>,
    pub link: String,
    pub tau: f64,
    pub predictor_transform: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientReport {
    pub name: String,
    pub estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_two_sided: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub significant_at_5pct: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualAssociation {
    pub predictor: String,
    pub tau: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HomoscedasticityReport {
    pub predictor: String,
    pub residual_kind: ResidualKind,
    pub p_value: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsBlock {
    /// KS test of the quantile residuals against the standard normal.
    pub ks_rq: TestReport,
    /// KS test of the Cox-Snell residuals against the standard exponential.
    pub ks_cs: TestReport,
    /// Kendall association between residuals and each predictor, residuals
    /// paired with their own rows.
    pub residual_vs_predictor: Vec<ResidualAssociation>,
    /// Kendall association between the ascending-sorted residual sequence
    /// (the QQ-plot export order) and each predictor in table order. This is
    /// the pairing used by the reference tables this crate reproduces.
    pub sorted_residual_vs_predictor: Vec<ResidualAssociation>,
    pub homoscedasticity: Vec<HomoscedasticityReport>,
    /// Count of fitted CDF values clipped away from {0, 1}.
    pub cdf_clipped: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub link_tokens: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stamp: Option<String>,
}

/// The complete JSON report of one fitted model.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub model: ModelEcho,
    pub n: usize,
    pub parameters: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    pub coefficients: Vec<CoefficientReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vcov: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vcov_note: Option<String>,
    pub information_criteria: IcSet,
    pub null_log_likelihood: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lrt_vs_null: Option<TestReport>,
    pub pseudo_r_squared: f64,
    pub diagnostics: DiagnosticsBlock,
    pub provenance: Provenance,
}

/// One quantile-curve sample point.
#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub x_transformed: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
}

/// Plot data for one predictor: the fitted curve at the modeled level
/// bracketed by the 0.25 and 0.75 quantile curves, over a 200-point grid.
/// Other predictors are held at their sample medians.
#[derive(Debug, Clone)]
pub struct CurveData {
    pub predictor: String,
    pub points: Vec<CurvePoint>,
}

/// A fitted model with its report and plot data.
#[derive(Debug)]
pub struct FitBundle {
    pub report: RunReport,
    pub fit: FitResult,
    pub data: DesignData,
    pub residuals: diagnostics::ResidualSet,
    pub curves: Vec<CurveData>,
}

fn intercept_only(data: &DesignData) -> DesignData {
    DesignData::new(
        data.y.clone(),
        Matrix::new(data.n, 1, vec![1.0; data.n]).expect("shape"),
        data.row_labels.clone(),
    )
    .expect("intercept design is valid")
}

fn predictor_column(data: &DesignData, j: usize) -> Vec<f64> {
    (0..data.n).map(|r| data.x[(r, j + 1)]).collect()
}

/// Fits one model and assembles its full report.
pub fn run_fit(
    table: &DataTable,
    response: &str,
    predictors: &[&str],
    link: LinkKind,
    options: &ReportOptions,
) -> Result<FitBundle> {
    let level = QuantileLevel::new(options.tau)?;
    let spec = ModelSpec::at_level(response, predictors, link, level)?;
    let data = dataio::build_design(table, &spec, &options.transforms)?;
    let fit = qreg::fit(&spec, &data, &options.nm)?;

    let null_spec = spec.without_predictors(&spec.predictors.clone());
    let null_fit = qreg::fit(&null_spec, &intercept_only(&data), &options.nm)?;

    let wald = match qreg::wald_tests(&fit) {
        Ok(rows) => Some(rows),
        Err(_) => None,
    };
    let mut names = vec!["(Intercept)".to_string()];
    names.extend(spec.predictors.iter().cloned());
    let coefficients = names
        .iter()
        .enumerate()
        .map(|(j, name)| match &wald {
            Some(rows) => CoefficientReport {
                name: name.clone(),
                estimate: rows[j].estimate,
                std_error: Some(rows[j].std_error),
                z: Some(rows[j].z),
                p_two_sided: Some(rows[j].p_two_sided),
                significant_at_5pct: Some(rows[j].p_two_sided < 0.05),
            },
            None => CoefficientReport {
                name: name.clone(),
                estimate: fit.beta_hat[j],
                std_error: None,
                z: None,
                p_two_sided: None,
                significant_at_5pct: None,
            },
        })
        .collect();

    let ic = inference::information_criteria(fit.log_likelihood, fit.p, fit.n)?;
    let lrt_vs_null = if spec.predictors.is_empty() {
        None
    } else {
        let (stat, p) = inference::lrt(
            fit.log_likelihood,
            null_fit.log_likelihood,
            spec.predictors.len(),
        )?;
        Some(TestReport {
            statistic: stat,
            p_value: p,
        })
    };
    let pseudo = inference::pseudo_r2(null_fit.log_likelihood, fit.log_likelihood, fit.n);

    let residuals = diagnostics::residuals(&fit, &data)?;
    let (d_rq, p_rq) = diagnostics::ks_test_normal(&residuals.rq)?;
    let (d_cs, p_cs) = diagnostics::ks_test_exponential(&residuals.cs)?;

    let mut sorted_rq = residuals.rq.clone();
    sorted_rq.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut residual_vs_predictor = Vec::new();
    let mut sorted_residual_vs_predictor = Vec::new();
    let mut homoscedasticity = Vec::new();
    for (j, pname) in spec.predictors.iter().enumerate() {
        let x = predictor_column(&data, j);
        let (tau, p) = diagnostics::residual_predictor_tau(&residuals.rq, &x)?;
        residual_vs_predictor.push(ResidualAssociation {
            predictor: pname.clone(),
            tau,
            p_value: p,
        });
        let (tau_s, p_s) = diagnostics::residual_predictor_tau(&sorted_rq, &x)?;
        sorted_residual_vs_predictor.push(ResidualAssociation {
            predictor: pname.clone(),
            tau: tau_s,
            p_value: p_s,
        });
        for (kind, r) in [
            (ResidualKind::Cs, &residuals.cs),
            (ResidualKind::Rq, &residuals.rq),
        ] {
            let h = diagnostics::homoscedasticity_test(r, &x, kind)?;
            homoscedasticity.push(HomoscedasticityReport {
                predictor: pname.clone(),
                residual_kind: kind,
                p_value: h.p_value,
                r_squared: h.r_squared,
            });
        }
    }

    let curves = build_curves(&fit, &data, &spec)?;

    let report = RunReport {
        model: ModelEcho {
            response: response.to_string(),
            predictors: spec.predictors.clone(),
            link: link.name().to_string(),
            tau: options.tau,
            predictor_transform: match options.transforms.predictor_default() {
                TransformKind::Div100Log => "div100_log".to_string(),
                TransformKind::Identity => "identity".to_string(),
            },
        },
        n: fit.n,
        parameters: fit.p,
        converged: fit.converged,
        log_likelihood: fit.log_likelihood,
        coefficients,
        vcov: fit.vcov.as_ref().map(|m| m.to_rows()),
        vcov_note: fit.vcov_note.clone(),
        information_criteria: ic,
        null_log_likelihood: null_fit.log_likelihood,
        lrt_vs_null,
        pseudo_r_squared: pseudo,
        diagnostics: DiagnosticsBlock {
            ks_rq: TestReport {
                statistic: d_rq,
                p_value: p_rq,
            },
            ks_cs: TestReport {
                statistic: d_cs,
                p_value: p_cs,
            },
            residual_vs_predictor,
            sorted_residual_vs_predictor,
            homoscedasticity,
            cdf_clipped: residuals.clipped,
        },
        provenance: Provenance {
            tool: tool_version(),
            link_tokens: LinkKind::ALL.iter().map(|l| l.name().to_string()).collect(),
            stamp: options.stamp.clone(),
        },
    };

    Ok(FitBundle {
        report,
        fit,
        data,
        residuals,
        curves,
    })
}

fn build_curves(fit: &FitResult, data: &DesignData, spec: &ModelSpec) -> Result<Vec<CurveData>> {
    let mut curves = Vec::new();
    let medians: Vec<f64> = (0..data.k)
        .map(|j| association::sample_quantile(&predictor_column(data, j), 0.5))
        .collect();
    for (j, pname) in spec.predictors.iter().enumerate() {
        let col = predictor_column(data, j);
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
                (l.min(v), h.max(v))
            });
        let mut points = Vec::with_capacity(200);
        for g in 0..200 {
            let x = lo + (hi - lo) * g as f64 / 199.0;
            let mut row = vec![1.0];
            for (jj, med) in medians.iter().enumerate() {
                row.push(if jj == j { x } else { *med });
            }
            points.push(CurvePoint {
                x_transformed: x,
                q25: qreg::predict_quantile(fit, &row, 0.25)?,
                q50: qreg::predict_quantile(fit, &row, spec.level.u())?,
                q75: qreg::predict_quantile(fit, &row, 0.75)?,
            });
        }
        curves.push(CurveData {
            predictor: pname.clone(),
            points,
        });
    }
    Ok(curves)
}

/// Writes `report.json`, per-predictor `curve*.csv`, `residuals.csv` and
/// `qq.csv` into `dir`; returns the created paths.
pub fn write_fit_bundle(bundle: &FitBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let report_path = dir.join("report.json");
    std::fs::write(&report_path, to_json(&bundle.report)?)?;
    written.push(report_path);

    for (i, curve) in bundle.curves.iter().enumerate() {
        let name = if bundle.curves.len() == 1 {
            "curve.csv".to_string()
        } else {
            format!("curve_{}.csv", curve.predictor)
        };
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path)?;
        writeln!(f, "x_transformed,q25,q50,q75")?;
        for p in &curve.points {
            writeln!(f, "{},{},{},{}", p.x_transformed, p.q25, p.q50, p.q75)?;
        }
        written.push(path);
        let _ = i;
    }

    let res_path = dir.join("residuals.csv");
    {
        let mut f = std::fs::File::create(&res_path)?;
        let mut header = "label,rq,cs,fitted_cdf".to_string();
        for j in 1..=bundle.data.k {
            header.push_str(&format!(",x_{j}"));
        }
        writeln!(f, "{header}")?;
        for i in 0..bundle.data.n {
            let mut line = format!(
                "{},{},{},{}",
                bundle.data.row_labels[i],
                bundle.residuals.rq[i],
                bundle.residuals.cs[i],
                bundle.residuals.fitted_cdf[i]
            );
            for j in 0..bundle.data.k {
                line.push_str(&format!(",{}", bundle.data.x[(i, j + 1)]));
            }
            writeln!(f, "{line}")?;
        }
    }
    written.push(res_path);

    let qq_path = dir.join("qq.csv");
    {
        let mut f = std::fs::File::create(&qq_path)?;
        writeln!(f, "theoretical,empirical_rq,empirical_cs")?;
        let n = bundle.data.n;
        let mut rq = bundle.residuals.rq.clone();
        let mut cs = bundle.residuals.cs.clone();
        rq.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for i in 0..n {
            let p = (i as f64 + 0.5) / n as f64;
            writeln!(f, "{},{},{}", p, rq[i], cs[i])?;
        }
    }
    written.push(qq_path);

    Ok(written)
}

// ---------------------------------------------------------------------------
// Ladder reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct LadderRowReport {
    pub label: String,
    pub removed: Vec<String>,
    pub coefficients: Vec<CoefficientReport>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub lrt_vs_full: f64,
    pub lrt_p: f64,
    pub sign_preserved: bool,
    pub information_criteria: IcSet,
    pub pseudo_r_squared: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderReport {
    pub model: ModelEcho,
    pub n: usize,
    pub full_log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub rows: Vec<LadderRowReport>,
    pub failures: Vec<(String, String)>,
    pub provenance: Provenance,
}

fn coefficient_rows(fit: &FitResult) -> Vec<CoefficientReport> {
    let wald = qreg::wald_tests(fit).ok();
    let mut names = vec!["(Intercept)".to_string()];
    names.extend(fit.spec.predictors.iter().cloned());
    names
        .iter()
        .enumerate()
        .map(|(j, name)| match &wald {
            Some(rows) => CoefficientReport {
                name: name.clone(),
                estimate: rows[j].estimate,
                std_error: Some(rows[j].std_error),
                z: Some(rows[j].z),
                p_two_sided: Some(rows[j].p_two_sided),
                significant_at_5pct: Some(rows[j].p_two_sided < 0.05),
            },
            None => CoefficientReport {
                name: name.clone(),
                estimate: fit.beta_hat[j],
                std_error: None,
                z: None,
                p_two_sided: None,
                significant_at_5pct: None,
            },
        })
        .collect()
}

/// Runs the drop-one ladder. `subsets` lists removals; when empty, the
/// default ladder is the full model, every single removal, and the null
/// model.
pub fn run_ladder(
    table: &DataTable,
    response: &str,
    predictors: &[&str],
    link: LinkKind,
    subsets: &[Vec<String>],
    options: &ReportOptions,
) -> Result<LadderReport> {
    if predictors.is_empty() {
        return Err(Error::Domain("ladder: nothing to remove".into()));
    }
    let level = QuantileLevel::new(options.tau)?;
    let spec = ModelSpec::at_level(response, predictors, link, level)?;
    let data = dataio::build_design(table, &spec, &options.transforms)?;

    let default_subsets: Vec<Vec<String>>;
    let subsets = if subsets.is_empty() {
        let mut s: Vec<Vec<String>> = vec![Vec::new()];
        for p in &spec.predictors {
            s.push(vec![p.clone()]);
        }
        s.push(spec.predictors.clone());
        default_subsets = s;
        &default_subsets
    } else {
        subsets
    };

    let ladder = inference::drop_one_ladder(&spec, &data, subsets, &options.nm)?;
    let null_ll = match ladder.rows.iter().find(|r| r.label == "null") {
        Some(row) => row.fit.log_likelihood,
        None => {
            qreg::fit(
                &spec.without_predictors(&spec.predictors.clone()),
                &intercept_only(&data),
                &options.nm,
            )?
            .log_likelihood
        }
    };

    let mut rows = Vec::new();
    for row in &ladder.rows {
        rows.push(LadderRowReport {
            label: row.label.clone(),
            removed: row.removed.clone(),
            coefficients: coefficient_rows(&row.fit),
            log_likelihood: row.fit.log_likelihood,
            converged: row.fit.converged,
            lrt_vs_full: row.lrt_vs_full,
            lrt_p: row.lrt_p,
            sign_preserved: row.sign_preserved,
            information_criteria: inference::information_criteria(
                row.fit.log_likelihood,
                row.fit.p,
                row.fit.n,
            )?,
            pseudo_r_squared: inference::pseudo_r2(
                null_ll,
                row.fit.log_likelihood,
                row.fit.n,
            ),
        });
    }

    Ok(LadderReport {
        model: ModelEcho {
            response: response.to_string(),
            predictors: spec.predictors.clone(),
            link: link.name().to_string(),
            tau: options.tau,
            predictor_transform: match options.transforms.predictor_default() {
                TransformKind::Div100Log => "div100_log".to_string(),
                TransformKind::Identity => "identity".to_string(),
            },
        },
        n: ladder.full.n,
        full_log_likelihood: ladder.full.log_likelihood,
        null_log_likelihood: null_ll,
        rows,
        failures: ladder.failures,
        provenance: Provenance {
            tool: tool_version(),
            link_tokens: LinkKind::ALL.iter().map(|l| l.name().to_string()).collect(),
            stamp: options.stamp.clone(),
        },
    })
}

// ---------------------------------------------------------------------------
// Correlation / collinearity reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct VifEntry {
    pub column: String,
    /// None flags perfect collinearity (an unbounded factor).
    pub vif: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrReport {
    /// Columns of the Kendall matrix, response first when one was named.
    pub columns: Vec<String>,
    /// Rows complete in every used column.
    pub n: usize,
    pub kendall_tau: Vec<Vec<f64>>,
    pub kendall_p: Vec<Vec<f64>>,
    /// Collinearity screens over the transformed predictors.
    pub vif: Vec<VifEntry>,
    pub condition_indices: Vec<f64>,
    pub provenance: Provenance,
}

/// Kendall matrix over response + predictors (listwise-complete rows), with
/// VIF and condition indices over the transformed predictor block.
pub fn run_corr(
    table: &DataTable,
    response: Option<&str>,
    predictors: &[&str],
    options: &ReportOptions,
) -> Result<CorrReport> {
    if predictors.len() < 2 && response.is_none() {
        return Err(Error::Domain("corr: need at least two columns".into()));
    }
    let mut used: Vec<String> = Vec::new();
    if let Some(r) = response {
        used.push(r.to_string());
    }
    used.extend(predictors.iter().map(|s| s.to_string()));
    let (labels, columns) = table.listwise_complete(&used)?;
    let n = labels.len();

    let kendall = association::kendall_matrix(&columns)?;

    let offset = if response.is_some() { 1 } else { 0 };
    let k = predictors.len();
    let (vif, condition_indices) = if k >= 2 {
        let mut entries = Vec::with_capacity(n * k);
        let mut transformed = Vec::with_capacity(k);
        for (name, values) in &columns[offset..] {
            let t = match options.transforms.kind_for(name) {
                TransformKind::Identity => values.clone(),
                TransformKind::Div100Log => dataio::transform_div100_log(values)
                    .map_err(|e| Error::Domain(format!("predictor '{name}': {e}")))?,
            };
            transformed.push(t);
        }
        for r in 0..n {
            for col in &transformed {
                entries.push(col[r]);
            }
        }
        let x = Matrix::new(n, k, entries)?;
        let vif_values = association::vif(&x)?;
        let vif = predictors
            .iter()
            .zip(vif_values)
            .map(|(name, v)| VifEntry {
                column: name.to_string(),
                vif: v.is_finite().then_some(v),
            })
            .collect();
        (vif, association::condition_indices(&x)?)
    } else {
        (Vec::new(), Vec::new())
    };

    Ok(CorrReport {
        columns: used,
        n,
        kendall_tau: kendall.tau.to_rows(),
        kendall_p: kendall.p.to_rows(),
        vif,
        condition_indices,
        provenance: Provenance {
            tool: tool_version(),
            link_tokens: LinkKind::ALL.iter().map(|l| l.name().to_string()).collect(),
            stamp: options.stamp.clone(),
        },
    })
}

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

/// Describes the named columns (all columns when none are named), each over
/// its own complete cells.
pub fn run_describe(
    table: &DataTable,
    columns: &[String],
) -> Result<Vec<(String, DescriptiveStats)>> {
    let names: Vec<String> = if columns.is_empty() {
        table.column_names.clone()
    } else {
        columns.to_vec()
    };
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let values = table.column_complete(&name)?;
        let stats = association::describe(&values)
            .map_err(|e| Error::Domain(format!("column '{name}': {e}")))?;
        out.push((name, stats));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Study bundles
// ---------------------------------------------------------------------------

/// One of the four bundled OECD analyses: a response with its predictor set.
#[derive(Debug, Clone)]
pub struct StudyDef {
    pub name: &'static str,
    pub response: &'static str,
    pub predictors: &'static [&'static str],
}

pub const STUDIES: [StudyDef; 4] = [
    StudyDef {
        name: "education",
        response: "education_attainment",
        predictors: &[
            "employment_rate",
            "air_pollution",
            "life_satisfaction",
            "homicide_rate",
        ],
    },
    StudyDef {
        name: "water",
        response: "water_quality",
        predictors: &[
            "employment_rate",
            "air_pollution",
            "life_expectancy",
            "life_satisfaction",
            "homicide_rate",
        ],
    },
    StudyDef {
        name: "support",
        response: "support_network",
        predictors: &["air_pollution", "life_expectancy", "homicide_rate"],
    },
    StudyDef {
        name: "safety",
        response: "feeling_safe",
        predictors: &["employment_rate", "air_pollution"],
    },
];

/// Looks a study up by name.
pub fn study(name: &str) -> Result<&'static StudyDef> {
    STUDIES.iter().find(|s| s.name == name).ok_or_else(|| {
        let valid: Vec<&str> = STUDIES.iter().map(|s| s.name).collect();
        Error::Domain(format!(
            "unknown study '{name}' (valid: {})",
            valid.join(", ")
        ))
    })
}

/// One line of the per-study summary: a predictor under one link.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub predictor: String,
    pub link: String,
    pub b0: f64,
    pub b1: f64,
    pub log_likelihood: f64,
    pub wald_z_b0: Option<f64>,
    pub wald_z_b1: Option<f64>,
    pub aic: f64,
    pub caic: f64,
    pub bic: f64,
    pub hqic: f64,
    pub lrt: f64,
    pub lrt_p: f64,
    pub pseudo_r_squared: f64,
    pub ks_p_rq: f64,
    pub ks_p_cs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyManifest {
    pub study: String,
    pub response: String,
    pub predictors: Vec<String>,
    pub artifacts: Vec<String>,
    pub failures: Vec<(String, String)>,
    pub provenance: Provenance,
}

/// Runs a whole study: every predictor under all three links, the
/// multi-predictor ladder, correlations and collinearity, descriptives, and
/// a summary juxtaposing the links per predictor. Partial failures are
/// recorded in the manifest; the bundle fails only when nothing succeeds.
pub fn run_study(
    table: &DataTable,
    def: &StudyDef,
    out_dir: &Path,
    options: &ReportOptions,
) -> Result<StudyManifest> {
    std::fs::create_dir_all(out_dir)?;
    let mut artifacts: Vec<String> = Vec::new();
    let mut failures: Vec<(String, String)> = Vec::new();
    let mut summary: Vec<SummaryRow> = Vec::new();

    let rel = |p: &Path| -> String {
        p.strip_prefix(out_dir)
            .unwrap_or(p)
            .to_string_lossy()
            .into_owned()
    };

    for predictor in def.predictors {
        for link in LinkKind::ALL {
            let label = format!("fit {predictor} {link}");
            match run_fit(table, def.response, &[predictor], link, options) {
                Ok(bundle) => {
                    let dir = out_dir.join(format!("fits/{predictor}__{link}"));
                    match write_fit_bundle(&bundle, &dir) {
                        Ok(paths) => artifacts.extend(paths.iter().map(|p| rel(p))),
                        Err(e) => {
                            failures.push((label.clone(), e.to_string()));
                            continue;
                        }
                    }
                    let r = &bundle.report;
                    summary.push(SummaryRow {
                        predictor: predictor.to_string(),
                        link: link.name().to_string(),
                        b0: r.coefficients[0].estimate,
                        b1: r.coefficients[1].estimate,
                        log_likelihood: r.log_likelihood,
                        wald_z_b0: r.coefficients[0].z,
                        wald_z_b1: r.coefficients[1].z,
                        aic: r.information_criteria.aic,
                        caic: r.information_criteria.caic,
                        bic: r.information_criteria.bic,
                        hqic: r.information_criteria.hqic,
                        lrt: r.lrt_vs_null.as_ref().map_or(0.0, |t| t.statistic),
                        lrt_p: r.lrt_vs_null.as_ref().map_or(1.0, |t| t.p_value),
                        pseudo_r_squared: r.pseudo_r_squared,
                        ks_p_rq: r.diagnostics.ks_rq.p_value,
                        ks_p_cs: r.diagnostics.ks_cs.p_value,
                    });
                }
                Err(e) => failures.push((label, e.to_string())),
            }
        }
    }

    let predictor_refs: Vec<&str> = def.predictors.to_vec();
    match run_ladder(
        table,
        def.response,
        &predictor_refs,
        LinkKind::Logit,
        &[],
        options,
    ) {
        Ok(ladder) => {
            let path = out_dir.join("ladder.json");
            std::fs::write(&path, to_json(&ladder)?)?;
            artifacts.push(rel(&path));
        }
        Err(e) => failures.push(("ladder".to_string(), e.to_string())),
    }

    match run_corr(table, Some(def.response), &predictor_refs, options) {
        Ok(corr) => {
            let path = out_dir.join("correlation.json");
            std::fs::write(&path, to_json(&corr)?)?;
            artifacts.push(rel(&path));
        }
        Err(e) => failures.push(("correlation".to_string(), e.to_string())),
    }

    {
        let mut cols = vec![def.response.to_string()];
        cols.extend(def.predictors.iter().map(|s| s.to_string()));
        match run_describe(table, &cols) {
            Ok(stats) => {
                let path = out_dir.join("descriptives.json");
                let named: Vec<serde_json::Value> = stats
                    .iter()
                    .map(|(name, s)| {
                        serde_json::json!({ "column": name, "stats": s })
                    })
                    .collect();
                std::fs::write(&path, to_json(&named)?)?;
                artifacts.push(rel(&path));
            }
            Err(e) => failures.push(("descriptives".to_string(), e.to_string())),
        }
    }

    if !summary.is_empty() {
        let json_path = out_dir.join("summary.json");
        std::fs::write(&json_path, to_json(&summary)?)?;
        artifacts.push(rel(&json_path));

        let csv_path = out_dir.join("summary.csv");
        let mut f = std::fs::File::create(&csv_path)?;
        writeln!(
            f,
            "predictor,link,b0,b1,log_likelihood,aic,caic,bic,hqic,lrt,lrt_p,pseudo_r_squared,ks_p_rq,ks_p_cs"
        )?;
        for s in &summary {
            writeln!(
                f,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                s.predictor,
                s.link,
                s.b0,
                s.b1,
                s.log_likelihood,
                s.aic,
                s.caic,
                s.bic,
                s.hqic,
                s.lrt,
                s.lrt_p,
                s.pseudo_r_squared,
                s.ks_p_rq,
                s.ks_p_cs
            )?;
        }
        artifacts.push(rel(&csv_path));
    }

    if artifacts.is_empty() {
        return Err(Error::Domain(format!(
            "study '{}': every step failed: {failures:?}",
            def.name
        )));
    }

    let manifest = StudyManifest {
        study: def.name.to_string(),
        response: def.response.to_string(),
        predictors: def.predictors.iter().map(|s| s.to_string()).collect(),
        artifacts,
        failures,
        provenance: Provenance {
            tool: tool_version(),
            link_tokens: LinkKind::ALL.iter().map(|l| l.name().to_string()).collect(),
            stamp: options.stamp.clone(),
        },
    };
    let manifest_path = out_dir.join("manifest.json");
    std::fs::write(&manifest_path, to_json(&manifest)?)?;
    Ok(manifest)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn study_lookup() {
        assert_eq!(study("education").unwrap().predictors.len(), 4);
        assert_eq!(study("safety").unwrap().predictors.len(), 2);
        let err = study("nope").unwrap_err().to_string();
        assert!(err.contains("education") && err.contains("safety"), "{err}");
    }

    #[test]
    fn fit_report_shape() {
        let table = dataio::oecd_bli();
        let bundle = run_fit(
            &table,
            "education_attainment",
            &["employment_rate"],
            LinkKind::Logit,
            &ReportOptions::default(),
        )
        .unwrap();
        let r = &bundle.report;
        assert_eq!(r.n, 40);
        assert_eq!(r.parameters, 2);
        assert!(r.converged);
        assert_eq!(r.coefficients.len(), 2);
        assert_eq!(bundle.curves.len(), 1);
        assert_eq!(bundle.curves[0].points.len(), 200);
        // quantile curves never cross
        for p in &bundle.curves[0].points {
            assert!(p.q25 < p.q50 && p.q50 < p.q75);
        }
        // deterministic serialization
        let a = to_json(r).unwrap();
        let again = run_fit(
            &table,
            "education_attainment",
            &["employment_rate"],
            LinkKind::Logit,
            &ReportOptions::default(),
        )
        .unwrap();
        assert_eq!(a, to_json(&again.report).unwrap());
    }

    #[test]
    fn ladder_default_subsets() {
        let table = dataio::oecd_bli();
        let report = run_ladder(
            &table,
            "feeling_safe",
            &["employment_rate", "air_pollution"],
            LinkKind::Logit,
            &[],
            &ReportOptions::default(),
        )
        .unwrap();
        // full + two singles + null
        assert_eq!(report.rows.len(), 4);
        assert_eq!(report.rows[0].label, "full");
        assert_eq!(report.rows[3].label, "null");
        assert!(report.failures.is_empty());
    }
}

//! Descriptive statistics, Kendall rank correlation, and collinearity
//! screens (VIF, condition indices).

use crate::error::{Error, Result};
use crate::numerics::{self, Matrix};
use serde::Serialize;

/// Summary statistics of one variable.
///
/// `sd` uses the n-1 divisor; skewness and kurtosis are the bias-corrected
/// sample versions (kurtosis non-excess, so a normal sample sits near 3).
#[derive(Debug, Clone, Serialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub min: f64,
    pub max: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    /// Set when the sample is constant and the shape statistics are reported
    /// as zero.
    pub degenerate: bool,
}

/// Sample quantile at level `q` by linear interpolation at position
/// q * n + 0.5 of the order statistics, clamped to the extremes.
pub fn sample_quantile(x: &[f64], q: f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted_quantile(&s, q)
}

fn sorted_quantile(s: &[f64], q: f64) -> f64 {
    let n = s.len();
    let pos = q * n as f64 + 0.5;
    if pos <= 1.0 {
        return s[0];
    }
    if pos >= n as f64 {
        return s[n - 1];
    }
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    s[lo - 1] + frac * (s[lo] - s[lo - 1])
}

/// Describes a sample of at least two finite values.
pub fn describe(x: &[f64]) -> Result<DescriptiveStats> {
    let n = x.len();
    if n < 2 {
        return Err(Error::Domain(format!(
            "describe: need at least 2 values, got {n}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("describe: non-finite value".into()));
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / nf;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / nf;
    let sd = (m2 * nf / (nf - 1.0)).sqrt();

    let degenerate = m2 == 0.0;
    let (skewness, kurtosis) = if degenerate {
        (0.0, 0.0)
    } else {
        let g1 = m3 / m2.powf(1.5);
        let g2 = m4 / (m2 * m2);
        let skew = if n > 2 {
            g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0)
        } else {
            g1
        };
        let kurt = if n > 3 {
            ((nf + 1.0) * g2 - 3.0 * (nf - 1.0)) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0)) + 3.0
        } else {
            g2
        };
        (skew, kurt)
    };

    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(DescriptiveStats {
        n,
        mean,
        sd,
        skewness,
        kurtosis,
        min: s[0],
        max: s[n - 1],
        q25: sorted_quantile(&s, 0.25),
        median: sorted_quantile(&s, 0.5),
        q75: sorted_quantile(&s, 0.75),
        degenerate,
    })
}

fn tie_group_sizes(v: &[f64]) -> Vec<usize> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut groups = Vec::new();
    let mut run = 1;
    for i in 1..s.len() {
        if s[i] == s[i - 1] {
            run += 1;
        } else {
            if run > 1 {
                groups.push(run);
            }
            run = 1;
        }
    }
    if run > 1 {
        groups.push(run);
    }
    groups
}

/// Kendall tau-b with tie corrections and a tie-adjusted normal p-value
/// (continuity corrected). Pair counting is the plain O(n^2) scan, which is
/// plenty at these sample sizes.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "kendall_tau: lengths {} and {} differ",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Domain(format!(
            "kendall_tau: need at least 3 pairs, got {n}"
        )));
    }
    let constant = |v: &[f64]| v.iter().all(|e| *e == v[0]);
    if constant(x) || constant(y) {
        return Err(Error::Domain(
            "kendall_tau: correlation undefined for a constant sequence".into(),
        ));
    }

    let mut s: i64 = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let sx = sign(x[i] - x[j]);
            let sy = sign(y[i] - y[j]);
            s += (sx * sy) as i64;
        }
    }

    let tx = tie_group_sizes(x);
    let ty = tie_group_sizes(y);
    let n0 = (n * (n - 1) / 2) as f64;
    let n1: f64 = tx.iter().map(|&t| (t * (t - 1) / 2) as f64).sum();
    let n2: f64 = ty.iter().map(|&t| (t * (t - 1) / 2) as f64).sum();
    let tau = s as f64 / ((n0 - n1) * (n0 - n2)).sqrt();

    let nf = n as f64;
    let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let vt: f64 = tx
        .iter()
        .map(|&t| (t * (t - 1) * (2 * t + 5)) as f64)
        .sum();
    let vu: f64 = ty
        .iter()
        .map(|&t| (t * (t - 1) * (2 * t + 5)) as f64)
        .sum();
    let t1: f64 = tx.iter().map(|&t| (t * (t - 1)) as f64).sum();
    let u1: f64 = ty.iter().map(|&t| (t * (t - 1)) as f64).sum();
    let t2: f64 = tx.iter().map(|&t| (t * (t - 1) * (t - 2)) as f64).sum();
    let u2: f64 = ty.iter().map(|&t| (t * (t - 1) * (t - 2)) as f64).sum();
    let var_s = (v0 - vt - vu) / 18.0
        + t1 * u1 / (2.0 * nf * (nf - 1.0))
        + t2 * u2 / (9.0 * nf * (nf - 1.0) * (nf - 2.0));

    let p = if var_s <= 0.0 {
        1.0
    } else {
        let z = ((s.abs() as f64) - 1.0).max(0.0) / var_s.sqrt();
        2.0 * (1.0 - numerics::std_normal_cdf(z)?)
    };
    Ok((tau, p.min(1.0)))
}

fn sign(v: f64) -> i32 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Pairwise Kendall matrix over named columns of equal length.
#[derive(Debug, Clone)]
pub struct KendallMatrix {
    pub labels: Vec<String>,
    pub tau: Matrix,
    pub p: Matrix,
}

/// Builds the symmetric tau and p matrices. Columns must be complete (the
/// caller decides the row set) and non-constant; a constant column is
/// reported by name.
pub fn kendall_matrix(columns: &[(String, Vec<f64>)]) -> Result<KendallMatrix> {
    if columns.len() < 2 {
        return Err(Error::Domain("kendall_matrix: need at least 2 columns".into()));
    }
    let n = columns[0].1.len();
    for (name, col) in columns {
        if col.len() != n {
            return Err(Error::Domain(format!(
                "kendall_matrix: column '{name}' has {} rows, expected {n}",
                col.len()
            )));
        }
        if col.iter().all(|v| *v == col[0]) {
            return Err(Error::Domain(format!(
                "kendall_matrix: column '{name}' is constant"
            )));
        }
    }
    let k = columns.len();
    let mut tau = Matrix::identity(k);
    let mut p = Matrix::zeros(k, k);
    for i in 0..k {
        for j in (i + 1)..k {
            let (t, pv) = kendall_tau(&columns[i].1, &columns[j].1)?;
            tau[(i, j)] = t;
            tau[(j, i)] = t;
            p[(i, j)] = pv;
            p[(j, i)] = pv;
        }
    }
    Ok(KendallMatrix {
        labels: columns.iter().map(|(name, _)| name.clone()).collect(),
        tau,
        p,
    })
}

/// Variance inflation factors of the columns of `x` (no intercept column):
/// VIF_j = 1 / (1 - R^2 of column j on the rest). Perfect collinearity is
/// reported as an infinite entry.
pub fn vif(x: &Matrix) -> Result<Vec<f64>> {
    let n = x.rows();
    let k = x.cols();
    if k < 2 {
        return Err(Error::Domain("vif: need at least 2 columns".into()));
    }
    if n <= k {
        return Err(Error::InsufficientData(format!(
            "vif: n = {n} must exceed k = {k}"
        )));
    }
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let mut design = Matrix::zeros(n, k); // intercept + the other k-1 columns
        let mut y = vec![0.0; n];
        for r in 0..n {
            design[(r, 0)] = 1.0;
            let mut c = 1;
            for jj in 0..k {
                if jj == j {
                    y[r] = x[(r, jj)];
                } else {
                    design[(r, c)] = x[(r, jj)];
                    c += 1;
                }
            }
        }
        match numerics::ols_fit(&design, &y) {
            Ok(fit) => {
                let denom = 1.0 - fit.r_squared;
                out.push(if denom <= 1e-12 {
                    f64::INFINITY
                } else {
                    1.0 / denom
                });
            }
            Err(Error::Singular { .. }) => out.push(f64::INFINITY),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Condition indices of the standardized columns of `x`: each column is
/// centered and scaled to unit variance, and the indices are
/// sqrt(lambda_max / lambda_j) over the eigenvalues of the resulting
/// correlation matrix, sorted descending (the last is 1 by construction).
pub fn condition_indices(x: &Matrix) -> Result<Vec<f64>> {
    let n = x.rows();
    let k = x.cols();
    if k < 2 {
        return Err(Error::Domain("condition_indices: need at least 2 columns".into()));
    }
    let mut z = Matrix::zeros(n, k);
    for j in 0..k {
        let mean = (0..n).map(|r| x[(r, j)]).sum::<f64>() / n as f64;
        let var = (0..n).map(|r| (x[(r, j)] - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        if var <= 0.0 {
            return Err(Error::Domain(format!(
                "condition_indices: column {j} has zero variance"
            )));
        }
        let sd = var.sqrt();
        for r in 0..n {
            z[(r, j)] = (x[(r, j)] - mean) / sd;
        }
    }
    let mut corr = z.gram();
    for i in 0..k {
        for j in 0..k {
            corr[(i, j)] /= n as f64 - 1.0;
        }
    }
    let eig = numerics::sym_eigenvalues(&corr)?;
    let lmax = eig[0];
    let mut idx: Vec<f64> = eig
        .iter()
        .map(|&l| (lmax / l.max(1e-300)).sqrt())
        .collect();
    idx.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn describe_small_sample() {
        let d = describe(&[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(d.mean, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.sd, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.skewness, 0.0, epsilon = 1e-15);
        assert_eq!(d.min, 1.0);
        assert_eq!(d.max, 3.0);
        assert!(!d.degenerate);
        assert!(describe(&[1.0]).is_err());
    }

    #[test]
    fn describe_constant_flags_degenerate() {
        let d = describe(&[2.0; 10]).unwrap();
        assert_eq!(d.sd, 0.0);
        assert_eq!(d.skewness, 0.0);
        assert_eq!(d.kurtosis, 0.0);
        assert!(d.degenerate);
    }

    #[test]
    fn describe_affine_equivariance() {
        let x = [0.3, 1.7, 2.2, 5.0_f64.sqrt(), 0.9, 4.4, 3.1];
        let a = 2.5;
        let b = -1.0;
        let tx: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let d0 = describe(&x).unwrap();
        let d1 = describe(&tx).unwrap();
        assert_abs_diff_eq!(d1.mean, a * d0.mean + b, epsilon = 1e-10);
        assert_abs_diff_eq!(d1.sd, a * d0.sd, epsilon = 1e-10);
        assert_abs_diff_eq!(d1.q25, a * d0.q25 + b, epsilon = 1e-10);
        assert_abs_diff_eq!(d1.q75, a * d0.q75 + b, epsilon = 1e-10);
        assert_abs_diff_eq!(d1.skewness, d0.skewness, epsilon = 1e-10);
        assert_abs_diff_eq!(d1.kurtosis, d0.kurtosis, epsilon = 1e-10);
    }

    #[test]
    fn quantile_convention() {
        // position q*n + 0.5: for n = 4 the lower quartile sits at 1.5
        let q = sample_quantile(&[4.0, 1.0, 3.0, 2.0], 0.25);
        assert_abs_diff_eq!(q, 1.5, epsilon = 1e-15);
        assert_eq!(sample_quantile(&[4.0, 1.0, 3.0, 2.0], 0.0), 1.0);
        assert_eq!(sample_quantile(&[4.0, 1.0, 3.0, 2.0], 1.0), 4.0);
    }

    #[test]
    fn kendall_perfect_orders() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 4.0, 6.0, 8.0, 10.0];
        let (tau, _) = kendall_tau(&x, &y).unwrap();
        assert_eq!(tau, 1.0);
        let rev: Vec<f64> = y.iter().rev().cloned().collect();
        let (tau, _) = kendall_tau(&x, &rev).unwrap();
        assert_eq!(tau, -1.0);
        assert!(kendall_tau(&x, &[1.0; 5]).is_err());
    }

    #[test]
    fn kendall_monotone_invariance() {
        let x = [0.3, 2.7, 1.1, 4.9, 3.3, 0.8, 2.2, 2.2];
        let y = [1.0, 0.2, 3.0, 2.6, 0.9, 1.8, 2.0, 0.4];
        let (tau0, p0) = kendall_tau(&x, &y).unwrap();
        let ex: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        let (tau1, p1) = kendall_tau(&ex, &ly).unwrap();
        assert_eq!(tau0, tau1);
        assert_eq!(p0, p1);
    }

    #[test]
    fn kendall_matrix_shape() {
        let cols = vec![
            ("a".to_string(), vec![1.0, 2.0, 3.0, 4.0, 5.0]),
            ("b".to_string(), vec![1.0, 2.0, 3.0, 4.0, 5.0]),
            ("c".to_string(), vec![5.0, 3.0, 4.0, 1.0, 2.0]),
        ];
        let m = kendall_matrix(&cols).unwrap();
        assert_eq!(m.labels, vec!["a", "b", "c"]);
        for i in 0..3 {
            assert_eq!(m.tau[(i, i)], 1.0);
            for j in 0..3 {
                assert_eq!(m.tau[(i, j)], m.tau[(j, i)]);
                assert_eq!(m.p[(i, j)], m.p[(j, i)]);
            }
        }
        // identical columns correlate perfectly
        assert_eq!(m.tau[(0, 1)], 1.0);
    }

    #[test]
    fn vif_orthogonal_and_collinear() {
        // orthogonal columns: R^2 = 0, VIF = 1
        let x = Matrix::new(
            4,
            2,
            vec![1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0],
        )
        .unwrap();
        let v = vif(&x).unwrap();
        assert_abs_diff_eq!(v[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(v[1], 1.0, epsilon = 1e-10);

        // duplicated column is flagged infinite
        let d = Matrix::new(5, 2, vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0, 5.0, 5.0]).unwrap();
        let v = vif(&d).unwrap();
        assert!(v[0].is_infinite() && v[1].is_infinite());

        assert!(vif(&Matrix::new(3, 1, vec![1.0, 2.0, 3.0]).unwrap()).is_err());
    }

    #[test]
    fn condition_indices_orthogonal() {
        let x = Matrix::new(
            4,
            2,
            vec![1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0],
        )
        .unwrap();
        let ci = condition_indices(&x).unwrap();
        assert_eq!(ci.len(), 2);
        assert_abs_diff_eq!(ci[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(ci[1], 1.0, epsilon = 1e-10);
        assert!(ci[0] >= 1.0);
        assert_abs_diff_eq!(*ci.last().unwrap(), 1.0, epsilon = 1e-10);

        let constant = Matrix::new(3, 2, vec![1.0, 5.0, 1.0, 6.0, 1.0, 7.0]).unwrap();
        assert!(condition_indices(&constant).is_err());
    }
}

//! Derivative-free Nelder-Mead simplex minimizer.
//!
//! Standard coefficients (reflection 1, expansion 2, contraction 0.5,
//! shrink 0.5) with a scale-aware initial simplex and optional restarts from
//! the incumbent. Non-finite objective values are treated as +inf so a
//! likelihood's domain boundary acts as a barrier instead of an error.

use crate::error::{Error, Result};

/// Tuning knobs for [`nelder_mead_minimize`].
#[derive(Debug, Clone)]
pub struct NmOptions {
    /// Iteration cap per run; 0 means the scale-free default 200 * dimension.
    pub max_iterations: usize,
    /// Convergence threshold on the spread of simplex function values.
    pub f_tolerance: f64,
    /// Convergence threshold on the simplex diameter.
    pub x_tolerance: f64,
    /// Relative size of the initial simplex steps.
    pub initial_step: f64,
    /// Number of fresh-simplex restarts from the incumbent after convergence.
    pub restarts: usize,
    /// Optional hard budget on objective evaluations across the whole search.
    pub max_fun_evals: Option<usize>,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            max_iterations: 0,
            f_tolerance: 1e-10,
            x_tolerance: 1e-8,
            initial_step: 0.05,
            restarts: 2,
            max_fun_evals: None,
        }
    }
}

/// Outcome of a Nelder-Mead search.
#[derive(Debug, Clone)]
pub struct NmOutcome {
    /// Best point seen.
    pub minimizer: Vec<f64>,
    /// Objective value at the best point.
    pub minimum: f64,
    /// Total iterations across all restarts.
    pub iterations: usize,
    /// Total objective evaluations.
    pub fun_evals: usize,
    /// Whether the final run met a tolerance (as opposed to hitting a cap).
    pub converged: bool,
}

struct Budget {
    evals: usize,
    cap: Option<usize>,
}

impl Budget {
    fn spent(&self) -> bool {
        self.cap.is_some_and(|c| self.evals >= c)
    }
}

/// Minimizes `objective` from `start`.
///
/// The objective must be finite at the start point; elsewhere non-finite
/// values reject the candidate rather than aborting the search. The result is
/// deterministic for fixed inputs.
pub fn nelder_mead_minimize<F>(objective: F, start: &[f64], options: &NmOptions) -> Result<NmOutcome>
where
    F: Fn(&[f64]) -> f64,
{
    if start.is_empty() {
        return Err(Error::Domain("nelder_mead: empty start point".into()));
    }
    if options.f_tolerance <= 0.0 || options.x_tolerance <= 0.0 {
        return Err(Error::Domain("nelder_mead: tolerances must be > 0".into()));
    }
    let mut budget = Budget {
        evals: 0,
        cap: options.max_fun_evals,
    };
    let eval = |pt: &[f64], budget: &mut Budget| -> f64 {
        budget.evals += 1;
        let v = objective(pt);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let f_start = eval(start, &mut budget);
    if !f_start.is_finite() {
        return Err(Error::Domain(
            "nelder_mead: objective not finite at start".into(),
        ));
    }

    let dim = start.len();
    let max_iter = if options.max_iterations == 0 {
        200 * dim
    } else {
        options.max_iterations
    };

    let mut incumbent = start.to_vec();
    let mut incumbent_f = f_start;
    let mut iterations = 0;
    let mut converged = false;

    for _run in 0..=options.restarts {
        let (pt, val, iters, conv) = single_run(
            &objective,
            &incumbent,
            incumbent_f,
            options,
            max_iter,
            &mut budget,
        );
        iterations += iters;
        converged = conv;
        if val < incumbent_f {
            incumbent = pt;
            incumbent_f = val;
        }
        if budget.spent() {
            converged = false;
            break;
        }
    }

    Ok(NmOutcome {
        minimizer: incumbent,
        minimum: incumbent_f,
        iterations,
        fun_evals: budget.evals,
        converged,
    })
}

fn single_run<F>(
    objective: &F,
    start: &[f64],
    f_start: f64,
    options: &NmOptions,
    max_iter: usize,
    budget: &mut Budget,
) -> (Vec<f64>, f64, usize, bool)
where
    F: Fn(&[f64]) -> f64,
{
    let dim = start.len();
    let eval = |pt: &[f64], budget: &mut Budget| -> f64 {
        budget.evals += 1;
        let v = objective(pt);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    // simplex: start plus one scale-aware step per coordinate
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    let mut fvals: Vec<f64> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    fvals.push(f_start);
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += options.initial_step * p[i].abs().max(1.0);
        let f = eval(&p, budget);
        simplex.push(p);
        fvals.push(f);
    }

    let mut iterations = 0;
    let mut converged = false;

    loop {
        // order ascending by objective; stable so ties keep insertion order
        let mut idx: Vec<usize> = (0..=dim).collect();
        idx.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap());
        let reordered: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let refvals: Vec<f64> = idx.iter().map(|&i| fvals[i]).collect();
        simplex = reordered;
        fvals = refvals;

        let f_spread = fvals[1..]
            .iter()
            .fold(0.0_f64, |m, &f| m.max((f - fvals[0]).abs()));
        let x_spread = simplex[1..].iter().fold(0.0_f64, |m, p| {
            m.max(
                p.iter()
                    .zip(&simplex[0])
                    .fold(0.0_f64, |mm, (a, b)| mm.max((a - b).abs())),
            )
        });
        if f_spread <= options.f_tolerance || x_spread <= options.x_tolerance {
            converged = true;
            break;
        }
        if iterations >= max_iter || budget.spent() {
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|p| p[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let f_worst = fvals[dim];
        let f_best = fvals[0];
        let f_second_worst = fvals[dim - 1];

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&worst)
            .map(|(c, w)| c + (c - w))
            .collect();
        let f_reflect = eval(&reflect, budget);

        if f_reflect < f_best {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + 2.0 * (c - w))
                .collect();
            let f_expand = eval(&expand, budget);
            if f_expand < f_reflect {
                simplex[dim] = expand;
                fvals[dim] = f_expand;
            } else {
                simplex[dim] = reflect;
                fvals[dim] = f_reflect;
            }
        } else if f_reflect < f_second_worst {
            simplex[dim] = reflect;
            fvals[dim] = f_reflect;
        } else if f_reflect < f_worst {
            // outside contraction
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&reflect)
                .map(|(c, r)| c + 0.5 * (r - c))
                .collect();
            let f_contract = eval(&contract, budget);
            if f_contract <= f_reflect {
                simplex[dim] = contract;
                fvals[dim] = f_contract;
            } else {
                shrink(&mut simplex, &mut fvals, objective, budget);
            }
        } else {
            // inside contraction
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c - 0.5 * (c - w))
                .collect();
            let f_contract = eval(&contract, budget);
            if f_contract < f_worst {
                simplex[dim] = contract;
                fvals[dim] = f_contract;
            } else {
                shrink(&mut simplex, &mut fvals, objective, budget);
            }
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap())
        .unwrap();
    (simplex[best].clone(), fvals[best], iterations, converged)
}

fn shrink<F>(simplex: &mut [Vec<f64>], fvals: &mut [f64], objective: &F, budget: &mut Budget)
where
    F: Fn(&[f64]) -> f64,
{
    let best = simplex[0].clone();
    for i in 1..simplex.len() {
        for j in 0..best.len() {
            simplex[i][j] = best[j] + 0.5 * (simplex[i][j] - best[j]);
        }
        budget.evals += 1;
        let v = objective(&simplex[i]);
        fvals[i] = if v.is_finite() { v } else { f64::INFINITY };
    }
}

//! Least-absolute-deviations (median) regression.
//!
//! The fit minimizes the smoothed objective Σ√(e² + ε²) by iteratively
//! reweighted least squares, driving ε from 1e-2 down to 1e-10 of the
//! response scale (halved each outer step). The problem is solved in
//! column-equilibrated, response-normalized form, so the iteration path --
//! and therefore every downstream statistic -- is equivariant under scaling
//! of y or of any regressor column.
//!
//! `lad_fit_exact` is an independent brute-force oracle for desk-size
//! instances: an L1 optimum interpolates k data points, so enumerating all
//! k-subsets and comparing Σ|e| finds the global minimum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::linalg::{least_squares, solve_square, Matrix};
use crate::regression::Dataset;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;

/// Exact-oracle instance limits: the enumeration is O(C(n, k) · k³).
pub const EXACT_MAX_N: usize = 14;
pub const EXACT_MAX_K: usize = 3;

const EPS_START: f64 = 1e-2;
const EPS_FLOOR: f64 = 1e-10;

/// A least-absolute-deviations fit.
#[derive(Clone, Debug, Serialize)]
pub struct LadFit {
    /// Coefficients, intercept first when present.
    pub coefficients: Vec<f64>,
    #[serde(skip)]
    pub residuals: Vec<f64>,
    /// Sum of absolute residuals at the solution.
    pub objective: f64,
    /// Weighted solves performed.
    pub iterations: usize,
    pub converged: bool,
}

/// Sum of absolute residuals of `coefficients` on `data`.
pub fn objective_l1(coefficients: &[f64], data: &Dataset) -> Result<f64> {
    if coefficients.len() != data.k_total() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for a {}-column design",
            coefficients.len(),
            data.k_total()
        )));
    }
    let fitted = data.augmented().mul_vec(coefficients);
    Ok(data
        .y()
        .iter()
        .zip(&fitted)
        .map(|(y, f)| (y - f).abs())
        .sum())
}

/// Fits LAD by smoothed IRLS. Non-convergence within `max_iter` returns the
/// best iterate with `converged = false`; the caller decides.
pub fn lad_fit(data: &Dataset, tol: f64, max_iter: usize) -> Result<LadFit> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tol must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::Parameter("max_iter must be at least 1".into()));
    }
    let xa = data.augmented();
    let y = data.y();
    let n = xa.rows();
    let k = xa.cols();

    // Equilibrate: unit-RMS columns and response. All products and
    // comparisons below happen on the scaled problem, which makes the
    // iteration count independent of the units of y and of each column.
    let rms = |v: &[f64]| (v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64).sqrt();
    let col_scale: Vec<f64> = (0..k)
        .map(|j| {
            let s = rms(&xa.column(j));
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let y_scale = {
        let s = rms(y);
        if s > 0.0 {
            s
        } else {
            1.0
        }
    };
    let mut xs = Matrix::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            xs.set(i, j, xa.get(i, j) / col_scale[j]);
        }
    }
    let ys: Vec<f64> = y.iter().map(|v| v / y_scale).collect();

    // OLS start.
    let mut beta = least_squares(&xs, &ys)?;
    let mut eps = EPS_START;
    let mut iterations = 1usize; // the OLS solve
    let mut converged = false;

    // IRLS converges linearly and crawls once it is near the optimum, where
    // the true solution is a vertex interpolating k points. As soon as the
    // smoothing floor is reached, snap to the best nearby vertex and let the
    // next weighted solve confirm convergence: a step taken from the exact
    // vertex moves O(eps), well under any sane tolerance.
    let mut weighted = Matrix::zeros(n, k);
    let mut wy = vec![0.0; n];
    let mut polished = false;
    while iterations < max_iter {
        let fitted = xs.mul_vec(&beta);
        for i in 0..n {
            let e = ys[i] - fitted[i];
            let w = (e * e + eps * eps).sqrt().recip().sqrt();
            for j in 0..k {
                weighted.set(i, j, xs.get(i, j) * w);
            }
            wy[i] = ys[i] * w;
        }
        let next = least_squares(&weighted, &wy)?;
        iterations += 1;
        let delta = beta
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let magnitude = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        beta = next;
        if eps > EPS_FLOOR {
            eps = (eps * 0.5).max(EPS_FLOOR);
        } else if !polished {
            vertex_polish(&xs, &ys, &mut beta);
            polished = true;
        } else if delta <= tol * (1.0 + magnitude) {
            converged = true;
            break;
        }
    }
    // Final sweep pins the exact vertex (a no-op when already there; run on
    // the scaled problem so the whole path stays scale-equivariant).
    vertex_polish(&xs, &ys, &mut beta);

    let coefficients: Vec<f64> = beta
        .iter()
        .zip(&col_scale)
        .map(|(b, s)| b * y_scale / s)
        .collect();
    let fitted = xa.mul_vec(&coefficients);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, f)| a - f).collect();
    let objective = residuals.iter().map(|e| e.abs()).sum();

    Ok(LadFit {
        coefficients,
        residuals,
        objective,
        iterations,
        converged,
    })
}

/// Local vertex search around the IRLS iterate: among the k + 3 rows with
/// the smallest absolute residuals, try every k-point interpolant and adopt
/// any that lowers the L1 objective. Two sweeps are enough in practice.
fn vertex_polish(xs: &Matrix, ys: &[f64], beta: &mut Vec<f64>) {
    let n = xs.rows();
    let k = xs.cols();
    let m = (k + 3).min(n);
    let l1 = |b: &[f64]| -> f64 {
        let fitted = xs.mul_vec(b);
        ys.iter().zip(&fitted).map(|(y, f)| (y - f).abs()).sum()
    };
    let mut best_obj = l1(beta);
    for _sweep in 0..2 {
        let fitted = xs.mul_vec(beta);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            (ys[a] - fitted[a])
                .abs()
                .total_cmp(&(ys[b] - fitted[b]).abs())
                .then(a.cmp(&b))
        });
        let pool = &order[..m];
        let mut subset: Vec<usize> = (0..k).collect();
        let mut improved = false;
        loop {
            let mut a = Matrix::zeros(k, k);
            let mut rhs = vec![0.0; k];
            for (r, &c) in subset.iter().enumerate() {
                let row = pool[c];
                for j in 0..k {
                    a.set(r, j, xs.get(row, j));
                }
                rhs[r] = ys[row];
            }
            if let Some(candidate) = solve_square(&a, &rhs) {
                let obj = l1(&candidate);
                if obj < best_obj * (1.0 - 1e-14) {
                    best_obj = obj;
                    *beta = candidate;
                    improved = true;
                }
            }
            if !next_combination(&mut subset, m) {
                break;
            }
        }
        if !improved {
            break;
        }
    }
}

/// `lad_fit` with the default tolerance and iteration budget.
pub fn lad_fit_default(data: &Dataset) -> Result<LadFit> {
    lad_fit(data, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

/// Exact LAD by enumeration of all k-point interpolating coefficient
/// vectors. Ties are broken by the lexicographically smallest coefficient
/// vector, so the oracle is deterministic.
pub fn lad_fit_exact(data: &Dataset) -> Result<LadFit> {
    let n = data.n();
    let k = data.k_total();
    if n > EXACT_MAX_N || k > EXACT_MAX_K {
        return Err(Error::SizeLimit(format!(
            "exact solver handles n <= {EXACT_MAX_N}, k <= {EXACT_MAX_K}; got n = {n}, k = {k}"
        )));
    }
    let xa = data.augmented();
    let y = data.y();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        // Interpolate the k chosen points; skip singular subsets.
        let mut a = Matrix::zeros(k, k);
        let mut rhs = vec![0.0; k];
        for (r, &i) in subset.iter().enumerate() {
            for j in 0..k {
                a.set(r, j, xa.get(i, j));
            }
            rhs[r] = y[i];
        }
        if let Some(coef) = solve_square(&a, &rhs) {
            let fitted = xa.mul_vec(&coef);
            let obj: f64 = y.iter().zip(&fitted).map(|(v, f)| (v - f).abs()).sum();
            let better = match &best {
                None => true,
                Some((bobj, bcoef)) => {
                    let scale = 1.0 + bobj.abs();
                    if obj < bobj - 1e-12 * scale {
                        true
                    } else if obj <= bobj + 1e-12 * scale {
                        lex_less(&coef, bcoef)
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((obj, coef));
            }
        }

        if !next_combination(&mut subset, n) {
            break;
        }
    }

    let (objective, coefficients) = best.ok_or_else(|| {
        Error::SingularDesign {
            columns: (0..k).map(|j| data.coefficient_name(j)).collect(),
            cond: f64::INFINITY,
        }
    })?;
    let fitted = xa.mul_vec(&coefficients);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(v, f)| v - f).collect();
    Ok(LadFit {
        coefficients,
        residuals,
        objective,
        iterations: 0,
        converged: true,
    })
}

/// Advances `subset` to the next k-combination of `0..n` in lexicographic
/// order; false once exhausted.
fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] != i + n - k {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

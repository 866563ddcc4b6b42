//! The endogeneity diagnostic: correlate each regressor with the LAD
//! residuals, Fisher-transform the correlation, and calibrate the statistic
//! by pairs bootstrap.
//!
//! OLS residuals are orthogonal to the regressors by construction, so they
//! carry no information about disturbance-regressor correlation. LAD
//! residuals are centered by the conditional median instead and stay
//! informative: under exogeneity their correlation `r` with a regressor is
//! near zero, while omitted variables, measurement error, or simultaneity
//! combined with heteroscedasticity push `r` away from zero.
//!
//! The normal approximation sigma_z = 1/sqrt(n-3) assumes a raw bivariate
//! normal sample. Fitted residuals violate that: the bootstrap below
//! re-estimates the LAD fit on every resample of (x-row, y) pairs, which is
//! valid under heteroscedasticity and does not assume the exogeneity being
//! tested.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lad::{lad_fit, LadFit, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::numerics::rng::Rng;
use crate::regression::Dataset;

/// Redraw attempts allowed per bootstrap slot before giving up.
const MAX_ATTEMPTS_PER_RESAMPLE: usize = 10;

/// Guard band keeping the Fisher transform away from its poles.
const R_GUARD: f64 = 1e-12;

/// Pearson product-moment correlation.
///
/// Inputs must have equal length of at least 3 and must not be constant.
pub fn pearson_r(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "correlation inputs of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 3 {
        return Err(Error::Parameter(
            "correlation needs at least 3 observations".into(),
        ));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    // Treat numerically-zero variance as degenerate: a vector whose spread
    // is at rounding level of its magnitude carries no correlation signal.
    let scale_a = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale_b = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if saa.sqrt() <= 1e-10 * scale_a.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateCorrelation(
            "first input has (numerically) zero variance".into(),
        ));
    }
    if sbb.sqrt() <= 1e-10 * scale_b.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateCorrelation(
            "second input has (numerically) zero variance".into(),
        ));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Fisher transformation z = 0.5 (ln(1+r) - ln(1-r)); odd and strictly
/// increasing. Rejects |r| within 1e-12 of 1.
pub fn fisher_z(r: f64) -> Result<f64> {
    if !r.is_finite() || r.abs() > 1.0 - R_GUARD {
        return Err(Error::DegenerateCorrelation(format!(
            "correlation {r} too close to +-1 for the Fisher transform"
        )));
    }
    Ok(0.5 * (f64::ln_1p(r) - f64::ln_1p(-r)))
}

/// The normal-approximation statistic z * sqrt(n - 3), i.e. z divided by the
/// bivariate-normal estimate sigma_z = 1/sqrt(n-3).
pub fn zstat_normal(r: f64, n: usize) -> Result<f64> {
    if n < 4 {
        return Err(Error::Parameter(format!(
            "zstat needs n >= 4 observations, got {n}"
        )));
    }
    Ok(fisher_z(r)? * ((n - 3) as f64).sqrt())
}

/// Per-regressor bias statistics.
#[derive(Clone, Debug, Serialize)]
pub struct RegressorBiasStat {
    pub name: String,
    /// Pearson correlation of the regressor with the LAD residuals.
    pub r: f64,
    /// Fisher transform of `r`.
    pub z: f64,
    /// 1/sqrt(n-3).
    pub sigma_z_normal: f64,
    /// Bootstrap standard deviation of z.
    pub sigma_z_boot: f64,
    pub zstat_normal: f64,
    /// z divided by the bootstrap sigma; the decision statistic.
    pub zstat_boot: f64,
    /// 2.5% percentile of the bootstrap zstat distribution.
    pub ci_lower: f64,
    /// 97.5% percentile of the bootstrap zstat distribution.
    pub ci_upper: f64,
    /// Share of bootstrap zstats inside the +-critical band.
    pub insignificant_fraction: f64,
    /// |zstat_boot| > critical value.
    pub biased_decision: bool,
}

/// Full report of the bootstrap bias test.
#[derive(Clone, Debug, Serialize)]
pub struct BiasTestReport {
    /// One entry per non-intercept regressor, in dataset order.
    pub stats: Vec<RegressorBiasStat>,
    pub n: usize,
    /// Number of bootstrap resamples.
    pub bootstrap_samples: usize,
    pub seed: u64,
    pub critical_value: f64,
    /// The full-sample LAD fit the statistics are built on.
    pub lad: LadFit,
    /// Resamples that were redrawn (constant column, non-convergence, or
    /// degenerate correlation).
    pub degenerate_resamples: usize,
}

/// Runs the complete diagnostic: full-sample LAD fit, per-regressor
/// correlations, and a pairs bootstrap of size `b_resamples` to estimate
/// sigma_z and the confidence interval.
///
/// Resample `b` draws its row indices from stream `attempt * B + b` of
/// `seed`, so the report is identical under any thread count; all regressors
/// share the same resample set (one LAD refit per resample).
pub fn bootstrap_bias_test(
    data: &Dataset,
    b_resamples: usize,
    seed: u64,
    critical_value: f64,
) -> Result<BiasTestReport> {
    if b_resamples < 50 {
        return Err(Error::Parameter(format!(
            "need at least 50 bootstrap resamples, got {b_resamples}"
        )));
    }
    if !(critical_value > 0.0) {
        return Err(Error::Parameter(format!(
            "critical value must be positive, got {critical_value}"
        )));
    }
    let n = data.n();
    let k = data.k();

    let lad = lad_fit(data, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    if residuals_degenerate(&lad.residuals, data.y()) {
        return Err(Error::DegenerateCorrelation(
            "LAD residuals are numerically zero (perfect fit); \
             the residual-correlation statistic is undefined"
                .into(),
        ));
    }
    let mut full_r = Vec::with_capacity(k);
    let mut full_z = Vec::with_capacity(k);
    for j in 0..k {
        let col = data.regressor(j);
        let r = pearson_r(&col, &lad.residuals).map_err(|e| match e {
            Error::DegenerateCorrelation(msg) => Error::DegenerateCorrelation(format!(
                "regressor {} vs LAD residuals: {msg}",
                data.names()[j]
            )),
            other => other,
        })?;
        full_r.push(r);
        full_z.push(fisher_z(r)?);
    }

    // Pairs bootstrap: each slot refits LAD on rows drawn with replacement
    // and records z for every regressor. Degenerate draws are redrawn from a
    // fresh stream, never silently dropped.
    let slots: Vec<Result<(Vec<f64>, usize)>> = (0..b_resamples)
        .into_par_iter()
        .map(|slot| bootstrap_slot(data, b_resamples, seed, slot))
        .collect();

    let mut z_boot: Vec<Vec<f64>> = vec![Vec::with_capacity(b_resamples); k];
    let mut degenerate_resamples = 0usize;
    for slot in slots {
        let (zs, redraws) = slot?;
        degenerate_resamples += redraws;
        for (j, z) in zs.into_iter().enumerate() {
            z_boot[j].push(z);
        }
    }

    let sigma_z_normal = 1.0 / ((n.max(4) - 3) as f64).sqrt();
    let mut stats = Vec::with_capacity(k);
    for j in 0..k {
        let sigma_z_boot = sample_sd(&z_boot[j]);
        if !(sigma_z_boot > 0.0) {
            return Err(Error::BootstrapDegenerate(format!(
                "bootstrap distribution of z for {} has zero spread",
                data.names()[j]
            )));
        }
        let zstat_boot = full_z[j] / sigma_z_boot;
        let mut t: Vec<f64> = z_boot[j].iter().map(|z| z / sigma_z_boot).collect();
        t.sort_by(|a, b| a.total_cmp(b));
        let ci_lower = percentile(&t, 0.025);
        let ci_upper = percentile(&t, 0.975);
        let insignificant_fraction =
            t.iter().filter(|v| v.abs() < critical_value).count() as f64 / t.len() as f64;
        stats.push(RegressorBiasStat {
            name: data.names()[j].clone(),
            r: full_r[j],
            z: full_z[j],
            sigma_z_normal,
            sigma_z_boot,
            zstat_normal: full_z[j] / sigma_z_normal,
            zstat_boot,
            ci_lower,
            ci_upper,
            insignificant_fraction,
            biased_decision: zstat_boot.abs() > critical_value,
        });
    }

    Ok(BiasTestReport {
        stats,
        n,
        bootstrap_samples: b_resamples,
        seed,
        critical_value,
        lad,
        degenerate_resamples,
    })
}

/// One bootstrap slot: draws, refits, and returns z per regressor plus the
/// number of redraws it needed.
fn bootstrap_slot(
    data: &Dataset,
    b_resamples: usize,
    seed: u64,
    slot: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = data.n();
    let k = data.k();
    for attempt in 0..MAX_ATTEMPTS_PER_RESAMPLE {
        let stream = (attempt * b_resamples + slot) as u64;
        let mut rng = Rng::new(seed, stream);
        let idx: Vec<usize> = (0..n).map(|_| rng.index(n)).collect();
        let resample = data.resample(&idx);

        match refit_z(&resample, k) {
            Some(zs) => return Ok((zs, attempt)),
            None => continue,
        }
    }
    Err(Error::BootstrapDegenerate(format!(
        "resample slot {slot} stayed degenerate after {MAX_ATTEMPTS_PER_RESAMPLE} redraws"
    )))
}

/// Refits LAD on a resample and computes z for every regressor; `None`
/// flags a degenerate draw (constant column, failed/non-converged fit, or a
/// correlation at the transform's pole).
fn refit_z(resample: &Dataset, k: usize) -> Option<Vec<f64>> {
    let fit = match lad_fit(resample, DEFAULT_TOL, DEFAULT_MAX_ITER) {
        Ok(f) if f.converged => f,
        _ => return None,
    };
    if residuals_degenerate(&fit.residuals, resample.y()) {
        return None;
    }
    let mut zs = Vec::with_capacity(k);
    for j in 0..k {
        let col = resample.regressor(j);
        let r = pearson_r(&col, &fit.residuals).ok()?;
        let z = fisher_z(r).ok()?;
        zs.push(z);
    }
    Some(zs)
}

/// Residuals whose spread is at rounding level of the response are an exact
/// fit; their correlation with anything is numerical noise.
fn residuals_degenerate(residuals: &[f64], y: &[f64]) -> bool {
    let y_rms = (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt();
    sample_sd(residuals) <= 1e-10 * y_rms
}

/// Sample standard deviation (n - 1 denominator), summed in index order so
/// parallel and serial runs agree bitwise.
fn sample_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (ss / (n - 1.0)).sqrt()
}

/// Linear-interpolation percentile of a sorted slice (the convention used by
/// numpy's default).
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

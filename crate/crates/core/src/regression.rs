//! OLS with Newey-West (Bartlett window) standard errors and the
//! Koenker-studentized Breusch-Pagan heteroscedasticity test.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::numerics::linalg::{inv_xtx, least_squares, Matrix};

/// A named regression sample: response `y` against `k` regressor columns,
/// with an implicit leading intercept column unless disabled.
#[derive(Clone, Debug, Serialize)]
pub struct Dataset {
    names: Vec<String>,
    #[serde(skip)]
    x: Matrix,
    #[serde(skip)]
    y: Vec<f64>,
    intercept: bool,
    n: usize,
}

impl Dataset {
    /// Validates and assembles a dataset. `x` holds the regressors only; the
    /// intercept is handled as an implicit leading column.
    pub fn new(names: Vec<String>, x: Matrix, y: Vec<f64>, intercept: bool) -> Result<Self> {
        let n = x.rows();
        let k_total = x.cols() + usize::from(intercept);
        if names.len() != x.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} regressor columns",
                names.len(),
                x.cols()
            )));
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} rows but {} responses",
                n,
                y.len()
            )));
        }
        // n >= k so that interpolating fits are representable; estimators
        // that need spare degrees of freedom enforce their own margins.
        if n < k_total {
            return Err(Error::InsufficientData(format!(
                "{n} observations for {k_total} coefficients"
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("response entries must be finite".into()));
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::Schema("regressor names must be unique".into()));
        }
        Ok(Dataset {
            names,
            x,
            y,
            intercept,
            n,
        })
    }

    /// Convenience constructor from owned columns.
    pub fn from_columns(
        names: Vec<String>,
        columns: &[Vec<f64>],
        y: Vec<f64>,
        intercept: bool,
    ) -> Result<Self> {
        Dataset::new(names, Matrix::from_columns(columns)?, y, intercept)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of regressor columns, not counting the intercept.
    pub fn k(&self) -> usize {
        self.x.cols()
    }

    /// Total coefficient count including the intercept when present.
    pub fn k_total(&self) -> usize {
        self.x.cols() + usize::from(self.intercept)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn intercept(&self) -> bool {
        self.intercept
    }

    /// Regressor column `j` (0-based, intercept not counted).
    pub fn regressor(&self, j: usize) -> Vec<f64> {
        self.x.column(j)
    }

    /// Design matrix with the intercept column prepended when present.
    pub fn augmented(&self) -> Matrix {
        if !self.intercept {
            return self.x.clone();
        }
        let k = self.x.cols() + 1;
        let mut m = Matrix::zeros(self.n, k);
        for i in 0..self.n {
            m.set(i, 0, 1.0);
            for j in 0..self.x.cols() {
                m.set(i, j + 1, self.x.get(i, j));
            }
        }
        m
    }

    /// Name of augmented-design column `j` (intercept first when present).
    pub fn coefficient_name(&self, j: usize) -> String {
        if self.intercept {
            if j == 0 {
                "(intercept)".to_string()
            } else {
                self.names[j - 1].clone()
            }
        } else {
            self.names[j].clone()
        }
    }

    /// Pairs-bootstrap resample: rows drawn with replacement by index.
    pub fn resample(&self, idx: &[usize]) -> Dataset {
        let mut x = Matrix::zeros(idx.len(), self.x.cols());
        let mut y = Vec::with_capacity(idx.len());
        for (i, &src) in idx.iter().enumerate() {
            for j in 0..self.x.cols() {
                x.set(i, j, self.x.get(src, j));
            }
            y.push(self.y[src]);
        }
        Dataset {
            names: self.names.clone(),
            x,
            y,
            intercept: self.intercept,
            n: idx.len(),
        }
    }

    /// Copy with one regressor column removed (omitted-variable workflows).
    pub fn drop_regressor(&self, name: &str) -> Result<Dataset> {
        let pos = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Schema(format!("no regressor named {name}")))?;
        let cols: Vec<Vec<f64>> = (0..self.x.cols())
            .filter(|&j| j != pos)
            .map(|j| self.x.column(j))
            .collect();
        let names: Vec<String> = self
            .names
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != pos)
            .map(|(_, n)| n.clone())
            .collect();
        Dataset::from_columns(names, &cols, self.y.clone(), self.intercept)
    }

    /// Maps a singular-design error whose columns are augmented-design
    /// indices onto regressor names.
    fn name_singular(&self, err: Error) -> Error {
        match err {
            Error::SingularDesign { columns, cond } => Error::SingularDesign {
                columns: columns
                    .iter()
                    .map(|c| match c.parse::<usize>() {
                        Ok(j) if j < self.k_total() => self.coefficient_name(j),
                        _ => c.clone(),
                    })
                    .collect(),
                cond,
            },
            other => other,
        }
    }
}

/// An OLS fit with heteroscedasticity- and autocorrelation-consistent
/// standard errors (Newey-West, Bartlett window).
#[derive(Clone, Debug, Serialize)]
pub struct OlsFit {
    /// Coefficients, intercept first when present.
    pub coefficients: Vec<f64>,
    #[serde(skip)]
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub fitted: Vec<f64>,
    /// HAC standard errors, same order as `coefficients`.
    pub hac_se: Vec<f64>,
    /// Residual variance, sum of squared residuals over n - k.
    pub sigma2: f64,
    /// Coefficient of determination against the mean-only model; 0 for a
    /// constant response.
    pub r_squared: f64,
    /// Newey-West lag actually used.
    pub lag: usize,
}

/// Standard Newey-West plug-in lag, floor(4 (n/100)^(2/9)).
pub fn default_lag(n: usize) -> usize {
    assert!(n >= 1, "lag rule needs n >= 1");
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Fits OLS on the intercept-augmented design. `lag = None` selects the
/// plug-in Newey-West lag.
pub fn ols_fit(data: &Dataset, lag: Option<usize>) -> Result<OlsFit> {
    let xa = data.augmented();
    let y = data.y();
    let n = data.n();
    let coefficients =
        least_squares(&xa, y).map_err(|e| data.name_singular(e))?;
    let fitted = xa.mul_vec(&coefficients);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, f)| a - f).collect();

    let lag = lag.unwrap_or_else(|| default_lag(n));
    let cov = hac_newey_west(&xa, &residuals, lag).map_err(|e| data.name_singular(e))?;
    let hac_se: Vec<f64> = (0..xa.cols()).map(|j| cov.get(j, j).max(0.0).sqrt()).collect();

    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let dof = n.saturating_sub(data.k_total()).max(1);
    let sigma2 = ssr / dof as f64;
    let ybar = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else {
        0.0
    };

    Ok(OlsFit {
        coefficients,
        residuals,
        fitted,
        hac_se,
        sigma2,
        r_squared,
        lag,
    })
}

/// Newey-West sandwich covariance of the OLS coefficients:
/// `(XᵀX)⁻¹ S (XᵀX)⁻¹` with
/// `S = Σ₀ + Σ_{l=1..lag} w_l (Σ_l + Σ_lᵀ)` and Bartlett weights
/// `w_l = 1 - l/(lag+1)`. With `lag = 0` this is exactly the White
/// heteroscedasticity-consistent estimator.
pub fn hac_newey_west(x_aug: &Matrix, residuals: &[f64], lag: usize) -> Result<Matrix> {
    let n = x_aug.rows();
    let k = x_aug.cols();
    if residuals.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} design rows but {} residuals",
            residuals.len()
        )));
    }
    if lag >= n {
        return Err(Error::Parameter(format!(
            "HAC lag {lag} must be smaller than n = {n}"
        )));
    }

    let mut meat = Matrix::zeros(k, k);
    for t in 0..n {
        let et = residuals[t];
        if et == 0.0 {
            continue;
        }
        let row = x_aug.row(t);
        for i in 0..k {
            let w = et * et * row[i];
            for j in i..k {
                let v = meat.get(i, j) + w * row[j];
                meat.set(i, j, v);
            }
        }
    }
    // Mirror the lower triangle of the lag-0 term.
    for i in 0..k {
        for j in i + 1..k {
            let v = meat.get(i, j);
            meat.set(j, i, v);
        }
    }
    for l in 1..=lag {
        let w_l = 1.0 - l as f64 / (lag as f64 + 1.0);
        for t in l..n {
            let c = w_l * residuals[t] * residuals[t - l];
            if c == 0.0 {
                continue;
            }
            let rt = x_aug.row(t);
            let rs = x_aug.row(t - l);
            for i in 0..k {
                for j in 0..k {
                    let v = meat.get(i, j) + c * (rt[i] * rs[j] + rs[i] * rt[j]);
                    meat.set(i, j, v);
                }
            }
        }
    }

    let bread = inv_xtx(x_aug)?;
    let cov = bread.mul(&meat).mul(&bread);
    // Symmetrize away the last-ulp drift from the two multiplications.
    let mut out = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            out.set(i, j, 0.5 * (cov.get(i, j) + cov.get(j, i)));
        }
    }
    Ok(out)
}

/// Breusch-Pagan auxiliary-design choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BpVariant {
    /// Regress squared residuals on the regressors.
    Levels,
    /// Regress squared residuals on the regressors plus their squares
    /// (duplicate columns dropped). Needed when the disturbance scale is
    /// symmetric in a regressor, as in the simulation designs.
    Squares,
}

impl std::fmt::Display for BpVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BpVariant::Levels => write!(f, "levels"),
            BpVariant::Squares => write!(f, "squares"),
        }
    }
}

/// Result of the Breusch-Pagan test (Koenker studentized form, n R²).
#[derive(Clone, Debug, Serialize)]
pub struct BpResult {
    pub lm_stat: f64,
    pub df: usize,
    pub p_value: f64,
    pub variant: BpVariant,
}

/// Koenker-studentized Breusch-Pagan test on the residuals of `fit`.
///
/// The auxiliary design regresses e² on the regressors (`Levels`) or on the
/// regressors plus their squares (`Squares`); the statistic is n times the
/// auxiliary R², chi-square with one degree of freedom per auxiliary slope.
pub fn breusch_pagan(data: &Dataset, fit: &OlsFit, variant: BpVariant) -> Result<BpResult> {
    let n = data.n();
    if fit.residuals.len() != n {
        return Err(Error::DimensionMismatch(
            "fit does not belong to this dataset".into(),
        ));
    }
    let y = data.y();
    let ymax = y.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let ymin = y.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if ymax == ymin {
        return Err(Error::ConstantResponse(
            "Breusch-Pagan is undefined for a constant response".into(),
        ));
    }

    // Assemble the auxiliary design: intercept, regressors, and under
    // `Squares` each square that is not a duplicate of a column already
    // present (a 0/1 dummy squares to itself, a sign column squares to the
    // intercept).
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; n]];
    let mut labels: Vec<String> = vec!["(intercept)".to_string()];
    for j in 0..data.k() {
        cols.push(data.regressor(j));
        labels.push(data.names()[j].clone());
    }
    if variant == BpVariant::Squares {
        for j in 0..data.k() {
            let col = data.regressor(j);
            let sq: Vec<f64> = col.iter().map(|v| v * v).collect();
            let scale = sq.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            let duplicate = cols.iter().any(|c| {
                c.iter()
                    .zip(&sq)
                    .all(|(a, b)| (a - b).abs() <= 1e-12 * scale)
            });
            if !duplicate {
                cols.push(sq);
                labels.push(format!("{}^2", data.names()[j]));
            }
        }
    }
    let aux = Matrix::from_columns(&cols)?;
    let df = aux.cols() - 1;
    if n <= aux.cols() + 1 {
        return Err(Error::InsufficientData(format!(
            "{n} observations cannot support a {}-column auxiliary design",
            aux.cols()
        )));
    }

    let e2: Vec<f64> = fit.residuals.iter().map(|e| e * e).collect();
    let beta = least_squares(&aux, &e2).map_err(|err| match err {
        Error::SingularDesign { columns, cond } => Error::SingularDesign {
            columns: columns
                .iter()
                .map(|c| match c.parse::<usize>() {
                    Ok(j) if j < labels.len() => labels[j].clone(),
                    _ => c.clone(),
                })
                .collect(),
            cond,
        },
        other => other,
    })?;
    let fitted = aux.mul_vec(&beta);
    let mean = e2.iter().sum::<f64>() / n as f64;
    let sst: f64 = e2.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ssr: f64 = e2
        .iter()
        .zip(&fitted)
        .map(|(v, f)| (v - f) * (v - f))
        .sum();
    let r2 = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let lm_stat = n as f64 * r2;
    let chi = ChiSquared::new(df as f64)
        .map_err(|e| Error::Parameter(format!("chi-square df {df}: {e}")))?;
    let p_value = 1.0 - chi.cdf(lm_stat);

    Ok(BpResult {
        lm_stat,
        df,
        p_value: p_value.clamp(0.0, 1.0),
        variant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::Rng;

    fn simple_dataset() -> Dataset {
        Dataset::from_columns(
            vec!["x".into()],
            &[vec![0.0, 1.0, 2.0]],
            vec![1.0, 3.0, 5.0],
            true,
        )
        .unwrap()
    }

    #[test]
    fn perfect_line() {
        let fit = ols_fit(&simple_dataset(), None).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(fit.residuals.iter().all(|e| e.abs() < 1e-12));
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fitted_plus_residuals_recovers_response() {
        let mut rng = Rng::new(5, 0);
        let x = rng.sample_normal(0.0, 2.0, 60).unwrap();
        let u = rng.sample_normal(0.0, 1.0, 60).unwrap();
        let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| 0.3 + 1.2 * a + b).collect();
        let data = Dataset::from_columns(vec!["x".into()], &[x], y.clone(), true).unwrap();
        let fit = ols_fit(&data, None).unwrap();
        for i in 0..60 {
            assert!((fit.fitted[i] + fit.residuals[i] - y[i]).abs() <= 1e-12 * y[i].abs().max(1.0));
        }
    }

    #[test]
    fn duplicated_regressor_reports_names() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let data = Dataset::from_columns(
            vec!["a".into(), "b".into()],
            &[x.clone(), x.clone()],
            vec![1.0, 2.0, 2.5, 4.0, 5.5, 6.0],
            true,
        )
        .unwrap();
        match ols_fit(&data, None) {
            Err(Error::SingularDesign { columns, .. }) => {
                assert!(columns.iter().any(|c| c == "a" || c == "b"), "{columns:?}");
            }
            other => panic!("expected singular design, got {other:?}"),
        }
    }

    #[test]
    fn single_draw_slope_near_truth() {
        // One homoscedastic, exogenous draw at n = 500: slope within 3 SE of 1.
        let mut rng = Rng::new(99, 0);
        let x = rng.sample_normal(0.0, 2.0, 500).unwrap();
        let v = rng.sample_normal(0.0, 1.0, 500).unwrap();
        let u = rng.sample_normal(0.0, 1.0, 500).unwrap();
        let y: Vec<f64> = (0..500).map(|i| x[i] + v[i] + u[i]).collect();
        let data = Dataset::from_columns(vec!["x".into()], &[x], y, true).unwrap();
        let fit = ols_fit(&data, None).unwrap();
        assert!(
            (fit.coefficients[1] - 1.0).abs() < 0.15,
            "slope {}",
            fit.coefficients[1]
        );
    }

    #[test]
    fn default_lag_values() {
        assert_eq!(default_lag(100), 4);
        assert_eq!(default_lag(500), 5);
        assert_eq!(default_lag(1), 1);
    }

    #[test]
    fn hac_zero_residuals_gives_zero() {
        let data = simple_dataset();
        let cov = hac_newey_west(&data.augmented(), &[0.0, 0.0, 0.0], 1).unwrap();
        assert_eq!(cov.max_abs(), 0.0);
    }

    #[test]
    fn hac_lag_zero_equals_white() {
        // Direct evaluation of the White estimator on a 10-row fixture.
        let mut rng = Rng::new(17, 0);
        let x = rng.sample_normal(0.0, 1.0, 10).unwrap();
        let e = rng.sample_normal(0.0, 1.0, 10).unwrap();
        let data = Dataset::from_columns(
            vec!["x".into()],
            &[x.clone()],
            rng.sample_normal(0.0, 1.0, 10).unwrap(),
            true,
        )
        .unwrap();
        let xa = data.augmented();
        let hac = hac_newey_west(&xa, &e, 0).unwrap();

        let bread = inv_xtx(&xa).unwrap();
        let mut meat = Matrix::zeros(2, 2);
        for t in 0..10 {
            let r = xa.row(t);
            for i in 0..2 {
                for j in 0..2 {
                    let v = meat.get(i, j) + e[t] * e[t] * r[i] * r[j];
                    meat.set(i, j, v);
                }
            }
        }
        let white = bread.mul(&meat).mul(&bread);
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (hac.get(i, j) - white.get(i, j)).abs() <= 1e-10 * white.max_abs(),
                    "({i},{j})"
                );
            }
        }
    }

    #[test]
    fn hac_close_to_classical_when_iid() {
        let mut rng = Rng::new(23, 0);
        let n = 2000;
        let x = rng.sample_normal(0.0, 1.5, n).unwrap();
        let u = rng.sample_normal(0.0, 1.0, n).unwrap();
        let y: Vec<f64> = (0..n).map(|i| 0.5 + 2.0 * x[i] + u[i]).collect();
        let data = Dataset::from_columns(vec!["x".into()], &[x], y, true).unwrap();
        let fit = ols_fit(&data, None).unwrap();
        let classical = inv_xtx(&data.augmented()).unwrap();
        for j in 0..2 {
            let se_classical = (fit.sigma2 * classical.get(j, j)).sqrt();
            let ratio = fit.hac_se[j] / se_classical;
            assert!((ratio - 1.0).abs() < 0.15, "ratio {ratio} at {j}");
        }
    }

    #[test]
    fn hac_lag_at_least_n_is_rejected() {
        let data = simple_dataset();
        let err = hac_newey_west(&data.augmented(), &[0.1, -0.2, 0.1], 3);
        assert!(matches!(err, Err(Error::Parameter(_))));
    }

    #[test]
    fn hac_is_symmetric_psd() {
        use crate::numerics::linalg::sym_eigenvalues;
        let mut rng = Rng::new(31, 0);
        let n = 120;
        let cols = vec![
            rng.sample_normal(0.0, 1.0, n).unwrap(),
            rng.sample_normal(2.0, 3.0, n).unwrap(),
        ];
        let y = rng.sample_normal(0.0, 2.0, n).unwrap();
        let data =
            Dataset::from_columns(vec!["a".into(), "b".into()], &cols, y, true).unwrap();
        let fit = ols_fit(&data, Some(5)).unwrap();
        let cov = hac_newey_west(&data.augmented(), &fit.residuals, 5).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(cov.get(i, j), cov.get(j, i));
            }
        }
        let eig = sym_eigenvalues(&cov).unwrap();
        assert!(eig[0] >= -1e-10 * cov.trace(), "min eigenvalue {}", eig[0]);
    }

    #[test]
    fn bp_constant_magnitude_residuals_give_zero_stat() {
        // Residual pattern [+1,-1,-1,+1] is orthogonal to the design
        // [1, x] with x = [1,2,3,4], so it survives the fit exactly and
        // e^2 is constant: auxiliary R^2 = 0, p = 1.
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x
            .iter()
            .zip([1.0, -1.0, -1.0, 1.0])
            .map(|(v, p)| 0.5 + 2.0 * v + p)
            .collect();
        let data = Dataset::from_columns(vec!["x".into()], &[x], y, true).unwrap();
        let fit = ols_fit(&data, Some(0)).unwrap();
        for e in &fit.residuals {
            assert!((e.abs() - 1.0).abs() < 1e-10, "residual {e}");
        }
        let bp = breusch_pagan(&data, &fit, BpVariant::Levels).unwrap();
        assert!(bp.lm_stat.abs() < 1e-8, "lm {}", bp.lm_stat);
        assert!((bp.p_value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bp_squares_drops_duplicate_columns() {
        // A 0/1 dummy squares to itself; the squares variant must not blow
        // up on the duplicated column.
        let dummy = vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0];
        let mut rng = Rng::new(3, 0);
        let z = rng.sample_normal(0.0, 1.0, 8).unwrap();
        let y = rng.sample_normal(0.0, 1.0, 8).unwrap();
        let data = Dataset::from_columns(
            vec!["d".into(), "z".into()],
            &[dummy, z],
            y,
            true,
        )
        .unwrap();
        let fit = ols_fit(&data, Some(0)).unwrap();
        let bp = breusch_pagan(&data, &fit, BpVariant::Squares).unwrap();
        assert_eq!(bp.df, 3); // d, z, z^2 - the d^2 duplicate is dropped
    }

    #[test]
    fn bp_constant_response_is_refused() {
        let data = Dataset::from_columns(
            vec!["x".into()],
            &[vec![1.0, 2.0, 3.0, 4.0]],
            vec![2.0; 4],
            true,
        )
        .unwrap();
        let fit = ols_fit(&data, Some(0)).unwrap();
        assert_eq!(fit.r_squared, 0.0);
        assert!(matches!(
            breusch_pagan(&data, &fit, BpVariant::Levels),
            Err(Error::ConstantResponse(_))
        ));
    }

    #[test]
    fn bp_scale_equivariance() {
        let mut rng = Rng::new(47, 0);
        let x = rng.sample_normal(0.0, 2.0, 80).unwrap();
        let u = rng.sample_normal(0.0, 1.0, 80).unwrap();
        let y: Vec<f64> = (0..80).map(|i| 1.0 + x[i] + u[i] * (1.0 + x[i].abs())).collect();
        let data = Dataset::from_columns(vec!["x".into()], &[x.clone()], y.clone(), true).unwrap();
        let fit = ols_fit(&data, Some(0)).unwrap();
        let bp = breusch_pagan(&data, &fit, BpVariant::Squares).unwrap();

        let yc: Vec<f64> = y.iter().map(|v| v * 1000.0).collect();
        let datac = Dataset::from_columns(vec!["x".into()], &[x], yc, true).unwrap();
        let fitc = ols_fit(&datac, Some(0)).unwrap();
        let bpc = breusch_pagan(&datac, &fitc, BpVariant::Squares).unwrap();

        assert!((bp.lm_stat - bpc.lm_stat).abs() < 1e-6 * (1.0 + bp.lm_stat));
        assert!((bp.p_value - bpc.p_value).abs() < 1e-8);
        for j in 0..2 {
            assert!(
                (fitc.coefficients[j] - 1000.0 * fit.coefficients[j]).abs()
                    < 1e-9 * (1.0 + fit.coefficients[j].abs() * 1000.0)
            );
            assert!(
                (fitc.hac_se[j] - 1000.0 * fit.hac_se[j]).abs()
                    < 1e-9 * (1.0 + 1000.0 * fit.hac_se[j])
            );
        }
        assert!((fit.r_squared - fitc.r_squared).abs() < 1e-12);
    }
}

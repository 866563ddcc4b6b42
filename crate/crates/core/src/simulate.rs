//! Data-generating processes and the replication engine for the three
//! endogeneity families (omitted variable, measurement error, simultaneity)
//! plus the delta = 5 identification-failure configuration.
//!
//! Replication `r` of a cell draws from stream `r` of the cell seed and its
//! bootstrap uses `mix_seed(cell_seed, r)`, so any single replication can be
//! re-run in isolation and parallel execution is reduction-order free (all
//! averages accumulate in replication order).

use rayon::prelude::*;
use serde::Serialize;

use crate::biastest::bootstrap_bias_test;
use crate::error::{Error, Result};
use crate::numerics::rng::{mix_seed, Rng};
use crate::regression::{breusch_pagan, ols_fit, BpVariant, Dataset};

/// The endogeneity mechanism a cell simulates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DgpFamily {
    Omitted,
    Measurement,
    Simultaneity,
}

/// Coefficients of the two-equation log-linear market model.
///
/// Demand: ln q = -1 ln p + income + 0.5 p_sub - 0.5 p_comp + u_d.
/// Supply: ln q = +1 ln p + 0.5 rain - 0.5 p_fert + 0.25 temp + u_s.
/// Equilibrium solves the pair in closed form; the demand disturbance is
/// N(0, 0.5) in the homoscedastic cell and N(0, 0.5 |income_i|) in the
/// heteroscedastic cell, so the two cells share the same average disturbance
/// variance E[u_d^2] = 0.25.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SimultaneityParams {
    pub demand_price: f64,
    pub demand_income: f64,
    pub demand_sub: f64,
    pub demand_comp: f64,
    pub supply_price: f64,
    pub supply_rain: f64,
    pub supply_fert: f64,
    pub supply_temp: f64,
    /// SD of the homoscedastic demand disturbance.
    pub u_demand_scale: f64,
    /// Multiplier on |income| for the heteroscedastic demand SD.
    pub u_demand_hetero_scale: f64,
    /// SD of the supply disturbance.
    pub u_supply_scale: f64,
}

impl Default for SimultaneityParams {
    fn default() -> Self {
        SimultaneityParams {
            demand_price: -1.0,
            demand_income: 1.0,
            demand_sub: 0.5,
            demand_comp: -0.5,
            supply_price: 1.0,
            supply_rain: 0.5,
            supply_fert: -0.5,
            supply_temp: 0.25,
            u_demand_scale: 0.5,
            u_demand_hetero_scale: 0.5,
            u_supply_scale: 0.5,
        }
    }
}

/// Generative parameters of one simulation cell.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DgpSpec {
    pub family: DgpFamily,
    pub n: usize,
    pub hetero: bool,
    /// Omitted family: correlation loading of the omitted regressor on x.
    pub lambda: f64,
    /// Omitted family: coefficient of the omitted regressor.
    pub delta: f64,
    /// Measurement family: observation error on x on/off.
    pub me: bool,
    /// True intercept.
    pub alpha: f64,
    /// True slope of the focal regressor.
    pub beta: f64,
    pub sim: SimultaneityParams,
}

impl DgpSpec {
    pub fn omitted(n: usize, lambda: f64, delta: f64, hetero: bool) -> Self {
        DgpSpec {
            family: DgpFamily::Omitted,
            n,
            hetero,
            lambda,
            delta,
            me: false,
            alpha: 0.0,
            beta: 1.0,
            sim: SimultaneityParams::default(),
        }
    }

    pub fn measurement(n: usize, me: bool, hetero: bool) -> Self {
        DgpSpec {
            family: DgpFamily::Measurement,
            n,
            hetero,
            lambda: 0.0,
            delta: 0.0,
            me,
            alpha: 0.0,
            beta: 1.0,
            sim: SimultaneityParams::default(),
        }
    }

    pub fn simultaneity(n: usize, hetero: bool) -> Self {
        DgpSpec {
            family: DgpFamily::Simultaneity,
            n,
            hetero,
            lambda: 0.0,
            delta: 0.0,
            me: false,
            alpha: 0.0,
            beta: -1.0,
            sim: SimultaneityParams::default(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::Parameter(format!(
                "simulation cells need n >= 10, got {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Raw draws of the omitted-variable model: y = alpha + beta x + delta v + u
/// with x ~ N(0, 2), v = 0.5 N(0, 2) + lambda x, and u ~ N(0, 1) or
/// N(0, |v_i|) under heteroscedasticity. Returns (x, v, y) so callers can
/// include or omit v.
pub fn omitted_draws(spec: &DgpSpec, rng: &mut Rng) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    spec.check()?;
    let n = spec.n;
    let x = rng.sample_normal(0.0, 2.0, n)?;
    let v_base = rng.sample_normal(0.0, 2.0, n)?;
    let v: Vec<f64> = (0..n).map(|i| 0.5 * v_base[i] + spec.lambda * x[i]).collect();
    let u_std = rng.sample_normal(0.0, 1.0, n)?;
    let u: Vec<f64> = if spec.hetero {
        (0..n).map(|i| v[i].abs() * u_std[i]).collect()
    } else {
        u_std
    };
    let y: Vec<f64> = (0..n)
        .map(|i| spec.alpha + spec.beta * x[i] + spec.delta * v[i] + u[i])
        .collect();
    Ok((x, v, y))
}

/// Omitted-variable dataset: the generated v never enters the regressors.
pub fn dgp_omitted(spec: &DgpSpec, rng: &mut Rng) -> Result<Dataset> {
    let (x, _v, y) = omitted_draws(spec, rng)?;
    Dataset::from_columns(vec!["x".into()], &[x], y, true)
}

/// Measurement-error dataset: y = x + u on the true x, with the observed
/// regressor x + u_x (u_x ~ N(0, 1)) when `me` is set; heteroscedasticity
/// makes u ~ N(0, |x_i|) in the true regressor.
pub fn dgp_measurement(spec: &DgpSpec, rng: &mut Rng) -> Result<Dataset> {
    spec.check()?;
    let n = spec.n;
    let x = rng.sample_normal(0.0, 2.0, n)?;
    let u_std = rng.sample_normal(0.0, 1.0, n)?;
    let u: Vec<f64> = if spec.hetero {
        (0..n).map(|i| x[i].abs() * u_std[i]).collect()
    } else {
        u_std
    };
    let y: Vec<f64> = (0..n)
        .map(|i| spec.alpha + spec.beta * x[i] + u[i])
        .collect();
    let observed = if spec.me {
        let noise = rng.sample_normal(0.0, 1.0, n)?;
        (0..n).map(|i| x[i] + noise[i]).collect()
    } else {
        x
    };
    Dataset::from_columns(vec!["x".into()], &[observed], y, true)
}

/// Simultaneity dataset: equilibrium (ln p, ln q) of the two-equation market
/// model; regressors are the demand-side variables (ln p, income, p_sub,
/// p_comp), response ln q. The focal coefficient is the price elasticity,
/// true value -1.
pub fn dgp_simultaneity(spec: &DgpSpec, rng: &mut Rng) -> Result<Dataset> {
    spec.check()?;
    let p = &spec.sim;
    let slope_gap = p.supply_price - p.demand_price;
    if slope_gap <= 0.0 {
        return Err(Error::UnsolvableEquilibrium(format!(
            "supply slope {} minus demand slope {} must be positive",
            p.supply_price, p.demand_price
        )));
    }
    let n = spec.n;
    let income = rng.sample_normal(0.0, 1.0, n)?;
    let p_sub = rng.sample_normal(0.0, 1.0, n)?;
    let p_comp = rng.sample_normal(0.0, 1.0, n)?;
    let rain = rng.sample_normal(0.0, 1.0, n)?;
    let p_fert = rng.sample_normal(0.0, 1.0, n)?;
    let temp = rng.sample_normal(0.0, 1.0, n)?;
    let ud_std = rng.sample_normal(0.0, 1.0, n)?;
    let us = rng.sample_normal(0.0, p.u_supply_scale, n)?;

    let mut ln_p = Vec::with_capacity(n);
    let mut ln_q = Vec::with_capacity(n);
    for i in 0..n {
        let u_d = if spec.hetero {
            p.u_demand_hetero_scale * income[i].abs() * ud_std[i]
        } else {
            p.u_demand_scale * ud_std[i]
        };
        let demand_shift =
            p.demand_income * income[i] + p.demand_sub * p_sub[i] + p.demand_comp * p_comp[i];
        let supply_shift =
            p.supply_rain * rain[i] + p.supply_fert * p_fert[i] + p.supply_temp * temp[i];
        let lp = (demand_shift - supply_shift + u_d - us[i]) / slope_gap;
        let lq = p.supply_price * lp + supply_shift + us[i];
        ln_p.push(lp);
        ln_q.push(lq);
    }
    Dataset::from_columns(
        vec![
            "ln_price".into(),
            "income".into(),
            "p_substitute".into(),
            "p_complement".into(),
        ],
        &[ln_p, income, p_sub, p_comp],
        ln_q,
        true,
    )
}

fn generate(spec: &DgpSpec, rng: &mut Rng) -> Result<Dataset> {
    match spec.family {
        DgpFamily::Omitted => dgp_omitted(spec, rng),
        DgpFamily::Measurement => dgp_measurement(spec, rng),
        DgpFamily::Simultaneity => dgp_simultaneity(spec, rng),
    }
}

/// Replicated averages of one simulation cell.
#[derive(Clone, Debug, Serialize)]
pub struct CellSummary {
    pub spec: DgpSpec,
    pub reps: usize,
    /// Mean LAD coefficient on the focal (first) regressor.
    pub mean_b: f64,
    /// Mean correlation of the focal regressor with the LAD residuals.
    pub mean_r: f64,
    /// Mean per-replication bootstrap zstat.
    pub mean_zstat: f64,
    /// Mean OLS coefficient on the focal regressor (diagnostic extra).
    pub mean_ols_b: f64,
    /// Share of replications where the squares-variant Breusch-Pagan test
    /// rejects at the 5% level.
    pub bp_reject_rate: f64,
    /// Bootstrap resamples per replication.
    pub bootstrap_samples: usize,
    pub seed: u64,
}

/// Runs `reps` replications of a cell. Replication `r` generates from
/// stream `r` of `seed` and bootstraps with seed `mix_seed(seed, r)`.
pub fn replicate(spec: &DgpSpec, reps: usize, b_resamples: usize, seed: u64) -> Result<CellSummary> {
    if reps == 0 {
        return Err(Error::Parameter("need at least one replication".into()));
    }
    spec.check()?;

    struct RepStats {
        lad_b: f64,
        r: f64,
        zstat: f64,
        ols_b: f64,
        bp_reject: bool,
    }

    let focal = 1; // coefficient index of the first regressor (after intercept)
    let per_rep: Vec<RepStats> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<RepStats> {
            let run = || -> Result<RepStats> {
                let mut rng = Rng::new(seed, rep as u64);
                let data = generate(spec, &mut rng)?;
                let ols = ols_fit(&data, None)?;
                let bp = breusch_pagan(&data, &ols, BpVariant::Squares)?;
                let report =
                    bootstrap_bias_test(&data, b_resamples, mix_seed(seed, rep as u64), 1.96)?;
                Ok(RepStats {
                    lad_b: report.lad.coefficients[focal],
                    r: report.stats[0].r,
                    zstat: report.stats[0].zstat_boot,
                    ols_b: ols.coefficients[focal],
                    bp_reject: bp.p_value < 0.05,
                })
            };
            run().map_err(|e| e.in_replication(rep))
        })
        .collect::<Result<Vec<_>>>()?;

    let m = reps as f64;
    Ok(CellSummary {
        spec: *spec,
        reps,
        mean_b: per_rep.iter().map(|s| s.lad_b).sum::<f64>() / m,
        mean_r: per_rep.iter().map(|s| s.r).sum::<f64>() / m,
        mean_zstat: per_rep.iter().map(|s| s.zstat).sum::<f64>() / m,
        mean_ols_b: per_rep.iter().map(|s| s.ols_b).sum::<f64>() / m,
        bp_reject_rate: per_rep.iter().filter(|s| s.bp_reject).count() as f64 / m,
        bootstrap_samples: b_resamples,
        seed,
    })
}

/// The published simulation grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Table {
    /// Omitted-variable grid: correlated/uncorrelated x heteroscedastic/not.
    Table1,
    /// Measurement-error grid: error on/off x heteroscedastic/not.
    Table2,
    /// Simultaneity pair: heteroscedastic / homoscedastic demand shock.
    Table3,
    /// Identification failure: omitted variable with delta = 5.
    Delta5,
}

impl std::str::FromStr for Table {
    type Err = Error;
    fn from_str(s: &str) -> Result<Table> {
        match s.to_ascii_lowercase().as_str() {
            "table1" => Ok(Table::Table1),
            "table2" => Ok(Table::Table2),
            "table3" => Ok(Table::Table3),
            "delta5" => Ok(Table::Delta5),
            other => Err(Error::Parameter(format!(
                "unknown table {other:?}; expected table1, table2, table3, or delta5"
            ))),
        }
    }
}

/// Cell specs of a table in row-major reading order of the published grids.
/// All cells use n = 500.
pub fn table_cells(table: Table) -> Vec<DgpSpec> {
    const N: usize = 500;
    match table {
        Table::Table1 => vec![
            DgpSpec::omitted(N, 0.5, 1.0, true),
            DgpSpec::omitted(N, 0.5, 1.0, false),
            DgpSpec::omitted(N, 0.0, 1.0, true),
            DgpSpec::omitted(N, 0.0, 1.0, false),
        ],
        Table::Table2 => vec![
            DgpSpec::measurement(N, true, true),
            DgpSpec::measurement(N, true, false),
            DgpSpec::measurement(N, false, true),
            DgpSpec::measurement(N, false, false),
        ],
        Table::Table3 => vec![
            DgpSpec::simultaneity(N, true),
            DgpSpec::simultaneity(N, false),
        ],
        Table::Delta5 => vec![DgpSpec::omitted(N, 0.5, 5.0, true)],
    }
}

/// Runs every cell of `table`; cell `i` uses seed `mix_seed(seed, i)`.
pub fn run_table(table: Table, reps: usize, b_resamples: usize, seed: u64) -> Result<Vec<CellSummary>> {
    table_cells(table)
        .iter()
        .enumerate()
        .map(|(i, spec)| replicate(spec, reps, b_resamples, mix_seed(seed, i as u64)))
        .collect()
}

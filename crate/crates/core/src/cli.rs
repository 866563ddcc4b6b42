//! CSV ingestion, the end-to-end diagnostic pipeline, and report rendering.
//!
//! The pipeline mirrors the empirical workflow: OLS with Newey-West standard
//! errors, a Breusch-Pagan pre-test (the residual-correlation statistic has
//! power only under heteroscedasticity), then the bootstrap bias test per
//! regressor. Statistical outcomes live in the report; exit codes only
//! distinguish "ran" from "usage or data error".

use serde::Serialize;

use crate::biastest::{bootstrap_bias_test, BiasTestReport};
use crate::error::{Error, Result};
use crate::numerics::linalg::Matrix;
use crate::regression::{breusch_pagan, ols_fit, BpResult, BpVariant, Dataset, OlsFit};
use crate::simulate::{CellSummary, Table};

/// Output rendering mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
}

/// Configuration of one diagnostic run.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub input_path: String,
    pub dep: String,
    pub regressors: Vec<String>,
    /// Columns to natural-log transform (subset of dep + regressors).
    pub log_columns: Vec<String>,
    pub bootstrap_b: usize,
    pub seed: u64,
    /// Newey-West lag; `None` selects the plug-in rule.
    pub lag: Option<usize>,
    /// Significance level used when describing the Breusch-Pagan outcome.
    pub alpha: f64,
    pub critical_value: f64,
    pub bp_variant: BpVariant,
    pub format: OutputFormat,
}

impl RunConfig {
    /// A config with the documented defaults (B = 1000, seed 20250801,
    /// plug-in lag, alpha 0.05, critical 1.96, levels variant, text output).
    pub fn new(input_path: &str, dep: &str, regressors: &[&str]) -> Self {
        RunConfig {
            input_path: input_path.to_string(),
            dep: dep.to_string(),
            regressors: regressors.iter().map(|s| s.to_string()).collect(),
            log_columns: Vec::new(),
            bootstrap_b: 1000,
            seed: 20250801,
            lag: None,
            alpha: 0.05,
            critical_value: 1.96,
            bp_variant: BpVariant::Levels,
            format: OutputFormat::Text,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.regressors.is_empty() {
            return Err(Error::Schema("at least one regressor is required".into()));
        }
        let mut sorted = self.regressors.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.regressors.len() {
            return Err(Error::Schema("regressor names repeat".into()));
        }
        if self.regressors.iter().any(|r| r == &self.dep) {
            return Err(Error::Schema(format!(
                "dependent column {:?} also listed as a regressor",
                self.dep
            )));
        }
        for c in &self.log_columns {
            if c != &self.dep && !self.regressors.contains(c) {
                return Err(Error::Schema(format!(
                    "log column {c:?} is neither the dependent column nor a regressor"
                )));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Parameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// A parsed CSV with its drop counters.
#[derive(Clone, Debug)]
pub struct CsvLoad {
    pub dataset: Dataset,
    /// Rows dropped for a missing or non-numeric cell in a selected column.
    pub dropped_missing: usize,
    /// Rows dropped for a non-positive value in a log-transformed column.
    pub dropped_nonpositive_log: usize,
}

/// Reads the selected columns of an RFC-4180 CSV with a header row.
/// Rows with missing or non-numeric cells are dropped and counted; log
/// transforms apply after filtering, dropping non-positive rows separately.
pub fn parse_csv(path: &str, config: &RunConfig) -> Result<CsvLoad> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.to_string(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => Error::Schema(e.to_string()),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read header row: {e}")))?
        .clone();
    let col_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| {
                Error::Schema(format!(
                    "column {name:?} not found; file has: {}",
                    headers
                        .iter()
                        .map(|h| h.trim())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })
    };

    let dep_idx = col_index(&config.dep)?;
    let reg_idx: Vec<usize> = config
        .regressors
        .iter()
        .map(|r| col_index(r))
        .collect::<Result<_>>()?;
    let log_dep = config.log_columns.contains(&config.dep);
    let log_reg: Vec<bool> = config
        .regressors
        .iter()
        .map(|r| config.log_columns.contains(r))
        .collect();

    let mut y = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); reg_idx.len()];
    let mut dropped_missing = 0usize;
    let mut dropped_nonpositive_log = 0usize;

    'rows: for record in reader.records() {
        let record = record.map_err(|e| Error::Schema(format!("malformed CSV record: {e}")))?;
        let cell = |idx: usize| -> Option<f64> {
            record
                .get(idx)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
        };
        let mut row = Vec::with_capacity(reg_idx.len() + 1);
        match cell(dep_idx) {
            Some(v) => row.push(v),
            None => {
                dropped_missing += 1;
                continue 'rows;
            }
        }
        for &idx in &reg_idx {
            match cell(idx) {
                Some(v) => row.push(v),
                None => {
                    dropped_missing += 1;
                    continue 'rows;
                }
            }
        }
        // Log transforms, after the missing-data filter.
        if log_dep && row[0] <= 0.0 {
            dropped_nonpositive_log += 1;
            continue 'rows;
        }
        for (j, &is_log) in log_reg.iter().enumerate() {
            if is_log && row[j + 1] <= 0.0 {
                dropped_nonpositive_log += 1;
                continue 'rows;
            }
        }
        y.push(if log_dep { row[0].ln() } else { row[0] });
        for (j, &is_log) in log_reg.iter().enumerate() {
            cols[j].push(if is_log { row[j + 1].ln() } else { row[j + 1] });
        }
    }

    let k_total = config.regressors.len() + 1;
    if y.len() < k_total + 4 {
        return Err(Error::InsufficientData(format!(
            "{} usable rows for {} coefficients; need at least {}",
            y.len(),
            k_total,
            k_total + 4
        )));
    }
    let dataset = Dataset::new(
        config.regressors.clone(),
        Matrix::from_columns(&cols)?,
        y,
        true,
    )?;
    Ok(CsvLoad {
        dataset,
        dropped_missing,
        dropped_nonpositive_log,
    })
}

/// Everything one diagnostic run produces.
#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticReport {
    pub ols: OlsFit,
    pub bp: BpResult,
    pub bias: BiasTestReport,
    /// Input rows minus analyzed rows.
    pub dropped_rows: usize,
    pub dropped_missing: usize,
    pub dropped_nonpositive_log: usize,
    pub config: RunConfig,
}

/// Runs the full diagnostic: parse, OLS + HAC, Breusch-Pagan, bootstrap
/// bias test.
pub fn cmd_test(config: &RunConfig) -> Result<DiagnosticReport> {
    config.validate()?;
    let load = parse_csv(&config.input_path, config)?;
    run_diagnostic(&load, config)
}

/// The in-library pipeline on an already-parsed dataset; `cmd_test` is this
/// plus `parse_csv`, so CSV runs and library runs agree number for number.
pub fn run_diagnostic(load: &CsvLoad, config: &RunConfig) -> Result<DiagnosticReport> {
    let ols = ols_fit(&load.dataset, config.lag)?;
    let bp = breusch_pagan(&load.dataset, &ols, config.bp_variant)?;
    let bias = bootstrap_bias_test(
        &load.dataset,
        config.bootstrap_b,
        config.seed,
        config.critical_value,
    )?;
    Ok(DiagnosticReport {
        ols,
        bp,
        bias,
        dropped_rows: load.dropped_missing + load.dropped_nonpositive_log,
        dropped_missing: load.dropped_missing,
        dropped_nonpositive_log: load.dropped_nonpositive_log,
        config: config.clone(),
    })
}

/// Formats a real with 6 significant digits; non-finite values render as a
/// degeneracy note rather than NaN/inf.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return "n/a (degenerate)".to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..=6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_trailing_zeros(&s)
    } else {
        format!("{x:.5e}")
    }
}

fn trim_trailing_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

/// Renders a diagnostic report in the requested format.
pub fn render_diagnostic(report: &DiagnosticReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => json_with_version(report),
        OutputFormat::Text => {
            let c = &report.config;
            let mut out = String::new();
            let push = |out: &mut String, s: String| {
                out.push_str(&s);
                out.push('\n');
            };
            push(&mut out, format!("Bias diagnostic: {}", c.input_path));
            push(
                &mut out,
                format!(
                    "n = {} rows analyzed ({} dropped: {} missing/non-numeric, {} non-positive under log)",
                    report.bias.n,
                    report.dropped_rows,
                    report.dropped_missing,
                    report.dropped_nonpositive_log
                ),
            );
            push(&mut out, format!("response: {}", c.dep));
            push(&mut out, String::new());
            push(
                &mut out,
                format!(
                    "OLS coefficients (Newey-West HAC standard errors, lag {}):",
                    report.ols.lag
                ),
            );
            let mut names = vec!["(intercept)".to_string()];
            names.extend(c.regressors.iter().cloned());
            for (j, name) in names.iter().enumerate() {
                push(
                    &mut out,
                    format!("  {:<24} {:>14}", name, sig6(report.ols.coefficients[j])),
                );
                push(
                    &mut out,
                    format!("  {:<24} {:>14}", "", format!("({})", sig6(report.ols.hac_se[j]))),
                );
            }
            push(
                &mut out,
                format!(
                    "R-squared {}, residual variance {}",
                    sig6(report.ols.r_squared),
                    sig6(report.ols.sigma2)
                ),
            );
            push(&mut out, String::new());
            let bp_verdict = if report.bp.p_value < c.alpha {
                format!("heteroscedasticity confirmed at alpha = {}", sig6(c.alpha))
            } else {
                format!(
                    "no heteroscedasticity detected at alpha = {} (the bias test has little power here)",
                    sig6(c.alpha)
                )
            };
            push(
                &mut out,
                format!(
                    "Breusch-Pagan ({}): LM = {}, df = {}, p = {} -> {}",
                    report.bp.variant,
                    sig6(report.bp.lm_stat),
                    report.bp.df,
                    sig6(report.bp.p_value),
                    bp_verdict
                ),
            );
            push(&mut out, String::new());
            push(
                &mut out,
                format!(
                    "LAD residual correlations (B = {}, seed = {}, critical = {}, {} degenerate resamples redrawn):",
                    report.bias.bootstrap_samples,
                    report.bias.seed,
                    sig6(report.bias.critical_value),
                    report.bias.degenerate_resamples
                ),
            );
            push(
                &mut out,
                format!(
                    "  {:<20} {:>10} {:>12} {:>12} {:>22} {:>12} {:>8}",
                    "regressor", "r", "zstat(norm)", "zstat(boot)", "95% CI (boot zstat)", "insig.frac", "biased?"
                ),
            );
            for s in &report.bias.stats {
                push(
                    &mut out,
                    format!(
                        "  {:<20} {:>10} {:>12} {:>12} {:>22} {:>12} {:>8}",
                        s.name,
                        sig6(s.r),
                        sig6(s.zstat_normal),
                        sig6(s.zstat_boot),
                        format!("[{}, {}]", sig6(s.ci_lower), sig6(s.ci_upper)),
                        sig6(s.insignificant_fraction),
                        if s.biased_decision { "yes" } else { "no" }
                    ),
                );
            }
            if !report.bias.lad.converged {
                push(
                    &mut out,
                    "note: the LAD fit did not reach its tolerance; statistics use the best iterate".to_string(),
                );
            }
            out
        }
    }
}

/// Renders simulation cells as the published grid (text) or as JSON.
pub fn render_cells(cells: &[CellSummary], table: Table, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut value = serde_json::json!({
                "table": table,
                "cells": cells,
            });
            if let Some(map) = value.as_object_mut() {
                map.insert(
                    "schema_version".to_string(),
                    serde_json::Value::String("1".to_string()),
                );
            }
            serde_json::to_string_pretty(&value).expect("report serialization")
        }
        OutputFormat::Text => {
            let title = match table {
                Table::Table1 => "Omitted variable simulation",
                Table::Table2 => "Measurement error simulation",
                Table::Table3 => "Demand elasticity simulation",
                Table::Delta5 => "Identification failure (delta = 5) simulation",
            };
            let row_label = match table {
                Table::Table1 => "x and v correlated",
                Table::Table2 => "measurement error",
                Table::Table3 => "simultaneity bias",
                Table::Delta5 => "delta = 5",
            };
            let mut out = String::new();
            let first = &cells[0];
            out.push_str(&format!(
                "{title}\nn = {}, reps = {}, B = {}, seed = {}\n\n",
                first.spec.n, first.reps, first.bootstrap_samples, first.seed
            ));
            let cell_text = |c: &CellSummary| {
                format!(
                    "b = {}  r = {}  zstat = {}",
                    sig6(c.mean_b),
                    sig6(c.mean_r),
                    sig6(c.mean_zstat)
                )
            };
            let extras = |c: &CellSummary| {
                format!(
                    "ols b = {}  BP reject rate = {}",
                    sig6(c.mean_ols_b),
                    sig6(c.bp_reject_rate)
                )
            };
            let width = 44usize;
            match cells.len() {
                4 => {
                    out.push_str(&format!(
                        "{:<24} {:<6} {:<width$} {:<width$}\n",
                        "", "", "heteroscedasticity: Yes", "No"
                    ));
                    out.push_str(&format!(
                        "{:<24} {:<6} {:<width$} {:<width$}\n",
                        row_label,
                        "Yes",
                        cell_text(&cells[0]),
                        cell_text(&cells[1])
                    ));
                    out.push_str(&format!(
                        "{:<24} {:<6} {:<width$} {:<width$}\n",
                        "",
                        "",
                        extras(&cells[0]),
                        extras(&cells[1])
                    ));
                    out.push_str(&format!(
                        "{:<24} {:<6} {:<width$} {:<width$}\n",
                        "",
                        "No",
                        cell_text(&cells[2]),
                        cell_text(&cells[3])
                    ));
                    out.push_str(&format!(
                        "{:<24} {:<6} {:<width$} {:<width$}\n",
                        "",
                        "",
                        extras(&cells[2]),
                        extras(&cells[3])
                    ));
                }
                2 => {
                    out.push_str(&format!(
                        "{:<24} {:<6} {:<width$} {:<width$}\n",
                        "", "", "heteroscedasticity: Yes", "No"
                    ));
                    out.push_str(&format!(
                        "{:<24} {:<6} {:<width$} {:<width$}\n",
                        row_label,
                        "Yes",
                        cell_text(&cells[0]),
                        cell_text(&cells[1])
                    ));
                    out.push_str(&format!(
                        "{:<24} {:<6} {:<width$} {:<width$}\n",
                        "",
                        "",
                        extras(&cells[0]),
                        extras(&cells[1])
                    ));
                }
                _ => {
                    for c in cells {
                        out.push_str(&format!("{row_label}: {}\n{}\n", cell_text(c), extras(c)));
                    }
                }
            }
            out
        }
    }
}

fn json_with_version<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report serialization");
    if let Some(map) = v.as_object_mut() {
        map.insert(
            "schema_version".to_string(),
            serde_json::Value::String("1".to_string()),
        );
    }
    serde_json::to_string_pretty(&v).expect("report serialization")
}

use std::path::Path;

use gelfond_tau::asymptotics::{error_table_with_segment, ErrorReport, ExperimentSpec};
use serde::Serialize;

use crate::manifest::{RunManifest, SCHEMA};
use crate::output::{to_json, write_all_or_nothing};
use crate::CliError;

pub const CSV_NAME: &str = "errors.csv";
pub const SUMMARY_NAME: &str = "summary.json";

/// Slack on the fitted exponent standing in for the `ε` of the asymptotic.
pub const FIT_SLACK: f64 = 0.05;

#[derive(Debug, Serialize)]
struct CsvRow {
    x: u64,
    a: u64,
    restricted_sum: u64,
    main_num: i128,
    main_den: u64,
    error_num: i128,
    relative_error: f64,
}

#[derive(Debug, Serialize)]
struct PerX {
    x: u64,
    total: u64,
    max_abs_error_num: i128,
    max_abs_error_den: u64,
    max_relative_error: f64,
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    schema: u32,
    manifest: &'a RunManifest,
    k: u32,
    q: u64,
    p: u64,
    theta: f64,
    gate: bool,
    gate_label: &'static str,
    gelfond_condition: bool,
    lambda_hat: Option<f64>,
    r2: Option<f64>,
    fit_note: Option<&'a str>,
    lambda_ref: Option<f64>,
    predicted_exponent: f64,
    within_prediction: Option<bool>,
    per_x: Vec<PerX>,
}

pub fn csv_bytes(report: &ErrorReport) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.rows {
        w.serialize(CsvRow {
            x: row.x,
            a: row.a,
            restricted_sum: row.restricted_sum,
            main_num: row.main_term.num,
            main_den: row.main_term.den,
            error_num: row.error.num,
            relative_error: row.relative_error,
        })
        .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    w.into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))
}

pub fn summary<'a>(report: &'a ErrorReport, manifest: &'a RunManifest) -> Summary<'a> {
    let rel = report.max_relative_error();
    let per_x = report
        .totals
        .iter()
        .zip(&report.max_abs_error)
        .zip(rel)
        .map(|((&(x, total), &(_, e)), (_, r))| PerX {
            x,
            total,
            max_abs_error_num: e.num,
            max_abs_error_den: e.den,
            max_relative_error: r,
        })
        .collect();
    Summary {
        schema: SCHEMA,
        manifest,
        k: report.k,
        q: report.q,
        p: report.p,
        theta: report.theta,
        gate: report.gate,
        gate_label: if report.gate {
            "inside theorem hypothesis"
        } else {
            "outside theorem hypothesis"
        },
        gelfond_condition: report.gelfond_condition,
        lambda_hat: report.lambda_hat,
        r2: report.fit_r2,
        fit_note: report.fit_note.as_deref(),
        lambda_ref: report.lambda_ref,
        predicted_exponent: report.predicted_exponent,
        within_prediction: report.within_prediction(FIT_SLACK),
        per_x,
    }
}

/// Computes the error table and writes `errors.csv` and `summary.json` into `dir`.
pub fn run(
    spec: &ExperimentSpec,
    segment: u64,
    manifest: &RunManifest,
    dir: &Path,
) -> Result<ErrorReport, CliError> {
    let report =
        error_table_with_segment(spec, segment).map_err(|e| CliError::Usage(e.to_string()))?;
    let csv = csv_bytes(&report)?;
    let json = to_json(&summary(&report, manifest))?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    write_all_or_nothing(&[(dir.join(CSV_NAME), csv), (dir.join(SUMMARY_NAME), json)])?;
    Ok(report)
}

//! CSV and JSON renderings of reports. Floats use Rust's shortest
//! round-trip formatting, so equal inputs give byte-identical files.

use lowlying_core::besseltransform::{DJResult, ScanReport};
use lowlying_core::density::{DensityReport, SplitDiagnostics};
use lowlying_core::kuznetsov::{GeometricBreakdown, TraceReport};
use lowlying_core::maassdata::ValidationReport;
use serde_json::{json, Value};

use crate::error::AppResult;

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> AppResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn f(v: f64) -> String {
    format!("{v}")
}

pub fn density_csv(reports: &[DensityReport]) -> AppResult<String> {
    csv_string(
        &["T", "eta", "const", "conductor", "prime", "prime_sq", "total", "prediction", "deviation"],
        reports.iter().map(|r| {
            vec![
                r.t.to_string(),
                f(r.eta),
                f(r.const_term),
                f(r.conductor_term),
                f(r.prime_term),
                f(r.prime_sq_term),
                f(r.total),
                f(r.rmt_o_prediction),
                f(r.deviation),
            ]
        }),
    )
}

pub fn split_csv(splits: &[SplitDiagnostics]) -> AppResult<String> {
    csv_string(
        &["T", "eta", "large_p_small_c", "large_p_large_c", "small_p", "eisenstein"],
        splits.iter().map(|s| {
            vec![s.t.to_string(), f(s.eta), f(s.large_p_small_c), f(s.large_p_large_c), f(s.small_p), f(s.eisenstein)]
        }),
    )
}

pub fn total_mass_csv(rows: &[(u32, GeometricBreakdown)]) -> AppResult<String> {
    csv_string(
        &["T", "total_mass", "mass_over_T2", "delta", "eisenstein", "kloosterman", "error_budget", "c_used"],
        rows.iter().map(|(t, g)| {
            let t2 = (*t as f64).powi(2);
            vec![
                t.to_string(),
                f(g.total()),
                f(g.total() / t2),
                f(g.delta_term),
                f(g.eisenstein_term),
                f(g.kloosterman_contribution()),
                f(g.error_budget),
                g.c_used.to_string(),
            ]
        }),
    )
}

pub fn scan_csv(reports: &[ScanReport]) -> String {
    let mut s = String::from("which,X,T,value,bound,ratio\n");
    for r in reports {
        s.push_str(r.to_csv().split_once('\n').map(|(_, body)| body).unwrap_or(""));
    }
    s
}

pub fn dj_json(r: &DJResult) -> Value {
    json!({
        "method": r.method.name(),
        "X": r.x,
        "T": r.t,
        "re": r.value.re,
        "im": r.value.im,
        "error_estimate": r.error_estimate,
    })
}

pub fn geometric_json(g: &GeometricBreakdown) -> Value {
    json!({
        "delta": g.delta_term,
        "eisenstein": g.eisenstein_term,
        "kloosterman": g.kloosterman_contribution(),
        "kloosterman_sum_im": g.kloosterman_term.im,
        "total": g.total(),
        "c_used": g.c_used,
        "c_max": g.c_max,
        "r_max": g.r_max,
    })
}

pub fn trace_json(r: &TraceReport) -> Value {
    json!({
        "m": r.m,
        "n": r.n,
        "weight": { "description": r.weight },
        "spectral": { "sum": r.spectral.sum, "records_used": r.spectral.records_used, "tail_usable": r.spectral.tail_usable },
        "geometric": geometric_json(&r.geometric),
        "budgets": {
            "spectral_tail": finite_or_null(r.spectral.tail_budget),
            "geometric_error": r.geometric.error_budget,
            "total": finite_or_null(r.budget),
        },
        "discrepancy": r.discrepancy,
        "relative_discrepancy": r.relative_discrepancy(),
        "passed": r.passed,
    })
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn density_json(r: &DensityReport, s: &SplitDiagnostics) -> Value {
    json!({
        "T": r.t,
        "eta": r.eta,
        "const": r.const_term,
        "conductor": r.conductor_term,
        "prime": r.prime_term,
        "prime_sq": r.prime_sq_term,
        "total": r.total,
        "prediction": r.rmt_o_prediction,
        "deviation": r.deviation,
        "deviation_so_even_so_odd_o": r.orthogonal_deviations,
        "numerical_error": r.error,
        "beyond_main_threshold": r.beyond_main_threshold,
        "beyond_extended_threshold": r.beyond_extended_threshold,
        "split": {
            "large_p_small_c": s.large_p_small_c,
            "large_p_large_c": s.large_p_large_c,
            "small_p": s.small_p,
            "eisenstein": s.eisenstein,
        },
    })
}

pub fn validation_json(report: &ValidationReport) -> Value {
    json!({
        "records": report.records.iter().map(|r| json!({
            "t": r.t,
            "passed": r.passed(),
            "failures": r.failures.iter().map(|c| c.name()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "failure_count": report.failure_count(),
        "count_fit": report.count_fit.map(|c| json!({"a": c.a, "b": c.b, "c": c.c, "residual": c.residual})),
    })
}

pub fn pretty(v: &Value) -> AppResult<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

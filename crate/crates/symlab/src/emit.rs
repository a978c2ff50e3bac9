//! Text and JSON renderings of verification reports.

use serde::Serialize;
use symlab_core::report::{Report, Residual, Verdict, TOL_ALGEBRAIC, TOL_NUMERIC};

pub const SCHEMA: &str = "symlab-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum JsonResidual<'a> {
    Zero,
    Expression { at: &'a str, expr: &'a str },
    MaxAbs { value: f64, points: usize, worst: Option<[f64; 4]> },
    Error { message: &'a str },
}

#[derive(Serialize)]
struct JsonCheck<'a> {
    name: &'a str,
    mode: String,
    residual: JsonResidual<'a>,
    tolerance: Option<f64>,
    verdict: &'static str,
}

#[derive(Serialize)]
struct JsonErratum<'a> {
    location: &'a str,
    printed_form: &'a str,
    consistent_form: &'a str,
    evidence: &'a str,
    printed_fails: bool,
    consistent_passes: bool,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    model: &'a str,
    samples: usize,
    seed: u64,
    passed: bool,
    checks: Vec<JsonCheck<'a>>,
    errata: Vec<JsonErratum<'a>>,
    solver: Option<&'a str>,
}

#[derive(Serialize)]
struct JsonTolerances {
    symbolic: &'static str,
    algebraic_numeric: f64,
    wave_operator_numeric: f64,
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    schema: &'static str,
    tolerances: JsonTolerances,
    passed: bool,
    reports: Vec<JsonReport<'a>>,
}

fn json_report(r: &Report) -> JsonReport<'_> {
    JsonReport {
        model: &r.model,
        samples: r.samples,
        seed: r.seed,
        passed: r.passed(),
        checks: r
            .checks
            .iter()
            .map(|c| JsonCheck {
                name: &c.name,
                mode: c.mode.to_string(),
                residual: match &c.residual {
                    Residual::Zero => JsonResidual::Zero,
                    Residual::Nonzero { at, expr } => JsonResidual::Expression { at, expr },
                    Residual::MaxAbs { value, points, worst } => JsonResidual::MaxAbs { value: *value, points: *points, worst: *worst },
                    Residual::Error(m) => JsonResidual::Error { message: m },
                },
                tolerance: c.tolerance,
                verdict: match c.verdict {
                    Verdict::Pass => "pass",
                    Verdict::Fail => "fail",
                },
            })
            .collect(),
        errata: r
            .errata
            .iter()
            .map(|e| JsonErratum {
                location: &e.location,
                printed_form: &e.printed_form,
                consistent_form: &e.consistent_form,
                evidence: &e.evidence,
                printed_fails: e.printed_fails,
                consistent_passes: e.consistent_passes,
            })
            .collect(),
        solver: r.solver.as_deref(),
    }
}

fn text_report(r: &Report, out: &mut String) {
    use std::fmt::Write;
    let failed = r.failures().count();
    let _ = writeln!(out, "model {} (samples {}, seed {})", r.model, r.samples, r.seed);
    for c in &r.checks {
        let tol = c.tolerance.map(|t| format!(" [tol {t:e}]")).unwrap_or_default();
        let _ = writeln!(out, "  {:<4}  {:<8}  {}: {}{}", c.verdict.to_string(), c.mode.to_string(), c.name, c.residual, tol);
    }
    if !r.errata.is_empty() {
        let _ = writeln!(out, "  errata ({}):", r.errata.len());
        for e in &r.errata {
            let status = if e.printed_fails && e.consistent_passes { "reproduced" } else { "NOT reproduced" };
            let _ = writeln!(out, "    - {} [{status}]", e.location);
            let _ = writeln!(out, "        printed:    {}", e.printed_form);
            let _ = writeln!(out, "        consistent: {}", e.consistent_form);
            let _ = writeln!(out, "        evidence:   {}", e.evidence);
        }
    }
    if let Some(s) = &r.solver {
        let _ = writeln!(out, "  solver:");
        for line in s.lines() {
            let _ = writeln!(out, "    {line}");
        }
    }
    if let Some(t) = r.timing_ms {
        let _ = writeln!(out, "  time {t:.1} ms");
    }
    let _ = writeln!(out, "  {} checks, {} failed", r.checks.len(), failed);
}

/// Renders one or more reports. JSON omits timing so that identical inputs
/// give identical bytes.
pub fn emit_reports(reports: &[Report], format: Format) -> String {
    match format {
        Format::Json => {
            let doc = JsonDocument {
                schema: SCHEMA,
                tolerances: JsonTolerances { symbolic: "exact zero", algebraic_numeric: TOL_ALGEBRAIC, wave_operator_numeric: TOL_NUMERIC },
                passed: reports.iter().all(Report::passed),
                reports: reports.iter().map(json_report).collect(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("report serialization");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = String::new();
            for r in reports {
                text_report(r, &mut s);
            }
            s
        }
    }
}

pub fn emit_report(r: &Report, format: Format) -> String {
    emit_reports(std::slice::from_ref(r), format)
}

/// Process exit status: 0 iff every check of every report passes.
pub fn exit_status(reports: &[Report]) -> i32 {
    if reports.iter().all(Report::passed) {
        0
    } else {
        1
    }
}

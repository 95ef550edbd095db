//! CSV and JSON rendering. Numbers carry 12 significant digits and never
//! depend on locale; the same report always renders to the same bytes.

use casimir_core::verify::CheckResult;
use serde::Serialize;

use crate::config::{Format, ModelConfig};
use crate::run::{Report, Table};

/// `x` in scientific notation with 12 significant digits; `-0` prints as `0`.
pub fn format_number(x: f64) -> String {
    format!("{:.11e}", x + 0.0)
}

/// `x` rounded to 12 significant digits, for JSON.
fn rounded(x: f64) -> f64 {
    format_number(x).parse().expect("formatted float parses")
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Csv => render_csv(&report.table),
        Format::Json => render_json(&report.model, &report.table),
    }
}

fn render_csv(table: &Table) -> String {
    let mut out = String::new();
    match table {
        Table::Thermal(curve) => {
            out.push_str("T,F,U,S\n");
            for p in &curve.rows {
                let cells = [p.temperature, p.free_energy, p.internal_energy, p.entropy].map(format_number);
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        Table::Distance(rows) => {
            out.push_str("r,F\n");
            for (r, f) in rows {
                out.push_str(&format!("{},{}\n", format_number(*r), format_number(*f)));
            }
        }
    }
    out
}

#[derive(Serialize)]
struct ReportDoc<'a, R> {
    model: &'a ModelConfig,
    rows: Vec<R>,
    negative_entropy_intervals: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct ThermoRow {
    #[serde(rename = "T")]
    t: f64,
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "U")]
    u: f64,
    #[serde(rename = "S")]
    s: f64,
}

#[derive(Serialize)]
struct DistanceRow {
    r: f64,
    #[serde(rename = "F")]
    f: f64,
}

fn render_json(model: &ModelConfig, table: &Table) -> String {
    let mut text = match table {
        Table::Thermal(curve) => serde_json::to_string_pretty(&ReportDoc {
            model,
            rows: curve
                .rows
                .iter()
                .map(|p| ThermoRow {
                    t: rounded(p.temperature),
                    f: rounded(p.free_energy),
                    u: rounded(p.internal_energy),
                    s: rounded(p.entropy),
                })
                .collect(),
            negative_entropy_intervals: curve
                .intervals
                .iter()
                .map(|i| [rounded(i.t_lo), rounded(i.t_hi)])
                .collect(),
        }),
        Table::Distance(rows) => serde_json::to_string_pretty(&ReportDoc {
            model,
            rows: rows
                .iter()
                .map(|&(r, f)| DistanceRow {
                    r: rounded(r),
                    f: rounded(f),
                })
                .collect(),
            negative_entropy_intervals: Vec::new(),
        }),
    }
    .expect("report serializes");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    passed: bool,
    checks: &'a [CheckResult],
}

/// Pass/fail table of the verification suite. Without a format, an aligned
/// plain-text table.
pub fn render_checks(results: &[CheckResult], format: Option<Format>) -> String {
    let all = results.iter().all(|r| r.passed);
    match format {
        Some(Format::Json) => {
            let mut text = serde_json::to_string_pretty(&VerifyDoc {
                passed: all,
                checks: results,
            })
            .expect("checks serialize");
            text.push('\n');
            text
        }
        Some(Format::Csv) => {
            let mut out = String::from("id,check,result,detail\n");
            for r in results {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    r.id,
                    csv_field(r.name),
                    if r.passed { "pass" } else { "fail" },
                    csv_field(&r.detail)
                ));
            }
            out
        }
        None => {
            let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
            let mut out = String::new();
            for r in results {
                out.push_str(&format!(
                    "{:>2}  {:<width$}  {}  {}\n",
                    r.id,
                    r.name,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.detail
                ));
            }
            let passed = results.iter().filter(|r| r.passed).count();
            out.push_str(&format!("{passed}/{} checks passed\n", results.len()));
            out
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(-0.0049147899001234), "-4.91478990012e-3");
        assert_eq!(format_number(-0.0), "0.00000000000e0");
        assert_eq!(rounded(1.0 / 3.0), 0.333333333333);
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a, b"), "\"a, b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}

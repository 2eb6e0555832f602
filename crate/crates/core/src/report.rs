//! Structured results of identity checks, with JSON and CSV emission.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Record of one identity check: inputs, both sides, residual, verdict.
///
/// Exact checks carry `"num/den"` strings in `lhs`/`rhs`/`residual` and
/// tolerance 0; numerical checks carry floats. `subdivisions` and
/// `runtime_ms` are present where the method produces them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub identity_id: String,
    pub method: String,
    pub params: BTreeMap<String, Value>,
    pub lhs: Value,
    pub rhs: Value,
    pub residual: Value,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub subdivisions: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
}

impl VerificationReport {
    /// Report of an exact rational comparison; residual is `lhs - rhs`.
    pub fn exact(
        identity_id: &str,
        params: BTreeMap<String, Value>,
        lhs: String,
        rhs: String,
        residual: String,
        pass: bool,
    ) -> Self {
        VerificationReport {
            identity_id: identity_id.to_string(),
            method: "exact".to_string(),
            params,
            lhs: Value::String(lhs),
            rhs: Value::String(rhs),
            residual: Value::String(residual),
            tolerance: 0.0,
            pass,
            subdivisions: None,
            runtime_ms: None,
            warning: None,
        }
    }

    /// Report of a floating comparison at the given tolerance; the caller
    /// states the residual convention (absolute or relative) via `method`.
    pub fn numeric(
        identity_id: &str,
        method: &str,
        params: BTreeMap<String, Value>,
        lhs: f64,
        rhs: f64,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        VerificationReport {
            identity_id: identity_id.to_string(),
            method: method.to_string(),
            params,
            lhs: json_f64(lhs),
            rhs: json_f64(rhs),
            residual: json_f64(residual),
            tolerance,
            pass: residual.is_finite() && residual <= tolerance,
            subdivisions: None,
            runtime_ms: None,
            warning: None,
        }
    }
}

/// NaN/inf have no JSON number representation; encode them as strings so a
/// failed run still serializes.
fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

/// Builds a deterministic parameter map.
pub fn param_map(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Aggregate over a sweep: count, failures, worst numeric residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub total: usize,
    pub failures: usize,
    pub max_residual: f64,
}

impl SweepSummary {
    pub fn all_pass(&self) -> bool {
        self.failures == 0
    }
}

pub fn summarize(reports: &[VerificationReport]) -> SweepSummary {
    let mut max_residual = 0.0f64;
    let mut failures = 0usize;
    for r in reports {
        if !r.pass {
            failures += 1;
        }
        if let Some(x) = r.residual.as_f64() {
            if x.is_finite() {
                max_residual = max_residual.max(x.abs());
            }
        }
    }
    SweepSummary { total: reports.len(), failures, max_residual }
}

pub fn write_json<W: Write>(reports: &[VerificationReport], mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, reports)?;
    out.write_all(b"\n")
}

const CSV_HEADER: &str =
    "identity_id,method,params,lhs,rhs,residual,tolerance,pass,subdivisions,runtime_ms,warning";

pub fn write_csv<W: Write>(reports: &[VerificationReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        let params = serde_json::to_string(&r.params).expect("param map serializes");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.identity_id),
            csv_field(&r.method),
            csv_field(&params),
            csv_field(&value_str(&r.lhs)),
            csv_field(&value_str(&r.rhs)),
            csv_field(&value_str(&r.residual)),
            r.tolerance,
            r.pass,
            r.subdivisions.map_or(String::new(), |v| v.to_string()),
            r.runtime_ms.map_or(String::new(), |v| v.to_string()),
            csv_field(r.warning.as_deref().unwrap_or("")),
        )?;
    }
    Ok(())
}

fn value_str(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_params() {
        let r = VerificationReport::exact(
            "x/y",
            param_map(&[("a", serde_json::json!(1)), ("b", serde_json::json!("1/2"))]),
            "1/2".into(),
            "1/2".into(),
            "0/1".into(),
            true,
        );
        let mut buf = Vec::new();
        write_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().nth(1).unwrap();
        assert!(line.starts_with("x/y,exact,\"{\"\"a\"\":1,\"\"b\"\":\"\"1/2\"\"}\""), "{line}");
    }

    #[test]
    fn json_round_trips() {
        let r = VerificationReport::numeric(
            "q",
            "quadrature",
            param_map(&[("mu", serde_json::json!(0.5))]),
            1.0,
            1.0 + 1e-12,
            1e-12,
            1e-9,
        );
        let s = serde_json::to_string(&[r.clone()]).unwrap();
        let back: Vec<VerificationReport> = serde_json::from_str(&s).unwrap();
        assert!(back[0].pass);
        assert_eq!(back[0].identity_id, r.identity_id);
    }

    #[test]
    fn nonfinite_residual_fails_and_serializes() {
        let r = VerificationReport::numeric("q", "quadrature", param_map(&[]), 1.0, f64::NAN, f64::NAN, 1e-9);
        assert!(!r.pass);
        serde_json::to_string(&r).unwrap();
    }
}

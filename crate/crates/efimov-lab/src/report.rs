//! Machine-readable run reports and number formatting for CSV traces.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

/// Hex SHA-256 of a canonical JSON rendering of `value` (object keys sorted).
pub fn digest<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
    let canon = serde_json::to_string(&v).unwrap_or_default();
    hex::encode(Sha256::digest(canon.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub values: Vec<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, values: Vec<f64>, tolerance: Option<f64>, pass: bool) -> Check {
        Check { name: name.into(), values, tolerance, pass }
    }

    /// A value checked against `|value| ≤ tolerance`.
    pub fn within(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        Check::new(name, vec![value], Some(tolerance), value.abs() <= tolerance)
    }

    /// A reported value with no pass criterion.
    pub fn info(name: impl Into<String>, values: Vec<f64>) -> Check {
        Check::new(name, values, None, true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub command: Vec<String>,
    pub digest: String,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
    pub pass: bool,
}

impl ReportDocument {
    /// `config` is hashed for the digest; `command` is echoed verbatim.
    pub fn new<C: Serialize>(command: Vec<String>, config: &C, checks: Vec<Check>) -> ReportDocument {
        let pass = checks.iter().all(|c| c.pass);
        ReportDocument { command, digest: digest(config), checks, details: None, pass }
    }

    pub fn with_details<T: Serialize>(mut self, details: &T) -> ReportDocument {
        self.details = serde_json::to_value(details).ok();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let vals: Vec<String> = c.values.iter().map(|v| format!("{v:.10}")).collect();
            let tol = c.tolerance.map(|t| format!(" (tol {t:e})")).unwrap_or_default();
            out.push_str(&format!("{:<4} {} = [{}]{}\n", if c.pass { "ok" } else { "FAIL" }, c.name, vals.join(", "), tol));
        }
        if let Some(d) = self.details.as_ref().filter(|d| !d.is_null()) {
            out.push_str(&serde_json::to_string_pretty(d).unwrap_or_default());
            out.push('\n');
        }
        out.push_str(&format!("overall: {}\n", if self.pass { "pass" } else { "fail" }));
        out
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_digits() {
        for x in [0.1, 1.0 / 3.0, -2.651635327336065, 1e-300, 6.02e23] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.0), "0");
    }

    #[test]
    fn digest_is_stable() {
        let a = serde_json::json!({"b": 1, "a": [1.0, 2.0]});
        let b = serde_json::json!({"a": [1.0, 2.0], "b": 1});
        assert_eq!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }
}

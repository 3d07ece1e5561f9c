//! Run reports: named numeric checks against thresholds, with the configuration echoed.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Below,
    AtMost,
    AtLeast,
    Equal,
    /// `|value - target| <= threshold * |target|`.
    RelativeTo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub pass: bool,
    /// Error message when the check could not be evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, threshold, Comparison::Below, None, value < threshold)
    }

    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, threshold, Comparison::AtMost, None, value <= threshold)
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, threshold, Comparison::AtLeast, None, value >= threshold)
    }

    pub fn relative(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        let pass = (value - target).abs() <= tolerance * target.abs();
        Self::new(name, value, tolerance, Comparison::RelativeTo, Some(target), pass)
    }

    pub fn equals(name: impl Into<String>, value: f64, target: f64) -> Self {
        Self::new(name, value, target, Comparison::Equal, None, value == target)
    }

    /// A check that could not be evaluated because the computation failed.
    pub fn error(name: impl Into<String>, err: &crate::Error) -> Self {
        let mut c = Self::new(name, f64::NAN, f64::NAN, Comparison::Below, None, false);
        c.detail = Some(err.to_string());
        c
    }

    fn new(
        name: impl Into<String>,
        value: f64,
        threshold: f64,
        comparison: Comparison,
        target: Option<f64>,
        pass: bool,
    ) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            comparison,
            target,
            pass: pass && value.is_finite(),
            detail: None,
        }
    }

    /// `PASS|FAIL  name: value (rule)`.
    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        if let Some(d) = &self.detail {
            return format!("{verdict}  {}: {d}", self.name);
        }
        let t = short(self.threshold);
        let rule = match (self.comparison, self.target) {
            (Comparison::Below, _) => format!("< {t}"),
            (Comparison::AtMost, _) => format!("<= {t}"),
            (Comparison::AtLeast, _) => format!(">= {t}"),
            (Comparison::Equal, _) => format!("== {t}"),
            (Comparison::RelativeTo, target) => {
                format!(
                    "= {} within {}%",
                    short(target.unwrap_or(f64::NAN)),
                    short(100.0 * self.threshold)
                )
            }
        };
        format!("{verdict}  {}: {:.6e} ({rule})", self.name, self.value)
    }
}

/// Four significant digits without trailing zeros: `1e-3`, `0.0796`, `2.41e-2`.
fn short(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    if (1e-3..1e4).contains(&x.abs()) {
        let s = format!("{:.*}", (3 - x.abs().log10().floor() as i32).max(0) as usize, x);
        return if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_owned()
        } else {
            s
        };
    }
    let s = format!("{x:.3e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
    format!("{mantissa}e{exp}")
}

/// Build facts that can change results. Thread counts are deliberately absent: reports must not
/// depend on them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
    pub parallel: bool,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            parallel: cfg!(feature = "parallel"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub environment: Environment,
    /// The configuration that reproduces this run, as TOML.
    pub config: String,
    pub checks: Vec<Check>,
    /// Command-specific numeric results.
    pub results: serde_json::Value,
}

impl RunReport {
    pub fn new(command: impl Into<String>, config: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            environment: Environment::current(),
            config: config.into(),
            checks: Vec::new(),
            results: serde_json::Value::Object(Default::default()),
        }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn record(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        if let serde_json::Value::Object(map) = &mut self.results {
            map.insert(key.to_owned(), v);
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn summary(&self) -> String {
        let mut s: String = self.checks.iter().map(|c| c.line() + "\n").collect();
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        s.push_str(&format!(
            "{}: {} checks, {} failed\n",
            self.command,
            self.checks.len(),
            failed
        ));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_compare_and_reject_nan() {
        assert!(Check::below("a", 1.0, 2.0).pass);
        assert!(!Check::below("a", 2.0, 2.0).pass);
        assert!(Check::at_most("a", 2.0, 2.0).pass);
        assert!(Check::at_least("a", 1.5, 1.5).pass);
        assert!(Check::relative("a", 1.01, 1.0, 0.02).pass);
        assert!(!Check::relative("a", 1.03, 1.0, 0.02).pass);
        assert!(!Check::below("a", f64::NAN, 2.0).pass);
        assert!(Check::equals("a", 1.0, 1.0).pass && !Check::equals("a", 2.0, 1.0).pass);
        assert_eq!(short(1e-3), "0.001");
        assert_eq!(short(5e-5), "5e-5");
        assert_eq!(short(1.0 / (4.0 * std::f64::consts::PI)), "0.07958");
        assert_eq!(short(0.032258064), "0.03226");
        assert_eq!(short(1.5), "1.5");
        assert_eq!(short(100.0), "100");
        let e = Check::error("a", &crate::Error::Defect("no atoms".into()));
        assert!(!e.pass && e.line().contains("defect_lab: no atoms"));
    }

    #[test]
    fn report_round_trips_through_json() {
        let mut r = RunReport::new("entropy", "grid = 64\n");
        r.push(Check::below("x", 0.5, 1.0));
        r.record("values", [1.0, 2.0]);
        let back: RunReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.passed());
    }
}

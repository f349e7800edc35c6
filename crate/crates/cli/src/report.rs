//! JSON report types. Field order is the serialization order.

use serde::Serialize;
use serde_json::{json, Map, Value};

/// Rounds to 12 significant digits. Non-finite values become strings.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(x.to_string());
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    serde_json::Number::from_f64(rounded).map(Value::Number).unwrap_or(Value::Null)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// a number, a `[lo, hi]` window, or `{"at_most": x}` / `{"at_least": x}`
    pub expected: Value,
    pub actual: Value,
    pub tolerance: Value,
    pub pass: bool,
}

impl Check {
    /// |actual − expected| ≤ tol
    pub fn close(name: &str, expected: f64, actual: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            expected: num(expected),
            actual: num(actual),
            tolerance: num(tol),
            pass: (actual - expected).abs() <= tol,
        }
    }

    /// |actual − expected| ≤ rel·|expected|
    pub fn relative(name: &str, expected: f64, actual: f64, rel: f64) -> Self {
        Check {
            name: name.into(),
            expected: num(expected),
            actual: num(actual),
            tolerance: json!({ "relative": num(rel) }),
            pass: (actual - expected).abs() <= rel * expected.abs(),
        }
    }

    pub fn at_most(name: &str, bound: f64, actual: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            expected: json!({ "at_most": num(bound) }),
            actual: num(actual),
            tolerance: num(tol),
            pass: actual <= bound + tol,
        }
    }

    pub fn at_least(name: &str, bound: f64, actual: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            expected: json!({ "at_least": num(bound) }),
            actual: num(actual),
            tolerance: num(tol),
            pass: actual >= bound - tol,
        }
    }

    /// lo ≤ actual ≤ hi
    pub fn within(name: &str, lo: f64, hi: f64, actual: f64) -> Self {
        Check {
            name: name.into(),
            expected: json!([num(lo), num(hi)]),
            actual: num(actual),
            tolerance: num(0.0),
            pass: lo <= actual && actual <= hi,
        }
    }

    pub fn holds(name: &str, actual: bool) -> Self {
        Check { name: name.into(), expected: json!(true), actual: json!(actual), tolerance: num(0.0), pass: actual }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub inputs: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn new(scenario: &str, seed: u64, inputs: Map<String, Value>) -> Self {
        Report { scenario: scenario.into(), seed, inputs, outputs: Map::new(), checks: Vec::new(), pass: true }
    }

    pub fn output(&mut self, name: &str, value: impl Into<Value>) {
        self.outputs.insert(name.into(), value.into());
    }

    pub fn number(&mut self, name: &str, x: f64) {
        self.outputs.insert(name.into(), num(x));
    }

    pub fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub reports: Vec<Report>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.853_553_390_593_273_8).to_string(), "0.853553390593");
        assert_eq!(num(1.0).to_string(), "1.0");
        assert_eq!(num(-2.828_427_124_746_19).to_string(), "-2.82842712475");
        assert_eq!(num(6.371e6).to_string(), "6371000.0");
        assert_eq!(num(f64::NAN), Value::String("NaN".into()));
    }

    #[test]
    fn nan_never_passes() {
        assert!(!Check::close("x", 1.0, f64::NAN, 1.0).pass);
        assert!(!Check::within("x", 0.0, 1.0, f64::NAN).pass);
        assert!(!Check::at_most("x", 0.0, f64::NAN, 1.0).pass);
    }

    #[test]
    fn report_pass_is_conjunction() {
        let mut r = Report::new("s", 0, Map::new());
        r.check(Check::close("a", 1.0, 1.0, 0.0));
        assert!(r.pass);
        r.check(Check::close("b", 1.0, 2.0, 0.5));
        r.check(Check::close("c", 1.0, 1.0, 0.0));
        assert!(!r.pass);
    }
}

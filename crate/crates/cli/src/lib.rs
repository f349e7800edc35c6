//! Scenario runner behind the `causal-switch` binary.
//!
//! A scenario resolves its parameters against a fixed table of defaults,
//! calls into `causal_switch`, and records outputs and checks in a
//! [`Report`]. Reports serialize as JSON with keys in the order
//! `scenario, seed, inputs, outputs, checks, pass`; each check is
//! `name, expected, actual, tolerance, pass`. Numbers carry 12
//! significant digits.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

pub mod report;
mod scenarios;

pub use report::{num, Check, Report, SuiteReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{scenario}: {source}")]
    Model { scenario: String, source: causal_switch::Error },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Model { .. } => "model",
        }
    }

    /// `{"error": {"kind", "message"}}` for stderr.
    pub fn to_json(&self) -> String {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } }).to_string()
    }

    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    OcbGame,
    SwitchContract,
    ChshTemporal,
    ValidateProcess,
    GravDuration,
    GravOrder,
    Trigger,
    AgentSwitch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamDefault {
    Number(f64),
    Text(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: ParamDefault,
    pub help: &'static str,
}

const fn number(name: &'static str, default: f64, help: &'static str) -> ParamSpec {
    ParamSpec { name, default: ParamDefault::Number(default), help }
}

const fn text(name: &'static str, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec { name, default: ParamDefault::Text(default), help }
}

const BODY: ParamSpec = text("body", "earth", "earth, small-mass or custom");
const MASS: ParamSpec = number("mass", causal_switch::grav::EARTH_MASS, "mass in kg (custom body)");
const RADIUS: ParamSpec = number("radius", causal_switch::grav::EARTH_RADIUS, "radius in m (custom body)");

const OCB_GAME: &[ParamSpec] = &[number("tol", 1e-9, "absolute tolerance")];
const SWITCH_CONTRACT: &[ParamSpec] =
    &[number("samples", 50.0, "random unitary pairs"), number("tol", 1e-9, "absolute tolerance")];
const CHSH_TEMPORAL: &[ParamSpec] = &[
    number("samples", 200.0, "random separable states"),
    number("terms", 3.0, "product terms per separable state"),
    number("tol", 1e-9, "absolute tolerance"),
];
const VALIDATE_PROCESS: &[ParamSpec] = &[
    text("process", "ocb", "ocb or maximally-mixed"),
    number("samples", 500.0, "random CPTP pairs"),
    number("psd_tol", 1e-9, "allowed negative eigenvalue and trace error"),
    number("norm_tol", 1e-8, "allowed deviation of Tr[W(M⊗N)] from 1"),
];
const GRAV_DURATION: &[ParamSpec] = &[
    BODY,
    MASS,
    RADIUS,
    number("d", 3e-7, "horizontal separation in m"),
    number("h", 1.0, "height difference in m"),
    number("window_lo", 8.0, "lower end of the expected duration in s"),
    number("window_hi", 10.0, "upper end of the expected duration in s"),
    number("coefficient", 3e7, "expected Δt_r·h/d in s (earth only)"),
    number("coefficient_tol", 0.05, "relative tolerance on the coefficient"),
];
const GRAV_ORDER: &[ParamSpec] = &[
    BODY,
    MASS,
    RADIUS,
    text("metric", "standard", "standard or isotropic"),
    number("r_a", 6.471e6, "sender radius in m"),
    number("r_b", 6.371e6, "receiver radius in m, also the base radius r of the swapped pair"),
    number("h", 1e5, "vertical offset inside each pair in m"),
    number("length", 1e5, "shift L between the two configurations in m"),
    number("margin", 0.01, "relative step around each threshold"),
];
const TRIGGER: &[ParamSpec] = &[
    number("tau_star", 1.0, "crossing time τ* in s"),
    number("delta", 1e-6, "zone width Δ in m"),
    number("v0", 1e-21, "barrier height V₀ in J"),
    number("m", 1e-25, "mass in kg"),
    number("tol", 1e-12, "absolute tolerance"),
];
const AGENT_SWITCH: &[ParamSpec] = &[
    number("input", 1.0, "target basis state e_1 … e_5"),
    number("zeta", 3.0, "detector pattern 0 … 3"),
    number("sign", 1.0, "diagonal measurement outcome ±1"),
    number("tol", 1e-9, "absolute tolerance"),
];

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::OcbGame,
        Scenario::SwitchContract,
        Scenario::ChshTemporal,
        Scenario::ValidateProcess,
        Scenario::GravDuration,
        Scenario::GravOrder,
        Scenario::Trigger,
        Scenario::AgentSwitch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::OcbGame => "ocb-game",
            Scenario::SwitchContract => "switch-contract",
            Scenario::ChshTemporal => "chsh-temporal",
            Scenario::ValidateProcess => "validate-process",
            Scenario::GravDuration => "grav-duration",
            Scenario::GravOrder => "grav-order",
            Scenario::Trigger => "trigger",
            Scenario::AgentSwitch => "agent-switch",
        }
    }

    pub fn about(self) -> &'static str {
        match self {
            Scenario::OcbGame => "causal game on the OCB process",
            Scenario::SwitchContract => "switch via its process vector against the direct supermap",
            Scenario::ChshTemporal => "CHSH value of the temporal-order states and of separable states",
            Scenario::ValidateProcess => "positivity, trace and normalization of a process matrix",
            Scenario::GravDuration => "time needed for a gravitational switch",
            Scenario::GravOrder => "proper-time thresholds for ordering two events",
            Scenario::Trigger => "rotation of an agent's level by a crossing oscillator",
            Scenario::AgentSwitch => "agent model inside a switch",
        }
    }

    pub fn params(self) -> &'static [ParamSpec] {
        match self {
            Scenario::OcbGame => OCB_GAME,
            Scenario::SwitchContract => SWITCH_CONTRACT,
            Scenario::ChshTemporal => CHSH_TEMPORAL,
            Scenario::ValidateProcess => VALIDATE_PROCESS,
            Scenario::GravDuration => GRAV_DURATION,
            Scenario::GravOrder => GRAV_ORDER,
            Scenario::Trigger => TRIGGER,
            Scenario::AgentSwitch => AGENT_SWITCH,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown scenario '{s}'")))
    }
}

/// Human-readable listing of scenarios and their parameters.
pub fn list_scenarios() -> String {
    let mut out = String::new();
    for sc in Scenario::ALL {
        out.push_str(&format!("{}  {}\n", sc.name(), sc.about()));
        for p in sc.params() {
            let default = match p.default {
                ParamDefault::Number(x) if x.fract() == 0.0 && x.abs() < 1e6 => format!("{x}"),
                ParamDefault::Number(x) => format!("{x:e}"),
                ParamDefault::Text(t) => t.to_string(),
            };
            out.push_str(&format!("    {:<16} {:<12} {}\n", p.name, default, p.help));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Text(String),
}

impl ParamValue {
    /// Numbers where the text parses as one, text otherwise.
    pub fn parse(s: &str) -> Self {
        match s.trim().parse::<f64>() {
            Ok(x) => ParamValue::Number(x),
            Err(_) => ParamValue::Text(s.to_string()),
        }
    }
}

impl From<f64> for ParamValue {
    fn from(x: f64) -> Self {
        ParamValue::Number(x)
    }
}

impl From<&str> for ParamValue {
    fn from(s: &str) -> Self {
        ParamValue::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub parameters: BTreeMap<String, ParamValue>,
    pub seed: u64,
    pub output_path: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: String,
    #[serde(default)]
    parameters: BTreeMap<String, ParamValue>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output_path: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSuite {
    scenarios: Vec<RawConfig>,
}

impl TryFrom<RawConfig> for ScenarioConfig {
    type Error = CliError;

    fn try_from(raw: RawConfig) -> Result<Self> {
        let config = ScenarioConfig {
            scenario: raw.scenario.parse()?,
            parameters: raw.parameters,
            seed: raw.seed,
            output_path: raw.output_path,
        };
        config.validate()?;
        Ok(config)
    }
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        ScenarioConfig { scenario, parameters: BTreeMap::new(), seed: 0, output_path: None }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<ParamValue>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// One config object: `{"scenario", "parameters", "seed", "output_path"}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        raw.try_into()
    }

    /// Rejects parameters the scenario does not know and values of the
    /// wrong type.
    pub fn validate(&self) -> Result<()> {
        Params::resolve(self).map(|_| ())
    }
}

/// `{"scenarios": [config, ...]}`
pub fn parse_suite(text: &str) -> Result<Vec<ScenarioConfig>> {
    let raw: RawSuite = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    raw.scenarios.into_iter().map(ScenarioConfig::try_from).collect()
}

/// Parameters with defaults filled in, in table order.
#[derive(Debug, Clone)]
pub(crate) struct Params {
    scenario: Scenario,
    values: Vec<(&'static str, ParamValue)>,
}

impl Params {
    fn resolve(config: &ScenarioConfig) -> Result<Self> {
        let specs = config.scenario.params();
        if let Some(key) = config.parameters.keys().find(|k| !specs.iter().any(|s| s.name == k.as_str())) {
            return Err(CliError::Config(format!("unknown parameter '{key}' for scenario '{}'", config.scenario)));
        }
        let mut values = Vec::with_capacity(specs.len());
        for spec in specs {
            let value = match (config.parameters.get(spec.name), spec.default) {
                (None, ParamDefault::Number(x)) => ParamValue::Number(x),
                (None, ParamDefault::Text(t)) => ParamValue::Text(t.to_string()),
                (Some(v @ ParamValue::Number(x)), ParamDefault::Number(_)) => {
                    if !x.is_finite() {
                        return Err(CliError::Config(format!("parameter '{}' must be finite", spec.name)));
                    }
                    v.clone()
                }
                (Some(v @ ParamValue::Text(_)), ParamDefault::Text(_)) => v.clone(),
                (Some(_), ParamDefault::Number(_)) => {
                    return Err(CliError::Config(format!("parameter '{}' must be a number", spec.name)))
                }
                (Some(_), ParamDefault::Text(_)) => {
                    return Err(CliError::Config(format!("parameter '{}' must be a string", spec.name)))
                }
            };
            values.push((spec.name, value));
        }
        Ok(Params { scenario: config.scenario, values })
    }

    fn get(&self, name: &str) -> &ParamValue {
        &self.values.iter().find(|(n, _)| *n == name).expect("parameter is in the table").1
    }

    pub(crate) fn num(&self, name: &str) -> f64 {
        match self.get(name) {
            ParamValue::Number(x) => *x,
            ParamValue::Text(_) => unreachable!("types are checked in resolve"),
        }
    }

    pub(crate) fn text(&self, name: &str) -> &str {
        match self.get(name) {
            ParamValue::Text(t) => t,
            ParamValue::Number(_) => unreachable!("types are checked in resolve"),
        }
    }

    fn invalid(&self, name: &str, what: &str) -> CliError {
        CliError::Config(format!("parameter '{name}' of scenario '{}' {what}", self.scenario))
    }

    pub(crate) fn tolerance(&self, name: &str) -> Result<f64> {
        let x = self.num(name);
        if x < 0.0 {
            return Err(self.invalid(name, "must be non-negative"));
        }
        Ok(x)
    }

    pub(crate) fn positive(&self, name: &str) -> Result<f64> {
        // finite by construction
        let x = self.num(name);
        if x <= 0.0 {
            return Err(self.invalid(name, "must be positive"));
        }
        Ok(x)
    }

    /// Integer in [lo, hi].
    pub(crate) fn integer(&self, name: &str, lo: i64, hi: i64) -> Result<i64> {
        let x = self.num(name);
        if x.fract() != 0.0 || x < lo as f64 || x > hi as f64 {
            return Err(self.invalid(name, &format!("must be an integer in [{lo}, {hi}]")));
        }
        Ok(x as i64)
    }

    pub(crate) fn choice<'a>(&'a self, name: &str, options: &[&str]) -> Result<&'a str> {
        let t = self.text(name);
        if !options.contains(&t) {
            return Err(self.invalid(name, &format!("must be one of {}", options.join(", "))));
        }
        Ok(t)
    }

    fn inputs(&self) -> Map<String, Value> {
        self.values
            .iter()
            .map(|(n, v)| {
                let v = match v {
                    ParamValue::Number(x) => num(*x),
                    ParamValue::Text(t) => Value::String(t.clone()),
                };
                (n.to_string(), v)
            })
            .collect()
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<Report> {
    let params = Params::resolve(config)?;
    let mut report = Report::new(config.scenario.name(), config.seed, params.inputs());
    scenarios::run(&params, config.seed, &mut report).map_err(|e| match e {
        scenarios::Failure::Cli(e) => e,
        scenarios::Failure::Model(source) => CliError::Model { scenario: config.scenario.name().into(), source },
    })?;
    Ok(report)
}

/// Runs every config in order; the first error aborts the suite.
pub fn run_suite(configs: &[ScenarioConfig]) -> Result<SuiteReport> {
    if configs.is_empty() {
        return Err(CliError::Config("suite needs at least one scenario".into()));
    }
    let reports = configs.iter().map(run_scenario).collect::<Result<Vec<_>>>()?;
    let pass = reports.iter().all(|r| r.pass);
    Ok(SuiteReport { reports, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for sc in Scenario::ALL {
            assert_eq!(sc.name().parse::<Scenario>().unwrap(), sc);
        }
        assert!(matches!("nope".parse::<Scenario>(), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = r#"{"scenario": "ocb-game", "seed": 1, "colour": "red"}"#;
        assert!(matches!(ScenarioConfig::from_json(bad), Err(CliError::Config(_))));
        let bad = r#"{"scenario": "ocb-game", "parameters": {"tolerance": 1e-3}}"#;
        let err = ScenarioConfig::from_json(bad).unwrap_err();
        assert!(err.to_string().contains("unknown parameter 'tolerance'"));
        let bad = r#"{"scenarios": [], "extra": 1}"#;
        assert!(parse_suite(bad).is_err());
    }

    #[test]
    fn seed_defaults_to_zero() {
        let c = ScenarioConfig::from_json(r#"{"scenario": "trigger"}"#).unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.output_path, None);
    }

    #[test]
    fn parameter_types_are_checked() {
        let c = ScenarioConfig::new(Scenario::GravDuration).with_param("h", "tall");
        assert!(c.validate().is_err());
        let c = ScenarioConfig::new(Scenario::GravDuration).with_param("body", 3.0);
        assert!(c.validate().is_err());
        let c = ScenarioConfig::new(Scenario::GravDuration).with_param("body", "small-mass");
        assert!(c.validate().is_ok());
    }

    #[test]
    fn param_values_parse() {
        assert_eq!(ParamValue::parse("1e-9"), ParamValue::Number(1e-9));
        assert_eq!(ParamValue::parse("earth"), ParamValue::Text("earth".into()));
    }

    #[test]
    fn inputs_follow_table_order() {
        let c = ScenarioConfig::new(Scenario::Trigger).with_param("m", 2e-25);
        let report = run_scenario(&c).unwrap();
        let keys: Vec<&str> = report.inputs.keys().map(String::as_str).collect();
        assert_eq!(keys, ["tau_star", "delta", "v0", "m", "tol"]);
        assert_eq!(report.inputs["m"], num(2e-25));
    }

    #[test]
    fn empty_suite_is_an_error() {
        assert!(matches!(run_suite(&[]), Err(CliError::Config(_))));
    }

    #[test]
    fn every_scenario_passes_with_defaults() {
        for sc in Scenario::ALL {
            let report = run_scenario(&ScenarioConfig::new(sc)).unwrap();
            assert!(report.pass, "{}", report.to_json());
            assert!(!report.checks.is_empty());
        }
    }

    #[test]
    fn bad_values_are_config_errors() {
        let cases = [
            ScenarioConfig::new(Scenario::OcbGame).with_param("tol", -1.0),
            ScenarioConfig::new(Scenario::SwitchContract).with_param("samples", 2.5),
            ScenarioConfig::new(Scenario::ValidateProcess).with_param("process", "mystery"),
            ScenarioConfig::new(Scenario::AgentSwitch).with_param("sign", 0.0),
            ScenarioConfig::new(Scenario::GravOrder).with_param("metric", "flat"),
        ];
        for c in cases {
            assert!(matches!(run_scenario(&c), Err(CliError::Config(_))), "{c:?}");
        }
    }

    #[test]
    fn model_errors_name_the_scenario() {
        // e_4 cannot produce the − outcome
        let c = ScenarioConfig::new(Scenario::AgentSwitch)
            .with_param("input", 4.0)
            .with_param("zeta", 2.0)
            .with_param("sign", -1.0);
        let err = run_scenario(&c).unwrap_err();
        assert_eq!(err.kind(), "model");
        let v: Value = serde_json::from_str(&err.to_json()).unwrap();
        assert!(v["error"]["message"].as_str().unwrap().starts_with("agent-switch"));
    }
}

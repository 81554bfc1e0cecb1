//! Benchmark configuration, validation and config-file sweeps.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use rta_core::dynamics::CwParams;
use rta_core::filters::{FilterConfig, FilterKind};
use rta_core::policy::ObservationVariant;
use rta_core::safety::{AlphaSpec, SafetyParams};

use crate::error::BenchError;
use crate::suite::{Suite, SuiteParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    /// Uniform random thrust from the control box.
    Random,
    /// Random thrust replaced, outside the timed span, by an action already
    /// satisfying the filter's barrier constraints.
    SafeRandom,
    /// Neural policy without sensor inputs.
    NoSensors,
    /// Neural policy with inspection and Sun inputs.
    AllSensors,
}

impl ControllerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControllerKind::Random => "random",
            ControllerKind::SafeRandom => "safe-random",
            ControllerKind::NoSensors => "no-sensors",
            ControllerKind::AllSensors => "all-sensors",
        }
    }

    pub fn variant(&self) -> Option<ObservationVariant> {
        match self {
            ControllerKind::NoSensors => Some(ObservationVariant::NoSensors),
            ControllerKind::AllSensors => Some(ObservationVariant::AllSensors),
            _ => None,
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(ControllerKind::Random),
            "safe-random" | "safe_random" => Ok(ControllerKind::SafeRandom),
            "no-sensors" | "no_sensors" => Ok(ControllerKind::NoSensors),
            "all-sensors" | "all_sensors" => Ok(ControllerKind::AllSensors),
            other => Err(format!(
                "unknown controller `{other}` (expected random, safe-random, no-sensors or all-sensors)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// Where policy weights come from.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySource {
    File(PathBuf),
    /// Freshly initialized network of the reference architecture.
    Seeded(u64),
}

impl Default for PolicySource {
    fn default() -> Self {
        PolicySource::Seeded(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub label: String,
    pub controller: ControllerKind,
    /// `None` runs the controller alone.
    pub rta: Option<FilterConfig>,
    pub suite: Suite,
    pub suite_params: SuiteParams,
    pub cases: usize,
    pub seed: u64,
    pub policy: PolicySource,
    /// Safety parameters used for suite generation when `rta` is `None`.
    pub safety: SafetyParams,
    pub cw: CwParams,
}

impl BenchConfig {
    pub fn new(
        controller: ControllerKind,
        rta: Option<FilterConfig>,
        suite: Suite,
        cases: usize,
        seed: u64,
    ) -> Self {
        let cw = rta.as_ref().map_or_else(CwParams::default, |r| r.cw);
        let safety = rta
            .as_ref()
            .map_or_else(|| SafetyParams::for_vehicle(&cw), |r| r.safety);
        let mut config = Self {
            label: String::new(),
            controller,
            rta,
            suite,
            suite_params: SuiteParams::default(),
            cases,
            seed,
            policy: PolicySource::default(),
            safety,
            cw,
        };
        config.label = config.default_label();
        config
    }

    /// `controller/filter[/dt][/tol]/suite`
    pub fn default_label(&self) -> String {
        let rta = match &self.rta {
            None => "none".to_string(),
            Some(f) => match f.kind {
                FilterKind::Explicit => "easif".to_string(),
                FilterKind::Implicit => format!("iasif/dt={}", f.dt),
                FilterKind::Discrete => format!("dasif/dt={}/tol={:e}", f.dt, f.tolerance),
            },
        };
        format!("{}/{}/{}", self.controller, rta, self.suite)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.cases == 0 {
            return Err(BenchError::Config("cases must be at least 1".into()));
        }
        if self.rta.is_none()
            && matches!(
                self.controller,
                ControllerKind::Random | ControllerKind::SafeRandom
            )
        {
            return Err(BenchError::Config(format!(
                "controller `{}` is only meaningful with a filter (rta != none)",
                self.controller
            )));
        }
        if let Some(rta) = &self.rta {
            rta.validate()?;
        }
        Ok(())
    }

    fn with_params(mut self, p: &Params) -> Self {
        self.cw = p.cw;
        self.safety = p.safety;
        if let Some(rta) = &mut self.rta {
            rta.cw = p.cw;
            rta.safety = p.safety;
            rta.alpha = p.alpha;
            rta.horizon = p.horizon;
            rta.time_limit = p.time_limit;
        }
        self.suite_params = p.suite;
        self
    }
}

/// Filter configuration from the CLI vocabulary (`none|easif|iasif|dasif`).
pub fn filter_config(rta: &str, dt: f64, tol: f64) -> Result<Option<FilterConfig>, BenchError> {
    match rta {
        "none" => Ok(None),
        other => {
            let kind: FilterKind = other.parse()?;
            Ok(Some(match kind {
                FilterKind::Explicit => FilterConfig::explicit(),
                FilterKind::Implicit => FilterConfig::implicit(dt, 20.0),
                FilterKind::Discrete => FilterConfig::discrete(dt, tol),
            }))
        }
    }
}

/// Every configuration of the reference timing study: the three controller
/// groups crossed with each filter setting and both suites. Invalid
/// combinations (random actions without a filter) are omitted.
pub fn paper_matrix(cases: usize, seed: u64) -> Vec<BenchConfig> {
    let mut filters: Vec<Option<FilterConfig>> = vec![None, Some(FilterConfig::explicit())];
    for dt in [1.0, 10.0] {
        filters.push(Some(FilterConfig::implicit(dt, 20.0)));
    }
    for dt in [1.0, 10.0] {
        for tol in [1e-3, 1e-4] {
            filters.push(Some(FilterConfig::discrete(dt, tol)));
        }
    }
    let mut out = Vec::new();
    for controller in [
        ControllerKind::Random,
        ControllerKind::NoSensors,
        ControllerKind::AllSensors,
    ] {
        for rta in &filters {
            for suite in [Suite::Safe, Suite::NotSafe] {
                let config = BenchConfig::new(controller, rta.clone(), suite, cases, seed);
                if config.validate().is_ok() {
                    out.push(config);
                }
            }
        }
    }
    out
}

/// Shared physical and sampling parameters of a config file.
#[derive(Debug, Clone, Copy)]
struct Params {
    cw: CwParams,
    safety: SafetyParams,
    alpha: AlphaSpec,
    horizon: f64,
    time_limit: Duration,
    suite: SuiteParams,
}

/// A parsed configuration file: the expanded sweep plus output settings.
#[derive(Debug, Clone)]
pub struct MatrixFile {
    pub configs: Vec<BenchConfig>,
    /// Sweep points dropped because they failed validation.
    pub skipped: Vec<String>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

const SWEEP_KEYS: [&str; 5] = ["controller", "rta", "dt", "tol", "suite"];
const KNOWN_KEYS: [&str; 29] = [
    "controller",
    "rta",
    "dt",
    "tol",
    "suite",
    "cases",
    "seed",
    "out",
    "format",
    "weights_no_sensors",
    "weights_all_sensors",
    "policy_seed",
    "horizon",
    "time_limit",
    "n",
    "mass",
    "u_max",
    "r_deputy",
    "r_chief",
    "r_max",
    "nu0",
    "nu1",
    "v_max",
    "a_max",
    "alpha_continuous",
    "alpha_discrete",
    "radius_margin",
    "safe_margin",
    "velocity_scale",
];

/// Parse a flat TOML document. Any of `controller`, `rta`, `dt`, `tol` and
/// `suite` may be an array; the sweep is their cartesian product, with
/// duplicates (e.g. `dt` for eASIF) collapsed.
pub fn parse_matrix_config(
    text: &str,
    path: &Path,
    default_seed: u64,
) -> Result<MatrixFile, BenchError> {
    let parse_err = |message: String| BenchError::Parse {
        path: path.to_path_buf(),
        message,
    };
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| parse_err(e.to_string()))?;
    for key in table.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(parse_err(format!("unknown key `{key}`")));
        }
    }
    for (key, value) in &table {
        if matches!(value, toml::Value::Array(_)) && !SWEEP_KEYS.contains(&key.as_str()) {
            return Err(parse_err(format!("key `{key}` cannot be a list")));
        }
    }

    let number = |key: &str| -> Result<Option<f64>, BenchError> {
        match table.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(f)) => Ok(Some(*f)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(parse_err(format!("`{key}` must be a number, got {other}"))),
        }
    };
    let string = |key: &str| -> Result<Option<String>, BenchError> {
        match table.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(parse_err(format!("`{key}` must be a string, got {other}"))),
        }
    };
    let list = |key: &str, default: toml::Value| -> Vec<toml::Value> {
        match table.get(key).cloned().unwrap_or(default) {
            toml::Value::Array(items) => items,
            scalar => vec![scalar],
        }
    };
    let as_f64 = |key: &str, v: &toml::Value| -> Result<f64, BenchError> {
        match v {
            toml::Value::Float(f) => Ok(*f),
            toml::Value::Integer(i) => Ok(*i as f64),
            other => Err(parse_err(format!(
                "`{key}` entries must be numbers, got {other}"
            ))),
        }
    };
    let as_str = |key: &str, v: &toml::Value| -> Result<String, BenchError> {
        match v {
            toml::Value::String(s) => Ok(s.clone()),
            other => Err(parse_err(format!(
                "`{key}` entries must be strings, got {other}"
            ))),
        }
    };

    let mut cw = CwParams::default();
    if let Some(v) = number("n")? {
        cw.n = v;
    }
    if let Some(v) = number("mass")? {
        cw.mass = v;
    }
    if let Some(v) = number("u_max")? {
        cw.u_max = v;
    }
    let mut safety = SafetyParams::for_vehicle(&cw);
    for (key, field) in [
        ("a_max", &mut safety.a_max),
        ("r_deputy", &mut safety.r_deputy),
        ("r_chief", &mut safety.r_chief),
        ("r_max", &mut safety.r_max),
        ("nu0", &mut safety.nu0),
        ("nu1", &mut safety.nu1),
        ("v_max", &mut safety.v_max),
    ] {
        if let Some(v) = number(key)? {
            *field = v;
        }
    }
    let defaults = AlphaSpec::default();
    let alpha = AlphaSpec::uniform(
        number("alpha_continuous")?.unwrap_or(defaults.continuous[0]),
        number("alpha_discrete")?.unwrap_or(defaults.discrete[0]),
    );
    let mut suite_params = SuiteParams::default();
    if let Some(v) = number("radius_margin")? {
        suite_params.radius_margin = v;
    }
    if let Some(v) = number("safe_margin")? {
        suite_params.safe_margin = v;
    }
    if let Some(v) = number("velocity_scale")? {
        suite_params.safe_velocity_scale = v;
    }
    let time_limit = number("time_limit")?.unwrap_or(60.0);
    if !(time_limit > 0.0 && time_limit.is_finite()) {
        return Err(parse_err(format!(
            "time_limit must be positive, got {time_limit}"
        )));
    }
    let params = Params {
        cw,
        safety,
        alpha,
        horizon: number("horizon")?.unwrap_or(20.0),
        time_limit: Duration::from_secs_f64(time_limit),
        suite: suite_params,
    };

    let cases = number("cases")?.unwrap_or(1000.0);
    if !(cases >= 1.0 && cases.fract() == 0.0) {
        return Err(parse_err(format!(
            "cases must be a positive integer, got {cases}"
        )));
    }
    let seed = match table.get("seed") {
        None => default_seed,
        Some(toml::Value::Integer(i)) if *i >= 0 => *i as u64,
        Some(other) => {
            return Err(parse_err(format!(
                "seed must be a non-negative integer, got {other}"
            )))
        }
    };
    let policy_seed = match table.get("policy_seed") {
        None => 0,
        Some(toml::Value::Integer(i)) if *i >= 0 => *i as u64,
        Some(other) => {
            return Err(parse_err(format!(
                "policy_seed must be a non-negative integer, got {other}"
            )))
        }
    };
    let weights_no = string("weights_no_sensors")?.map(PathBuf::from);
    let weights_all = string("weights_all_sensors")?.map(PathBuf::from);

    let mut configs: Vec<BenchConfig> = Vec::new();
    let mut skipped = Vec::new();
    let mut seen = HashSet::new();
    for controller in list("controller", "random".into()) {
        let controller: ControllerKind = as_str("controller", &controller)?
            .parse()
            .map_err(parse_err)?;
        for rta in list("rta", "easif".into()) {
            let rta = as_str("rta", &rta)?;
            for dt in list("dt", toml::Value::Integer(1)) {
                let dt = as_f64("dt", &dt)?;
                for tol in list("tol", 1e-4.into()) {
                    let tol = as_f64("tol", &tol)?;
                    for suite in list("suite", "safe".into()) {
                        let suite: Suite = as_str("suite", &suite)?.parse().map_err(parse_err)?;
                        let mut config = BenchConfig::new(
                            controller,
                            filter_config(&rta, dt, tol)?,
                            suite,
                            cases as usize,
                            seed,
                        )
                        .with_params(&params);
                        config.label = config.default_label();
                        config.policy = match controller {
                            ControllerKind::NoSensors => weights_no.clone(),
                            ControllerKind::AllSensors => weights_all.clone(),
                            _ => None,
                        }
                        .map_or(PolicySource::Seeded(policy_seed), PolicySource::File);
                        if !seen.insert(config.label.clone()) {
                            continue;
                        }
                        if let Some(rta) = &config.rta {
                            rta.validate()
                                .map_err(|e| parse_err(format!("{}: {e}", config.label)))?;
                        }
                        match config.validate() {
                            Ok(()) => configs.push(config),
                            Err(e) => skipped.push(format!("{}: {e}", config.label)),
                        }
                    }
                }
            }
        }
    }
    let format = string("format")?
        .map(|f| f.parse::<OutputFormat>().map_err(parse_err))
        .transpose()?;
    Ok(MatrixFile {
        configs,
        skipped,
        out: string("out")?.map(PathBuf::from),
        format,
    })
}

pub fn load_matrix_config(path: &Path, default_seed: u64) -> Result<MatrixFile, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_matrix_config(&text, path, default_seed)
}

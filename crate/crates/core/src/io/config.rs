//! `key = value` run configuration files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::dynamics::{Chaos, IntegratorSettings, PhaseModel};
use crate::ensemble::{Engine, SamplingSpec, DEFAULT_DELTA};
use crate::error::{Error, Result};
use crate::model::{AmplitudeConvention, BranchSigns, SamplingMode, TwoStateConfig};

pub const DEFAULT_STEP_OVER_TAU: f64 = 1e-2;
pub const DEFAULT_T_END_OVER_TAU: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    UInt,
    Bool,
    FloatList,
    Choice(&'static [&'static str]),
}

impl Kind {
    fn describe(self) -> String {
        match self {
            Kind::Float => "a number".into(),
            Kind::UInt => "a nonnegative integer".into(),
            Kind::Bool => "true or false".into(),
            Kind::FloatList => "a comma-separated list of numbers".into(),
            Kind::Choice(opts) => format!("one of {}", opts.join(", ")),
        }
    }
}

/// Every recognised key with its value type.
pub const KEYS: &[(&str, Kind)] = &[
    ("x0_1", Kind::Float),
    ("x0_2", Kind::Float),
    ("tau_r", Kind::Float),
    ("sampling_mode", Kind::Choice(&["independent", "common-chaotic"])),
    ("amplitude_convention", Kind::Choice(&["probability", "amplitude"])),
    ("signs", Kind::Choice(&["+-", "-+", "++", "--"])),
    ("n_trajectories", Kind::UInt),
    ("master_seed", Kind::UInt),
    ("delta", Kind::Float),
    ("engine", Kind::Choice(&["closed-form", "rk4"])),
    ("step_over_tau", Kind::Float),
    ("t_end_over_tau", Kind::Float),
    ("clamp", Kind::Bool),
    ("omega_1", Kind::Float),
    ("omega_2", Kind::Float),
    ("chaos", Kind::Choice(&["none", "common", "independent"])),
    ("chaos_amplitude", Kind::Float),
    ("chaos_seed_1", Kind::Float),
    ("chaos_seed_2", Kind::Float),
    ("chaos_step_period_over_tau", Kind::Float),
    ("angles_deg", Kind::FloatList),
    ("t_max_over_tau", Kind::Float),
    ("steps", Kind::UInt),
    ("wavelength", Kind::Float),
    ("distance", Kind::Float),
    ("source_positions", Kind::FloatList),
    ("source_phases", Kind::FloatList),
    ("screen_min", Kind::Float),
    ("screen_max", Kind::Float),
    ("screen_points", Kind::UInt),
    ("lambda_photon", Kind::Float),
];

/// Keys a subcommand cannot run without.
pub fn required_keys(subcommand: &str) -> &'static [&'static str] {
    match subcommand {
        "collapse" => &["x0_1", "x0_2", "tau_r"],
        "ensemble" => &["x0_1", "x0_2", "tau_r", "n_trajectories", "master_seed"],
        _ => &[],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    UInt(u64),
    Bool(bool),
    FloatList(Vec<f64>),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config file not found: {0}")]
    FileNotFound(String),
    #[error("cannot read config: {0}")]
    Io(String),
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: `{key}` expects {expected}, got `{found}`")]
    TypeMismatch { line: usize, key: String, expected: String, found: String },
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("{0}")]
    Invalid(String),
}

/// All problems found in one config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub values: BTreeMap<String, Value>,
}

fn parse_value(kind: Kind, raw: &str) -> Option<Value> {
    match kind {
        Kind::Float => raw.parse().ok().filter(|v: &f64| v.is_finite()).map(Value::Float),
        Kind::UInt => raw.parse().ok().map(Value::UInt),
        Kind::Bool => raw.parse().ok().map(Value::Bool),
        Kind::FloatList => raw
            .split(',')
            .map(|p| p.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<_>>>()
            .map(Value::FloatList),
        Kind::Choice(opts) => opts.contains(&raw).then(|| Value::Text(raw.to_string())),
    }
}

pub fn parse_config(path: impl AsRef<Path>, required: &[&str]) -> std::result::Result<RunConfig, ConfigErrors> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigErrors(vec![match e.kind() {
            std::io::ErrorKind::NotFound => ConfigError::FileNotFound(path.display().to_string()),
            _ => ConfigError::Io(format!("{}: {e}", path.display())),
        }])
    })?;
    parse_config_str(&text, required)
}

/// Parses and validates config text, collecting every error rather than
/// stopping at the first.
pub fn parse_config_str(text: &str, required: &[&str]) -> std::result::Result<RunConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let mut cfg = RunConfig::default();
    let mut seen = std::collections::BTreeSet::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, raw)) = content.split_once('=') else {
            errors.push(ConfigError::Syntax { line, text: content.to_string() });
            continue;
        };
        let (key, raw) = (key.trim(), raw.trim());
        let Some(&(_, kind)) = KEYS.iter().find(|(k, _)| *k == key) else {
            errors.push(ConfigError::UnknownKey { line, key: key.to_string() });
            continue;
        };
        if !seen.insert(key) {
            errors.push(ConfigError::DuplicateKey { line, key: key.to_string() });
            continue;
        }
        match parse_value(kind, raw) {
            Some(v) => {
                cfg.values.insert(key.to_string(), v);
            }
            None => errors.push(ConfigError::TypeMismatch {
                line,
                key: key.to_string(),
                expected: kind.describe(),
                found: raw.to_string(),
            }),
        }
    }
    for &key in required {
        if !cfg.values.contains_key(key) && !errors.iter().any(|e| mentions(e, key)) {
            errors.push(ConfigError::MissingKey(key.to_string()));
        }
    }
    if errors.is_empty() {
        errors.extend(cfg.semantic_errors());
    }
    if errors.is_empty() { Ok(cfg) } else { Err(ConfigErrors(errors)) }
}

fn mentions(e: &ConfigError, key: &str) -> bool {
    matches!(e, ConfigError::TypeMismatch { key: k, .. } | ConfigError::DuplicateKey { key: k, .. } if k == key)
}

fn missing(key: &str) -> Error {
    Error::InvalidConfig(format!("missing key `{key}`"))
}

impl RunConfig {
    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn float(&self, key: &str) -> Option<f64> {
        match self.values.get(key)? {
            Value::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn uint(&self, key: &str) -> Option<u64> {
        match self.values.get(key)? {
            Value::UInt(v) => Some(*v),
            _ => None,
        }
    }

    pub fn boolean(&self, key: &str) -> Option<bool> {
        match self.values.get(key)? {
            Value::Bool(v) => Some(*v),
            _ => None,
        }
    }

    pub fn float_list(&self, key: &str) -> Option<&[f64]> {
        match self.values.get(key)? {
            Value::FloatList(v) => Some(v),
            _ => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.values.get(key)? {
            Value::Text(v) => Some(v),
            _ => None,
        }
    }

    pub fn tau_r(&self) -> Result<f64> {
        self.float("tau_r").ok_or_else(|| missing("tau_r"))
    }

    pub fn two_state_config(&self) -> Result<TwoStateConfig> {
        let x1 = self.float("x0_1").ok_or_else(|| missing("x0_1"))?;
        let x2 = self.float("x0_2").ok_or_else(|| missing("x0_2"))?;
        let mut cfg = TwoStateConfig::new([x1, x2], self.tau_r()?)?;
        if let Some(m) = self.text("sampling_mode") {
            cfg = cfg.with_sampling_mode(m.parse()?);
        }
        if let Some(c) = self.text("amplitude_convention") {
            cfg = cfg.with_convention(c.parse::<AmplitudeConvention>()?);
        }
        Ok(cfg)
    }

    pub fn signs(&self) -> Result<Option<BranchSigns>> {
        self.text("signs").map(str::parse).transpose()
    }

    pub fn sampling_spec(&self) -> Result<SamplingSpec> {
        let n = self.uint("n_trajectories").ok_or_else(|| missing("n_trajectories"))?;
        let seed = self.uint("master_seed").ok_or_else(|| missing("master_seed"))?;
        let mode = match self.text("sampling_mode") {
            Some(m) => m.parse()?,
            None => SamplingMode::default(),
        };
        let engine = match self.text("engine") {
            Some("rk4") => Engine::Rk4,
            _ => Engine::ClosedForm,
        };
        let spec = SamplingSpec::new(mode, n, seed)
            .with_delta(self.float("delta").unwrap_or(DEFAULT_DELTA))
            .with_engine(engine);
        spec.validate()?;
        Ok(spec)
    }

    pub fn integrator_settings(&self) -> Result<IntegratorSettings> {
        let s = IntegratorSettings::in_tau_units(
            self.tau_r()?,
            self.float("step_over_tau").unwrap_or(DEFAULT_STEP_OVER_TAU),
            self.float("t_end_over_tau").unwrap_or(DEFAULT_T_END_OVER_TAU),
        )?;
        Ok(s.with_clamp(self.boolean("clamp").unwrap_or(true)))
    }

    pub fn phase_model(&self) -> Result<PhaseModel> {
        let omega = [self.float("omega_1").unwrap_or(0.0), self.float("omega_2").unwrap_or(0.0)];
        let amplitude = self.float("chaos_amplitude").unwrap_or(0.0);
        let step_period = self.float("chaos_step_period_over_tau").unwrap_or(1.0) * self.tau_r()?;
        let seed = |k: &str| self.float(k).ok_or_else(|| missing(k));
        let chaos = match self.text("chaos").unwrap_or("none") {
            "common" => Chaos::CommonLogistic { seed: seed("chaos_seed_1")?, amplitude, step_period },
            "independent" => Chaos::IndependentLogistic {
                seeds: [seed("chaos_seed_1")?, seed("chaos_seed_2")?],
                amplitude,
                step_period,
            },
            _ => Chaos::None,
        };
        let model = PhaseModel::free(omega).with_chaos(chaos);
        model.validate()?;
        Ok(model)
    }

    fn semantic_errors(&self) -> Vec<ConfigError> {
        let invalid = |e: Error| ConfigError::Invalid(e.to_string());
        let mut out = Vec::new();
        let has = |keys: &[&str]| keys.iter().any(|k| self.contains(k));
        if self.contains("x0_1") && self.contains("x0_2") && self.contains("tau_r") {
            if let Err(e) = self.two_state_config() {
                out.push(invalid(e));
            }
        } else if self.contains("x0_1") && self.contains("x0_2") {
            let (a, b) = (self.float("x0_1").unwrap(), self.float("x0_2").unwrap());
            if let Err(e) = TwoStateConfig::new([a, b], 1.0) {
                out.push(invalid(e));
            }
        }
        if self.contains("n_trajectories") && self.contains("master_seed") {
            if let Err(e) = self.sampling_spec() {
                out.push(invalid(e));
            }
        }
        if self.contains("tau_r") {
            if has(&["step_over_tau", "t_end_over_tau"]) {
                if let Err(e) = self.integrator_settings() {
                    out.push(invalid(e));
                }
            }
            if has(&["omega_1", "omega_2", "chaos"]) {
                if let Err(e) = self.phase_model() {
                    out.push(invalid(e));
                }
            }
        }
        if let (Some(p), Some(t)) = (self.float_list("source_positions"), self.float_list("source_phases")) {
            if p.len() != t.len() {
                out.push(ConfigError::Invalid(format!(
                    "source_positions has {} entries but source_phases has {}",
                    p.len(),
                    t.len()
                )));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_collapse_config() {
        let cfg = parse_config_str("x0_1 = 0.5\nx0_2 = 0.5\ntau_r = 1e-14\n", required_keys("collapse")).unwrap();
        let ts = cfg.two_state_config().unwrap();
        assert_eq!(ts.x0, [0.5, 0.5]);
        assert_eq!(ts.tau_r, 1e-14);
    }

    #[test]
    fn normalization_error() {
        let err = parse_config_str("x0_1 = 0.6\nx0_2 = 0.6\ntau_r = 1e-14\n", &[]).unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert!(matches!(&err.0[0], ConfigError::Invalid(m) if m.contains("must equal 1")), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config_str("foo=1\n", &[]).unwrap_err();
        assert_eq!(err.0, vec![ConfigError::UnknownKey { line: 1, key: "foo".into() }]);
        assert!(err.to_string().contains("foo"));
    }

    #[test]
    fn collects_all_errors() {
        let text = "# header\nx0_1 = abc\nbar = 2\ntau_r = 1e-14 # trailing\nnot a pair\nx0_1 = 0.1\n";
        let err = parse_config_str(text, required_keys("ensemble")).unwrap_err();
        let kinds: Vec<String> = err.0.iter().map(|e| format!("{e:?}")).collect();
        assert!(matches!(err.0[0], ConfigError::TypeMismatch { line: 2, .. }), "{kinds:?}");
        assert!(matches!(err.0[1], ConfigError::UnknownKey { line: 3, .. }));
        assert!(matches!(err.0[2], ConfigError::Syntax { line: 5, .. }));
        assert!(matches!(err.0[3], ConfigError::DuplicateKey { line: 6, .. }));
        assert!(err.0.contains(&ConfigError::MissingKey("x0_2".into())));
        assert!(err.0.contains(&ConfigError::MissingKey("n_trajectories".into())));
        assert!(err.0.contains(&ConfigError::MissingKey("master_seed".into())));
        assert!(!err.0.contains(&ConfigError::MissingKey("x0_1".into())));
    }

    #[test]
    fn file_not_found() {
        let err = parse_config("/nonexistent/run.cfg", &[]).unwrap_err();
        assert!(matches!(err.0[0], ConfigError::FileNotFound(_)));
    }

    #[test]
    fn full_sections() {
        let text = "x0_1 = 0.7\nx0_2 = 0.3\ntau_r = 2\nn_trajectories = 100\nmaster_seed = 9\n\
                    sampling_mode = common-chaotic\nengine = rk4\nstep_over_tau = 0.5\nt_end_over_tau = 4\n\
                    chaos = independent\nchaos_seed_1 = 0.3\nchaos_seed_2 = 0.6\nchaos_amplitude = 0.1\n\
                    angles_deg = 20, 30,45\nsigns = -+\nclamp = false\n";
        let cfg = parse_config_str(text, required_keys("ensemble")).unwrap();
        let s = cfg.sampling_spec().unwrap();
        assert_eq!((s.n_trajectories, s.master_seed, s.mode, s.engine), (100, 9, SamplingMode::CommonChaotic, Engine::Rk4));
        let i = cfg.integrator_settings().unwrap();
        assert_eq!((i.step, i.t_end, i.clamp), (1.0, 8.0, false));
        assert!(matches!(cfg.phase_model().unwrap().chaos, Chaos::IndependentLogistic { .. }));
        assert_eq!(cfg.float_list("angles_deg").unwrap(), &[20.0, 30.0, 45.0]);
        assert_eq!(cfg.signs().unwrap().unwrap().to_string(), "-+");
    }

    #[test]
    fn bad_choices_and_semantics() {
        let err = parse_config_str("engine = euler\nsource_positions = 1,2\nsource_phases = 0\n", &[]).unwrap_err();
        assert!(matches!(err.0[0], ConfigError::TypeMismatch { .. }));
        let err = parse_config_str("source_positions = 1,2\nsource_phases = 0\n", &[]).unwrap_err();
        assert!(matches!(err.0[0], ConfigError::Invalid(_)));
        let err = parse_config_str("tau_r = 1\nchaos = common\n", &[]).unwrap_err();
        assert!(err.to_string().contains("chaos_seed_1"));
    }
}

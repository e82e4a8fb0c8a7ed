//! The `key = value` configuration format.
//!
//! ```text
//! # comment
//! command = discord
//! d_S = 2
//! d_E = 2
//! pure = [0.894427, 0, 0, 0.447214]
//! seed = 42
//! ```
//!
//! Keys are flat and case-sensitive. Arrays are comma-separated inside
//! brackets. Complex amplitudes are written `re+imi` (`0.5-0.5i`, `1i`, `-i`),
//! whitespace is ignored.

use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::Serialize;

use crate::montecarlo::default_workers;
use crate::randmat::SpectrumEnsemble;
use crate::witness::Averaging;
use crate::CLASSICALITY_TOL;

/// One problem found in a configuration, tagged with the offending key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Discord,
    WitnessTrajectory,
    HaarAverage,
    TheoremCheck,
    LemmaCheck,
    ChoiCheck,
    StructuredAverage,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Discord,
        Command::WitnessTrajectory,
        Command::HaarAverage,
        Command::TheoremCheck,
        Command::LemmaCheck,
        Command::ChoiCheck,
        Command::StructuredAverage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Discord => "discord",
            Command::WitnessTrajectory => "witness-trajectory",
            Command::HaarAverage => "haar-average",
            Command::TheoremCheck => "theorem-check",
            Command::LemmaCheck => "lemma-check",
            Command::ChoiCheck => "choi-check",
            Command::StructuredAverage => "structured-average",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    fn uses_bipartite(self) -> bool {
        !matches!(self, Command::LemmaCheck | Command::ChoiCheck)
    }

    fn needs_state(self) -> bool {
        matches!(
            self,
            Command::Discord
                | Command::WitnessTrajectory
                | Command::HaarAverage
                | Command::StructuredAverage
        )
    }

    fn allows_state(self) -> bool {
        self.needs_state() || self == Command::TheoremCheck
    }

    fn uses_spectrum(self) -> bool {
        matches!(
            self,
            Command::WitnessTrajectory | Command::StructuredAverage
        )
    }

    fn uses_samples(self) -> bool {
        !matches!(self, Command::Discord | Command::WitnessTrajectory)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the bipartite state is specified.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    /// Amplitudes in the product basis `|i⟩|k⟩`, index `i d_E + k`.
    Pure(Vec<Complex64>),
    /// Row-major `d_S x d_E` probabilities in the computational product basis.
    Table(Vec<f64>),
    /// Hilbert-Schmidt random state of the given rank from its own seed.
    Random { rank: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    #[default]
    Json,
}

impl OutputFormat {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        crate::witness::time_grid(self.start, self.stop, self.steps)
    }
}

/// A fully validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub d_s: usize,
    pub d_e: usize,
    /// Dimension for `lemma-check` and `choi-check`.
    pub d: usize,
    pub state: Option<StateSpec>,
    pub ensemble: Option<SpectrumEnsemble>,
    pub averaging: Averaging,
    pub time_grid: Option<TimeGrid>,
    pub n_samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub workers: usize,
}

const KEYS: &[&str] = &[
    "command",
    "d_S",
    "d_E",
    "d",
    "pure",
    "table",
    "random_rank",
    "state_seed",
    "ensemble",
    "levels",
    "mean_spacing",
    "averaging",
    "t_start",
    "t_stop",
    "t_steps",
    "n_samples",
    "seed",
    "tolerance",
    "output",
    "format",
    "workers",
];

/// Unvalidated `key = value` entries in file order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawConfig {
    entries: Vec<(String, String)>,
}

impl RawConfig {
    /// Splits lines into entries. Syntax errors are collected, not fatal.
    pub fn parse(text: &str) -> (Self, Vec<ConfigError>) {
        let mut raw = RawConfig::default();
        let mut errors = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                errors.push(ConfigError::new(
                    format!("line {}", n + 1),
                    format!("expected `key = value`, got `{line}`"),
                ));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                errors.push(ConfigError::new(key, "unknown key"));
            } else if raw.get(key).is_some() {
                errors.push(ConfigError::new(
                    key,
                    format!("duplicate key (line {})", n + 1),
                ));
            } else {
                raw.entries
                    .push((key.to_string(), unquote(value).to_string()));
            }
        }
        (raw, errors)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Sets or replaces a value; used for command-line overrides.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn validate(&self) -> Result<ExperimentConfig, Vec<ConfigError>> {
        Validator::new(self).run()
    }
}

fn unquote(s: &str) -> &str {
    s.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(s)
}

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<ConfigError>> {
    parse_config_with_overrides(text, &[])
}

/// As [`parse_config`], with `(key, value)` pairs replacing file entries.
pub fn parse_config_with_overrides(
    text: &str,
    overrides: &[(&str, String)],
) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let (mut raw, mut errors) = RawConfig::parse(text);
    for (k, v) in overrides {
        raw.set(k, v.clone());
    }
    match raw.validate() {
        Ok(cfg) if errors.is_empty() => Ok(cfg),
        Ok(_) => Err(errors),
        Err(more) => {
            errors.extend(more);
            Err(errors)
        }
    }
}

/// Parses `re`, `imi`, `re+imi` or `re-imi`; whitespace-insensitive.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // split before the last sign that is not leading and not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().ok()?,
    };
    Some(Complex64::new(re, im))
}

fn parse_array(s: &str) -> Option<Vec<&str>> {
    let inner = s.trim().strip_prefix('[')?.strip_suffix(']')?.trim();
    if inner.is_empty() {
        return Some(Vec::new());
    }
    Some(inner.split(',').map(str::trim).collect())
}

struct Validator<'a> {
    raw: &'a RawConfig,
    errors: Vec<ConfigError>,
}

impl<'a> Validator<'a> {
    fn new(raw: &'a RawConfig) -> Self {
        Self {
            raw,
            errors: Vec::new(),
        }
    }

    fn err(&mut self, key: &str, msg: impl Into<String>) {
        self.errors.push(ConfigError::new(key, msg));
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let v = self.raw.get(key)?;
        match v.parse::<T>() {
            Ok(x) => Some(x),
            Err(_) => {
                self.err(key, format!("expected {what}, got `{v}`"));
                None
            }
        }
    }

    fn positive_int(&mut self, key: &str) -> Option<usize> {
        let v = self.parsed::<usize>(key, "a positive integer")?;
        if v == 0 {
            self.err(key, "must be positive");
            return None;
        }
        Some(v)
    }

    fn finite(&mut self, key: &str) -> Option<f64> {
        let v = self.parsed::<f64>(key, "a number")?;
        if !v.is_finite() {
            self.err(key, "must be finite");
            return None;
        }
        Some(v)
    }

    fn require(&mut self, key: &str, command: Command) {
        if self.raw.get(key).is_none() {
            self.err(key, format!("required by `{command}`"));
        }
    }

    fn reject(&mut self, keys: &[&str], command: Command) {
        for &key in keys {
            if self.raw.get(key).is_some() {
                self.err(key, format!("not used by `{command}`"));
            }
        }
    }

    fn run(mut self) -> Result<ExperimentConfig, Vec<ConfigError>> {
        let command = match self.raw.get("command") {
            None => {
                self.err("command", "missing required key");
                None
            }
            Some(c) => {
                let parsed = Command::from_name(c);
                if parsed.is_none() {
                    let names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
                    self.err(
                        "command",
                        format!(
                            "unknown command `{c}` (expected one of {})",
                            names.join(", ")
                        ),
                    );
                }
                parsed
            }
        };

        let seed = self.parsed::<u64>("seed", "an unsigned 64-bit integer");
        if self.raw.get("seed").is_none() {
            self.err(
                "seed",
                "missing required key (seeds are never generated automatically)",
            );
        }

        let format = match self.raw.get("format") {
            None => Some(OutputFormat::default()),
            Some(f) => {
                let parsed = OutputFormat::from_name(f);
                if parsed.is_none() {
                    self.err("format", format!("expected `csv` or `json`, got `{f}`"));
                }
                parsed
            }
        };
        let workers = if self.raw.get("workers").is_some() {
            self.positive_int("workers")
        } else {
            Some(default_workers())
        };
        let tolerance = match self.raw.get("tolerance") {
            None => Some(CLASSICALITY_TOL),
            Some(_) => match self.finite("tolerance") {
                Some(t) if t < 0.0 => {
                    self.err("tolerance", "must be non-negative");
                    None
                }
                other => other,
            },
        };
        let output = self.raw.get("output").map(PathBuf::from);

        let Some(command) = command else {
            return Err(self.errors);
        };

        // dimensions
        let (mut d_s, mut d_e, mut d) = (0, 0, 0);
        if command.uses_bipartite() {
            self.require("d_S", command);
            self.require("d_E", command);
            self.reject(&["d"], command);
            d_s = self.positive_int("d_S").unwrap_or(0);
            d_e = self.positive_int("d_E").unwrap_or(0);
        } else {
            self.require("d", command);
            self.reject(&["d_S", "d_E"], command);
            d = self.positive_int("d").unwrap_or(0);
            if d == 1 {
                self.err("d", "must be at least 2");
            }
        }

        // state
        let state = if command.allows_state() {
            self.state(command, d_s, d_e)
        } else {
            self.reject(&["pure", "table", "random_rank", "state_seed"], command);
            None
        };

        // spectrum and time grid
        let (ensemble, time_grid, averaging) = if command.uses_spectrum() {
            let ensemble = self.ensemble(command, d_s * d_e);
            let grid = self.time_grid(command);
            let averaging = if command == Command::StructuredAverage {
                self.averaging()
            } else {
                self.reject(&["averaging"], command);
                Averaging::default()
            };
            (ensemble, grid, averaging)
        } else {
            self.reject(
                &[
                    "ensemble",
                    "levels",
                    "mean_spacing",
                    "averaging",
                    "t_start",
                    "t_stop",
                    "t_steps",
                ],
                command,
            );
            (None, None, Averaging::default())
        };

        let n_samples = if command.uses_samples() {
            self.require("n_samples", command);
            let n = self.positive_int("n_samples");
            if n == Some(1) {
                self.err("n_samples", "must be at least 2");
            }
            n.unwrap_or(0)
        } else {
            self.reject(&["n_samples"], command);
            0
        };

        if !self.errors.is_empty() {
            return Err(self.errors);
        }
        Ok(ExperimentConfig {
            command,
            d_s,
            d_e,
            d,
            state,
            ensemble,
            averaging,
            time_grid,
            n_samples,
            seed: seed.expect("checked above"),
            tolerance: tolerance.expect("checked above"),
            output,
            format: format.expect("checked above"),
            workers: workers.expect("checked above"),
        })
    }

    fn state(&mut self, command: Command, d_s: usize, d_e: usize) -> Option<StateSpec> {
        let present: Vec<&str> = ["pure", "table", "random_rank"]
            .into_iter()
            .filter(|k| self.raw.get(k).is_some())
            .collect();
        if present.len() > 1 {
            self.err(
                "state_spec",
                format!(
                    "ambiguous state_spec: give exactly one of pure, table, random_rank (found {})",
                    present.join(", ")
                ),
            );
            return None;
        }
        if self.raw.get("random_rank").is_none() && self.raw.get("state_seed").is_some() {
            self.err("state_seed", "only used together with random_rank");
        }
        let dim = d_s * d_e;
        match present.first().copied() {
            None => {
                if command.needs_state() {
                    self.err(
                        "state_spec",
                        format!("`{command}` needs one of pure, table, random_rank"),
                    );
                }
                None
            }
            Some("pure") => {
                let text = self.raw.get("pure").unwrap_or_default();
                let Some(items) = parse_array(text) else {
                    self.err("pure", "expected a bracketed array");
                    return None;
                };
                let mut amps = Vec::with_capacity(items.len());
                for item in items {
                    match parse_complex(item) {
                        Some(z) if z.re.is_finite() && z.im.is_finite() => amps.push(z),
                        _ => {
                            self.err("pure", format!("cannot parse amplitude `{item}`"));
                            return None;
                        }
                    }
                }
                if dim > 0 && amps.len() != dim {
                    self.err(
                        "pure",
                        format!("expected {dim} amplitudes (d_S * d_E), got {}", amps.len()),
                    );
                    return None;
                }
                if amps.iter().all(|z| z.norm_sqr() == 0.0) {
                    self.err("pure", "vector is zero");
                    return None;
                }
                Some(StateSpec::Pure(amps))
            }
            Some("table") => {
                let text = self.raw.get("table").unwrap_or_default();
                let Some(items) = parse_array(text) else {
                    self.err("table", "expected a bracketed array");
                    return None;
                };
                let mut p = Vec::with_capacity(items.len());
                for item in items {
                    match item.parse::<f64>() {
                        Ok(x) if x >= 0.0 && x.is_finite() => p.push(x),
                        _ => {
                            self.err(
                                "table",
                                format!("entries must be non-negative numbers, got `{item}`"),
                            );
                            return None;
                        }
                    }
                }
                if dim > 0 && p.len() != dim {
                    self.err(
                        "table",
                        format!("expected {dim} entries (d_S * d_E), got {}", p.len()),
                    );
                    return None;
                }
                let total: f64 = p.iter().sum();
                if (total - 1.0).abs() > 1e-10 {
                    self.err("table", format!("entries sum to {total}, expected 1"));
                    return None;
                }
                Some(StateSpec::Table(p))
            }
            Some(_) => {
                let rank = self.positive_int("random_rank");
                if self.raw.get("state_seed").is_none() {
                    self.err("state_seed", "required with random_rank");
                }
                let seed = self.parsed::<u64>("state_seed", "an unsigned 64-bit integer");
                if let Some(r) = rank {
                    if dim > 0 && r > dim {
                        self.err("random_rank", format!("must be at most d_S * d_E = {dim}"));
                        return None;
                    }
                }
                Some(StateSpec::Random {
                    rank: rank?,
                    seed: seed?,
                })
            }
        }
    }

    fn ensemble(&mut self, command: Command, dim: usize) -> Option<SpectrumEnsemble> {
        self.require("ensemble", command);
        let spacing = match self.raw.get("mean_spacing") {
            None => Some(1.0),
            Some(_) => match self.finite("mean_spacing") {
                Some(s) if s <= 0.0 => {
                    self.err("mean_spacing", "must be positive");
                    None
                }
                other => other,
            },
        };
        let kind = self.raw.get("ensemble")?;
        let ensemble = match kind {
            "poisson" => {
                self.reject(&["levels"], command);
                SpectrumEnsemble::poisson(dim)
            }
            "gue" => {
                self.reject(&["levels"], command);
                SpectrumEnsemble::gue(dim)
            }
            "explicit" => {
                if self.raw.get("mean_spacing").is_some() {
                    self.err("mean_spacing", "not used with explicit levels");
                }
                let Some(text) = self.raw.get("levels") else {
                    self.err("levels", "required with ensemble = explicit");
                    return None;
                };
                let Some(items) = parse_array(text) else {
                    self.err("levels", "expected a bracketed array");
                    return None;
                };
                let levels: Option<Vec<f64>> = items
                    .iter()
                    .map(|s| s.parse::<f64>().ok().filter(|x| x.is_finite()))
                    .collect();
                let Some(levels) = levels else {
                    self.err("levels", "entries must be finite numbers");
                    return None;
                };
                if dim > 0 && levels.len() != dim {
                    self.err(
                        "levels",
                        format!("expected {dim} levels (d_S * d_E), got {}", levels.len()),
                    );
                    return None;
                }
                return Some(SpectrumEnsemble::explicit(levels));
            }
            other => {
                self.err(
                    "ensemble",
                    format!("expected poisson, gue or explicit, got `{other}`"),
                );
                return None;
            }
        };
        Some(ensemble.with_mean_spacing(spacing?))
    }

    fn time_grid(&mut self, command: Command) -> Option<TimeGrid> {
        for key in ["t_start", "t_stop", "t_steps"] {
            self.require(key, command);
        }
        let start = self.finite("t_start");
        let stop = self.finite("t_stop");
        let steps = self.positive_int("t_steps");
        if let Some(s) = start {
            if s < 0.0 {
                self.err("t_start", "must be non-negative");
                return None;
            }
        }
        if let (Some(a), Some(b)) = (start, stop) {
            if b < a {
                self.err("t_stop", "must not be smaller than t_start");
                return None;
            }
        }
        Some(TimeGrid {
            start: start?,
            stop: stop?,
            steps: steps?,
        })
    }

    fn averaging(&mut self) -> Averaging {
        match self.raw.get("averaging") {
            None | Some("annealed") => Averaging::Annealed,
            Some("quenched") => Averaging::Quenched,
            Some(other) => {
                self.err(
                    "averaging",
                    format!("expected annealed or quenched, got `{other}`"),
                );
                Averaging::default()
            }
        }
    }
}

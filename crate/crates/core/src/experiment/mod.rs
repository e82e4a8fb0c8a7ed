//! Configured experiments: parsing, dispatch and serialized output.
//!
//! A run is a pure function of its [`ExperimentConfig`]. The written file
//! holds the version, the config echo, the seed and the payload, but not the
//! wall-clock duration or the worker count, so the same config and seed give
//! byte-identical files.

mod config;

use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

pub use config::{
    parse_complex, parse_config, parse_config_with_overrides, Command, ConfigError,
    ExperimentConfig, OutputFormat, RawConfig, StateSpec, TimeGrid,
};

use crate::dephasing::{discord_report, DiscordReport};
use crate::matcore::{hs_norm, hs_norm_sqr, ComplexMatrix};
use crate::montecarlo::MonteCarlo;
use crate::randmat::{ginibre, gue_matrix, RngHandle};
use crate::states::{concurrence_pure, from_pure, random_mixed, BipartiteState};
use crate::witness::twirl::{choi_isotropic_check, twirl_constants, twirl_mc};
use crate::witness::{
    haar_prefactor_sq, structured_average_distance, theorem_mc_check, witness_trajectory,
};
use crate::{Error, Result};

/// `v` followed by the crate version.
pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

/// A scalar result.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Float(x) => Some(x),
            Value::Int(n) => Some(n as f64),
            _ => None,
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Float(x) => s.serialize_f64(*x),
            Value::Int(n) => s.serialize_u64(*n),
            Value::Bool(b) => s.serialize_bool(*b),
            Value::Text(t) => s.serialize_str(t),
        }
    }
}

/// Columns of equal length, one row per grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (idx, name) in self.columns.iter().enumerate() {
            let col: Vec<f64> = self.rows.iter().map(|r| r[idx]).collect();
            map.serialize_entry(name, &col)?;
        }
        map.end()
    }
}

/// Named scalars in insertion order plus an optional table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Payload {
    pub scalars: Vec<(String, Value)>,
    pub table: Option<Table>,
}

impl Payload {
    fn put(&mut self, key: &str, value: Value) {
        self.scalars.push((key.to_string(), value));
    }

    fn float(&mut self, key: &str, x: f64) {
        self.put(key, Value::Float(x));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.scalars.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(Value::as_f64)
    }
}

impl Serialize for Payload {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let extra = usize::from(self.table.is_some());
        let mut map = s.serialize_map(Some(self.scalars.len() + extra))?;
        for (k, v) in &self.scalars {
            map.serialize_entry(k, v)?;
        }
        if let Some(t) = &self.table {
            map.serialize_entry("table", t)?;
        }
        map.end()
    }
}

/// Result of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub version: String,
    pub command: Command,
    pub seed: u64,
    #[serde(serialize_with = "ordered_map")]
    pub config: Vec<(String, String)>,
    pub payload: Payload,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub duration: Duration,
}

fn ordered_map<S: Serializer>(
    entries: &[(String, String)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(entries.len()))?;
    for (k, v) in entries {
        map.serialize_entry(k, v)?;
    }
    map.end()
}

/// Config echo: every setting that influences the payload, normalized.
fn echo(cfg: &ExperimentConfig) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: String| out.push((k.to_string(), v));
    put("command", cfg.command.name().to_string());
    if cfg.d > 0 {
        put("d", cfg.d.to_string());
    } else {
        put("d_S", cfg.d_s.to_string());
        put("d_E", cfg.d_e.to_string());
    }
    match &cfg.state {
        Some(StateSpec::Pure(v)) => put("pure", format_array(v.iter().map(format_complex))),
        Some(StateSpec::Table(p)) => put("table", format_array(p.iter().map(|x| format_f64(*x)))),
        Some(StateSpec::Random { rank, seed }) => {
            put("random_rank", rank.to_string());
            put("state_seed", seed.to_string());
        }
        None => {}
    }
    if let Some(e) = &cfg.ensemble {
        put("ensemble", e.kind.name().to_string());
        match &e.explicit_levels {
            Some(levels) => put(
                "levels",
                format_array(levels.iter().map(|x| format_f64(*x))),
            ),
            None => put("mean_spacing", format_f64(e.mean_spacing)),
        }
    }
    if cfg.command == Command::StructuredAverage {
        put("averaging", cfg.averaging.name().to_string());
    }
    if let Some(g) = &cfg.time_grid {
        put("t_start", format_f64(g.start));
        put("t_stop", format_f64(g.stop));
        put("t_steps", g.steps.to_string());
    }
    if cfg.n_samples > 0 {
        put("n_samples", cfg.n_samples.to_string());
    }
    if cfg.command == Command::Discord {
        put("tolerance", format_f64(cfg.tolerance));
    }
    put("seed", cfg.seed.to_string());
    out
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

fn format_complex(z: &Complex64) -> String {
    if z.im == 0.0 {
        format_f64(z.re)
    } else if z.im < 0.0 {
        format!("{:?}{:?}i", z.re, z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}

fn format_array(items: impl Iterator<Item = String>) -> String {
    format!("[{}]", items.collect::<Vec<_>>().join(", "))
}

/// Builds the state described by a config.
pub fn build_state(spec: &StateSpec, d_s: usize, d_e: usize) -> Result<BipartiteState> {
    match spec {
        StateSpec::Pure(amps) => from_pure(&normalized(amps), d_s, d_e),
        StateSpec::Table(p) => {
            let mut rho = ComplexMatrix::zeros(d_s * d_e);
            for (i, &x) in p.iter().enumerate() {
                rho[(i, i)] = Complex64::new(x, 0.0);
            }
            BipartiteState::new(rho, d_s, d_e)
        }
        StateSpec::Random { rank, seed } => {
            random_mixed(d_s, d_e, *rank, &mut RngHandle::new(*seed))
        }
    }
}

fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalized(amps: &[Complex64]) -> Vec<Complex64> {
    let norm = l2_norm(amps);
    amps.iter().map(|z| z / norm).collect()
}

fn normalized_pure(cfg: &ExperimentConfig) -> Option<Vec<Complex64>> {
    match &cfg.state {
        Some(StateSpec::Pure(amps)) => Some(normalized(amps)),
        _ => None,
    }
}

struct Ctx {
    payload: Payload,
    warnings: Vec<String>,
}

impl Ctx {
    fn report(&mut self, s: &BipartiteState) -> Result<DiscordReport> {
        let r = discord_report(s)?;
        if r.basis.degenerate {
            self.warnings.push(
                "degenerate marginal spectrum: dephasing uses the tie-broken eigenbasis"
                    .to_string(),
            );
        }
        Ok(r)
    }
}

/// Runs an experiment. Nothing is written; see [`execute`].
pub fn run(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let mut ctx = Ctx {
        payload: Payload::default(),
        warnings: Vec::new(),
    };
    if let Some(StateSpec::Pure(amps)) = &cfg.state {
        let norm = l2_norm(amps);
        if (norm - 1.0).abs() > 1e-10 {
            ctx.warnings
                .push(format!("pure: vector norm {norm} renormalized to 1"));
        }
    }
    let mut rng = RngHandle::new(cfg.seed);
    let mc = MonteCarlo::new(cfg.n_samples).with_workers(cfg.workers);
    let state = match &cfg.state {
        Some(spec) => Some(build_state(spec, cfg.d_s, cfg.d_e)?),
        None => None,
    };
    let need_state = || {
        state
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument(format!("`{}` needs a state", cfg.command)))
    };

    match cfg.command {
        Command::Discord => {
            let s = need_state()?;
            let r = ctx.report(s)?;
            let p = &mut ctx.payload;
            p.float("delta", r.delta);
            p.float("purity", r.purity);
            p.float("purity_dephased", r.purity_dephased);
            p.float("purity_gap", r.purity_gap);
            p.put("classical", Value::Bool(r.delta <= cfg.tolerance));
            p.put("degenerate_marginal", Value::Bool(r.basis.degenerate));
            for (i, ev) in r.basis.source_eigenvalues.iter().enumerate() {
                p.float(&format!("marginal_eigenvalue_{i}"), *ev);
            }
            if let Some(psi) = normalized_pure(cfg) {
                let c = concurrence_pure(&psi, cfg.d_s, cfg.d_e)?;
                p.float("concurrence", c);
                p.float("concurrence_over_sqrt2", c / std::f64::consts::SQRT_2);
            }
        }
        Command::WitnessTrajectory => {
            let s = need_state()?;
            let r = ctx.report(s)?;
            let ensemble = cfg.ensemble.as_ref().expect("validated");
            let times = cfg.time_grid.expect("validated").points();
            let w = witness_trajectory(s, ensemble, &times, &mut rng)?;
            let td = w
                .trace_distance
                .unwrap_or_else(|| vec![f64::NAN; times.len()]);
            let p = &mut ctx.payload;
            p.put("ensemble", Value::Text(w.metadata.ensemble));
            p.float("delta", r.delta);
            p.table = Some(Table {
                columns: vec!["t".into(), "hs_distance".into(), "trace_distance".into()],
                rows: (0..times.len())
                    .map(|i| vec![w.time_grid[i], w.hs_distance[i], td[i]])
                    .collect(),
            });
        }
        Command::HaarAverage => {
            let s = need_state()?;
            let r = ctx.report(s)?;
            let diff = s.rho() - r.dephased.rho();
            let check = theorem_mc_check(&diff, cfg.d_s, cfg.d_e, &mc, &mut rng)?;
            let prefactor = haar_prefactor_sq(cfg.d_s, cfg.d_e).sqrt();
            let p = &mut ctx.payload;
            p.float("delta", r.delta);
            p.float("mc_mean", check.estimate.mean);
            p.float("std_error", check.estimate.std_error);
            p.float("rhs", check.rhs);
            p.float("z_score", check.z_score());
            p.float("rms", check.estimate.rms());
            p.float("rms_std_error", check.estimate.rms_std_error());
            p.float("prefactor", prefactor);
            p.float("predicted_rms", prefactor * r.delta);
            p.put("n_samples", Value::Int(cfg.n_samples as u64));
        }
        Command::TheoremCheck => {
            let d = cfg.d_s * cfg.d_e;
            let m = match &state {
                Some(s) => {
                    let r = ctx.report(s)?;
                    s.rho() - r.dephased.rho()
                }
                None => gue_matrix(d, &mut rng),
            };
            let check = theorem_mc_check(&m, cfg.d_s, cfg.d_e, &mc, &mut rng)?;
            let p = &mut ctx.payload;
            p.put(
                "operator",
                Value::Text(
                    if state.is_some() {
                        "rho_minus_dephased"
                    } else {
                        "gue"
                    }
                    .into(),
                ),
            );
            p.float("hs_norm_sq", hs_norm_sqr(&m));
            p.float("trace", m.trace().re);
            p.float("mc_mean", check.estimate.mean);
            p.float("std_error", check.estimate.std_error);
            p.float("rhs", check.rhs);
            p.float("z_score", check.z_score());
            p.put("n_samples", Value::Int(cfg.n_samples as u64));
        }
        Command::LemmaCheck => {
            let d = cfg.d;
            let a = gue_matrix(d, &mut rng);
            let b = gue_matrix(d, &mut rng);
            let x = ginibre(d, &mut rng);
            let k = twirl_constants(&a, &b)?;
            let est = twirl_mc(&a, &b, &x, &mc, &mut rng)?;
            let exact = k.apply(&x);
            let tr_ba = b.matmul(&a).trace().re;
            let p = &mut ctx.payload;
            p.float("a", k.a);
            p.float("b", k.b);
            p.float("identity_residual", k.a * d as f64 + k.b - tr_ba / d as f64);
            p.float("residual", hs_norm(&(&est.mean - &exact)));
            p.float("aggregate_error", est.aggregate_error());
            p.float("max_z_score", est.max_z_score(&exact, 1e-12));
            p.put("n_samples", Value::Int(cfg.n_samples as u64));
        }
        Command::ChoiCheck => {
            let d = cfg.d;
            let a = gue_matrix(d, &mut rng);
            let b = gue_matrix(d, &mut rng);
            let check = choi_isotropic_check(&a, &b, &mc, &mut rng)?;
            let (ka, kb, df) = (check.constants.a, check.constants.b, d as f64);
            let p = &mut ctx.payload;
            p.float("a", ka);
            p.float("b", kb);
            p.float("residual", check.residual);
            p.float("aggregate_error", check.aggregate_error);
            p.put("within_5_sigma", Value::Bool(check.passes(5.0)));
            p.float("trace", check.trace);
            p.float("trace_expected", ka * df + kb);
            p.float("omega_element", check.omega_element);
            p.float("omega_expected", ka / df + kb);
            p.put("n_samples", Value::Int(cfg.n_samples as u64));
        }
        Command::StructuredAverage => {
            let s = need_state()?;
            let r = ctx.report(s)?;
            let ensemble = cfg.ensemble.as_ref().expect("validated");
            let times = cfg.time_grid.expect("validated").points();
            let mut rows = Vec::with_capacity(times.len());
            for (i, &t) in times.iter().enumerate() {
                let mut sub = rng.derive(i as u64);
                let est = structured_average_distance(
                    s,
                    &r.dephased,
                    ensemble,
                    t,
                    cfg.averaging,
                    &mc,
                    &mut sub,
                )?;
                let ratio = if r.delta > 0.0 {
                    est.rms() / r.delta
                } else {
                    f64::NAN
                };
                rows.push(vec![
                    t,
                    est.mean,
                    est.std_error,
                    est.rms(),
                    est.rms_std_error(),
                    ratio,
                ]);
            }
            let p = &mut ctx.payload;
            p.put("ensemble", Value::Text(ensemble.kind.name().into()));
            p.put("averaging", Value::Text(cfg.averaging.name().into()));
            p.float("delta", r.delta);
            p.put("n_samples", Value::Int(cfg.n_samples as u64));
            p.table = Some(Table {
                columns: ["t", "mean_sq", "std_error_sq", "rms", "rms_std_error", "c"]
                    .map(String::from)
                    .to_vec(),
                rows,
            });
        }
    }
    Ok(RunRecord {
        version: version_string(),
        command: cfg.command,
        seed: cfg.seed,
        config: echo(cfg),
        payload: ctx.payload,
        warnings: ctx.warnings,
        duration: start.elapsed(),
    })
}

/// Serializes a record.
///
/// JSON mirrors [`RunRecord`]. CSV holds the table when the payload has one
/// (header row first), otherwise `key,value` rows for the scalars.
pub fn write_record<W: Write>(record: &RunRecord, format: OutputFormat, mut out: W) -> Result<()> {
    match format {
        OutputFormat::Json => {
            let text = serde_json::to_string_pretty(record)
                .map_err(|e| Error::InvalidArgument(format!("serialization failed: {e}")))?;
            writeln!(out, "{text}")?;
        }
        OutputFormat::Csv => match &record.payload.table {
            Some(t) => {
                writeln!(out, "{}", t.columns.join(","))?;
                for row in &t.rows {
                    let cells: Vec<String> = row.iter().map(|x| format_f64(*x)).collect();
                    writeln!(out, "{}", cells.join(","))?;
                }
            }
            None => {
                writeln!(out, "key,value")?;
                for (k, v) in &record.payload.scalars {
                    let cell = match v {
                        Value::Float(x) => format_f64(*x),
                        Value::Int(n) => n.to_string(),
                        Value::Bool(b) => b.to_string(),
                        Value::Text(s) => s.clone(),
                    };
                    writeln!(out, "{k},{cell}")?;
                }
            }
        },
    }
    out.flush()?;
    Ok(())
}

/// Runs and writes to `cfg.output`, or to `stdout` when no output is set.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let record = run(cfg)?;
    match &cfg.output {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            write_record(&record, cfg.format, std::io::BufWriter::new(file))?;
        }
        None => write_record(&record, cfg.format, std::io::stdout().lock())?,
    }
    Ok(record)
}

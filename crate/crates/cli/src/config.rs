//! Run configuration: a single JSON document with `model`, `sweep`, `output`
//! and `tolerances` blocks.
//!
//! Parsing is two steps. Serde checks the shape (unknown keys, types), then
//! [`RunConfig::normalize`] fills defaults for the chosen subcommand and
//! enforces numeric constraints. A normalized config serializes back to a
//! document that parses to the same value.

use std::path::PathBuf;

use casimir_core::matsubara::{DEFAULT_N_MAX_CAP, DEFAULT_REL_TOL};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

/// Subcommand family a config is read for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Tm3,
    Te3,
    Bath,
    Dipole,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Tm3 => "tm3",
            Family::Te3 => "te3",
            Family::Bath => "bath",
            Family::Dipole => "dipole",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Tm3,
    Te3,
    TmBath,
    TeBath,
    Dipole,
}

impl Kind {
    fn family(self) -> Family {
        match self {
            Kind::Tm3 => Family::Tm3,
            Kind::Te3 => Family::Te3,
            Kind::TmBath | Kind::TeBath => Family::Bath,
            Kind::Dipole => Family::Dipole,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediatorConfig {
    pub a: f64,
    pub c: f64,
}

/// Uniform bath: `k_i = i k_max / n`, `a_i = k_i^2`, `c_i = lambda sqrt(k_max / n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n: usize,
    pub k_max: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mediators: Option<Vec<MediatorConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

/// Temperature sweep (`T_min`, `T_max`) or, for dipoles only, a distance
/// sweep at fixed `T` (`r_min`, `r_max`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(rename = "T_min", default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(rename = "T_max", default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max_cap: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

const DEFAULT_T_MIN: f64 = 0.01;
const DEFAULT_T_MAX: f64 = 100.0;
const DEFAULT_POINTS: usize = 41;

/// Parses and normalizes a config for `family`, applying `key=value`
/// overrides (dotted key paths) before validation.
pub fn parse_config(text: &str, family: Family, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| CliError::config("config", e.to_string()))?;
    for item in overrides {
        apply_override(&mut doc, item)?;
    }
    let config: RunConfig = serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "config".to_string() } else { path };
        CliError::config(path, e.into_inner().to_string())
    })?;
    config.normalize(family)
}

/// Pretty JSON for a (normalized) config.
pub fn emit_config(config: &RunConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}

fn apply_override(doc: &mut Value, item: &str) -> Result<(), CliError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::config("--set", format!("expected key=value, got {item:?}")))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::config("--set", format!("malformed key {key:?}")));
    }
    let value = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    if value.is_array() || value.is_object() {
        return Err(CliError::config(key, "--set only overrides scalar fields"));
    }
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let Value::Object(map) = node else {
            return Err(CliError::config(parts[..i].join("."), "is not an object"));
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("key has at least one part")
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(key, format!("must be finite and > 0, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<f64, CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(key, format!("must be finite and >= 0, got {v}")))
    }
}

fn finite(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(key, format!("must be finite, got {v}")))
    }
}

fn forbid<T>(key: &str, value: &Option<T>, why: &str) -> Result<(), CliError> {
    match value {
        Some(_) => Err(CliError::config(key, format!("not allowed {why}"))),
        None => Ok(()),
    }
}

impl RunConfig {
    /// Fills defaults and checks every numeric constraint. Idempotent.
    pub fn normalize(mut self, family: Family) -> Result<Self, CliError> {
        self.model = self.model.normalize(family)?;
        let kind = self.model.kind.expect("normalized model has a kind");
        self.sweep = self.sweep.normalize(kind, &mut self.model)?;
        self.output.format.get_or_insert(Format::Csv);
        let rel_tol = *self.tolerances.rel_tol.get_or_insert(DEFAULT_REL_TOL);
        if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
            return Err(CliError::config(
                "tolerances.rel_tol",
                format!("must lie in (0, 1e-3], got {rel_tol}"),
            ));
        }
        let cap = *self.tolerances.n_max_cap.get_or_insert(DEFAULT_N_MAX_CAP);
        if cap < 64 {
            return Err(CliError::config(
                "tolerances.n_max_cap",
                format!("must be >= 64, got {cap}"),
            ));
        }
        Ok(self)
    }

    pub fn kind(&self) -> Kind {
        self.model.kind.expect("normalized model has a kind")
    }

    pub fn format(&self) -> Format {
        self.output.format.unwrap_or(Format::Csv)
    }
}

impl ModelConfig {
    fn normalize(mut self, family: Family) -> Result<Self, CliError> {
        let kind = match (self.kind, family) {
            (Some(k), f) if k.family() == f => k,
            (Some(k), f) => {
                return Err(CliError::config(
                    "model.kind",
                    format!("{k:?} does not belong to the {} subcommand", f.name()).to_lowercase(),
                ))
            }
            (None, Family::Tm3) => Kind::Tm3,
            (None, Family::Te3) => Kind::Te3,
            (None, Family::Dipole) => Kind::Dipole,
            (None, Family::Bath) => {
                return Err(CliError::config("model.kind", "required for bath: tm_bath or te_bath"));
            }
        };
        self.kind = Some(kind);
        positive("model.a1", *self.a1.get_or_insert(1.0))?;
        positive("model.a2", *self.a2.get_or_insert(1.0))?;
        match kind {
            Kind::Tm3 | Kind::Te3 => {
                positive("model.a3", *self.a3.get_or_insert(1.0))?;
                match self.c {
                    Some(c) => finite("model.c", c)?,
                    None => return Err(CliError::config("model.c", "required")),
                };
                let why = "for tm3/te3";
                forbid("model.mediators", &self.mediators, why)?;
                forbid("model.generator", &self.generator, why)?;
                forbid("model.g1", &self.g1, why)?;
                forbid("model.g2", &self.g2, why)?;
                forbid("model.r", &self.r, why)?;
            }
            Kind::TmBath | Kind::TeBath => {
                let why = "for baths";
                forbid("model.a3", &self.a3, why)?;
                forbid("model.c", &self.c, why)?;
                forbid("model.g1", &self.g1, why)?;
                forbid("model.g2", &self.g2, why)?;
                forbid("model.r", &self.r, why)?;
                match (&self.mediators, &self.generator) {
                    (Some(_), Some(_)) => {
                        return Err(CliError::config(
                            "model.generator",
                            "give either mediators or generator, not both",
                        ))
                    }
                    (None, None) => {
                        return Err(CliError::config("model.mediators", "bath needs mediators or generator"))
                    }
                    (Some(meds), None) => {
                        if meds.is_empty() {
                            return Err(CliError::config("model.mediators", "must not be empty"));
                        }
                        for (i, m) in meds.iter().enumerate() {
                            positive(&format!("model.mediators[{i}].a"), m.a)?;
                            finite(&format!("model.mediators[{i}].c"), m.c)?;
                        }
                    }
                    (None, Some(g)) => {
                        if g.n == 0 {
                            return Err(CliError::config("model.generator.n", "must be >= 1"));
                        }
                        positive("model.generator.k_max", g.k_max)?;
                        non_negative("model.generator.lambda", g.lambda)?;
                    }
                }
            }
            Kind::Dipole => {
                let why = "for dipole";
                forbid("model.a3", &self.a3, why)?;
                forbid("model.c", &self.c, why)?;
                forbid("model.mediators", &self.mediators, why)?;
                forbid("model.generator", &self.generator, why)?;
                non_negative("model.g1", *self.g1.get_or_insert(1.0))?;
                non_negative("model.g2", *self.g2.get_or_insert(1.0))?;
                if let Some(r) = self.r {
                    positive("model.r", r)?;
                }
            }
        }
        Ok(self)
    }
}

impl SweepConfig {
    fn normalize(mut self, kind: Kind, model: &mut ModelConfig) -> Result<Self, CliError> {
        let distance = self.r_min.is_some() || self.r_max.is_some() || self.t.is_some();
        let points = *self.points.get_or_insert(DEFAULT_POINTS);
        if points == 0 {
            return Err(CliError::config("sweep.points", "must be >= 1"));
        }
        self.spacing.get_or_insert(Spacing::Log);
        if distance {
            if kind != Kind::Dipole {
                let key = if self.t.is_some() { "sweep.T" } else { "sweep.r_min" };
                return Err(CliError::config(key, "distance sweeps are only available for dipole"));
            }
            forbid("sweep.T_min", &self.t_min, "in a distance sweep")?;
            forbid("sweep.T_max", &self.t_max, "in a distance sweep")?;
            forbid("model.r", &model.r, "in a distance sweep (use sweep.r_min/r_max)")?;
            let t = self
                .t
                .ok_or_else(|| CliError::config("sweep.T", "required for a distance sweep"))?;
            positive("sweep.T", t)?;
            let lo = self
                .r_min
                .ok_or_else(|| CliError::config("sweep.r_min", "required for a distance sweep"))?;
            let hi = self
                .r_max
                .ok_or_else(|| CliError::config("sweep.r_max", "required for a distance sweep"))?;
            positive("sweep.r_min", lo)?;
            positive("sweep.r_max", hi)?;
            check_range("sweep.r_max", lo, hi, points)?;
        } else {
            if kind == Kind::Dipole && model.r.is_none() {
                return Err(CliError::config("model.r", "required for a temperature sweep"));
            }
            let lo = positive("sweep.T_min", *self.t_min.get_or_insert(DEFAULT_T_MIN))?;
            let hi = positive("sweep.T_max", *self.t_max.get_or_insert(DEFAULT_T_MAX))?;
            check_range("sweep.T_max", lo, hi, points)?;
        }
        Ok(self)
    }

    pub fn is_distance_sweep(&self) -> bool {
        self.r_min.is_some()
    }

    pub fn logarithmic(&self) -> bool {
        self.spacing == Some(Spacing::Log)
    }
}

fn check_range(key: &str, lo: f64, hi: f64, points: usize) -> Result<(), CliError> {
    if hi < lo || (points > 1 && hi == lo) {
        return Err(CliError::config(
            key,
            format!("must exceed the lower bound {lo} (got {hi}) when points > 1"),
        ));
    }
    Ok(())
}

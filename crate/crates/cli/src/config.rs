//! Scenario documents.
//!
//! A scenario is a flat TOML table. Keys use the usual symbols (`N`,
//! `M`, `n_a`, `t_e`, `N_h`, `v`, `h`, ...). Every problem is reported
//! together with the key that caused it.

use std::fmt;
use std::path::Path;

use otexplore_core::density::{Domain, GaussianMixture};
use otexplore_core::ot::ResidualMode;
use otexplore_core::{Mode, Point2, RoundOrder, ScenarioConfig};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

/// Keys a document may contain.
pub const KNOWN_KEYS: &[&str] = &[
    "mode",
    "N",
    "M",
    "n_a",
    "t_e",
    "domain_x",
    "domain_y",
    "mixture_weights",
    "mixture_means",
    "mixture_covariances",
    "initial_positions",
    "u_max",
    "dt",
    "r_sensing",
    "r_comm",
    "h",
    "r0",
    "delta",
    "v",
    "N_h",
    "time_varying",
    "seed",
    "snapshot_every",
    "sweep_sensing",
    "residual",
    "round_order",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFileError {
    /// Offending key, or `None` for syntax errors.
    pub field: Option<String>,
    pub message: String,
}

impl ConfigFileError {
    fn at(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: Some(field.into()), message: message.into() }
    }
}

impl fmt::Display for ConfigFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) => write!(f, "config field `{field}`: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigFileError {}

/// A parsed scenario document with any command-line overrides applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDoc {
    table: Table,
}

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self, ConfigFileError> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigFileError { field: None, message: e.to_string() })?;
        if let Some(key) = table.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(ConfigFileError::at(key.clone(), "unknown key"));
        }
        Ok(Self { table })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigFileError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigFileError { field: None, message: format!("cannot read {}: {e}", path.display()) })?;
        Self::parse(&text)
    }

    /// Applies `key=value`, where the value uses TOML syntax.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigFileError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigFileError { field: None, message: format!("override `{assignment}` is not key=value") })?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigFileError::at(key, "unknown key"));
        }
        let parsed: Table = format!("x = {}", value.trim())
            .parse()
            .map_err(|e: toml::de::Error| ConfigFileError::at(key, e.message().to_string()))?;
        self.table.insert(key.to_string(), parsed["x"].clone());
        Ok(())
    }

    pub fn set_value(&mut self, key: &str, value: impl Into<Value>) {
        self.table.insert(key.to_string(), value.into());
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.table).expect("a TOML table always serializes")
    }

    /// SHA-256 of the document as canonical JSON (sorted keys, shortest
    /// float formatting), independent of key order and whitespace. `seed`
    /// is excluded so that every seed of a batch shares the hash.
    pub fn hash(&self) -> String {
        let mut table = self.table.clone();
        table.remove("seed");
        let json = serde_json::to_value(&table).expect("TOML values map onto JSON");
        let bytes = serde_json::to_vec(&json).expect("JSON values serialize");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Builds the scenario, checking types first and then the scenario's own
    /// consistency rules.
    pub fn scenario(&self) -> Result<ScenarioConfig, ConfigFileError> {
        let r = Reader(&self.table);
        let mode = match r.req_str("mode")? {
            "single" => Mode::Single,
            "centralized" => Mode::Centralized,
            "decentralized" => Mode::Decentralized,
            other => return Err(ConfigFileError::at("mode", format!("`{other}` is not single, centralized or decentralized"))),
        };
        let dx = r.req_pair("domain_x")?;
        let dy = r.req_pair("domain_y")?;
        let domain = Domain::new(dx, dy).ok_or_else(|| ConfigFileError::at("domain_x", "domain bounds must be finite and increasing"))?;

        let weights = r.req_floats("mixture_weights")?;
        let means = r.req_points("mixture_means")?;
        let covs = r.req_float_rows("mixture_covariances", 4)?;
        if means.len() != weights.len() {
            return Err(ConfigFileError::at("mixture_means", format!("{} means for {} weights", means.len(), weights.len())));
        }
        if covs.len() != weights.len() {
            return Err(ConfigFileError::at("mixture_covariances", format!("{} covariances for {} weights", covs.len(), weights.len())));
        }
        let mixture = GaussianMixture::new(
            weights.iter().zip(&means).zip(&covs).map(|((w, m), c)| (*w, *m, [c[0], c[1], c[2], c[3]])),
        )
        .map_err(|e| ConfigFileError::at("mixture_covariances", e.to_string()))?;

        let mut cfg = ScenarioConfig::new(
            mode,
            domain,
            mixture,
            r.req_count("N")? as usize,
            r.req_count("M")?,
            r.req_count("n_a")? as usize,
            r.req_float("u_max")?,
        );
        cfg.effective_steps = r.opt_count("t_e")?;
        cfg.initial_positions = r.opt_points("initial_positions")?;
        if let Some(dt) = r.opt_float("dt")? {
            cfg.motion.dt = dt;
        }
        if let Some(rs) = r.opt_float("r_sensing")? {
            cfg.r_sensing = rs;
        }
        cfg.r_comm = r.opt_float("r_comm")?;
        if let Some(h) = r.opt_count("h")? {
            cfg.horizon = h as usize;
        }
        cfg.r0 = r.opt_float("r0")?;
        cfg.delta = r.opt_float("delta")?;
        cfg.diffusion = r.opt_float("v")?.unwrap_or(0.0);
        cfg.n_targets = r.opt_count("N_h")?.unwrap_or(0) as usize;
        cfg.time_varying = r.opt_bool("time_varying")?.unwrap_or(false);
        cfg.seed = r.opt_count("seed")?.unwrap_or(0);
        if let Some(k) = r.opt_count("snapshot_every")? {
            cfg.snapshot_every = k;
        }
        cfg.sweep_sensing = r.opt_bool("sweep_sensing")?.unwrap_or(false);
        cfg.residual = match r.opt_str("residual")? {
            None | Some("verbatim") => ResidualMode::Verbatim,
            Some("agent_average") => ResidualMode::AgentAverage,
            Some(other) => return Err(ConfigFileError::at("residual", format!("`{other}` is not verbatim or agent_average"))),
        };
        cfg.round_order = match r.opt_str("round_order")? {
            None | Some("sequential") => RoundOrder::Sequential,
            Some("simultaneous") => RoundOrder::Simultaneous,
            Some(other) => return Err(ConfigFileError::at("round_order", format!("`{other}` is not sequential or simultaneous"))),
        };
        cfg.validate().map_err(|e| ConfigFileError::at(e.field, e.message))?;
        Ok(cfg)
    }
}

struct Reader<'a>(&'a Table);

impl Reader<'_> {
    fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    fn missing(key: &str) -> ConfigFileError {
        ConfigFileError::at(key, "missing required field")
    }

    fn float_of(key: &str, v: &Value) -> Result<f64, ConfigFileError> {
        match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            other => Err(ConfigFileError::at(key, format!("expected a number, found {}", other.type_str()))),
        }
    }

    fn req_float(&self, key: &str) -> Result<f64, ConfigFileError> {
        self.opt_float(key)?.ok_or_else(|| Self::missing(key))
    }

    fn opt_float(&self, key: &str) -> Result<Option<f64>, ConfigFileError> {
        self.get(key).map(|v| Self::float_of(key, v)).transpose()
    }

    fn req_count(&self, key: &str) -> Result<u64, ConfigFileError> {
        self.opt_count(key)?.ok_or_else(|| Self::missing(key))
    }

    fn opt_count(&self, key: &str) -> Result<Option<u64>, ConfigFileError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(Value::Integer(i)) => Err(ConfigFileError::at(key, format!("expected a nonnegative integer, found {i}"))),
            Some(other) => Err(ConfigFileError::at(key, format!("expected an integer, found {}", other.type_str()))),
        }
    }

    fn opt_bool(&self, key: &str) -> Result<Option<bool>, ConfigFileError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(other) => Err(ConfigFileError::at(key, format!("expected a boolean, found {}", other.type_str()))),
        }
    }

    fn req_str(&self, key: &str) -> Result<&str, ConfigFileError> {
        self.opt_str(key)?.ok_or_else(|| Self::missing(key))
    }

    fn opt_str(&self, key: &str) -> Result<Option<&str>, ConfigFileError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(ConfigFileError::at(key, format!("expected a string, found {}", other.type_str()))),
        }
    }

    fn floats_of(key: &str, v: &Value) -> Result<Vec<f64>, ConfigFileError> {
        match v {
            Value::Array(items) => items
                .iter()
                .enumerate()
                .map(|(i, x)| Self::float_of(&format!("{key}[{i}]"), x))
                .collect(),
            other => Err(ConfigFileError::at(key, format!("expected an array, found {}", other.type_str()))),
        }
    }

    fn req_floats(&self, key: &str) -> Result<Vec<f64>, ConfigFileError> {
        Self::floats_of(key, self.get(key).ok_or_else(|| Self::missing(key))?)
    }

    fn req_pair(&self, key: &str) -> Result<[f64; 2], ConfigFileError> {
        let v = self.req_floats(key)?;
        <[f64; 2]>::try_from(v.as_slice()).map_err(|_| ConfigFileError::at(key, format!("expected 2 numbers, found {}", v.len())))
    }

    fn rows(&self, key: &str, width: usize) -> Result<Option<Vec<Vec<f64>>>, ConfigFileError> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let Value::Array(rows) = v else {
            return Err(ConfigFileError::at(key, format!("expected an array of arrays, found {}", v.type_str())));
        };
        rows.iter()
            .enumerate()
            .map(|(i, row)| {
                let path = format!("{key}[{i}]");
                let r = Self::floats_of(&path, row)?;
                if r.len() != width {
                    return Err(ConfigFileError::at(path, format!("expected {width} numbers, found {}", r.len())));
                }
                Ok(r)
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn req_float_rows(&self, key: &str, width: usize) -> Result<Vec<Vec<f64>>, ConfigFileError> {
        self.rows(key, width)?.ok_or_else(|| Self::missing(key))
    }

    fn req_points(&self, key: &str) -> Result<Vec<Point2>, ConfigFileError> {
        self.opt_points(key)?.ok_or_else(|| Self::missing(key))
    }

    fn opt_points(&self, key: &str) -> Result<Option<Vec<Point2>>, ConfigFileError> {
        Ok(self.rows(key, 2)?.map(|rows| rows.into_iter().map(|r| Point2::new(r[0], r[1])).collect()))
    }
}

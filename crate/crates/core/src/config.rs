//! Scenario configuration: defaults, validation and TOML ingestion.
//!
//! A config file is a flat TOML table. Missing keys keep their defaults and
//! unknown keys are rejected.

use crate::channel::AntennaPattern;
use crate::geometry;
use serde::Serialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: {message}")]
    Parse { key: String, message: String },
    #[error("key `{key}` out of range: must be {bound}")]
    Range { key: String, bound: String },
}

/// Quantization bits: one value for every helper, or one per helper.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum BitsSetting {
    Uniform(u32),
    PerHelper(Vec<u32>),
}

impl BitsSetting {
    pub fn per_helper(&self, helpers: usize) -> Vec<u32> {
        match self {
            BitsSetting::Uniform(b) => vec![*b; helpers],
            BitsSetting::PerHelper(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub fc_ghz: f64,
    pub rb_bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub cell_radius_m: f64,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    /// Minimum planar distance between UE1 and BS1.
    pub ue_min_distance_m: f64,
    pub uav_altitude_m: f64,
    pub uav_bs1_horizontal_distance_m: f64,
    pub p1_dbm: f64,
    pub pu_dbm: f64,
    pub ru_bps_hz: f64,
    pub tiers: u32,
    pub bits: BitsSetting,
    pub n_trials: u64,
    pub seed: u64,
    pub antenna_downtilt_deg: f64,
    pub antenna_theta3db_deg: f64,
    pub antenna_sla_db: f64,
    pub antenna_gmax_db: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            fc_ghz: 2.0,
            rb_bandwidth_hz: 180e3,
            noise_psd_dbm_hz: -164.0,
            cell_radius_m: 800.0,
            bs_height_m: 25.0,
            ue_height_m: 1.5,
            ue_min_distance_m: 35.0,
            uav_altitude_m: 200.0,
            uav_bs1_horizontal_distance_m: 3000.0,
            p1_dbm: 15.0,
            pu_dbm: 15.0,
            ru_bps_hz: 5.0,
            tiers: 1,
            bits: BitsSetting::Uniform(6),
            n_trials: 1000,
            seed: 2019,
            antenna_downtilt_deg: 10.0,
            antenna_theta3db_deg: 10.0,
            antenna_sla_db: 20.0,
            antenna_gmax_db: 8.0,
        }
    }
}

fn range(key: &str, bound: &str) -> ConfigError {
    ConfigError::Range {
        key: key.into(),
        bound: bound.into(),
    }
}

impl ScenarioConfig {
    pub fn helper_count(&self) -> usize {
        geometry::site_count(self.tiers) - 1
    }

    pub fn antenna(&self) -> AntennaPattern {
        AntennaPattern {
            downtilt_deg: self.antenna_downtilt_deg,
            theta3db_deg: self.antenna_theta3db_deg,
            sla_db: self.antenna_sla_db,
            gmax_db: self.antenna_gmax_db,
        }
    }

    pub fn helper_bits(&self) -> Vec<u32> {
        self.bits.per_helper(self.helper_count())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("fc_ghz", self.fc_ghz),
            ("rb_bandwidth_hz", self.rb_bandwidth_hz),
            ("cell_radius_m", self.cell_radius_m),
            ("bs_height_m", self.bs_height_m),
            ("uav_altitude_m", self.uav_altitude_m),
            ("ru_bps_hz", self.ru_bps_hz),
            ("antenna_theta3db_deg", self.antenna_theta3db_deg),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(range(key, "finite and > 0"));
            }
        }
        let nonneg = [
            ("ue_height_m", self.ue_height_m),
            ("ue_min_distance_m", self.ue_min_distance_m),
            (
                "uav_bs1_horizontal_distance_m",
                self.uav_bs1_horizontal_distance_m,
            ),
            ("antenna_sla_db", self.antenna_sla_db),
        ];
        for (key, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(range(key, "finite and >= 0"));
            }
        }
        let finite = [
            ("noise_psd_dbm_hz", self.noise_psd_dbm_hz),
            ("p1_dbm", self.p1_dbm),
            ("pu_dbm", self.pu_dbm),
            ("antenna_downtilt_deg", self.antenna_downtilt_deg),
            ("antenna_gmax_db", self.antenna_gmax_db),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(range(key, "finite"));
            }
        }
        if self.ue_min_distance_m >= 0.8 * self.cell_radius_m {
            return Err(range("ue_min_distance_m", "< 0.8 * cell_radius_m"));
        }
        if self.n_trials == 0 {
            return Err(range("n_trials", ">= 1"));
        }
        if self.seed > i64::MAX as u64 {
            return Err(range("seed", "<= 2^63 - 1"));
        }
        if self.tiers > 10 {
            return Err(range("tiers", "<= 10"));
        }
        if self.helper_bits().iter().any(|&b| b > 32) {
            return Err(range("bits", "<= 32"));
        }
        if let BitsSetting::PerHelper(v) = &self.bits {
            if v.len() != self.helper_count() {
                return Err(range(
                    "bits",
                    &format!(
                        "a single integer or a list of {} entries",
                        self.helper_count()
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn float(key: &str, v: &toml::Value) -> Result<f64, ConfigError> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(ConfigError::Parse {
            key: key.into(),
            message: format!("expected a number, found {}", other.type_str()),
        }),
    }
}

fn integer(key: &str, v: &toml::Value) -> Result<u64, ConfigError> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        toml::Value::Integer(_) => Err(range(key, ">= 0")),
        other => Err(ConfigError::Parse {
            key: key.into(),
            message: format!("expected a nonnegative integer, found {}", other.type_str()),
        }),
    }
}

fn small(key: &str, v: &toml::Value) -> Result<u32, ConfigError> {
    u32::try_from(integer(key, v)?).map_err(|_| range(key, "< 2^32"))
}

/// Applies a flat table of overrides on top of the defaults.
pub fn config_from_table(table: &toml::Table) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig::default();
    for (key, v) in table {
        let k = key.as_str();
        match k {
            "fc_ghz" => cfg.fc_ghz = float(k, v)?,
            "rb_bandwidth_hz" => cfg.rb_bandwidth_hz = float(k, v)?,
            "noise_psd_dbm_hz" => cfg.noise_psd_dbm_hz = float(k, v)?,
            "cell_radius_m" => cfg.cell_radius_m = float(k, v)?,
            "bs_height_m" => cfg.bs_height_m = float(k, v)?,
            "ue_height_m" => cfg.ue_height_m = float(k, v)?,
            "ue_min_distance_m" => cfg.ue_min_distance_m = float(k, v)?,
            "uav_altitude_m" => cfg.uav_altitude_m = float(k, v)?,
            "uav_bs1_horizontal_distance_m" => cfg.uav_bs1_horizontal_distance_m = float(k, v)?,
            "p1_dbm" => cfg.p1_dbm = float(k, v)?,
            "pu_dbm" => cfg.pu_dbm = float(k, v)?,
            "ru_bps_hz" => cfg.ru_bps_hz = float(k, v)?,
            "tiers" => cfg.tiers = small(k, v)?,
            "bits" => {
                cfg.bits = match v {
                    toml::Value::Array(items) => BitsSetting::PerHelper(
                        items
                            .iter()
                            .map(|x| small(k, x))
                            .collect::<Result<_, _>>()?,
                    ),
                    other => BitsSetting::Uniform(small(k, other)?),
                }
            }
            "n_trials" => cfg.n_trials = integer(k, v)?,
            "seed" => cfg.seed = integer(k, v)?,
            "antenna_downtilt_deg" => cfg.antenna_downtilt_deg = float(k, v)?,
            "antenna_theta3db_deg" => cfg.antenna_theta3db_deg = float(k, v)?,
            "antenna_sla_db" => cfg.antenna_sla_db = float(k, v)?,
            "antenna_gmax_db" => cfg.antenna_gmax_db = float(k, v)?,
            _ => return Err(ConfigError::UnknownKey(key.clone())),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
    config_from_table(&table)
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

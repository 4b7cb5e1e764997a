//! JSON scenario files.
//!
//! Powers are given in dBm, the array suppression as a power ratio in dB and
//! distances in meters. Every key is optional and falls back to the default
//! scenario (N = 4 BSs, K = 3 pairs, M = 4 antennas). Per-pair quantities
//! accept either a single number (shared by every entry) or a list.
//!
//! ```json
//! {
//!   "n_bs": 4, "n_pairs": 3, "n_antennas": 4,
//!   "noise_power_dbm": -107,
//!   "power_budget_dbm": 20,
//!   "leakage_threshold_dbm": [-117, -117, -120],
//!   "suppression_db": -20
//! }
//! ```
//!
//! A file may also carry a sampled `realization` (geometry and large-scale
//! gains), which is what `gen-scenario` writes.

use serde::{Deserialize, Serialize};

use super::{
    db_to_linear, dbm_to_mw, linear_to_db, mw_to_dbm, DeploymentRegion, Geometry, LargeScaleState, ScenarioConfig,
    ScenarioError,
};

/// One value for every entry, or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerEntry {
    Shared(f64),
    Each(Vec<f64>),
}

impl PerEntry {
    fn resolve(&self, key: &str, len: usize) -> Result<Vec<f64>, ScenarioError> {
        match self {
            PerEntry::Shared(v) => Ok(vec![*v; len]),
            PerEntry::Each(v) if v.len() == len => Ok(v.clone()),
            PerEntry::Each(v) => Err(ScenarioError::key(key, format!("expected {len} entries, got {}", v.len()))),
        }
    }

    fn compact(values: Vec<f64>) -> Self {
        match values.first() {
            Some(&first) if values.iter().all(|&v| v == first) => PerEntry::Shared(first),
            _ => PerEntry::Each(values),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InterferenceEntry {
    Shared(f64),
    Matrix(Vec<Vec<f64>>),
}

/// A sampled deployment stored alongside its config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Realization {
    pub seed: u64,
    pub geometry: Geometry,
    pub large_scale: LargeScaleState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub n_bs: usize,
    pub n_pairs: usize,
    pub n_antennas: usize,
    pub noise_power_dbm: f64,
    pub power_budget_dbm: PerEntry,
    pub leakage_threshold_dbm: PerEntry,
    /// Defaults to the noise power for every (user, channel).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sat_interference_dbm: Option<InterferenceEntry>,
    /// Squared suppression factor in dB, per channel.
    pub suppression_db: PerEntry,
    pub suppression_in_leakage: bool,
    pub path_loss_exponent: f64,
    pub shadow_std_db: f64,
    pub reference_distance_m: f64,
    pub min_distance_m: f64,
    pub region: DeploymentRegion,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realization: Option<Realization>,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        let mut file = Self::from_config(&ScenarioConfig::default());
        file.sat_interference_dbm = None;
        file
    }
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario file serializes")
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        let dbm = |v: &[f64]| PerEntry::compact(v.iter().map(|&x| mw_to_dbm(x)).collect());
        let sat: Vec<Vec<f64>> =
            cfg.sat_interference.iter().map(|row| row.iter().map(|&x| mw_to_dbm(x)).collect()).collect();
        let first = sat.first().and_then(|r| r.first()).copied();
        let sat_interference_dbm = match first {
            Some(v) if sat.iter().flatten().all(|&x| x == v) => InterferenceEntry::Shared(v),
            _ => InterferenceEntry::Matrix(sat),
        };
        Self {
            n_bs: cfg.n_bs,
            n_pairs: cfg.n_pairs,
            n_antennas: cfg.n_antennas,
            noise_power_dbm: mw_to_dbm(cfg.noise_power),
            power_budget_dbm: dbm(&cfg.power_budget),
            leakage_threshold_dbm: dbm(&cfg.leakage_threshold),
            sat_interference_dbm: Some(sat_interference_dbm),
            suppression_db: PerEntry::compact(cfg.suppression.iter().map(|nu| linear_to_db(nu * nu)).collect()),
            suppression_in_leakage: cfg.suppression_in_leakage,
            path_loss_exponent: cfg.path_loss_exponent,
            shadow_std_db: cfg.shadow_std_db,
            reference_distance_m: cfg.reference_distance,
            min_distance_m: cfg.min_distance,
            region: cfg.region,
            realization: None,
        }
    }

    /// Converts to linear units and validates. Errors name the file key.
    pub fn to_config(&self) -> Result<ScenarioConfig, ScenarioError> {
        let k = self.n_pairs;
        let noise_power = dbm_to_mw(self.noise_power_dbm);
        let mw = |entry: &PerEntry, key: &str| -> Result<Vec<f64>, ScenarioError> {
            Ok(entry.resolve(key, k)?.into_iter().map(dbm_to_mw).collect())
        };
        let sat_interference = match &self.sat_interference_dbm {
            None => vec![vec![noise_power; k]; k],
            Some(InterferenceEntry::Shared(v)) => vec![vec![dbm_to_mw(*v); k]; k],
            Some(InterferenceEntry::Matrix(m)) => {
                if m.len() != k || m.iter().any(|row| row.len() != k) {
                    return Err(ScenarioError::key("sat_interference_dbm", format!("expected a {k}x{k} matrix")));
                }
                m.iter().map(|row| row.iter().map(|&v| dbm_to_mw(v)).collect()).collect()
            }
        };
        let cfg = ScenarioConfig {
            n_bs: self.n_bs,
            n_pairs: k,
            n_antennas: self.n_antennas,
            noise_power,
            power_budget: mw(&self.power_budget_dbm, "power_budget_dbm")?,
            leakage_threshold: mw(&self.leakage_threshold_dbm, "leakage_threshold_dbm")?,
            sat_interference,
            suppression: self
                .suppression_db
                .resolve("suppression_db", k)?
                .into_iter()
                .map(|db| db_to_linear(db).sqrt())
                .collect(),
            suppression_in_leakage: self.suppression_in_leakage,
            path_loss_exponent: self.path_loss_exponent,
            shadow_std_db: self.shadow_std_db,
            reference_distance: self.reference_distance_m,
            min_distance: self.min_distance_m,
            region: self.region,
        };
        cfg.validate().map_err(|e| match e {
            ScenarioError::InvalidKey { key, reason } => {
                ScenarioError::InvalidKey { key: file_key(&key).to_string(), reason }
            }
            other => other,
        })?;
        if let Some(r) = &self.realization {
            r.large_scale.check(&cfg).map_err(|e| ScenarioError::key("realization", e.to_string()))?;
        }
        Ok(cfg)
    }
}

fn file_key(key: &str) -> &str {
    match key {
        "noise_power" => "noise_power_dbm",
        "power_budget" => "power_budget_dbm",
        "leakage_threshold" => "leakage_threshold_dbm",
        "sat_interference" => "sat_interference_dbm",
        "suppression" => "suppression_db",
        "reference_distance" => "reference_distance_m",
        "min_distance" => "min_distance_m",
        other => other,
    }
}

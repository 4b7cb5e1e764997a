//! Experiment description files.
//!
//! ```json
//! {
//!   "scenario": { "n_bs": 4, "n_pairs": 3, "n_antennas": 4 },
//!   "seed": 7,
//!   "sweep": { "parameter": "power_budget", "values_dbm": [0, 10, 20, 30, 40] },
//!   "schemes": ["proposed", "waterfilling", "equal_power"],
//!   "mc_validation": { "enabled": true, "samples": 100000 },
//!   "trials": 50
//! }
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::assignment::MAX_EXHAUSTIVE_SIZE;
use crate::scenario::{ScenarioConfig, ScenarioFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Max-min power allocation with Hungarian channel assignment.
    Proposed,
    /// Waterfilling power, scaled to the leakage threshold, Hungarian assignment.
    Waterfilling,
    /// Equal power, scaled to the leakage threshold, Hungarian assignment.
    EqualPower,
    /// Proposed power allocation with a uniformly random assignment.
    RandomAssignment,
    /// Proposed power allocation with exhaustive-search assignment.
    Exhaustive,
}

impl Scheme {
    pub const ALL: [Scheme; 5] =
        [Scheme::Proposed, Scheme::Waterfilling, Scheme::EqualPower, Scheme::RandomAssignment, Scheme::Exhaustive];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Waterfilling => "waterfilling",
            Scheme::EqualPower => "equal_power",
            Scheme::RandomAssignment => "random_assignment",
            Scheme::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Every user's power budget.
    PowerBudget,
    /// Every channel's leakage threshold.
    LeakThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values_dbm: Vec<f64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Self { parameter: SweepParameter::PowerBudget, values_dbm: (0..=8).map(|i| 5.0 * i as f64).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McValidation {
    pub enabled: bool,
    pub samples: usize,
}

impl Default for McValidation {
    fn default() -> Self {
        Self { enabled: false, samples: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: ScenarioFile,
    pub seed: u64,
    pub sweep: Sweep,
    pub schemes: Vec<Scheme>,
    pub mc_validation: McValidation,
    /// Independent large-scale draws averaged per sweep point.
    pub trials: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            scenario: ScenarioFile::default(),
            seed: 0,
            sweep: Sweep::default(),
            schemes: Scheme::ALL.to_vec(),
            mc_validation: McValidation::default(),
            trials: 50,
        }
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::spec("spec", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Checks the spec and returns the base scenario in linear units.
    pub fn validate(&self) -> Result<ScenarioConfig, ExperimentError> {
        let cfg = self.scenario.to_config()?;
        let values = &self.sweep.values_dbm;
        if values.is_empty() {
            return Err(ExperimentError::spec("sweep.values_dbm", "must not be empty"));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(ExperimentError::spec("sweep.values_dbm", "must be sorted in increasing order"));
        }
        if self.trials == 0 {
            return Err(ExperimentError::spec("trials", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(ExperimentError::spec("schemes", "must list at least one scheme"));
        }
        if self.schemes.contains(&Scheme::Exhaustive) && cfg.n_pairs > MAX_EXHAUSTIVE_SIZE {
            return Err(ExperimentError::spec("schemes", format!("exhaustive needs n_pairs <= {MAX_EXHAUSTIVE_SIZE}")));
        }
        if self.mc_validation.samples == 0 {
            return Err(ExperimentError::spec("mc_validation.samples", "must be at least 1"));
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_reference_scenario() {
        let spec = ExperimentSpec::from_json("{}").unwrap();
        assert_eq!(spec.trials, 50);
        assert_eq!(spec.sweep.values_dbm, vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]);
        let cfg = spec.validate().unwrap();
        assert_eq!((cfg.n_bs, cfg.n_pairs, cfg.n_antennas), (4, 3, 4));
    }

    #[test]
    fn parses_scheme_names() {
        let spec = ExperimentSpec::from_json(
            r#"{"schemes": ["proposed", "equal_power"], "sweep": {"parameter": "leak_threshold", "values_dbm": [-120, -110]}}"#,
        )
        .unwrap();
        assert_eq!(spec.schemes, vec![Scheme::Proposed, Scheme::EqualPower]);
        assert_eq!(spec.sweep.parameter, SweepParameter::LeakThreshold);
    }

    #[test]
    fn validation_errors_name_keys() {
        let check = |json: &str, key: &str| {
            let err = match ExperimentSpec::from_json(json) {
                Ok(spec) => spec.validate().unwrap_err().to_string(),
                Err(e) => e.to_string(),
            };
            assert!(err.contains(key), "{err} should mention {key}");
        };
        check(r#"{"trials": 0}"#, "trials");
        check(r#"{"sweep": {"parameter": "power_budget", "values_dbm": []}}"#, "sweep.values_dbm");
        check(r#"{"sweep": {"parameter": "power_budget", "values_dbm": [3, 1]}}"#, "sweep.values_dbm");
        check(r#"{"schemes": ["magic"]}"#, "magic");
        check(r#"{"scenario": {"power_budget_dbm": [1]}}"#, "power_budget_dbm");
        check(r#"{"schemes": []}"#, "schemes");
        check(r#"{"scenario": {"n_pairs": 9}, "schemes": ["exhaustive"]}"#, "schemes");
    }
}

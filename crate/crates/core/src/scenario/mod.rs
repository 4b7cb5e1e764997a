//! Problem data: static scenario parameters, random deployments and the
//! large-scale fading state derived from them.
//!
//! Everything inside the crate is linear scale (mW for power, amplitude for
//! channel gains). dB/dBm only appear at the file boundary, see [`config`].

pub mod config;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::power::PowerConstraints;
use crate::rate_model::PairContext;
use crate::rng::Rng;

pub use config::{Realization, ScenarioFile};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid config key `{key}`: {reason}")]
    InvalidKey { key: String, reason: String },
    #[error("degenerate deployment region `{0}`: width and height must be positive")]
    DegenerateRegion(&'static str),
    #[error("could not place {0} at least the minimum distance away from every BS")]
    Placement(&'static str),
    #[error("invalid large-scale state: {0}")]
    InvalidState(String),
    #[error("malformed scenario file: {0}")]
    Json(#[from] serde_json::Error),
}

impl ScenarioError {
    pub(crate) fn key(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::InvalidKey { key: key.into(), reason: reason.into() }
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Power ratio from dB.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, width: f64, height: f64) -> Self {
        Self { x, y, width, height }
    }

    pub fn is_degenerate(&self) -> bool {
        let finite = [self.x, self.y, self.width, self.height].iter().all(|v| v.is_finite());
        !(finite && self.width > 0.0 && self.height > 0.0)
    }

    pub fn midpoint(&self) -> Point {
        Point { x: self.x + self.width / 2.0, y: self.y + self.height / 2.0 }
    }

    fn sample(&self, rng: &mut Rng) -> Point {
        Point { x: self.x + self.width * rng.random::<f64>(), y: self.y + self.height * rng.random::<f64>() }
    }
}

/// BSs and terrestrial MTs share the `land` square; satellite MTs sit in the
/// adjacent `offshore` square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeploymentRegion {
    pub land: Rect,
    pub offshore: Rect,
}

impl Default for DeploymentRegion {
    fn default() -> Self {
        Self { land: Rect::new(0.0, 0.0, 2000.0, 2000.0), offshore: Rect::new(2000.0, 0.0, 2000.0, 2000.0) }
    }
}

/// Static parameters of one deployment. All powers in mW.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_bs: usize,
    /// Number of channels; also the number of terrestrial and of satellite MTs.
    pub n_pairs: usize,
    /// Receive antennas per terrestrial MT.
    pub n_antennas: usize,
    pub noise_power: f64,
    /// Per terrestrial MT, length `n_pairs`.
    pub power_budget: Vec<f64>,
    /// Per channel (satellite MT), length `n_pairs`.
    pub leakage_threshold: Vec<f64>,
    /// `[i][j]`: satellite interference seen by terrestrial MT `i` on channel `j`.
    pub sat_interference: Vec<Vec<f64>>,
    /// Array suppression amplitude per channel, in (0, 1].
    pub suppression: Vec<f64>,
    /// Fold the squared suppression into the leakage coefficients.
    pub suppression_in_leakage: bool,
    pub path_loss_exponent: f64,
    pub shadow_std_db: f64,
    pub reference_distance: f64,
    pub min_distance: f64,
    pub region: DeploymentRegion,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::uniform(4, 3, 4, dbm_to_mw(20.0))
    }
}

impl ScenarioConfig {
    /// Default channel parameters with the given dimensions and one shared
    /// power budget.
    pub fn uniform(n_bs: usize, n_pairs: usize, n_antennas: usize, power_budget: f64) -> Self {
        let noise_power = dbm_to_mw(-107.0);
        Self {
            n_bs,
            n_pairs,
            n_antennas,
            noise_power,
            power_budget: vec![power_budget; n_pairs],
            leakage_threshold: vec![dbm_to_mw(-117.0); n_pairs],
            sat_interference: vec![vec![noise_power; n_pairs]; n_pairs],
            suppression: vec![db_to_linear(-20.0).sqrt(); n_pairs],
            suppression_in_leakage: true,
            path_loss_exponent: 4.0,
            shadow_std_db: 8.0,
            reference_distance: 100.0,
            min_distance: 10.0,
            region: DeploymentRegion::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let k = self.n_pairs;
        for (key, v) in [("n_bs", self.n_bs), ("n_pairs", k), ("n_antennas", self.n_antennas)] {
            if v == 0 {
                return Err(ScenarioError::key(key, "must be at least 1"));
            }
        }
        nonneg("noise_power", self.noise_power)?;
        if self.noise_power == 0.0 {
            return Err(ScenarioError::key("noise_power", "must be positive"));
        }
        check_vec("power_budget", &self.power_budget, k)?;
        check_vec("leakage_threshold", &self.leakage_threshold, k)?;
        if self.sat_interference.len() != k {
            return Err(ScenarioError::key(
                "sat_interference",
                format!("expected {k} rows, got {}", self.sat_interference.len()),
            ));
        }
        for row in &self.sat_interference {
            check_vec("sat_interference", row, k)?;
        }
        if self.suppression.len() != k {
            return Err(ScenarioError::key(
                "suppression",
                format!("expected {k} entries, got {}", self.suppression.len()),
            ));
        }
        if let Some(v) = self.suppression.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
            return Err(ScenarioError::key("suppression", format!("{v} is outside (0, 1]")));
        }
        if !(self.path_loss_exponent > 0.0 && self.path_loss_exponent.is_finite()) {
            return Err(ScenarioError::key("path_loss_exponent", "must be positive"));
        }
        nonneg("shadow_std_db", self.shadow_std_db)?;
        if !(self.reference_distance > 0.0 && self.reference_distance.is_finite()) {
            return Err(ScenarioError::key("reference_distance", "must be positive"));
        }
        nonneg("min_distance", self.min_distance)?;
        if self.region.land.is_degenerate() {
            return Err(ScenarioError::DegenerateRegion("land"));
        }
        if self.region.offshore.is_degenerate() {
            return Err(ScenarioError::DegenerateRegion("offshore"));
        }
        Ok(())
    }

    /// Amplitude gain of a link at distance `d` with shadowing `shadow_db`:
    /// `l² = (d / d_ref)^(-α) · 10^(shadow_db / 10)`, with `d` floored at the
    /// minimum distance.
    pub fn link_gain(&self, d: f64, shadow_db: f64) -> f64 {
        let d = d.max(self.min_distance);
        let power = (d / self.reference_distance).powf(-self.path_loss_exponent) * db_to_linear(shadow_db);
        power.sqrt()
    }
}

fn nonneg(key: &str, v: f64) -> Result<(), ScenarioError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ScenarioError::key(key, format!("{v} must be finite and nonnegative")))
    }
}

fn check_vec(key: &str, v: &[f64], len: usize) -> Result<(), ScenarioError> {
    if v.len() != len {
        return Err(ScenarioError::key(key, format!("expected {len} entries, got {}", v.len())));
    }
    v.iter().try_for_each(|&x| nonneg(key, x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub bs_positions: Vec<Point>,
    pub terr_mt_positions: Vec<Point>,
    pub sat_mt_positions: Vec<Point>,
}

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

/// Uniform deployment: BSs and terrestrial MTs in the land square, satellite
/// MTs offshore. MTs closer than `min_distance` to any BS are redrawn.
pub fn sample_geometry(cfg: &ScenarioConfig, rng: &mut Rng) -> Result<Geometry, ScenarioError> {
    let region = &cfg.region;
    if region.land.is_degenerate() {
        return Err(ScenarioError::DegenerateRegion("land"));
    }
    if region.offshore.is_degenerate() {
        return Err(ScenarioError::DegenerateRegion("offshore"));
    }
    let bs_positions: Vec<Point> = (0..cfg.n_bs).map(|_| region.land.sample(rng)).collect();
    let mut place = |rect: &Rect, what: &'static str| -> Result<Point, ScenarioError> {
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let p = rect.sample(rng);
            if bs_positions.iter().all(|b| b.distance(&p) >= cfg.min_distance) {
                return Ok(p);
            }
        }
        Err(ScenarioError::Placement(what))
    };
    let terr_mt_positions =
        (0..cfg.n_pairs).map(|_| place(&region.land, "terrestrial MT")).collect::<Result<Vec<_>, _>>()?;
    let sat_mt_positions =
        (0..cfg.n_pairs).map(|_| place(&region.offshore, "satellite MT")).collect::<Result<Vec<_>, _>>()?;
    Ok(Geometry { bs_positions, terr_mt_positions, sat_mt_positions })
}

/// Amplitude large-scale gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeScaleState {
    /// `[i][j][n]`: BS `n` to terrestrial MT `i` on channel `j`.
    pub terr_gain: Vec<Vec<Vec<f64>>>,
    /// `[j][n]`: BS `n` to the satellite MT of channel `j`.
    pub sat_gain: Vec<Vec<f64>>,
}

/// Path loss plus log-normal shadowing, with shadowing drawn independently
/// for every `(i, j, n)` terrestrial link and every `(j, n)` satellite link.
pub fn derive_large_scale(
    geom: &Geometry,
    cfg: &ScenarioConfig,
    rng: &mut Rng,
) -> Result<LargeScaleState, ScenarioError> {
    let shadow = Normal::new(0.0, cfg.shadow_std_db).map_err(|e| ScenarioError::key("shadow_std_db", e.to_string()))?;
    let terr_gain = geom
        .terr_mt_positions
        .iter()
        .map(|mt| {
            (0..geom.sat_mt_positions.len())
                .map(|_| {
                    geom.bs_positions.iter().map(|bs| cfg.link_gain(bs.distance(mt), shadow.sample(rng))).collect()
                })
                .collect()
        })
        .collect();
    let sat_gain = geom
        .sat_mt_positions
        .iter()
        .map(|mt| geom.bs_positions.iter().map(|bs| cfg.link_gain(bs.distance(mt), shadow.sample(rng))).collect())
        .collect();
    let state = LargeScaleState { terr_gain, sat_gain };
    state.check(cfg)?;
    Ok(state)
}

impl LargeScaleState {
    /// Samples a geometry and its fading state in one go.
    pub fn sample(cfg: &ScenarioConfig, rng: &mut Rng) -> Result<(Geometry, Self), ScenarioError> {
        let geom = sample_geometry(cfg, rng)?;
        let state = derive_large_scale(&geom, cfg, rng)?;
        Ok((geom, state))
    }

    /// Dimension and positivity check against `cfg`.
    pub fn check(&self, cfg: &ScenarioConfig) -> Result<(), ScenarioError> {
        let (k, n) = (cfg.n_pairs, cfg.n_bs);
        let bad = |what: &str| Err(ScenarioError::InvalidState(what.to_string()));
        if self.terr_gain.len() != k
            || self.terr_gain.iter().any(|row| row.len() != k || row.iter().any(|g| g.len() != n))
        {
            return bad("terr_gain must be n_pairs x n_pairs x n_bs");
        }
        if self.sat_gain.len() != k || self.sat_gain.iter().any(|g| g.len() != n) {
            return bad("sat_gain must be n_pairs x n_bs");
        }
        let all = self.terr_gain.iter().flatten().flatten().chain(self.sat_gain.iter().flatten());
        if all.clone().any(|&g| !(g > 0.0 && g.is_finite())) {
            return bad("gains must be positive and finite");
        }
        Ok(())
    }

    /// Rate-model inputs for terrestrial MT `i` on channel `j`.
    pub fn pair_context(&self, cfg: &ScenarioConfig, i: usize, j: usize) -> PairContext {
        PairContext {
            gains_sq: self.terr_gain[i][j].iter().map(|l| l * l).collect(),
            denom: cfg.sat_interference[i][j] + cfg.noise_power,
            n_antennas: cfg.n_antennas,
        }
    }

    /// Power and leakage limits for terrestrial MT `i` on channel `j`.
    pub fn pair_constraints(&self, cfg: &ScenarioConfig, i: usize, j: usize) -> PowerConstraints {
        let nu_sq = if cfg.suppression_in_leakage { cfg.suppression[j].powi(2) } else { 1.0 };
        PowerConstraints {
            budget: cfg.power_budget[i],
            leak_threshold: cfg.leakage_threshold[j],
            leak_coeff: self.sat_gain[j].iter().map(|l| nu_sq * l * l).collect(),
        }
    }
}

//! End-to-end pipeline and parameter sweeps.
//!
//! [`algorithm1`] solves every (user, channel) power problem, then matches
//! users to channels on the resulting rate table. [`run_sweep`] repeats that
//! over independent large-scale draws and a list of budget or threshold
//! values, alongside the baseline schemes, and audits every result against
//! the leakage constraint independently of the solver.

mod output;
mod spec;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::assignment::{exhaustive_oracle, kuhn_munkres, random_assignment, Assignment, AssignmentError, RateTable};
use crate::mc::ergodic_rate_mc;
use crate::power::{
    equal_power_baseline, solve_pair, waterfilling_baseline, PairSolution, PowerConstraints, PowerError,
};
use crate::rate_model::PairContext;
use crate::rng;
use crate::scenario::{dbm_to_mw, LargeScaleState, ScenarioConfig, ScenarioError};

pub use output::{write_summary_csv, write_sweep_csv, write_validation_csv};
pub use spec::{ExperimentSpec, McValidation, Scheme, Sweep, SweepParameter};

/// Relative slack allowed by the leakage audit.
pub const LEAKAGE_AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error("invalid config key `{key}`: {reason}")]
    InvalidSpec { key: String, reason: String },
    #[error(
        "leakage audit failed: {scheme} on channel {channel} leaks {leakage:e} mW over a {threshold:e} mW threshold"
    )]
    LeakageAudit { scheme: Scheme, channel: usize, leakage: f64, threshold: f64 },
    #[error("assignment audit failed: matching total {matching} differs from exhaustive total {exhaustive}")]
    OptimalityAudit { matching: f64, exhaustive: f64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    pub(crate) fn spec(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::InvalidSpec { key: key.into(), reason: reason.into() }
    }
}

type PairSolver = fn(&PairContext, &PowerConstraints) -> Result<PairSolution, PowerError>;

/// Solves all `K²` pair problems with `solver`.
pub fn rate_table(
    ls: &LargeScaleState,
    cfg: &ScenarioConfig,
    solver: PairSolver,
) -> Result<RateTable, ExperimentError> {
    let k = cfg.n_pairs;
    let solutions = (0..k)
        .into_par_iter()
        .map(|i| {
            (0..k)
                .map(|j| solver(&ls.pair_context(cfg, i, j), &ls.pair_constraints(cfg, i, j)))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RateTable::from_solutions(solutions))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    pub assignment: Assignment,
    pub table: RateTable,
    pub sum_rate: f64,
}

impl Allocation {
    /// Power vector used on each channel by the user assigned to it.
    pub fn channel_powers(&self) -> Vec<&[f64]> {
        self.assignment.inverse().iter().enumerate().map(|(j, &i)| &*self.table.solution(i, j).p_star).collect()
    }
}

/// Hierarchical solve: per-pair power problems, then Hungarian matching.
pub fn algorithm1(ls: &LargeScaleState, cfg: &ScenarioConfig) -> Result<Allocation, ExperimentError> {
    cfg.validate()?;
    ls.check(cfg)?;
    let table = rate_table(ls, cfg, solve_pair)?;
    let (assignment, sum_rate) = kuhn_munkres(table.rates())?;
    Ok(Allocation { assignment, table, sum_rate })
}

/// Expected leakage on every channel computed straight from the large-scale
/// gains, independent of [`PowerConstraints`].
pub fn audit_leakage(ls: &LargeScaleState, cfg: &ScenarioConfig, channel_powers: &[&[f64]]) -> Vec<f64> {
    channel_powers
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let nu_sq = if cfg.suppression_in_leakage { cfg.suppression[j] * cfg.suppression[j] } else { 1.0 };
            p.iter().zip(&ls.sat_gain[j]).map(|(p, l)| p * nu_sq * l * l).sum()
        })
        .collect()
}

/// One user's row for one (sweep value, scheme, trial).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub sweep_value_dbm: f64,
    pub scheme: Scheme,
    pub trial: usize,
    pub user: usize,
    pub channel: usize,
    pub rate: f64,
    pub sum_rate: f64,
    /// Audited leakage per channel, mW.
    pub leakage_mw: Vec<f64>,
    pub iterations: usize,
    pub wall_ms: f64,
}

/// Trial averages for one (sweep value, scheme).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub sweep_value_dbm: f64,
    pub scheme: Scheme,
    pub trials: usize,
    pub mean_sum_rate: f64,
    /// Mean rate of user 1 on channel 1 (read from the scheme's rate table).
    pub mean_reference_rate: f64,
    /// Largest audited leakage-to-threshold ratio over trials and channels.
    pub max_leakage_ratio: f64,
    /// Mean of the summed solver duality gaps of the assigned pairs.
    pub mean_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub n_pairs: usize,
    pub records: Vec<SweepRecord>,
    pub summary: Vec<SweepSummary>,
}

impl SweepResult {
    pub fn summary_for(&self, scheme: Scheme) -> Vec<&SweepSummary> {
        self.summary.iter().filter(|s| s.scheme == scheme).collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Fill `wall_ms`; off by default so output is byte-reproducible.
    pub record_timing: bool,
}

struct SchemeOutcome {
    scheme: Scheme,
    allocation: Allocation,
    iterations: Vec<usize>,
    wall_ms: f64,
}

/// Realization for `trial`: the stored one when the scenario file has it,
/// otherwise a fresh draw from the trial's stream.
pub fn trial_state(
    spec: &ExperimentSpec,
    cfg: &ScenarioConfig,
    trial: usize,
) -> Result<LargeScaleState, ExperimentError> {
    if let Some(r) = &spec.scenario.realization {
        return Ok(r.large_scale.clone());
    }
    let mut rng = rng::stream(spec.seed, rng::stream_id(0, trial as u64, 0));
    Ok(LargeScaleState::sample(cfg, &mut rng)?.1)
}

fn sweep_config(base: &ScenarioConfig, sweep: &Sweep, value_dbm: f64) -> ScenarioConfig {
    let mut cfg = base.clone();
    let v = dbm_to_mw(value_dbm);
    match sweep.parameter {
        SweepParameter::PowerBudget => cfg.power_budget = vec![v; cfg.n_pairs],
        SweepParameter::LeakThreshold => cfg.leakage_threshold = vec![v; cfg.n_pairs],
    }
    cfg
}

fn run_point(
    spec: &ExperimentSpec,
    ls: &LargeScaleState,
    cfg: &ScenarioConfig,
    trial: usize,
    value_idx: usize,
    opts: RunOptions,
) -> Result<Vec<SchemeOutcome>, ExperimentError> {
    let elapsed = |start: Instant| if opts.record_timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    let start = Instant::now();
    let proposed = rate_table(ls, cfg, solve_pair)?;
    let proposed_ms = elapsed(start);

    let mut out = Vec::with_capacity(spec.schemes.len());
    for &scheme in &spec.schemes {
        let start = Instant::now();
        let (table, assignment) = match scheme {
            Scheme::Proposed => {
                let (a, _) = kuhn_munkres(proposed.rates())?;
                (proposed.clone(), a)
            }
            Scheme::Waterfilling | Scheme::EqualPower => {
                let solver: PairSolver =
                    if scheme == Scheme::Waterfilling { waterfilling_baseline } else { equal_power_baseline };
                let table = rate_table(ls, cfg, solver)?;
                let (a, _) = kuhn_munkres(table.rates())?;
                (table, a)
            }
            Scheme::RandomAssignment => {
                let mut rng = rng::stream(spec.seed, rng::stream_id(1, trial as u64, value_idx as u64));
                (proposed.clone(), random_assignment(cfg.n_pairs, &mut rng))
            }
            Scheme::Exhaustive => {
                let (a, _) = exhaustive_oracle(proposed.rates())?;
                (proposed.clone(), a)
            }
        };
        let sum_rate = assignment.total(table.rates());
        let iterations =
            assignment.channel_of.iter().enumerate().map(|(i, &j)| table.solution(i, j).iterations).collect();
        let shared = matches!(scheme, Scheme::Proposed | Scheme::RandomAssignment | Scheme::Exhaustive);
        let wall_ms = elapsed(start) + if shared { proposed_ms } else { 0.0 };
        out.push(SchemeOutcome { scheme, allocation: Allocation { assignment, table, sum_rate }, iterations, wall_ms });
    }

    // optimality audit
    let total_of = |s: Scheme| out.iter().find(|o| o.scheme == s).map(|o| o.allocation.sum_rate);
    if let (Some(matching), Some(exhaustive)) = (total_of(Scheme::Proposed), total_of(Scheme::Exhaustive)) {
        if matching.to_bits() != exhaustive.to_bits() {
            return Err(ExperimentError::OptimalityAudit { matching, exhaustive });
        }
    }
    Ok(out)
}

/// Runs every sweep value, scheme and trial. Output order is fixed (value,
/// scheme in spec order, trial, user) regardless of thread scheduling.
pub fn run_sweep(spec: &ExperimentSpec, opts: RunOptions) -> Result<SweepResult, ExperimentError> {
    let base = spec.validate()?;
    let k = base.n_pairs;
    let values = &spec.sweep.values_dbm;

    // per trial: per value: per scheme
    let per_trial: Vec<(LargeScaleState, Vec<Vec<SchemeOutcome>>)> = (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let ls = trial_state(spec, &base, trial)?;
            values
                .iter()
                .enumerate()
                .map(|(vi, &v)| run_point(spec, &ls, &sweep_config(&base, &spec.sweep, v), trial, vi, opts))
                .collect::<Result<Vec<_>, _>>()
                .map(|points| (ls, points))
        })
        .collect::<Result<_, ExperimentError>>()?;

    let mut records = Vec::new();
    let mut summary = Vec::new();
    for (vi, &value) in values.iter().enumerate() {
        let cfg = sweep_config(&base, &spec.sweep, value);
        for (si, &scheme) in spec.schemes.iter().enumerate() {
            let mut sum_rate = 0.0;
            let mut reference = 0.0;
            let mut max_ratio = 0.0f64;
            let mut gap = 0.0;
            for (trial, (ls, points)) in per_trial.iter().enumerate() {
                let outcome = &points[vi][si];
                let alloc = &outcome.allocation;
                let leakage = audit_leakage(ls, &cfg, &alloc.channel_powers());
                for (j, (&leak, &thr)) in leakage.iter().zip(&cfg.leakage_threshold).enumerate() {
                    if leak > thr * (1.0 + LEAKAGE_AUDIT_TOL) {
                        return Err(ExperimentError::LeakageAudit {
                            scheme,
                            channel: j,
                            leakage: leak,
                            threshold: thr,
                        });
                    }
                    if thr > 0.0 {
                        max_ratio = max_ratio.max(leak / thr);
                    }
                }
                for (user, &channel) in alloc.assignment.channel_of.iter().enumerate() {
                    let sol = alloc.table.solution(user, channel);
                    gap += sol.fw_gap;
                    records.push(SweepRecord {
                        sweep_value_dbm: value,
                        scheme,
                        trial,
                        user,
                        channel,
                        rate: sol.rate,
                        sum_rate: alloc.sum_rate,
                        leakage_mw: leakage.clone(),
                        iterations: outcome.iterations[user],
                        wall_ms: outcome.wall_ms,
                    });
                }
                sum_rate += alloc.sum_rate;
                reference += alloc.table.rates()[0][0];
            }
            let n = spec.trials as f64;
            summary.push(SweepSummary {
                sweep_value_dbm: value,
                scheme,
                trials: spec.trials,
                mean_sum_rate: sum_rate / n,
                mean_reference_rate: reference / n,
                max_leakage_ratio: max_ratio,
                mean_gap: gap / n,
            });
        }
    }
    Ok(SweepResult { n_pairs: k, records, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub trial: usize,
    pub user: usize,
    pub channel: usize,
    pub upsilon: f64,
    pub mc_mean: f64,
    pub mc_std_error: f64,
    /// `|Υ - MC| / MC`; `None` for zero-power pairs.
    pub relative_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub median_gap: f64,
    pub max_gap: f64,
}

/// Compares the deterministic-equivalent rate of every solved pair with a
/// Monte Carlo estimate at the same power vector. Uses the base scenario
/// (the sweep list is ignored).
pub fn validate_approx(spec: &ExperimentSpec) -> Result<ValidationReport, ExperimentError> {
    let base = spec.validate()?;
    if !spec.mc_validation.enabled {
        return Err(ExperimentError::spec("mc_validation.enabled", "must be true for validate-approx"));
    }
    let k = base.n_pairs;
    let samples = spec.mc_validation.samples;
    let per_trial = (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let ls = trial_state(spec, &base, trial)?;
            (0..k * k)
                .into_par_iter()
                .map(|idx| {
                    let (i, j) = (idx / k, idx % k);
                    let ctx = ls.pair_context(&base, i, j);
                    let sol = solve_pair(&ctx, &ls.pair_constraints(&base, i, j))?;
                    let mut rng = rng::stream(spec.seed, rng::stream_id(2, trial as u64, idx as u64));
                    let mc = ergodic_rate_mc(&ctx, &sol.p_star, samples, &mut rng);
                    let relative_gap = relative_gap(sol.rate, mc.mean, sol.p_star.total());
                    Ok(ValidationRow {
                        trial,
                        user: i,
                        channel: j,
                        upsilon: sol.rate,
                        mc_mean: mc.mean,
                        mc_std_error: mc.std_error,
                        relative_gap,
                    })
                })
                .collect::<Result<Vec<_>, ExperimentError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<ValidationRow> = per_trial.into_iter().flatten().collect();
    let mut gaps: Vec<f64> = rows.iter().filter_map(|r| r.relative_gap).collect();
    gaps.sort_by(f64::total_cmp);
    Ok(ValidationReport { median_gap: median(&gaps), max_gap: gaps.last().copied().unwrap_or(0.0), rows })
}

fn relative_gap(upsilon: f64, mc_mean: f64, total_power: f64) -> Option<f64> {
    (total_power > 0.0 && mc_mean > 0.0).then(|| (upsilon - mc_mean).abs() / mc_mean)
}

/// Median of sorted values; zero when empty.
pub fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    }
}

/// JSON-friendly result of a single solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    /// Channel of each user.
    pub assignment: Vec<usize>,
    pub sum_rate_bps_hz: f64,
    /// `rates_bps_hz[i][j]`: solved rate of user `i` on channel `j`.
    pub rates_bps_hz: Vec<Vec<f64>>,
    /// Power vector of each user on its assigned channel, mW.
    pub powers_mw: Vec<Vec<f64>>,
    /// Audited leakage per channel, mW.
    pub leakage_mw: Vec<f64>,
}

impl SolveReport {
    pub fn new(alloc: &Allocation, ls: &LargeScaleState, cfg: &ScenarioConfig) -> Self {
        let powers_mw = alloc
            .assignment
            .channel_of
            .iter()
            .enumerate()
            .map(|(i, &j)| alloc.table.solution(i, j).p_star.to_vec())
            .collect();
        Self {
            assignment: alloc.assignment.channel_of.clone(),
            sum_rate_bps_hz: alloc.sum_rate,
            rates_bps_hz: alloc.table.rates().to_vec(),
            powers_mw,
            leakage_mw: audit_leakage(ls, cfg, &alloc.channel_powers()),
        }
    }
}

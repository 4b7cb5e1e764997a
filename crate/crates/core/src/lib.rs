//! Power and channel allocation for spectrum sharing between a terrestrial
//! multi-BS downlink and satellite mobile terminals, driven only by
//! large-scale channel state.
//!
//! The pipeline is hierarchical: every (user, channel) pair gets its own
//! max-min power problem over a deterministic-equivalent rate model
//! ([`rate_model`], [`power`]), the resulting rate table is matched with the
//! Hungarian algorithm ([`assignment`]), and [`experiments`] wires it all into
//! parameter sweeps. [`mc`] is a Monte Carlo reference used to check the rate
//! model against sampled Rayleigh fading.

pub mod assignment;
pub mod experiments;
pub mod mc;
pub mod power;
pub mod rate_model;
pub mod rng;
pub mod scenario;

pub use assignment::{exhaustive_oracle, kuhn_munkres, random_assignment, Assignment, RateTable};
pub use experiments::{algorithm1, run_sweep, validate_approx, Allocation, ExperimentSpec, Scheme};
pub use power::{
    equal_power_baseline, grid_oracle, leakage, solve_pair, waterfilling_baseline, PairSolution, PowerConstraints,
};
pub use rate_model::{solve_chi, upsilon, ChiSolution, PairContext, PowerAllocation};
pub use scenario::{dbm_to_mw, mw_to_dbm, Geometry, LargeScaleState, ScenarioConfig};

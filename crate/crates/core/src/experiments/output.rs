//! CSV writers.
//!
//! Sweep rows: `sweep_value_dbm, scheme, trial, user, channel, rate_bps_hz,
//! sum_rate_bps_hz, leakage_mw_1 .. leakage_mw_K, iterations, wall_ms`.
//! Trials, users and channels are numbered from 1. Floats use the shortest
//! representation that round-trips, so identical results give identical bytes.

use std::io::Write;

use super::{ExperimentError, SweepResult, ValidationReport};

pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> =
        ["sweep_value_dbm", "scheme", "trial", "user", "channel", "rate_bps_hz", "sum_rate_bps_hz"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    header.extend((1..=result.n_pairs).map(|j| format!("leakage_mw_{j}")));
    header.push("iterations".into());
    header.push("wall_ms".into());
    w.write_record(&header)?;
    for r in &result.records {
        let mut row = vec![
            r.sweep_value_dbm.to_string(),
            r.scheme.to_string(),
            (r.trial + 1).to_string(),
            (r.user + 1).to_string(),
            (r.channel + 1).to_string(),
            r.rate.to_string(),
            r.sum_rate.to_string(),
        ];
        row.extend(r.leakage_mw.iter().map(f64::to_string));
        row.push(r.iterations.to_string());
        row.push(r.wall_ms.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(result: &SweepResult, out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "sweep_value_dbm",
        "scheme",
        "trials",
        "mean_sum_rate_bps_hz",
        "mean_rate_user1_channel1_bps_hz",
        "max_leakage_ratio",
        "mean_gap_bps_hz",
    ])?;
    for s in &result.summary {
        w.write_record([
            s.sweep_value_dbm.to_string(),
            s.scheme.to_string(),
            s.trials.to_string(),
            s.mean_sum_rate.to_string(),
            s.mean_reference_rate.to_string(),
            s.max_leakage_ratio.to_string(),
            s.mean_gap.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_validation_csv<W: Write>(report: &ValidationReport, out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "trial",
        "user",
        "channel",
        "upsilon_bps_hz",
        "mc_mean_bps_hz",
        "mc_std_error_bps_hz",
        "relative_gap",
    ])?;
    for r in &report.rows {
        w.write_record([
            (r.trial + 1).to_string(),
            (r.user + 1).to_string(),
            (r.channel + 1).to_string(),
            r.upsilon.to_string(),
            r.mc_mean.to_string(),
            r.mc_std_error.to_string(),
            r.relative_gap.map_or_else(String::new, |g| g.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

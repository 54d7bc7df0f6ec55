//! The three data-producing experiments. Each returns its table plus a few
//! header notes; writing happens only after everything has been computed.

use thinsim::analytic::{self, ThinningProbability};
use thinsim::montecarlo::{self, trials_for_users};
use thinsim::stats::ks_distance;

use crate::config::ExperimentSpec;
use crate::output::Table;
use crate::{CliError, Result};

/// Points on the `r` axis of the ratio-CDF table, spanning `[1, 6]`.
pub const RATIO_GRID_POINTS: usize = 200;
pub const RATIO_GRID_MAX: f64 = 6.0;

/// Relative agreement demanded between the quadrature and closed-form
/// coverage at `α = 4` before any row is written.
pub const ALPHA4_CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub table: Table,
    pub notes: Vec<String>,
}

pub fn ratio_grid() -> Vec<f64> {
    let last = (RATIO_GRID_POINTS - 1) as f64;
    (0..RATIO_GRID_POINTS)
        .map(|i| 1.0 + (RATIO_GRID_MAX - 1.0) * i as f64 / last)
        .collect()
}

/// Analytic and empirical CDF of `R = R2 / R1` for every `p`, with the KS
/// distance of each empirical sample.
pub fn cmd_ratio_cdf(spec: &ExperimentSpec) -> Result<Experiment> {
    let mut table = Table::new(vec![
        "p",
        "r",
        "analytic_cdf",
        "empirical_cdf",
        "ks_distance",
    ]);
    let mut notes = Vec::new();
    let grid = ratio_grid();
    for &p in &spec.p_list {
        let tp = ThinningProbability::new(p)?;
        let cfg = spec.scenario_for(p);
        let dist = montecarlo::estimate_ratio_distribution(&cfg)?;
        let ks = ks_distance(&dist, |r| analytic::ratio_cdf(r, tp).unwrap_or(0.0));
        notes.push(format!(
            "p={p}: samples={} redraws={} ks={ks}",
            dist.len(),
            dist.redraw_count()
        ));
        for &r in &grid {
            table.push(vec![p, r, analytic::ratio_cdf(r, tp)?, dist.ecdf_at(r), ks]);
        }
    }
    Ok(Experiment { table, notes })
}

/// Analytic and Monte Carlo coverage over the threshold grid for every `p`.
pub fn cmd_coverage(spec: &ExperimentSpec) -> Result<Experiment> {
    let mut table = Table::new(vec![
        "p",
        "t_db",
        "t_linear",
        "analytic",
        "empirical",
        "ci_lo",
        "ci_hi",
    ]);
    let db = spec.threshold_grid_db.db_values();
    let thresholds = spec.threshold_grid_db.linear_values();
    let alpha = spec.scenario.alpha;
    for &p in &spec.p_list {
        let cfg = spec.scenario_for(p);
        let curve = montecarlo::estimate_coverage(&cfg, &thresholds)?;
        for (i, (&t_db, &t)) in db.iter().zip(&thresholds).enumerate() {
            let exact = analytic::coverage_probability(alpha, t, p)?;
            if alpha == 4.0 {
                let closed = analytic::coverage_probability_alpha4(t, p)?;
                if ((exact - closed) / closed).abs() > ALPHA4_CHECK_TOLERANCE {
                    return Err(CliError::Consistency(format!(
                        "coverage at T={t}, p={p}: quadrature {exact} vs closed form {closed}"
                    )));
                }
            }
            table.push(vec![
                p,
                t_db,
                t,
                exact,
                curve.values[i],
                curve.ci_lo[i],
                curve.ci_hi[i],
            ]);
        }
    }
    Ok(Experiment {
        table,
        notes: vec![format!("trials per p: {}", spec.scenario.trials)],
    })
}

/// Generative-model coverage against the analytic curve at the same `p`
/// and against the uniform-user baseline (`p = 1`).
pub fn cmd_generative(spec: &ExperimentSpec) -> Result<Experiment> {
    let mut table = Table::new(vec![
        "p",
        "t_db",
        "t_linear",
        "generative",
        "ci_lo",
        "ci_hi",
        "analytic",
        "baseline",
        "gap_analytic",
        "gap_baseline",
        "ue_samples",
        "trials",
        "serving_mismatches",
    ]);
    let mut notes = Vec::new();
    let db = spec.threshold_grid_db.db_values();
    let thresholds = spec.threshold_grid_db.linear_values();
    let alpha = spec.scenario.alpha;
    for &p in &spec.p_list {
        let mut cfg = spec.scenario_for(p);
        cfg.trials = trials_for_users(&cfg, spec.ue_samples);
        // Any serving mismatch aborts the run with an error, so a finished
        // table always records zero.
        let result = montecarlo::estimate_generative_coverage(&cfg, &thresholds)?;
        notes.push(format!(
            "p={p}: trials={} ue_samples={}",
            result.trials, result.ue_samples
        ));
        let curve = &result.curve;
        for (i, (&t_db, &t)) in db.iter().zip(&thresholds).enumerate() {
            let exact = analytic::coverage_probability(alpha, t, p)?;
            let baseline = analytic::coverage_probability(alpha, t, 1.0)?;
            table.push(vec![
                p,
                t_db,
                t,
                curve.values[i],
                curve.ci_lo[i],
                curve.ci_hi[i],
                exact,
                baseline,
                curve.values[i] - exact,
                curve.values[i] - baseline,
                result.ue_samples as f64,
                result.trials as f64,
                0.0,
            ]);
        }
    }
    Ok(Experiment { table, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Command, ConfigFile, Overrides};

    fn spec(command: Command, json: &str) -> ExperimentSpec {
        ExperimentSpec::resolve(
            command,
            ConfigFile::from_json(json).unwrap(),
            Overrides::default(),
        )
        .unwrap()
    }

    #[test]
    fn ratio_grid_spans_one_to_six() {
        let g = ratio_grid();
        assert_eq!(g.len(), 200);
        assert_eq!((g[0], g[199]), (1.0, 6.0));
    }

    #[test]
    fn ratio_table_shape() {
        let e = cmd_ratio_cdf(&spec(
            Command::RatioCdf,
            r#"{"trials": 500, "p_list": [0.5, 1.0]}"#,
        ))
        .unwrap();
        assert_eq!(e.table.rows.len(), 400);
        let analytic = e.table.column("analytic_cdf").unwrap();
        assert_eq!(analytic[0], 0.0);
        assert_eq!(analytic[200], 0.0);
        assert_eq!(e.notes.len(), 2);
    }

    #[test]
    fn coverage_table_with_zero_p() {
        let e = cmd_coverage(&spec(
            Command::Coverage,
            r#"{"trials": 300, "p_list": [0.0, 0.5], "threshold_grid_db": {"min_db": -5, "max_db": 5, "steps": 5}}"#,
        ))
        .unwrap();
        assert_eq!(e.table.rows.len(), 10);
        for row in &e.table.rows[..5] {
            assert_eq!(row[3], 1.0);
            assert_eq!(row[4], 1.0);
        }
        for rows in e.table.rows.chunks(5) {
            assert!(rows.windows(2).all(|w| w[0][3] > w[1][3] || w[0][0] == 0.0));
            assert!(rows.windows(2).all(|w| w[0][4] >= w[1][4]));
        }
    }

    #[test]
    fn generative_table_shape() {
        let e = cmd_generative(&spec(
            Command::Generative,
            r#"{"ue_samples": 300, "p_list": [0.5], "threshold_grid_db": {"min_db": 0, "max_db": 10, "steps": 3}}"#,
        ))
        .unwrap();
        assert_eq!(e.table.rows.len(), 3);
        let users = e.table.column("ue_samples").unwrap()[0];
        assert!(users >= 300.0 * 0.8, "{users}");
        assert_eq!(e.table.column("serving_mismatches").unwrap(), vec![0.0; 3]);
    }
}

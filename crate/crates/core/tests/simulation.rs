//! Monte Carlo estimates against closed forms at moderate sample sizes.

use thinsim::analytic::{self, ThinningProbability};
use thinsim::geometry::{self, NeighborIndex, Point2, PointPattern, Window};
use thinsim::montecarlo::{self, ScenarioConfig};
use thinsim::rng::{StreamRole, TrialKey};
use thinsim::stats;
use thinsim::Execution;

fn tp(p: f64) -> ThinningProbability {
    ThinningProbability::new(p).unwrap()
}

#[test]
fn ratio_distribution_fits_closed_form() {
    for (p, seed) in [(0.3, 11), (1.0, 12)] {
        let cfg = ScenarioConfig::new(1.0, p, 4.0)
            .with_seed(seed)
            .with_trials(20_000);
        let dist = montecarlo::estimate_ratio_distribution(&cfg).unwrap();
        assert_eq!(dist.len(), 20_000);
        let d = stats::ks_distance(&dist, |r| analytic::ratio_cdf(r, tp(p)).unwrap());
        let crit = stats::ks_critical_value(0.001, dist.len(), None);
        assert!(d < crit, "p={p}: KS {d} >= {crit}");
    }
}

#[test]
fn ratio_cdf_at_two_matches_frequency() {
    let p = 0.3;
    let cfg = ScenarioConfig::new(1.0, p, 4.0)
        .with_seed(21)
        .with_trials(20_000);
    let dist = montecarlo::estimate_ratio_distribution(&cfg).unwrap();
    let exact = analytic::ratio_cdf(2.0, tp(p)).unwrap();
    assert!((exact - 0.9 / 1.9).abs() < 1e-12);
    let hits = (dist.ecdf_at(2.0) * dist.len() as f64).round() as u64;
    let (lo, hi) = stats::wilson_interval(hits, dist.len() as u64, 0.999).unwrap();
    assert!(lo <= exact && exact <= hi, "{exact} not in [{lo}, {hi}]");
}

#[test]
fn coverage_matches_closed_form_at_alpha4() {
    let thresholds = [0.1, 1.0, 10.0];
    for (p, seed) in [(0.5, 31), (1.0, 32)] {
        let cfg = ScenarioConfig::new(1.0, p, 4.0)
            .with_seed(seed)
            .with_trials(20_000);
        let curve = montecarlo::estimate_coverage(&cfg, &thresholds).unwrap();
        for (i, &t) in thresholds.iter().enumerate() {
            let exact = analytic::coverage_probability_alpha4(t, p).unwrap();
            let gap = (curve.values[i] - exact).abs();
            assert!(
                gap <= 4.0 * curve.ci_half_width(i),
                "p={p} T={t}: {} vs {exact}",
                curve.values[i]
            );
        }
    }
}

#[test]
fn coverage_does_not_depend_on_density() {
    let thresholds = [1.0];
    let estimate = |lambda: f64| {
        let cfg = ScenarioConfig::new(lambda, 0.7, 4.0)
            .with_seed(41)
            .with_trials(10_000);
        montecarlo::estimate_coverage(&cfg, &thresholds).unwrap()
    };
    let (a, b) = (estimate(1.0), estimate(10.0));
    let tol = 4.0 * (a.ci_half_width(0) + b.ci_half_width(0));
    assert!((a.values[0] - b.values[0]).abs() <= tol);
}

#[test]
fn sequential_and_parallel_agree() {
    let cfg = ScenarioConfig::new(1.0, 0.5, 4.0)
        .with_seed(51)
        .with_trials(500);
    let thresholds = [0.5, 1.0, 2.0];
    let seq = montecarlo::estimate_coverage_with(&cfg, &thresholds, Execution::Sequential).unwrap();
    let par = montecarlo::estimate_coverage_with(&cfg, &thresholds, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    let seq = montecarlo::estimate_ratio_distribution_with(&cfg, Execution::Sequential).unwrap();
    let par = montecarlo::estimate_ratio_distribution_with(&cfg, Execution::Parallel).unwrap();
    assert_eq!(seq.samples(), par.samples());
}

#[test]
fn generative_users_are_served_by_their_cell() {
    let cfg = ScenarioConfig::new(1.0, 0.5, 4.0)
        .with_seed(61)
        .with_trials(5);
    for trial in 0..cfg.trials {
        let outcomes = montecarlo::run_generative_trial(&cfg, trial).unwrap();
        assert!(!outcomes.is_empty());
        for o in outcomes {
            assert!(o.r1 > 0.0 && o.sir > 0.0);
            if let Some(r2) = o.r2 {
                assert!(r2 >= o.r1);
            }
        }
    }
}

#[test]
fn generative_model_sits_between_baseline_and_full_load() {
    let cfg = ScenarioConfig::new(1.0, 0.3, 4.0).with_seed(71);
    let cfg = cfg
        .clone()
        .with_trials(montecarlo::trials_for_users(&cfg, 10_000));
    let thresholds = [1.0];
    let g = montecarlo::estimate_generative_coverage(&cfg, &thresholds).unwrap();
    assert!(g.ue_samples >= 9_000);
    let analytic = analytic::coverage_probability_alpha4(1.0, 0.3).unwrap();
    let full_load = analytic::coverage_probability_alpha4(1.0, 1.0).unwrap();
    assert!(g.curve.values[0] > full_load + 0.1);
    assert!(
        (g.curve.values[0] - analytic).abs() < 0.03,
        "{} vs {analytic}",
        g.curve.values[0]
    );
}

#[test]
fn users_sampled_in_a_cell_are_closest_to_its_point() {
    let window = Window::disk(Point2::ORIGIN, 10.0).unwrap();
    let mut rng = TrialKey::new(81, 0).stream(StreamRole::Pattern);
    let pattern: PointPattern = geometry::sample_ppp(1.0, window, &mut rng).unwrap();
    let index = NeighborIndex::new(&pattern);
    let mut ue_rng = TrialKey::new(81, 0).stream(StreamRole::UePlacement);
    for cell in 0..pattern.len().min(40) {
        let q = geometry::sample_uniform_in_cell(&index, cell, &mut ue_rng, 1_000_000).unwrap();
        assert_eq!(geometry::cell_owner(&pattern, q).unwrap(), cell);
    }
}

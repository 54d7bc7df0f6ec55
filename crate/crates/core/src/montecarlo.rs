//! Trial runners for the typical-user model and the generative
//! non-uniform user model.
//!
//! Every trial is a pure function of `(ScenarioConfig, trial index)`: its
//! random streams come from [`TrialKey`], so results do not depend on the
//! number of threads or the order in which trials execute.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::analytic::{check_alpha, ThinningProbability};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{self, NeighborIndex, Point2, Window, DEFAULT_MAX_ATTEMPTS};
use crate::rng::{StreamRole, TrialKey};
use crate::stats::{CoverageCurve, EmpiricalDistribution};

/// Attempts per trial before an empty (or, for the ratio experiment,
/// interferer-free) draw is reported as a configuration error.
pub const REGENERATION_LIMIT: u32 = 100;

/// Out-of-window interference may be at most this fraction of the
/// in-window interference beyond the serving distance.
pub const TRUNCATION_TOLERANCE: f64 = 1e-3;

/// Minimum expected number of points in a default window.
pub const MIN_DEFAULT_POINTS: f64 = 500.0;

/// Default windows never hold more than this many points on average; the
/// truncation policy is relaxed (with a warning) rather than exceeded.
pub const MAX_DEFAULT_POINTS: f64 = 200_000.0;

/// Below this expected point count a configuration draws a warning.
pub const MIN_EXPECTED_POINTS: f64 = 50.0;

/// Everything needed to reproduce an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Density of the unthinned process.
    pub lambda: f64,
    /// Retention probability of the thinning.
    pub p: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Radius of the disk window centered on the origin.
    pub window_radius: f64,
    /// Outer fraction of the window whose cells are not evaluated in the
    /// generative model.
    pub guard_fraction: f64,
    /// Users placed in each evaluated cell of the generative model.
    pub users_per_cell: u32,
    pub seed: u64,
    pub trials: u64,
}

/// Mean distance from a typical location to the nearest point of a PPP.
fn mean_serving_distance(lambda: f64) -> f64 {
    0.5 / lambda.sqrt()
}

/// Smallest radius meeting the truncation policy and the minimum point count.
///
/// The expected interference from beyond radius `R` is
/// `2πλp R^(2-α) / (α - 2)`; against the in-window part beyond a typical
/// serving distance `r1` this gives the ratio
/// `(R/r1)^(2-α) / (1 - (R/r1)^(2-α))`, which must stay below
/// [`TRUNCATION_TOLERANCE`].
pub fn default_window_radius(lambda: f64, alpha: f64) -> f64 {
    let r1 = mean_serving_distance(lambda);
    let tail = r1 * (1.0 / TRUNCATION_TOLERANCE + 1.0).powf(1.0 / (alpha - 2.0));
    let count_floor = (MIN_DEFAULT_POINTS / (lambda * PI)).sqrt();
    let cap = (MAX_DEFAULT_POINTS / (lambda * PI)).sqrt();
    let radius = tail.max(count_floor);
    if radius > cap {
        log::warn!(
            "alpha = {alpha}: truncation policy needs window radius {radius:.3e}; capping at {cap:.3e}"
        );
        cap
    } else {
        radius
    }
}

impl ScenarioConfig {
    /// Scenario with default window, guard band (0.2), one user per cell,
    /// seed 0 and 10⁴ trials.
    pub fn new(lambda: f64, p: f64, alpha: f64) -> Self {
        Self {
            lambda,
            p,
            alpha,
            window_radius: default_window_radius(lambda, alpha),
            guard_fraction: 0.2,
            users_per_cell: 1,
            seed: 0,
            trials: 10_000,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn window(&self) -> Window {
        Window::Disk {
            center: Point2::ORIGIN,
            radius: self.window_radius,
        }
    }

    pub fn expected_points(&self) -> f64 {
        self.lambda * PI * self.window_radius * self.window_radius
    }

    /// Expected out-of-window over in-window interference for a user at a
    /// typical serving distance.
    pub fn truncation_ratio(&self) -> f64 {
        let x = (self.window_radius / mean_serving_distance(self.lambda)).powf(2.0 - self.alpha);
        if x >= 1.0 {
            f64::INFINITY
        } else {
            x / (1.0 - x)
        }
    }

    pub fn satisfies_truncation_policy(&self) -> bool {
        self.truncation_ratio() <= TRUNCATION_TOLERANCE * (1.0 + 1e-9)
    }

    /// Checks hard constraints and returns soft warnings (also logged).
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(
                "lambda",
                self.lambda,
                "must be positive and finite",
            ));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid("p", self.p, "must lie in [0, 1]"));
        }
        check_alpha(self.alpha)?;
        if !(self.window_radius > 0.0 && self.window_radius.is_finite()) {
            return Err(Error::invalid(
                "window_radius",
                self.window_radius,
                "must be positive and finite",
            ));
        }
        if !(self.guard_fraction > 0.0 && self.guard_fraction < 1.0) {
            return Err(Error::invalid(
                "guard_fraction",
                self.guard_fraction,
                "must lie in (0, 1)",
            ));
        }
        if self.users_per_cell == 0 {
            return Err(Error::invalid("users_per_cell", 0.0, "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", 0.0, "must be at least 1"));
        }
        let mut warnings = Vec::new();
        if self.expected_points() < MIN_EXPECTED_POINTS {
            warnings.push(format!(
                "expected point count {:.1} is below {MIN_EXPECTED_POINTS}",
                self.expected_points()
            ));
        }
        if !self.satisfies_truncation_policy() {
            warnings.push(format!(
                "window radius {} leaves out-of-window interference at {:.2e} of in-window (limit {TRUNCATION_TOLERANCE:e})",
                self.window_radius,
                self.truncation_ratio()
            ));
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        Ok(warnings)
    }
}

/// One transmitter-to-user link under Rayleigh fading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingLink {
    /// Exponential(1) channel power.
    pub h: f64,
    pub distance: f64,
    pub tx_power: f64,
}

impl FadingLink {
    pub fn draw<R: Rng + ?Sized>(distance: f64, rng: &mut R) -> Self {
        Self {
            h: Exp1.sample(rng),
            distance,
            tx_power: 1.0,
        }
    }

    /// `P h d^(-α)`.
    #[inline]
    pub fn received_power(&self, alpha: f64) -> f64 {
        self.tx_power * self.h * self.distance.powf(-alpha)
    }
}

/// Serving distance, nearest-interferer distance and SIR seen by one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub r1: f64,
    /// `None` when no interferer survived the thinning.
    pub r2: Option<f64>,
    /// `+∞` without interference.
    pub sir: f64,
    /// Draws discarded before this one (empty patterns, or missing
    /// interferers in the ratio experiment).
    pub redraws: u32,
}

impl TrialOutcome {
    pub fn covered(&self, threshold: f64) -> bool {
        self.sir > threshold
    }

    pub fn ratio(&self) -> Option<f64> {
        self.r2.map(|r2| r2 / self.r1)
    }
}

/// SIR and distances for a user at `ue` served by `bs[serving]`; one fading
/// draw per station, in pattern order.
fn evaluate_links<R: Rng + ?Sized>(
    ue: Point2,
    stations: &[Point2],
    serving: usize,
    alpha: f64,
    rng: &mut R,
) -> (f64, Option<f64>, f64) {
    let mut signal = 0.0;
    let mut interference = 0.0;
    let mut r1 = 0.0;
    let mut nearest_interferer = f64::INFINITY;
    for (j, &s) in stations.iter().enumerate() {
        let link = FadingLink::draw(s.dist(ue), rng);
        let power = link.received_power(alpha);
        if j == serving {
            r1 = link.distance;
            signal = power;
        } else {
            interference += power;
            nearest_interferer = nearest_interferer.min(link.distance);
        }
    }
    let sir = if interference > 0.0 {
        signal / interference
    } else {
        f64::INFINITY
    };
    let r2 = nearest_interferer.is_finite().then_some(nearest_interferer);
    (r1, r2, sir)
}

/// One typical-user draw, or `None` if the PPP came out empty.
fn typical_ue_draw(cfg: &ScenarioConfig, key: TrialKey) -> Result<Option<TrialOutcome>> {
    let pattern = geometry::sample_ppp(
        cfg.lambda,
        cfg.window(),
        &mut key.stream(StreamRole::Pattern),
    )?;
    if pattern.is_empty() {
        return Ok(None);
    }
    let serving = geometry::cell_owner(&pattern, Point2::ORIGIN)?;
    let thinned = geometry::conditional_thin(
        &pattern,
        serving,
        cfg.p,
        &mut key.stream(StreamRole::Thinning),
    )?;
    // Thinning keeps order and the serving point, so it stays the nearest.
    let serving = geometry::cell_owner(&thinned, Point2::ORIGIN)?;
    let (r1, r2, sir) = evaluate_links(
        Point2::ORIGIN,
        thinned.points(),
        serving,
        cfg.alpha,
        &mut key.stream(StreamRole::Fading),
    );
    Ok(Some(TrialOutcome {
        r1,
        r2,
        sir,
        redraws: key.attempt,
    }))
}

fn typical_ue_trial_where(
    cfg: &ScenarioConfig,
    trial_index: u64,
    accept: impl Fn(&TrialOutcome) -> bool,
) -> Result<TrialOutcome> {
    let base = TrialKey::new(cfg.seed, trial_index);
    for attempt in 0..=REGENERATION_LIMIT {
        if let Some(outcome) = typical_ue_draw(cfg, base.with_attempt(attempt))? {
            if accept(&outcome) {
                return Ok(outcome);
            }
        }
    }
    Err(Error::RegenerationLimit {
        attempts: REGENERATION_LIMIT,
    })
}

/// Typical user at the origin: serve from the nearest point of a PPP, thin
/// the rest with probability `p`, and measure `r1`, `r2` and the SIR.
///
/// Empty patterns are redrawn from fresh streams (counted in
/// [`TrialOutcome::redraws`]).
pub fn run_typical_ue_trial(cfg: &ScenarioConfig, trial_index: u64) -> Result<TrialOutcome> {
    typical_ue_trial_where(cfg, trial_index, |_| true)
}

/// `cfg.trials` samples of `R = r2 / r1` from the typical-user model.
///
/// Trials without a surviving interferer are redrawn; the total number of
/// redraws is recorded on the result.
pub fn estimate_ratio_distribution(cfg: &ScenarioConfig) -> Result<EmpiricalDistribution> {
    estimate_ratio_distribution_with(cfg, Execution::default())
}

pub fn estimate_ratio_distribution_with(
    cfg: &ScenarioConfig,
    exec: Execution,
) -> Result<EmpiricalDistribution> {
    cfg.validate()?;
    ThinningProbability::new(cfg.p)?;
    let outcomes = exec.try_map(cfg.trials, |i| {
        typical_ue_trial_where(cfg, i, |o| o.r2.is_some())
    })?;
    let redraws = outcomes.iter().map(|o| u64::from(o.redraws)).sum();
    let samples = outcomes
        .iter()
        .map(|o| o.ratio().expect("accepted trials have an interferer"))
        .collect();
    Ok(
        EmpiricalDistribution::new(samples, format!("typical-ue p={}", cfg.p))?
            .with_redraws(redraws),
    )
}

fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    let ok = !thresholds.is_empty()
        && thresholds.iter().all(|t| *t > 0.0 && t.is_finite())
        && thresholds.windows(2).all(|w| w[0] <= w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidThresholds)
    }
}

/// Per-threshold counts of `sir > T` in a single pass over the sample.
fn coverage_counts(thresholds: &[f64], sirs: impl IntoIterator<Item = f64>) -> Vec<u64> {
    let mut diff = vec![0u64; thresholds.len() + 1];
    for sir in sirs {
        // Covered at every threshold strictly below the SIR.
        let k = thresholds.partition_point(|&t| t < sir);
        diff[k] += 1;
    }
    let mut counts = vec![0u64; thresholds.len()];
    let mut running = 0;
    for i in (0..thresholds.len()).rev() {
        running += diff[i + 1];
        counts[i] = running;
    }
    counts
}

/// Fraction of typical-user trials with `SIR > T` for each threshold, with
/// Wilson 95% intervals. One SIR per trial serves every threshold.
pub fn estimate_coverage(cfg: &ScenarioConfig, thresholds: &[f64]) -> Result<CoverageCurve> {
    estimate_coverage_with(cfg, thresholds, Execution::default())
}

pub fn estimate_coverage_with(
    cfg: &ScenarioConfig,
    thresholds: &[f64],
    exec: Execution,
) -> Result<CoverageCurve> {
    check_thresholds(thresholds)?;
    cfg.validate()?;
    let outcomes = exec.try_map(cfg.trials, |i| run_typical_ue_trial(cfg, i))?;
    let counts = coverage_counts(thresholds, outcomes.iter().map(|o| o.sir));
    CoverageCurve::from_counts(thresholds.to_vec(), &counts, cfg.trials)
}

/// One realization of the generative model.
///
/// Users are placed uniformly in the Voronoi cells of the full pattern,
/// then stations are thinned with probability `p` and users of removed
/// stations dropped. Only stations inside the inner
/// `(1 - guard_fraction)` disk are evaluated; all retained stations
/// interfere. Each user's nearest retained station is checked to be its
/// original one.
pub fn run_generative_trial(cfg: &ScenarioConfig, trial_index: u64) -> Result<Vec<TrialOutcome>> {
    let key = TrialKey::new(cfg.seed, trial_index);
    let pattern = geometry::sample_ppp(
        cfg.lambda,
        cfg.window(),
        &mut key.stream(StreamRole::Pattern),
    )?;
    let (stations, source) =
        geometry::thin(&pattern, cfg.p, &mut key.stream(StreamRole::Thinning))?;
    if stations.is_empty() {
        return Ok(Vec::new());
    }
    let full_index = NeighborIndex::new(&pattern);
    let station_index = NeighborIndex::new(&stations);
    let inner = (1.0 - cfg.guard_fraction) * cfg.window_radius;
    let mut placement = key.stream(StreamRole::UePlacement);
    let mut fading = key.stream(StreamRole::Fading);
    let mut outcomes = Vec::new();
    for (serving, &cell) in source.iter().enumerate() {
        if pattern.points()[cell].norm() > inner {
            continue;
        }
        for _ in 0..cfg.users_per_cell {
            let ue = geometry::sample_uniform_in_cell(
                &full_index,
                cell,
                &mut placement,
                DEFAULT_MAX_ATTEMPTS,
            )?;
            let nearest = station_index.cell_owner(ue)?;
            if nearest != serving {
                return Err(Error::ServingMismatch {
                    expected: serving,
                    found: nearest,
                });
            }
            let (r1, r2, sir) =
                evaluate_links(ue, stations.points(), serving, cfg.alpha, &mut fading);
            outcomes.push(TrialOutcome {
                r1,
                r2,
                sir,
                redraws: 0,
            });
        }
    }
    Ok(outcomes)
}

/// Coverage averaged over all evaluated users of the generative model.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeCoverage {
    pub curve: CoverageCurve,
    pub ue_samples: u64,
    pub trials: u64,
}

/// Users per trial expected from the generative model.
pub fn expected_generative_users(cfg: &ScenarioConfig) -> f64 {
    let inner = (1.0 - cfg.guard_fraction) * cfg.window_radius;
    cfg.lambda * cfg.p * PI * inner * inner * f64::from(cfg.users_per_cell)
}

/// Trials needed for about `target` user samples, with a 10% margin.
pub fn trials_for_users(cfg: &ScenarioConfig, target: u64) -> u64 {
    let per_trial = expected_generative_users(cfg);
    if per_trial <= 0.0 {
        return 1;
    }
    ((1.1 * target as f64 / per_trial).ceil() as u64).max(1)
}

/// Coverage of the generative model; every evaluated user (and hence every
/// retained evaluated cell, since each gets `users_per_cell` users) carries
/// equal weight.
pub fn estimate_generative_coverage(
    cfg: &ScenarioConfig,
    thresholds: &[f64],
) -> Result<GenerativeCoverage> {
    estimate_generative_coverage_with(cfg, thresholds, Execution::default())
}

pub fn estimate_generative_coverage_with(
    cfg: &ScenarioConfig,
    thresholds: &[f64],
    exec: Execution,
) -> Result<GenerativeCoverage> {
    check_thresholds(thresholds)?;
    cfg.validate()?;
    let per_trial = exec.try_map(cfg.trials, |i| {
        let outcomes = run_generative_trial(cfg, i)?;
        Ok::<_, Error>((
            coverage_counts(thresholds, outcomes.iter().map(|o| o.sir)),
            outcomes.len() as u64,
        ))
    })?;
    let mut counts = vec![0u64; thresholds.len()];
    let mut users = 0;
    for (c, n) in &per_trial {
        for (total, k) in counts.iter_mut().zip(c) {
            *total += k;
        }
        users += n;
    }
    if users == 0 {
        return Err(Error::InsufficientPoints {
            needed: 1,
            found: 0,
        });
    }
    Ok(GenerativeCoverage {
        curve: CoverageCurve::from_counts(thresholds.to_vec(), &counts, users)?,
        ue_samples: users,
        trials: cfg.trials,
    })
}

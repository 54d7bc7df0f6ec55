//! Empirical distributions and the comparison statistics used to check
//! simulations against closed forms.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::analytic::ThinningProbability;
use crate::error::{Error, Result};

/// Sorted sample with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
    redraw_count: u64,
    source: String,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientPoints {
                needed: 1,
                found: 0,
            });
        }
        if let Some(&bad) = samples.iter().find(|v| v.is_nan()) {
            return Err(Error::invalid("sample", bad, "must not be NaN"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self {
            samples,
            redraw_count: 0,
            source: source.into(),
        })
    }

    pub fn with_redraws(mut self, redraw_count: u64) -> Self {
        self.redraw_count = redraw_count;
        self
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn redraw_count(&self) -> u64 {
        self.redraw_count
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Right-continuous empirical CDF: fraction of samples `≤ x`.
    pub fn ecdf_at(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.samples.len() as f64
    }

    /// Left limit `F_n(x⁻)`: fraction of samples `< x`.
    pub fn ecdf_below(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s < x) as f64 / self.samples.len() as f64
    }
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n - F|` against a continuous CDF.
///
/// Evaluated exactly at the sample points, checking both sides of each jump.
pub fn ks_distance<F: Fn(f64) -> f64>(dist: &EmpiricalDistribution, cdf: F) -> f64 {
    ks_distance_with_left_limits(dist, &cdf, &cdf)
}

/// KS statistic against a CDF that may jump at sample points; `cdf_below(x)`
/// must return the left limit `F(x⁻)`.
pub fn ks_distance_with_left_limits<F, G>(dist: &EmpiricalDistribution, cdf: F, cdf_below: G) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let s = &dist.samples;
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        // Runs of equal values form a single jump.
        let mut j = i + 1;
        while j < s.len() && s[j] == s[i] {
            j += 1;
        }
        d = d
            .max((i as f64 / n - cdf_below(s[i])).abs())
            .max((j as f64 / n - cdf(s[i])).abs());
        i = j;
    }
    d
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_n - G_m|`.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (x, y) = (&a.samples, &b.samples);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic KS critical value at significance `alpha` for sample sizes `n`
/// (one-sample, `m = None`) or `n`, `m` (two-sample).
pub fn ks_critical_value(alpha: f64, n: usize, m: Option<usize>) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let n = n as f64;
    match m {
        None => c / n.sqrt(),
        Some(m) => {
            let m = m as f64;
            c * ((n + m) / (n * m)).sqrt()
        }
    }
}

fn z_score(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::invalid(
            "confidence",
            confidence,
            "must lie in (0, 1)",
        ));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 + confidence / 2.0))
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, n: u64, confidence: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::invalid("n", 0.0, "need at least one trial"));
    }
    if successes > n {
        return Err(Error::invalid(
            "successes",
            successes as f64,
            "cannot exceed n",
        ));
    }
    let z = z_score(confidence)?;
    let nf = n as f64;
    let phat = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (phat + z2 / (2.0 * nf)) / denom;
    let half = z * (phat * (1.0 - phat) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == n {
        1.0
    } else {
        (center + half).min(1.0)
    };
    Ok((lo, hi))
}

/// Draws `R` by inverting its CDF: `r = √(1 + u / (p (1 - u)))`.
pub fn inverse_transform_ratio_sample(p: ThinningProbability, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::invalid("u", u, "must lie strictly inside (0, 1)"));
    }
    Ok((1.0 + u / (p.get() * (1.0 - u))).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Analytic,
    Empirical,
}

/// Coverage probability over a grid of SIR thresholds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageCurve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    /// Trials (or user samples) behind each value; 0 for analytic curves.
    pub n: u64,
    pub kind: CurveKind,
}

/// Confidence level of the intervals in empirical [`CoverageCurve`]s.
pub const COVERAGE_CONFIDENCE: f64 = 0.95;

impl CoverageCurve {
    pub fn analytic(thresholds: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(thresholds.len(), values.len());
        Self {
            ci_lo: values.clone(),
            ci_hi: values.clone(),
            thresholds,
            values,
            n: 0,
            kind: CurveKind::Analytic,
        }
    }

    /// Curve from per-threshold success counts out of `n` trials.
    pub fn from_counts(thresholds: Vec<f64>, successes: &[u64], n: u64) -> Result<Self> {
        assert_eq!(thresholds.len(), successes.len());
        let mut values = Vec::with_capacity(successes.len());
        let mut ci_lo = Vec::with_capacity(successes.len());
        let mut ci_hi = Vec::with_capacity(successes.len());
        for &k in successes {
            let (lo, hi) = wilson_interval(k, n, COVERAGE_CONFIDENCE)?;
            values.push(k as f64 / n as f64);
            ci_lo.push(lo);
            ci_hi.push(hi);
        }
        Ok(Self {
            thresholds,
            values,
            ci_lo,
            ci_hi,
            n,
            kind: CurveKind::Empirical,
        })
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn ci_half_widths(&self) -> Vec<f64> {
        self.ci_lo
            .iter()
            .zip(&self.ci_hi)
            .map(|(lo, hi)| 0.5 * (hi - lo))
            .collect()
    }

    pub fn ci_half_width(&self, i: usize) -> f64 {
        0.5 * (self.ci_hi[i] - self.ci_lo[i])
    }
}

//! Closed forms for the conditionally thinned network.
//!
//! With `R1`, `R2` the distances from the typical user to its serving
//! station and to the nearest surviving interferer, the ratio `R = R2 / R1`
//! has `P[R > r] = 1 / (1 + p (r² - 1))` for `r ≥ 1`. Under Rayleigh fading
//! and no noise the coverage probability is
//! `P[SIR > T] = 1 / (1 + p ρ(α, T))` with
//! `ρ(α, T) = T^(2/α) ∫_{T^(-2/α)}^∞ du / (1 + u^(α/2))`, which does not
//! depend on the station density.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};

/// Thinning probability in `(0, 1]`, the domain of the distance-ratio
/// formulas (at `p = 0` no interferer survives and `R` is undefined).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ThinningProbability(f64);

impl ThinningProbability {
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p <= 1.0 {
            Ok(Self(p))
        } else {
            Err(Error::invalid("p", p, "must lie in (0, 1]"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ThinningProbability {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

/// Path-loss exponent and linear SIR threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    alpha: f64,
    threshold: f64,
}

impl ChannelParams {
    pub fn new(alpha: f64, threshold: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_threshold(threshold)?;
        Ok(Self { alpha, threshold })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 2.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "alpha",
            alpha,
            "path-loss exponent must exceed 2",
        ))
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "threshold",
            threshold,
            "must be positive and finite",
        ))
    }
}

fn check_ratio(r: f64) -> Result<()> {
    if r >= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("r", r, "distance ratio is at least 1"))
    }
}

/// `P[R > r] = 1 / (1 + p (r² - 1))`.
pub fn ratio_ccdf(r: f64, p: ThinningProbability) -> Result<f64> {
    check_ratio(r)?;
    if r.is_infinite() {
        return Ok(0.0);
    }
    Ok(1.0 / (1.0 + p.0 * (r * r - 1.0)))
}

/// CDF of `R = R2 / R1`: `1 - 1 / (1 + p (r² - 1))`.
pub fn ratio_cdf(r: f64, p: ThinningProbability) -> Result<f64> {
    check_ratio(r)?;
    if r.is_infinite() {
        return Ok(1.0);
    }
    // Same value as 1 - ccdf, without the cancellation near r = 1.
    let x = p.0 * (r * r - 1.0);
    Ok(x / (1.0 + x))
}

/// Joint density of the serving distance `r1` and nearest-interferer
/// distance `r2`: `p (2πλ)² r1 r2 exp(-λπ r1² (1 - p)) exp(-pλπ r2²)` on
/// `0 ≤ r1 ≤ r2`, zero elsewhere.
pub fn joint_pdf_r1_r2(r1: f64, r2: f64, lambda: f64, p: ThinningProbability) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(
            "lambda",
            lambda,
            "must be positive and finite",
        ));
    }
    if r1.is_nan() || r1 < 0.0 {
        return Err(Error::invalid("r1", r1, "distance must be non-negative"));
    }
    if r2.is_nan() || r2 < 0.0 {
        return Err(Error::invalid("r2", r2, "distance must be non-negative"));
    }
    if r2 < r1 || r2.is_infinite() {
        return Ok(0.0);
    }
    let p = p.0;
    let two_pi_lambda = 2.0 * PI * lambda;
    let exponent = -lambda * PI * (r1 * r1 * (1.0 - p) + p * r2 * r2);
    Ok(p * two_pi_lambda * two_pi_lambda * r1 * r2 * exponent.exp())
}

/// Above this `p` the mean is evaluated from its series about `p = 1`.
const MEAN_SERIES_CUTOFF: f64 = 1.0 - 1e-6;

/// `E[R] = 1 + (π/2 - atan(√(p / (1 - p)))) / √(p (1 - p))`, equal to 2 at `p = 1`.
pub fn mean_ratio(p: ThinningProbability) -> f64 {
    let p = p.0;
    // With s = √((1 - p) / p): π/2 - atan(1/s) = atan(s) and √(p(1 - p)) = p s,
    // so E[R] = 1 + atan(s) / (p s), whose s -> 0 limit is 1 + 1/p.
    let s = ((1.0 - p) / p).sqrt();
    if p > MEAN_SERIES_CUTOFF {
        let s2 = s * s;
        return 1.0 + (1.0 - s2 / 3.0 + s2 * s2 / 5.0) / p;
    }
    1.0 + s.atan() / (p * s)
}

/// Tolerance for the `ρ` integral.
pub const RHO_TOLERANCE: Tolerance = Tolerance {
    abs: 1e-10,
    rel: 1e-10,
    max_intervals: 20_000,
};

/// `ρ(α, T) = T^(2/α) ∫_{T^(-2/α)}^∞ du / (1 + u^(α/2))` by adaptive quadrature.
pub fn coverage_integral_rho(alpha: f64, threshold: f64) -> Result<f64> {
    let params = ChannelParams::new(alpha, threshold)?;
    rho(params)
}

fn rho(params: ChannelParams) -> Result<f64> {
    let half_alpha = params.alpha / 2.0;
    let scale = params.threshold.powf(2.0 / params.alpha);
    let lower = 1.0 / scale;
    let integral = quadrature::integrate_to_infinity(
        |u| 1.0 / (1.0 + u.powf(half_alpha)),
        lower,
        RHO_TOLERANCE,
    )?;
    Ok(scale * integral.value)
}

/// `ρ(4, T) = √T (π/2 - atan(1/√T))`.
pub fn rho_alpha4(threshold: f64) -> Result<f64> {
    check_threshold(threshold)?;
    let s = threshold.sqrt();
    Ok(s * (FRAC_PI_2 - (1.0 / s).atan()))
}

/// `P[SIR > T] = 1 / (1 + p ρ(α, T))`; `p = 0` (no interferers) gives 1.
pub fn coverage_probability(alpha: f64, threshold: f64, p: f64) -> Result<f64> {
    let params = ChannelParams::new(alpha, threshold)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", p, "must lie in [0, 1]"));
    }
    if p == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 / (1.0 + p * rho(params)?))
}

/// Closed-form coverage at `α = 4`: `1 / (1 + p √T (π/2 - atan(1/√T)))`.
pub fn coverage_probability_alpha4(threshold: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", p, "must lie in [0, 1]"));
    }
    Ok(1.0 / (1.0 + p * rho_alpha4(threshold)?))
}

/// Linear SIR threshold from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tp(p: f64) -> ThinningProbability {
        ThinningProbability::new(p).unwrap()
    }

    #[test]
    fn thinning_probability_domain() {
        assert!(ThinningProbability::new(0.0).is_err());
        assert!(ThinningProbability::new(1.0 + 1e-12).is_err());
        assert!(ThinningProbability::new(f64::NAN).is_err());
        assert_eq!(ThinningProbability::try_from(1.0).unwrap().get(), 1.0);
    }

    #[test]
    fn channel_params_domain() {
        assert!(ChannelParams::new(2.0, 1.0).is_err());
        assert!(ChannelParams::new(4.0, 0.0).is_err());
        assert!(ChannelParams::new(4.0, f64::INFINITY).is_err());
        let c = ChannelParams::new(3.5, 2.0).unwrap();
        assert_eq!((c.alpha(), c.threshold()), (3.5, 2.0));
    }

    #[test]
    fn ratio_cdf_examples() {
        for p in [0.01, 0.3, 1.0] {
            assert_eq!(ratio_cdf(1.0, tp(p)).unwrap(), 0.0);
        }
        assert!((ratio_cdf(2.0, tp(1.0)).unwrap() - 0.75).abs() < 1e-15);
        assert!((ratio_cdf(2.0, tp(0.3)).unwrap() - (1.0 - 1.0 / 1.9)).abs() < 1e-15);
        assert!((ratio_cdf(2.0, tp(0.3)).unwrap() - 0.473684).abs() < 1e-6);
        assert_eq!(ratio_cdf(f64::INFINITY, tp(0.5)).unwrap(), 1.0);
        assert!(ratio_cdf(0.999, tp(0.5)).is_err());
        assert!(ratio_cdf(f64::NAN, tp(0.5)).is_err());
    }

    #[test]
    fn ratio_cdf_p1_matches_uniform_user_case() {
        for i in 0..1000 {
            let r = 1.0 + i as f64 * 0.01;
            let a = ratio_cdf(r, tp(1.0)).unwrap();
            assert!((a - (1.0 - 1.0 / (r * r))).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_pdf_support() {
        assert_eq!(joint_pdf_r1_r2(0.0, 1.0, 1.0, tp(0.5)).unwrap(), 0.0);
        assert_eq!(joint_pdf_r1_r2(1.0, 0.5, 1.0, tp(0.5)).unwrap(), 0.0);
        assert!(joint_pdf_r1_r2(0.3, 0.5, 1.0, tp(0.5)).unwrap() > 0.0);
        assert!(joint_pdf_r1_r2(-0.1, 0.5, 1.0, tp(0.5)).is_err());
        assert!(joint_pdf_r1_r2(0.1, -0.5, 1.0, tp(0.5)).is_err());
        assert!(joint_pdf_r1_r2(0.1, 0.5, 0.0, tp(0.5)).is_err());
    }

    #[test]
    fn mean_ratio_values() {
        assert_eq!(mean_ratio(tp(1.0)), 2.0);
        assert!((mean_ratio(tp(0.5)) - (1.0 + FRAC_PI_2)).abs() < 1e-14);
        assert!((mean_ratio(tp(0.999_999)) - 2.0).abs() < 1e-3);
        // The series and the direct branch agree across the cutoff.
        let below = mean_ratio(tp(MEAN_SERIES_CUTOFF - 1e-9));
        let above = mean_ratio(tp(MEAN_SERIES_CUTOFF + 1e-9));
        assert!((below - above).abs() < 1e-8);
        // Direct evaluation of the arctangent form at a generic point.
        let p: f64 = 0.2;
        let direct =
            1.0 + (FRAC_PI_2 - (p.sqrt() / (1.0 - p).sqrt()).atan()) / (p * (1.0 - p)).sqrt();
        assert!((mean_ratio(tp(p)) - direct).abs() < 1e-13);
    }

    #[test]
    fn rho_examples() {
        let r = coverage_integral_rho(4.0, 1.0).unwrap();
        assert!((r - PI / 4.0).abs() < 1e-10);
        let tiny = coverage_integral_rho(4.0, 1e-8).unwrap();
        assert!(tiny <= 1e-4);
        assert!((coverage_probability(4.0, 1e-8, 1.0).unwrap() - 1.0).abs() < 1e-4);
        assert!(coverage_integral_rho(2.0, 1.0).is_err());
        assert!(coverage_integral_rho(4.0, -1.0).is_err());
    }

    #[test]
    fn rho_other_exponents() {
        // α = 6, T = 1: ∫_1^∞ du / (1 + u³), from ∫_0^∞ = 2π/(3√3) and
        // ∫_0^1 = ln(2)/3 + π/(3√3).
        let exact = {
            let total = 2.0 * PI / (3.0 * 3f64.sqrt());
            let head = 2f64.ln() / 3.0 + PI / (3.0 * 3f64.sqrt());
            total - head
        };
        let r = coverage_integral_rho(6.0, 1.0).unwrap();
        assert!(((r - exact) / exact).abs() < 1e-9, "{r} vs {exact}");
        // Near the α -> 2 boundary the integrand decays like u^-1.05.
        assert!(coverage_integral_rho(2.1, 1.0).unwrap().is_finite());
        assert!(coverage_integral_rho(3.0, 10.0).unwrap() > 0.0);
    }

    #[test]
    fn coverage_examples() {
        for (alpha, t) in [(4.0, 1.0), (3.0, 0.1), (5.0, 10.0)] {
            assert_eq!(coverage_probability(alpha, t, 0.0).unwrap(), 1.0);
        }
        let c = coverage_probability(4.0, 1.0, 1.0).unwrap();
        assert!((c - 1.0 / (1.0 + PI / 4.0)).abs() < 1e-10);
        assert!((c - 0.560099).abs() < 1e-6);
        let c = coverage_probability(4.0, 1.0, 0.5).unwrap();
        assert!((c - 1.0 / (1.0 + PI / 8.0)).abs() < 1e-10);
        assert!((c - 0.718030).abs() < 1e-6);
        assert!(coverage_probability(4.0, 1.0, 1.1).is_err());
        assert!(coverage_probability(1.5, 1.0, 0.5).is_err());
    }

    #[test]
    fn quadrature_matches_alpha4_closed_form() {
        for i in 0..50 {
            let t = 10f64.powf(-2.0 + 4.0 * i as f64 / 49.0);
            for p in [0.25, 0.5, 1.0] {
                let q = coverage_probability(4.0, t, p).unwrap();
                let c = coverage_probability_alpha4(t, p).unwrap();
                assert!(((q - c) / c).abs() < 1e-9, "T={t} p={p}");
            }
        }
    }

    #[test]
    fn db_conversion() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((db_to_linear(-10.0) - 0.1).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn ratio_cdf_is_a_cdf(p in 1e-3..=1.0f64, r in 1.0..1e3f64, dr in 0.0..10.0f64) {
            let p = tp(p);
            let a = ratio_cdf(r, p).unwrap();
            let b = ratio_cdf(r + dr, p).unwrap();
            prop_assert!((0.0..1.0).contains(&a));
            prop_assert!(b >= a);
            prop_assert!((a + ratio_ccdf(r, p).unwrap() - 1.0).abs() < 1e-14);
        }

        #[test]
        fn ratio_cdf_stochastic_ordering(p1 in 1e-3..0.99f64, gap in 1e-3..1.0f64, r in 1.001..100.0f64) {
            let p2 = (p1 + gap).min(1.0);
            prop_assume!(p2 > p1);
            prop_assert!(ratio_cdf(r, tp(p1)).unwrap() < ratio_cdf(r, tp(p2)).unwrap());
        }

        #[test]
        fn mean_ratio_decreasing(p in 0.01..0.99f64, gap in 1e-4..0.01f64) {
            let a = mean_ratio(tp(p));
            let b = mean_ratio(tp(p + gap));
            prop_assert!(a > b);
            prop_assert!(b >= 2.0);
        }

        #[test]
        fn coverage_decreasing_in_p_and_t(alpha in 2.2..6.0f64, t in 0.01..100.0f64, p in 0.0..0.95f64) {
            let lo = coverage_probability(alpha, t, p).unwrap();
            let hi = coverage_probability(alpha, t, p + 0.05).unwrap();
            prop_assert!(lo > hi);
            prop_assert!(hi > 0.0 && lo <= 1.0);
            let t2 = coverage_probability(alpha, t * 1.5, p + 0.05).unwrap();
            prop_assert!(t2 < hi);
        }
    }
}

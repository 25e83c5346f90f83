//! Probabilities for the true mean of a paired-difference study.
//!
//! With a uniform prior over possible true means, the belief about the true
//! mean after a study is Gaussian, centered on the observed mean difference
//! with the standard error of the mean as its scale. Under that reading the
//! one-sided P value against a null value is the same number as the posterior
//! probability that the true mean lies on the null's side of it.
//!
//! All quantities are unit-agnostic reals; the running example uses mmHg.

use serde::Serialize;

use crate::error::{finite, out_of_range, Error, Result};
use crate::gaussian::{self, Probability};

/// Summary of an observed study: number of paired observations, SD of the
/// paired differences and the observed mean difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudySummary {
    n: u64,
    sd: f64,
    mean_diff: f64,
}

impl StudySummary {
    pub fn new(n: u64, sd: f64, mean_diff: f64) -> Result<Self> {
        if n < 2 {
            return out_of_range("n", n as f64, "n >= 2");
        }
        let sd = finite("sd", sd)?;
        if sd <= 0.0 {
            return out_of_range("sd", sd, "sd > 0");
        }
        let mean_diff = finite("mean_diff", mean_diff)?;
        Ok(StudySummary { n, sd, mean_diff })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn mean_diff(&self) -> f64 {
        self.mean_diff
    }

    pub fn sem(&self) -> f64 {
        sem_of(self)
    }
}

/// Gaussian belief about the true mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanPosterior {
    mean: f64,
    sem: f64,
}

impl MeanPosterior {
    pub fn new(mean: f64, sem: f64) -> Result<Self> {
        let mean = finite("mean", mean)?;
        let sem = finite("sem", sem)?;
        if sem <= 0.0 {
            return out_of_range("sem", sem, "sem > 0");
        }
        Ok(MeanPosterior { mean, sem })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sem(&self) -> f64 {
        self.sem
    }
}

/// An interval of true values, possibly half-infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeOfInterest {
    lower: f64,
    upper: f64,
}

impl RangeOfInterest {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() {
            return Err(Error::NonFinite {
                name: "range bound",
            });
        }
        if lower >= upper {
            return out_of_range("range lower bound", lower, "lower < upper");
        }
        Ok(RangeOfInterest { lower, upper })
    }

    pub fn above(threshold: f64) -> Result<Self> {
        Self::new(threshold, f64::INFINITY)
    }

    pub fn below(threshold: f64) -> Result<Self> {
        Self::new(f64::NEG_INFINITY, threshold)
    }

    pub fn everything() -> Self {
        RangeOfInterest {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

/// Standard error of the mean, `sd / sqrt(n)`.
pub fn sem_of(s: &StudySummary) -> f64 {
    s.sd / (s.n as f64).sqrt()
}

pub fn posterior_from(s: &StudySummary) -> MeanPosterior {
    MeanPosterior {
        mean: s.mean_diff,
        sem: sem_of(s),
    }
}

/// Probability that the true mean exceeds `threshold`.
pub fn prob_true_beyond(p: &MeanPosterior, threshold: f64) -> Result<Probability> {
    if threshold.is_nan() {
        return Err(Error::NonFinite { name: "threshold" });
    }
    Ok(Probability::clamped(gaussian::cdf(
        (p.mean - threshold) / p.sem,
    )))
}

/// Probability that the true mean falls inside `r`.
pub fn prob_true_within(p: &MeanPosterior, r: &RangeOfInterest) -> Probability {
    let lo = (r.lower - p.mean) / p.sem;
    let hi = (r.upper - p.mean) / p.sem;
    // difference of whichever tails are small, to avoid cancellation
    let mass = if lo > 0.0 {
        gaussian::sf(lo) - gaussian::sf(hi)
    } else {
        gaussian::cdf(hi) - gaussian::cdf(lo)
    };
    Probability::clamped(mass)
}

/// One-sided P value: the tail on the far side of `null_value` from the
/// observed mean, `Φ(−|mean − null| / sem)`.
pub fn p_value_one_sided(p: &MeanPosterior, null_value: f64) -> Result<Probability> {
    let null_value = finite("null value", null_value)?;
    let distance = (p.mean - null_value).abs() / p.sem;
    Ok(Probability::clamped(gaussian::cdf(-distance)))
}

/// Two-sided P value, twice the one-sided value and capped at 1.
pub fn p_value_two_sided(p: &MeanPosterior, null_value: f64) -> Result<Probability> {
    let one = p_value_one_sided(p, null_value)?;
    Ok(Probability::clamped((2.0 * one.value()).min(1.0)))
}

/// Central confidence interval `mean ± Φ⁻¹((1 + level)/2) · sem`.
pub fn confidence_limits(p: &MeanPosterior, level: Probability) -> Result<RangeOfInterest> {
    let level = level.value();
    if level <= 0.0 || level >= 1.0 {
        return out_of_range("confidence level", level, "0 < level < 1");
    }
    let half_width = gaussian::quantile((1.0 + level) / 2.0) * p.sem;
    RangeOfInterest::new(p.mean - half_width, p.mean + half_width)
}

/// Directly observed proportion `count / n`.
pub fn proportion_probability(count: u64, n: u64) -> Result<Probability> {
    if n == 0 {
        return out_of_range("n", 0.0, "n >= 1");
    }
    if count > n {
        return out_of_range("count", count as f64, "count <= n");
    }
    Ok(Probability::clamped(count as f64 / n as f64))
}

/// Fraction of individual paired differences above `threshold`, from a
/// Gaussian fitted with the study's SD (not the SEM).
pub fn fraction_of_individuals_beyond(s: &StudySummary, threshold: f64) -> Result<Probability> {
    if threshold.is_nan() {
        return Err(Error::NonFinite { name: "threshold" });
    }
    Ok(Probability::clamped(gaussian::cdf(
        (s.mean_diff - threshold) / s.sd,
    )))
}

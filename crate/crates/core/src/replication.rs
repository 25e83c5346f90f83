//! Replication probability under k-fold variance inflation, and the
//! sample size that inverts it.
//!
//! A future study's mean is predicted from a distribution whose variance is
//! `k · sem²`: the uncertainty about the true mean plus the sampling noise of
//! each study still to be run. `k = 1` is classical power, `k = 2` the chance
//! that an observed result replicates in one new identical study, and
//! `k = 3` the chance, judged at planning time, that a second study
//! replicates a first one not yet run. The replication succeeds when the
//! future mean clears `z_(1−α) · sem · sqrt(k)`, giving
//!
//! ```text
//! P = Φ(|d| / (sem · sqrt(k)) + Φ⁻¹(α)),   sem = sd / sqrt(n)
//! ```
//!
//! Solving for `n` at a target probability gives
//! `n = k · (sd · (Φ⁻¹(power) − Φ⁻¹(α)) / d)²`.

use serde::Serialize;

use crate::error::{finite, out_of_range, Error, Result};
use crate::gaussian::{self, Probability};

/// Inputs of a replication calculation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicationQuery {
    effect: f64,
    sd: f64,
    n: u64,
    k: f64,
    alpha: Probability,
}

impl ReplicationQuery {
    pub fn new(effect: f64, sd: f64, n: u64, k: f64, alpha: f64) -> Result<Self> {
        let effect = finite("effect", effect)?;
        check_sd(sd)?;
        if n < 2 {
            return out_of_range("n", n as f64, "n >= 2");
        }
        check_k(k)?;
        let alpha = check_alpha(alpha)?;
        Ok(ReplicationQuery {
            effect,
            sd,
            n,
            k,
            alpha,
        })
    }

    pub fn effect(&self) -> f64 {
        self.effect
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn alpha(&self) -> Probability {
        self.alpha
    }

    pub fn sem(&self) -> f64 {
        self.sd / (self.n as f64).sqrt()
    }
}

fn check_sd(sd: f64) -> Result<()> {
    let sd = finite("sd", sd)?;
    if sd <= 0.0 {
        return out_of_range("sd", sd, "sd > 0");
    }
    Ok(())
}

fn check_k(k: f64) -> Result<()> {
    let k = finite("k", k)?;
    if k < 1.0 {
        return out_of_range("k", k, "k >= 1");
    }
    Ok(())
}

/// One-sided significance level, `0 < alpha < 0.5`.
pub(crate) fn check_alpha(alpha: f64) -> Result<Probability> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return out_of_range("alpha", alpha, "0 < alpha < 0.5 (one-sided)");
    }
    Ok(Probability::clamped(alpha))
}

/// `Φ(|d| / (sem·√k) + Φ⁻¹(α))` with caller-validated inputs; `n` may be
/// fractional.
pub(crate) fn replication_core(effect: f64, sd: f64, n: f64, k: f64, alpha: f64) -> f64 {
    let sem = sd / n.sqrt();
    gaussian::cdf(effect.abs() / (sem * k.sqrt()) + gaussian::quantile(alpha))
}

/// Probability that a future study drawn from the k-inflated predictive
/// distribution reaches one-sided significance at `alpha`.
pub fn replication_probability(q: &ReplicationQuery) -> Probability {
    Probability::clamped(replication_core(
        q.effect,
        q.sd,
        q.n as f64,
        q.k,
        q.alpha.value(),
    ))
}

/// Same as [`replication_probability`] but with a real-valued `n`, as needed
/// to evaluate the unrounded solution of the sample-size formula.
pub fn replication_probability_continuous(
    effect: f64,
    sd: f64,
    n: f64,
    k: f64,
    alpha: f64,
) -> Result<Probability> {
    let effect = finite("effect", effect)?;
    check_sd(sd)?;
    let n = finite("n", n)?;
    if n <= 0.0 {
        return out_of_range("n", n, "n > 0");
    }
    check_k(k)?;
    let alpha = check_alpha(alpha)?;
    Ok(Probability::clamped(replication_core(
        effect,
        sd,
        n,
        k,
        alpha.value(),
    )))
}

/// Result of inverting the replication formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSizePlan {
    /// Unrounded solution.
    pub raw_n: f64,
    /// `max(ceil(raw_n), 2)`.
    pub required_n: u64,
    pub effect: f64,
    pub sd: f64,
    pub alpha: f64,
    pub power: f64,
    pub k: f64,
}

/// Number of paired observations needed so that the k-inflated replication
/// probability reaches `power`. Requires `0 < alpha < 0.5 < power < 1`.
pub fn required_sample_size(
    effect: f64,
    sd: f64,
    alpha: f64,
    power: f64,
    k: f64,
) -> Result<SampleSizePlan> {
    if !(power > 0.5 && power < 1.0) {
        return out_of_range("power", power, "0.5 < power < 1");
    }
    plan(effect, sd, alpha, power, k)
}

/// Like [`required_sample_size`] but only requires `alpha < power < 1`, for
/// planning studies deliberately run at low power.
pub fn required_sample_size_allow_low_power(
    effect: f64,
    sd: f64,
    alpha: f64,
    power: f64,
    k: f64,
) -> Result<SampleSizePlan> {
    if !(power > alpha && power < 1.0) {
        return out_of_range("power", power, "alpha < power < 1");
    }
    plan(effect, sd, alpha, power, k)
}

fn plan(effect: f64, sd: f64, alpha: f64, power: f64, k: f64) -> Result<SampleSizePlan> {
    let effect = finite("effect", effect)?;
    if effect == 0.0 {
        return Err(Error::ZeroEffect);
    }
    check_sd(sd)?;
    check_k(k)?;
    let alpha = check_alpha(alpha)?.value();

    let spread = sd * (gaussian::quantile(power) - gaussian::quantile(alpha)) / effect.abs();
    let raw_n = k * spread * spread;
    if !raw_n.is_finite() {
        return out_of_range("raw n", raw_n, "a finite sample size");
    }
    let required_n = (raw_n.ceil() as u64).max(2);
    Ok(SampleSizePlan {
        raw_n,
        required_n,
        effect,
        sd,
        alpha,
        power,
        k,
    })
}

/// Replication probability actually achieved at the rounded `required_n`.
/// Never below `plan.power` since the sample size is rounded up.
pub fn power_consistency_check(plan: &SampleSizePlan) -> Probability {
    Probability::clamped(replication_core(
        plan.effect,
        plan.sd,
        plan.required_n as f64,
        plan.k,
        plan.alpha,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep(effect: f64, sd: f64, n: u64, k: f64, alpha: f64) -> f64 {
        replication_probability(&ReplicationQuery::new(effect, sd, n, k, alpha).unwrap()).value()
    }

    // mpmath, 40 digits
    #[test]
    fn replication_examples() {
        let cases = [
            ((1.96, 10.0, 100, 2.0, 0.025), 0.282_972_162_261_875_06),
            ((1.96, 10.0, 100, 2.0, 0.003_824), 0.100_044_561_979_866_05),
            ((1.96, 10.0, 404, 2.0, 0.025), 0.795_518_361_774_379_75),
            ((2.2, 10.0, 163, 3.0, 0.025), 0.367_561_505_477_524_46),
            ((2.2, 10.0, 489, 3.0, 0.025), 0.802_005_928_020_464_35),
            ((1.96, 10.0, 613, 3.0, 0.025), 0.800_039_448_912_495_02),
        ];
        for ((e, sd, n, k, a), want) in cases {
            let got = rep(e, sd, n, k, a);
            assert!(
                (got - want).abs() < 1e-12,
                "{e} {n} {k} {a}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn zero_effect_gives_alpha() {
        assert!((rep(0.0, 3.0, 57, 2.5, 0.025) - 0.025).abs() < 1e-15);
    }

    #[test]
    fn sign_of_effect_is_metadata() {
        assert_eq!(
            rep(-1.96, 10.0, 100, 2.0, 0.025),
            rep(1.96, 10.0, 100, 2.0, 0.025)
        );
    }

    #[test]
    fn query_validation() {
        assert!(ReplicationQuery::new(1.0, 0.0, 10, 2.0, 0.025).is_err());
        assert!(ReplicationQuery::new(1.0, 1.0, 1, 2.0, 0.025).is_err());
        assert!(ReplicationQuery::new(1.0, 1.0, 10, 0.5, 0.025).is_err());
        assert!(ReplicationQuery::new(1.0, 1.0, 10, 2.0, 0.5).is_err());
        assert!(ReplicationQuery::new(1.0, 1.0, 10, 2.0, 0.0).is_err());
        assert!(ReplicationQuery::new(f64::NAN, 1.0, 10, 2.0, 0.025).is_err());
    }

    #[test]
    fn sample_size_examples() {
        let cases = [
            ((1.96, 1.0), 204.312_779_423_914_23, 205),
            ((1.96, 2.0), 408.625_558_847_828_45, 409),
            ((1.96, 3.0), 612.938_338_271_742_68, 613),
            ((2.197, 1.0), 162.610_116_421_617_03, 163),
        ];
        for ((effect, k), raw, required) in cases {
            let plan = required_sample_size(effect, 10.0, 0.025, 0.8, k).unwrap();
            assert!((plan.raw_n - raw).abs() < 1e-9, "{} vs {raw}", plan.raw_n);
            assert_eq!(plan.required_n, required);
        }
    }

    #[test]
    fn sample_size_errors() {
        assert_eq!(
            required_sample_size(0.0, 10.0, 0.025, 0.8, 2.0),
            Err(Error::ZeroEffect)
        );
        assert!(required_sample_size(1.0, 10.0, 0.025, 0.4, 2.0).is_err());
        assert!(required_sample_size(1.0, 10.0, 0.025, 1.0, 2.0).is_err());
        assert!(required_sample_size_allow_low_power(1.0, 10.0, 0.025, 0.4, 2.0).is_ok());
        assert!(required_sample_size_allow_low_power(1.0, 10.0, 0.025, 0.02, 2.0).is_err());
    }

    #[test]
    fn tiny_plans_still_need_two() {
        let plan = required_sample_size(100.0, 1.0, 0.025, 0.8, 1.0).unwrap();
        assert!(plan.raw_n < 1.0);
        assert_eq!(plan.required_n, 2);
    }

    #[test]
    fn consistency_check() {
        let plan = required_sample_size(1.96, 10.0, 0.025, 0.8, 2.0).unwrap();
        let achieved = power_consistency_check(&plan).value();
        assert!(achieved >= 0.8);
        assert!((achieved - 0.800_359_084_586_457_24).abs() < 1e-12);
        // conventional n evaluated under one future replication
        assert!((rep(1.96, 10.0, 204, 2.0, 0.025) - 0.507_794_430_633_692_23).abs() < 1e-12);
        assert!((rep(1.96, 10.0, 603, 2.0, 0.025) - 0.925_536_524_366_541_87).abs() < 1e-12);
    }

    #[test]
    fn continuous_n_validation() {
        assert!(replication_probability_continuous(1.0, 1.0, 0.0, 1.0, 0.025).is_err());
        assert!(replication_probability_continuous(1.0, 1.0, 1.5, 1.0, 0.025).is_ok());
    }
}

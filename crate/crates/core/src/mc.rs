//! Seeded Monte Carlo checks of the analytic probabilities.
//!
//! Three generative models are simulated:
//!
//! * `individuals`: single paired differences `x ~ N(effect, sd²)`; success
//!   when `x > threshold`.
//! * `posterior-predictive` (k = 2): true mean `μ ~ N(effect, sem²)`, then a
//!   replication mean `m ~ N(μ, sem²)`.
//! * `chain-predictive` (k = 3): `μ ~ N(effect, sem²)`, a first-study mean
//!   `m₁ ~ N(μ, sem²)`, then `m ~ N(m₁, sem²)`, so `Var(m) = 3·sem²`.
//!
//! A replication counts as a success when `m ≥ z_(1−α) · sem · sqrt(k)`.
//! An exchangeable model, where every future study is drawn independently
//! around the same `μ`, gives `Var(m) = 2·sem²` for any future study and can
//! not produce k = 3; the chain is what yields the tripled variance.
//!
//! Trials are split into fixed blocks of [`BLOCK_TRIALS`]. Block `b` draws
//! from ChaCha8 seeded with the run seed on stream `b`, so results do not
//! depend on how many threads evaluate the blocks. Normal variates come from
//! the inverse-CDF transform through [`crate::gaussian`].

use std::fmt;
use std::io;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{finite, out_of_range, Error, Result};
use crate::gaussian;
use crate::numfmt::sig9;
use crate::replication::{check_alpha, replication_core};

pub const RNG_NAME: &str = "ChaCha8";
pub const BLOCK_TRIALS: u64 = 1 << 16;
pub const DEFAULT_TRIALS: u64 = 1_000_000;

/// Attempts per study before a conditioned portfolio draw gives up.
const MAX_SELECTION_ATTEMPTS: u32 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimModel {
    Individuals,
    PosteriorPredictive,
    ChainPredictive,
}

impl SimModel {
    /// Variance multiplier the model realizes, if it is a replication model.
    pub fn k(self) -> Option<f64> {
        match self {
            SimModel::Individuals => None,
            SimModel::PosteriorPredictive => Some(2.0),
            SimModel::ChainPredictive => Some(3.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SimModel::Individuals => "individuals",
            SimModel::PosteriorPredictive => "posterior-predictive",
            SimModel::ChainPredictive => "chain-predictive",
        }
    }
}

impl fmt::Display for SimModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "individuals" => Ok(SimModel::Individuals),
            "posterior-predictive" => Ok(SimModel::PosteriorPredictive),
            "chain-predictive" => Ok(SimModel::ChainPredictive),
            other => Err(format!(
                "unknown model '{other}' (expected individuals, posterior-predictive or chain-predictive)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub trials: u64,
    pub model: SimModel,
    pub effect: f64,
    pub sd: f64,
    /// Observations per study; replication models only.
    pub n: u64,
    pub alpha: f64,
    /// Individuals model only.
    pub threshold: f64,
    /// If set, must agree with the model's own multiplier.
    pub k: Option<f64>,
    /// Chain model only: count a trial only when the first study was itself
    /// significant.
    pub condition_on_significant_first: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            trials: DEFAULT_TRIALS,
            model: SimModel::PosteriorPredictive,
            effect: 0.0,
            sd: 10.0,
            n: 100,
            alpha: 0.025,
            threshold: 0.0,
            k: None,
            condition_on_significant_first: false,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return out_of_range("trials", 0.0, "trials >= 1");
        }
        finite("effect", self.effect)?;
        if finite("sd", self.sd)? <= 0.0 {
            return out_of_range("sd", self.sd, "sd > 0");
        }
        match self.model {
            SimModel::Individuals => {
                finite("threshold", self.threshold)?;
                if self.k.is_some() {
                    return Err(Error::ModelMismatch(
                        "the individuals model has no variance multiplier".into(),
                    ));
                }
                if self.condition_on_significant_first {
                    return Err(Error::ModelMismatch(
                        "conditioning applies to the chain-predictive model only".into(),
                    ));
                }
            }
            model => {
                if self.n < 2 {
                    return out_of_range("n", self.n as f64, "n >= 2");
                }
                check_alpha(self.alpha)?;
                let own = model.k().expect("replication model");
                if let Some(k) = self.k {
                    if k != own {
                        return Err(Error::ModelMismatch(format!(
                            "{model} realizes k = {own}, not k = {k}"
                        )));
                    }
                }
                if self.condition_on_significant_first && model != SimModel::ChainPredictive {
                    return Err(Error::ModelMismatch(
                        "conditioning applies to the chain-predictive model only".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn sem(&self) -> f64 {
        self.sd / (self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub model: SimModel,
    pub rng: &'static str,
    pub seed: u64,
    /// Trials counted (after conditioning, if any).
    pub trials: u64,
    pub successes: u64,
    pub empirical_rate: f64,
    pub binomial_se: f64,
    pub analytic_prediction: f64,
    pub z_discrepancy: f64,
    pub k: Option<f64>,
    pub conditioned: bool,
    /// Sample variance of the simulated individual values or replication means.
    pub sample_variance: f64,
    /// `sd²`, `2·sem²` or `3·sem²`; absent for conditioned runs.
    pub expected_variance: Option<f64>,
}

/// Binomial standard error `sqrt(r(1−r)/trials)`.
pub fn binomial_se(rate: f64, trials: u64) -> f64 {
    (rate * (1.0 - rate) / trials as f64).sqrt()
}

fn z_discrepancy(empirical: f64, analytic: f64, se: f64) -> f64 {
    let diff = empirical - analytic;
    if diff == 0.0 {
        0.0
    } else {
        diff / se
    }
}

/// Wilson score interval for `successes / trials` at the given level.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = gaussian::quantile((1.0 + level) / 2.0);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Deterministic substream for one block or one portfolio study.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform on the open interval (0, 1) from 53 random bits.
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    mean + sd * gaussian::quantile(open_unit(rng))
}

/// Per-block counts plus Welford moments of the simulated values.
#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    counted: u64,
    successes: u64,
    mean: f64,
    m2: f64,
}

impl Tally {
    fn push(&mut self, value: f64, success: bool) {
        self.counted += 1;
        self.successes += success as u64;
        let delta = value - self.mean;
        self.mean += delta / self.counted as f64;
        self.m2 += delta * (value - self.mean);
    }

    fn merge(self, other: Tally) -> Tally {
        if self.counted == 0 {
            return other;
        }
        if other.counted == 0 {
            return self;
        }
        let (na, nb) = (self.counted as f64, other.counted as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        Tally {
            counted: self.counted + other.counted,
            successes: self.successes + other.successes,
            mean: self.mean + delta * nb / n,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n,
        }
    }

    fn variance(&self) -> f64 {
        if self.counted < 2 {
            0.0
        } else {
            self.m2 / (self.counted - 1) as f64
        }
    }
}

/// One replication draw: `(first-study mean, replication mean)`.
fn draw_chain(rng: &mut ChaCha8Rng, model: SimModel, effect: f64, sem: f64) -> (f64, f64) {
    let mu = normal(rng, effect, sem);
    match model {
        SimModel::ChainPredictive => {
            let first = normal(rng, mu, sem);
            (first, normal(rng, first, sem))
        }
        _ => (mu, normal(rng, mu, sem)),
    }
}

fn run_blocks<F>(cfg: &SimConfig, trial: F) -> Tally
where
    F: Fn(&mut ChaCha8Rng, &mut Tally) + Sync,
{
    let blocks = cfg.trials.div_ceil(BLOCK_TRIALS);
    let tallies: Vec<Tally> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(cfg.seed, b);
            let start = b * BLOCK_TRIALS;
            let end = (start + BLOCK_TRIALS).min(cfg.trials);
            let mut tally = Tally::default();
            for _ in start..end {
                trial(&mut rng, &mut tally);
            }
            tally
        })
        .collect();
    tallies.into_iter().fold(Tally::default(), Tally::merge)
}

fn finish(
    cfg: &SimConfig,
    tally: Tally,
    analytic: f64,
    expected_variance: Option<f64>,
) -> SimReport {
    let empirical_rate = if tally.counted == 0 {
        0.0
    } else {
        tally.successes as f64 / tally.counted as f64
    };
    let se = binomial_se(empirical_rate, tally.counted.max(1));
    SimReport {
        model: cfg.model,
        rng: RNG_NAME,
        seed: cfg.seed,
        trials: tally.counted,
        successes: tally.successes,
        empirical_rate,
        binomial_se: se,
        analytic_prediction: analytic,
        z_discrepancy: z_discrepancy(empirical_rate, analytic, se),
        k: cfg.model.k(),
        conditioned: cfg.condition_on_significant_first,
        sample_variance: tally.variance(),
        expected_variance,
    }
}

/// Individual paired differences above `threshold`.
pub fn simulate_individuals(cfg: &SimConfig) -> Result<SimReport> {
    if cfg.model != SimModel::Individuals {
        return Err(Error::ModelMismatch(format!(
            "simulate_individuals needs the individuals model, got {}",
            cfg.model
        )));
    }
    cfg.validate()?;
    let (effect, sd, threshold) = (cfg.effect, cfg.sd, cfg.threshold);
    let tally = run_blocks(cfg, |rng, t| {
        let x = normal(rng, effect, sd);
        t.push(x, x > threshold);
    });
    let analytic = gaussian::cdf((effect - threshold) / sd);
    Ok(finish(cfg, tally, analytic, Some(sd * sd)))
}

/// Replication success under the posterior-predictive or chain model.
pub fn simulate_replication(cfg: &SimConfig) -> Result<SimReport> {
    if cfg.model == SimModel::Individuals {
        return Err(Error::ModelMismatch(
            "simulate_replication needs a replication model".into(),
        ));
    }
    cfg.validate()?;
    let k = cfg.model.k().expect("replication model");
    let sem = cfg.sem();
    let effect = cfg.effect.abs();
    let z = -gaussian::quantile(cfg.alpha);
    let target = z * sem * k.sqrt();
    let first_target = z * sem;
    let model = cfg.model;
    let conditioned = cfg.condition_on_significant_first;

    let tally = run_blocks(cfg, |rng, t| {
        let (first, m) = draw_chain(rng, model, effect, sem);
        if !conditioned || first >= first_target {
            t.push(m, m >= target);
        }
    });
    let (analytic, expected_variance) = if conditioned {
        (conditioned_chain_probability(effect, sem, cfg.alpha), None)
    } else {
        (
            replication_core(effect, cfg.sd, cfg.n as f64, k, cfg.alpha),
            Some(k * sem * sem),
        )
    };
    Ok(finish(cfg, tally, analytic, expected_variance))
}

/// Dispatch on `cfg.model`.
pub fn simulate(cfg: &SimConfig) -> Result<SimReport> {
    match cfg.model {
        SimModel::Individuals => simulate_individuals(cfg),
        _ => simulate_replication(cfg),
    }
}

/// `P(m ≥ z·sem·√3 | m₁ ≥ z·sem)` under the chain model, by Simpson's rule
/// over the standardized first-study mean.
pub fn conditioned_chain_probability(effect: f64, sem: f64, alpha: f64) -> f64 {
    let z = -gaussian::quantile(alpha);
    let scale = sem * std::f64::consts::SQRT_2;
    let target = z * sem * 3f64.sqrt();
    let lower = (z * sem - effect) / scale;
    let selected = gaussian::sf(lower);
    if selected == 0.0 {
        return f64::NAN;
    }
    let upper = lower.max(0.0) + 12.0;
    let integrand = |u: f64| gaussian::pdf(u) * gaussian::cdf((effect + scale * u - target) / sem);
    const PANELS: usize = 4000;
    let h = (upper - lower) / PANELS as f64;
    let mut sum = integrand(lower) + integrand(upper);
    for i in 1..PANELS {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * integrand(lower + i as f64 * h);
    }
    (sum * h / 3.0) / selected
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortfolioConfig {
    pub seed: u64,
    pub studies: u64,
    pub effect: f64,
    pub sd: f64,
    pub n: u64,
    pub alpha: f64,
    pub condition_on_significant_first: bool,
}

impl Default for PortfolioConfig {
    fn default() -> Self {
        PortfolioConfig {
            seed: 0,
            studies: 97,
            effect: 2.2,
            sd: 10.0,
            n: 163,
            alpha: 0.025,
            condition_on_significant_first: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioReport {
    pub seed: u64,
    pub studies: u64,
    pub replications: u64,
    pub rate: f64,
    /// Wilson 95% interval.
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub analytic: f64,
    pub z_discrepancy: f64,
    pub conditioned: bool,
    pub n: u64,
    pub effect: f64,
    pub sd: f64,
    pub alpha: f64,
}

/// A portfolio of independent chain-predictive studies, one replication
/// attempt each.
pub fn simulate_osc_portfolio(cfg: &PortfolioConfig) -> Result<PortfolioReport> {
    if cfg.studies == 0 {
        return out_of_range("studies", 0.0, "studies >= 1");
    }
    let per_study = SimConfig {
        seed: cfg.seed,
        trials: 1,
        model: SimModel::ChainPredictive,
        effect: cfg.effect,
        sd: cfg.sd,
        n: cfg.n,
        alpha: cfg.alpha,
        threshold: 0.0,
        k: None,
        condition_on_significant_first: cfg.condition_on_significant_first,
    };
    per_study.validate()?;
    let sem = per_study.sem();
    let effect = cfg.effect.abs();
    let z = -gaussian::quantile(cfg.alpha);
    let target = z * sem * 3f64.sqrt();
    let first_target = z * sem;

    let outcomes: Vec<Option<bool>> = (0..cfg.studies)
        .into_par_iter()
        .map(|study| {
            let mut rng = substream(cfg.seed, study);
            for _ in 0..MAX_SELECTION_ATTEMPTS {
                let (first, m) = draw_chain(&mut rng, SimModel::ChainPredictive, effect, sem);
                if !cfg.condition_on_significant_first || first >= first_target {
                    return Some(m >= target);
                }
            }
            None
        })
        .collect();
    let mut replications = 0;
    for outcome in outcomes {
        match outcome {
            Some(hit) => replications += hit as u64,
            None => {
                return Err(Error::ModelMismatch(
                    "no significant first study found; conditioning is degenerate for this effect"
                        .into(),
                ))
            }
        }
    }

    let analytic = if cfg.condition_on_significant_first {
        conditioned_chain_probability(effect, sem, cfg.alpha)
    } else {
        replication_core(effect, cfg.sd, cfg.n as f64, 3.0, cfg.alpha)
    };
    let rate = replications as f64 / cfg.studies as f64;
    let (ci_lower, ci_upper) = wilson_interval(replications, cfg.studies, 0.95);
    let se = binomial_se(rate, cfg.studies);
    Ok(PortfolioReport {
        seed: cfg.seed,
        studies: cfg.studies,
        replications,
        rate,
        ci_lower,
        ci_upper,
        analytic,
        z_discrepancy: z_discrepancy(rate, analytic, se),
        conditioned: cfg.condition_on_significant_first,
        n: cfg.n,
        effect: cfg.effect,
        sd: cfg.sd,
        alpha: cfg.alpha,
    })
}

/// One portfolio per seed, for `count` consecutive seeds from `cfg.seed`.
pub fn portfolio_sweep(cfg: &PortfolioConfig, count: u64) -> Result<Vec<PortfolioReport>> {
    (0..count)
        .map(|i| {
            simulate_osc_portfolio(&PortfolioConfig {
                seed: cfg.seed.wrapping_add(i),
                ..*cfg
            })
        })
        .collect()
}

/// CSV row shared by single simulations and portfolio sweeps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub model: &'static str,
    pub n: Option<u64>,
    pub effect: f64,
    pub sd: f64,
    pub alpha: Option<f64>,
    pub k: Option<f64>,
    pub trials: u64,
    pub empirical: f64,
    pub analytic: f64,
    pub z: f64,
}

impl SweepRow {
    pub fn from_sim(cfg: &SimConfig, r: &SimReport) -> Self {
        let replication = cfg.model != SimModel::Individuals;
        SweepRow {
            seed: r.seed,
            model: r.model.as_str(),
            n: replication.then_some(cfg.n),
            effect: cfg.effect,
            sd: cfg.sd,
            alpha: replication.then_some(cfg.alpha),
            k: r.k,
            trials: r.trials,
            empirical: r.empirical_rate,
            analytic: r.analytic_prediction,
            z: r.z_discrepancy,
        }
    }

    pub fn from_portfolio(r: &PortfolioReport) -> Self {
        SweepRow {
            seed: r.seed,
            model: SimModel::ChainPredictive.as_str(),
            n: Some(r.n),
            effect: r.effect,
            sd: r.sd,
            alpha: Some(r.alpha),
            k: Some(3.0),
            trials: r.studies,
            empirical: r.rate,
            analytic: r.analytic,
            z: r.z_discrepancy,
        }
    }

    fn rounded(&self) -> Self {
        SweepRow {
            effect: sig9(self.effect),
            sd: sig9(self.sd),
            alpha: self.alpha.map(sig9),
            empirical: sig9(self.empirical),
            analytic: sig9(self.analytic),
            z: sig9(self.z),
            ..self.clone()
        }
    }
}

/// Header `seed,model,n,effect,sd,alpha,k,trials,empirical,analytic,z`.
pub fn write_sweep_csv<W: io::Write>(rows: &[SweepRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row.rounded())?;
    }
    if rows.is_empty() {
        w.write_record([
            "seed",
            "model",
            "n",
            "effect",
            "sd",
            "alpha",
            "k",
            "trials",
            "empirical",
            "analytic",
            "z",
        ])?;
    }
    w.flush()
}

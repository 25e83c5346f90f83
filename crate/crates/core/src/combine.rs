//! Combining a prior study summary with an observed one.
//!
//! The default rule pools observation counts and takes n-weighted averages
//! of both the mean difference and the SD. Averaging SDs is not the usual
//! conjugate-normal update, so an inverse-variance (precision-weighted) mode
//! is offered alongside it for comparison.
//!
//! The n-weighted SD average is not associative across bracketings: folding
//! three summaries pairwise gives the same result as a one-step weighted
//! average only because the weights are the accumulated counts.

use serde::Serialize;

use crate::error::{finite, out_of_range, Result};
use crate::gaussian;
use crate::inference::{self, StudySummary};
use crate::replication::{check_alpha, replication_core};

/// z used for the printed-table limits reproduced under `paper_swap`.
pub const PAPER_SWAP_Z: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombineMode {
    /// n-weighted mean and n-weighted SD.
    #[default]
    NWeighted,
    /// Inverse-variance weights `n/sd²`; SD is backed out of the pooled SEM.
    Precision,
}

/// n-weighted combination.
pub fn combine(prior: &StudySummary, study: &StudySummary) -> StudySummary {
    combine_with(prior, study, CombineMode::NWeighted)
}

pub fn combine_with(prior: &StudySummary, study: &StudySummary, mode: CombineMode) -> StudySummary {
    let (n1, n2) = (prior.n() as f64, study.n() as f64);
    let n = prior.n() + study.n();
    let (mean, sd) = match mode {
        CombineMode::NWeighted => {
            let total = n1 + n2;
            (
                (n1 * prior.mean_diff() + n2 * study.mean_diff()) / total,
                (n1 * prior.sd() + n2 * study.sd()) / total,
            )
        }
        CombineMode::Precision => {
            let w1 = n1 / (prior.sd() * prior.sd());
            let w2 = n2 / (study.sd() * study.sd());
            let w = w1 + w2;
            let mean = (w1 * prior.mean_diff() + w2 * study.mean_diff()) / w;
            let sem = w.recip().sqrt();
            (mean, sem * (n as f64).sqrt())
        }
    };
    StudySummary::new(n, sd, mean).expect("convex combination of valid summaries")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportOptions {
    pub alpha: f64,
    pub k_prior: f64,
    pub k_other: f64,
    pub mode: CombineMode,
    /// Swap the SEM and variance-of-mean rows and compute limits as
    /// `mean ± 1.96 · (sd²/n)`, reproducing the printed table layout.
    pub paper_swap: bool,
    pub level: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            alpha: 0.025,
            k_prior: 3.0,
            k_other: 2.0,
            mode: CombineMode::NWeighted,
            paper_swap: false,
            level: 0.95,
        }
    }
}

/// One column of the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportColumn {
    pub label: &'static str,
    pub n: u64,
    pub sd: f64,
    pub sem: f64,
    pub variance_of_mean: f64,
    pub mean_diff: f64,
    pub upper_cl: f64,
    pub lower_cl: f64,
    pub p_value: f64,
    pub replication_probability: f64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinationReport {
    pub prior: ReportColumn,
    pub study: ReportColumn,
    pub posterior: ReportColumn,
    pub alpha: f64,
    pub mode: CombineMode,
    pub paper_swap: bool,
}

impl CombinationReport {
    pub fn columns(&self) -> [&ReportColumn; 3] {
        [&self.prior, &self.study, &self.posterior]
    }
}

/// Prior, study and combined columns with limits, one-sided P values against
/// zero, and replication probabilities (`k_prior` for the prior column,
/// `k_other` for the others).
pub fn combination_report(
    prior: &StudySummary,
    study: &StudySummary,
    opts: &ReportOptions,
) -> Result<CombinationReport> {
    let alpha = check_alpha(opts.alpha)?.value();
    for k in [opts.k_prior, opts.k_other] {
        if finite("k", k)? < 1.0 {
            return out_of_range("k", k, "k >= 1");
        }
    }
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return out_of_range("confidence level", opts.level, "0 < level < 1");
    }
    let posterior = combine_with(prior, study, opts.mode);
    Ok(CombinationReport {
        prior: column("prior", prior, opts.k_prior, alpha, opts),
        study: column("study", study, opts.k_other, alpha, opts),
        posterior: column("posterior", &posterior, opts.k_other, alpha, opts),
        alpha,
        mode: opts.mode,
        paper_swap: opts.paper_swap,
    })
}

fn column(
    label: &'static str,
    s: &StudySummary,
    k: f64,
    alpha: f64,
    opts: &ReportOptions,
) -> ReportColumn {
    let sem = inference::sem_of(s);
    let variance_of_mean = sem * sem;
    let mean = s.mean_diff();
    let p_value = gaussian::cdf(-mean.abs() / sem);
    let replication_probability = replication_core(mean, s.sd(), s.n() as f64, k, alpha);

    let (sem_row, var_row, half_width) = if opts.paper_swap {
        (variance_of_mean, sem, PAPER_SWAP_Z * variance_of_mean)
    } else {
        let z = gaussian::quantile((1.0 + opts.level) / 2.0);
        (sem, variance_of_mean, z * sem)
    };
    ReportColumn {
        label,
        n: s.n(),
        sd: s.sd(),
        sem: sem_row,
        variance_of_mean: var_row,
        mean_diff: mean,
        upper_cl: mean + half_width,
        lower_cl: mean - half_width,
        p_value,
        replication_probability,
        k,
    }
}

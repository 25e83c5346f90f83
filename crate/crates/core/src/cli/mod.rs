//! Command-line front end. Every subcommand is a thin adapter over the
//! library: it validates arguments, calls one or two library functions and
//! renders the result as text, a JSON envelope or CSV.
//!
//! Exit codes: 0 success, 1 domain error (or a failed self-check), 2 usage
//! error.

pub mod output;
pub mod plot;
pub mod repro;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::combine::{combination_report, CombineMode, ReportOptions};
use crate::error::Error;
use crate::gaussian::Probability;
use crate::inference::{
    confidence_limits, fraction_of_individuals_beyond, p_value_one_sided, p_value_two_sided,
    posterior_from, prob_true_beyond, prob_true_within, RangeOfInterest, StudySummary,
};
use crate::mc::{self, PortfolioConfig, SimConfig, SimModel, SweepRow};
use crate::numfmt::fmt6;
use crate::replication::{
    power_consistency_check, replication_probability, required_sample_size,
    required_sample_size_allow_low_power, ReplicationQuery,
};

pub use output::{Format, Output};

#[derive(Debug, Parser)]
#[command(
    name = "replikit",
    version,
    about = "Posterior, P-value, replication-probability and sample-size calculations for paired-difference studies"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probabilities for the true mean given one study.
    Posterior(PosteriorArgs),
    /// Probability that an identical future study reaches one-sided significance.
    Replication(ReplicationArgs),
    /// Observations needed for a target replication probability.
    SampleSize(SampleSizeArgs),
    /// Combine a prior summary with a study into a three-column report.
    Combine(CombineArgs),
    /// Monte Carlo check of an analytic probability.
    Simulate(SimulateArgs),
    /// Recompute every published number of the worked example.
    PaperRepro,
    /// CSV density curves for the distribution figures.
    PlotData(PlotArgs),
}

#[derive(Debug, Args)]
pub struct PosteriorArgs {
    /// Observed mean difference (e.g. mmHg).
    #[arg(long, allow_hyphen_values = true)]
    pub mean: f64,
    /// SD of the paired differences.
    #[arg(long, default_value_t = 10.0)]
    pub sd: f64,
    /// Number of paired observations.
    #[arg(long)]
    pub n: u64,
    /// Threshold(s) for P(true mean > threshold).
    #[arg(long, allow_hyphen_values = true)]
    pub beyond: Vec<f64>,
    /// Range(s) `lower,upper` for P(lower < true mean < upper); `inf` allowed.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub within: Vec<(f64, f64)>,
    /// Threshold(s) for the fraction of individual differences above it.
    #[arg(long, allow_hyphen_values = true)]
    pub individuals: Vec<f64>,
    /// Null value for the P values.
    #[arg(long = "null", default_value_t = 0.0, allow_hyphen_values = true)]
    pub null_value: f64,
    /// Confidence level for the limits.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Args)]
pub struct AlphaArgs {
    /// One-sided significance level [default: 0.025].
    #[arg(long, conflicts_with = "two_sided")]
    pub alpha: Option<f64>,
    /// Two-sided level, halved to the one-sided alpha.
    #[arg(long)]
    pub two_sided: Option<f64>,
}

impl AlphaArgs {
    fn one_sided(&self) -> f64 {
        match (self.alpha, self.two_sided) {
            (_, Some(two)) => two / 2.0,
            (Some(a), None) => a,
            (None, None) => 0.025,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReplicationArgs {
    /// Observed or planned mean difference.
    #[arg(long, allow_hyphen_values = true)]
    pub effect: f64,
    #[arg(long, default_value_t = 10.0)]
    pub sd: f64,
    #[arg(long)]
    pub n: u64,
    /// Variance multiplier: 1 classical power, 2 one replication, 3 a second study at planning time.
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    #[command(flatten)]
    pub alpha: AlphaArgs,
}

#[derive(Debug, Args)]
pub struct SampleSizeArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub effect: f64,
    #[arg(long, default_value_t = 10.0)]
    pub sd: f64,
    #[arg(long, default_value_t = 0.8)]
    pub power: f64,
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    /// Accept any power above alpha instead of requiring power > 0.5.
    #[arg(long)]
    pub allow_low_power: bool,
    #[command(flatten)]
    pub alpha: AlphaArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    NWeighted,
    Precision,
}

#[derive(Debug, Args)]
pub struct CombineArgs {
    /// Prior summary as `n,sd,mean`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_summary)]
    pub prior: (u64, f64, f64),
    /// Study summary as `n,sd,mean`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_summary)]
    pub study: (u64, f64, f64),
    #[command(flatten)]
    pub alpha: AlphaArgs,
    /// k for the prior column.
    #[arg(long, default_value_t = 3.0)]
    pub k_prior: f64,
    /// k for the study and posterior columns.
    #[arg(long, default_value_t = 2.0)]
    pub k_other: f64,
    /// Reproduce the printed table's transposed SEM/variance rows and limits.
    #[arg(long)]
    pub paper_swap: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::NWeighted)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// individuals, posterior-predictive (k 2) or chain-predictive (k 3).
    #[arg(long, default_value = "posterior-predictive")]
    pub model: SimModel,
    #[arg(long, allow_hyphen_values = true)]
    pub effect: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub sd: f64,
    #[arg(long)]
    pub n: Option<u64>,
    #[command(flatten)]
    pub alpha: AlphaArgs,
    /// Individuals model: count draws above this value.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub threshold: f64,
    /// Optional consistency check against the model's own k.
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long, default_value_t = mc::DEFAULT_TRIALS)]
    pub trials: u64,
    /// Seed; falls back to REPLIKIT_SEED, then 0.
    #[arg(long, env = "REPLIKIT_SEED")]
    pub seed: Option<u64>,
    /// Simulate a portfolio of this many chain-predictive studies instead.
    #[arg(long)]
    pub portfolio: Option<u64>,
    /// With --portfolio: repeat for this many consecutive seeds.
    #[arg(long, default_value_t = 1, requires = "portfolio")]
    pub sweep: u64,
    /// Chain model: count only trials whose first study was significant.
    #[arg(long)]
    pub condition_on_significant: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// 1: individuals and means; 2: adds the replication predictive curve.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub figure: u8,
    /// Mean difference [default: 2 for figure 1, 1.96 for figure 2].
    #[arg(long, allow_hyphen_values = true)]
    pub mean: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub sd: f64,
    #[arg(long, default_value_t = 100)]
    pub n: u64,
    #[arg(long, default_value_t = 801)]
    pub points: usize,
    #[command(flatten)]
    pub alpha: AlphaArgs,
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected 'lower,upper', got '{s}'"))?;
    Ok((a.trim().to_string(), b.trim().to_string()))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = parse_pair(s)?;
    let lo = a
        .parse::<f64>()
        .map_err(|e| format!("bad lower bound '{a}': {e}"))?;
    let hi = b
        .parse::<f64>()
        .map_err(|e| format!("bad upper bound '{b}': {e}"))?;
    Ok((lo, hi))
}

fn parse_summary(s: &str) -> Result<(u64, f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected 'n,sd,mean', got '{s}'"));
    }
    let n = parts[0]
        .parse()
        .map_err(|e| format!("bad n '{}': {e}", parts[0]))?;
    let sd = parts[1]
        .parse()
        .map_err(|e| format!("bad sd '{}': {e}", parts[1]))?;
    let mean = parts[2]
        .parse()
        .map_err(|e| format!("bad mean '{}': {e}", parts[2]))?;
    Ok((n, sd, mean))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Posterior(a) => posterior(a),
        Command::Replication(a) => replication(a),
        Command::SampleSize(a) => sample_size(a),
        Command::Combine(a) => combine(a),
        Command::Simulate(a) => simulate(a),
        Command::PaperRepro => paper_repro(),
        Command::PlotData(a) => plot_data(a),
    }
}

fn posterior(a: &PosteriorArgs) -> Result<Output, CliError> {
    let study = StudySummary::new(a.n, a.sd, a.mean)?;
    let post = posterior_from(&study);
    let mut text = format!(
        "study: mean {}, sd {}, n {} (sem {})\n",
        a.mean,
        a.sd,
        a.n,
        fmt6(post.sem())
    );

    let mut beyond = Vec::new();
    for &t in &a.beyond {
        let p = prob_true_beyond(&post, t)?.value();
        text.push_str(&format!("P(true mean > {t}) = {}\n", fmt6(p)));
        beyond.push(json!({"threshold": t, "probability": p}));
    }
    let mut within = Vec::new();
    for &(lo, hi) in &a.within {
        let r = RangeOfInterest::new(lo, hi)?;
        let p = prob_true_within(&post, &r).value();
        text.push_str(&format!("P({lo} < true mean < {hi}) = {}\n", fmt6(p)));
        within.push(json!({"lower": lo, "upper": hi, "probability": p}));
    }
    let mut individuals = Vec::new();
    for &t in &a.individuals {
        let p = fraction_of_individuals_beyond(&study, t)?.value();
        text.push_str(&format!("fraction of individuals > {t} = {}\n", fmt6(p)));
        individuals.push(json!({"threshold": t, "fraction": p}));
    }
    let one = p_value_one_sided(&post, a.null_value)?.value();
    let two = p_value_two_sided(&post, a.null_value)?.value();
    let ci = confidence_limits(&post, Probability::new(a.level)?)?;
    text.push_str(&format!(
        "one-sided P vs {} = {}\n",
        a.null_value,
        fmt6(one)
    ));
    text.push_str(&format!(
        "two-sided P vs {} = {}\n",
        a.null_value,
        fmt6(two)
    ));
    text.push_str(&format!(
        "{}% confidence limits = [{}, {}]\n",
        a.level * 100.0,
        fmt6(ci.lower()),
        fmt6(ci.upper())
    ));

    let inputs = json!({
        "mean": a.mean, "sd": a.sd, "n": a.n, "beyond": a.beyond,
        "within": a.within.iter().map(|&(l, u)| json!([l, u])).collect::<Vec<_>>(),
        "individuals": a.individuals, "null": a.null_value, "level": a.level,
    });
    let outputs = json!({
        "sem": post.sem(),
        "beyond": beyond,
        "within": within,
        "individuals": individuals,
        "p_value_one_sided": one,
        "p_value_two_sided": two,
        "confidence_limits": {"level": a.level, "lower": ci.lower(), "upper": ci.upper()},
    });
    Ok(Output::new("posterior", inputs, outputs, text))
}

fn replication(a: &ReplicationArgs) -> Result<Output, CliError> {
    let alpha = a.alpha.one_sided();
    let q = ReplicationQuery::new(a.effect, a.sd, a.n, a.k, alpha)?;
    let p = replication_probability(&q).value();
    let predictive_sem = q.sem() * a.k.sqrt();
    let threshold = -crate::gaussian::quantile(alpha) * predictive_sem;
    let text = format!(
        "replication probability = {}\n(sem {}, predictive sem {}, future mean must reach {})\n",
        fmt6(p),
        fmt6(q.sem()),
        fmt6(predictive_sem),
        fmt6(threshold)
    );
    let inputs = json!({"effect": a.effect, "sd": a.sd, "n": a.n, "k": a.k, "alpha": alpha});
    let outputs = json!({
        "replication_probability": p,
        "sem": q.sem(),
        "predictive_sem": predictive_sem,
        "threshold": threshold,
    });
    Ok(Output::new("replication", inputs, outputs, text))
}

fn sample_size(a: &SampleSizeArgs) -> Result<Output, CliError> {
    let alpha = a.alpha.one_sided();
    let plan = if a.allow_low_power {
        required_sample_size_allow_low_power(a.effect, a.sd, alpha, a.power, a.k)?
    } else {
        required_sample_size(a.effect, a.sd, alpha, a.power, a.k)?
    };
    let achieved = power_consistency_check(&plan).value();
    let text = format!(
        "raw n = {:.2}\nrequired n = {}\nreplication probability at n = {}: {}\n",
        plan.raw_n,
        plan.required_n,
        plan.required_n,
        fmt6(achieved)
    );
    let inputs = json!({
        "effect": a.effect, "sd": a.sd, "alpha": alpha, "power": a.power, "k": a.k,
        "allow_low_power": a.allow_low_power,
    });
    let outputs = json!({
        "raw_n": plan.raw_n,
        "required_n": plan.required_n,
        "achieved_probability": achieved,
    });
    Ok(Output::new("sample-size", inputs, outputs, text))
}

fn combine(a: &CombineArgs) -> Result<Output, CliError> {
    let prior = StudySummary::new(a.prior.0, a.prior.1, a.prior.2)?;
    let study = StudySummary::new(a.study.0, a.study.1, a.study.2)?;
    let opts = ReportOptions {
        alpha: a.alpha.one_sided(),
        k_prior: a.k_prior,
        k_other: a.k_other,
        mode: match a.mode {
            ModeArg::NWeighted => CombineMode::NWeighted,
            ModeArg::Precision => CombineMode::Precision,
        },
        paper_swap: a.paper_swap,
        level: a.level,
    };
    let report = combination_report(&prior, &study, &opts)?;

    let cols = report.columns();
    let mut text = format!(
        "{:<22} {:>16} {:>16} {:>16}\n",
        "", "Prior", "Study", "Posterior"
    );
    let mut line = |label: &str, f: &dyn Fn(&crate::combine::ReportColumn) -> String| {
        text.push_str(&format!(
            "{:<22} {:>16} {:>16} {:>16}\n",
            label,
            f(cols[0]),
            f(cols[1]),
            f(cols[2])
        ));
    };
    let g = |x: f64| format!("{:.9}", x);
    let (var_label, sem_label) = if a.paper_swap {
        ("Variance", "SEM")
    } else {
        ("Variance of mean", "SEM")
    };
    line("No of observations", &|c| c.n.to_string());
    line("Standard deviation", &|c| g(c.sd));
    line(var_label, &|c| g(c.variance_of_mean));
    line(sem_label, &|c| g(c.sem));
    line("Mean Difference", &|c| g(c.mean_diff));
    line("Upper CL", &|c| g(c.upper_cl));
    line("Lower CL", &|c| g(c.lower_cl));
    line("P value", &|c| format!("{:.7e}", c.p_value));
    line("Prob of replication", &|c| g(c.replication_probability));
    line("k", &|c| c.k.to_string());
    if a.paper_swap {
        text.push_str(
            "\nnote: --paper-swap transposes the SEM and variance rows and sets limits to mean +/- 1.96 x SD^2/n\n",
        );
    } else {
        text.push_str(&format!(
            "\nnote: limits are mean +/- z x SEM at level {}; the published table's limits are reproduced with --paper-swap\n",
            a.level
        ));
    }

    let inputs = json!({
        "prior": {"n": a.prior.0, "sd": a.prior.1, "mean": a.prior.2},
        "study": {"n": a.study.0, "sd": a.study.1, "mean": a.study.2},
        "alpha": opts.alpha, "k_prior": a.k_prior, "k_other": a.k_other,
        "paper_swap": a.paper_swap, "mode": opts.mode, "level": a.level,
    });
    let outputs = serde_json::to_value(&report).expect("report serializes");
    Ok(Output::new("combine", inputs, outputs, text))
}

fn simulate(a: &SimulateArgs) -> Result<Output, CliError> {
    let seed = a.seed.unwrap_or(0);
    let alpha = a.alpha.one_sided();
    if let Some(studies) = a.portfolio {
        let cfg = PortfolioConfig {
            seed,
            studies,
            effect: a.effect.unwrap_or(2.2),
            sd: a.sd,
            n: a.n.unwrap_or(163),
            alpha,
            condition_on_significant_first: a.condition_on_significant,
        };
        let reports = mc::portfolio_sweep(&cfg, a.sweep)?;
        let rows: Vec<SweepRow> = reports.iter().map(SweepRow::from_portfolio).collect();
        let mut csv = Vec::new();
        mc::write_sweep_csv(&rows, &mut csv).expect("in-memory write");
        let mut text = String::new();
        for r in &reports {
            text.push_str(&format!(
                "seed {}: {}/{} replicated = {} (95% CI {} to {}); analytic {}\n",
                r.seed,
                r.replications,
                r.studies,
                fmt6(r.rate),
                fmt6(r.ci_lower),
                fmt6(r.ci_upper),
                fmt6(r.analytic)
            ));
        }
        if reports.len() > 1 {
            let mean = reports.iter().map(|r| r.rate).sum::<f64>() / reports.len() as f64;
            text.push_str(&format!(
                "mean rate over {} seeds = {}\n",
                reports.len(),
                fmt6(mean)
            ));
        }
        let inputs = serde_json::to_value(cfg).expect("config serializes");
        let inputs = json!({"portfolio": inputs, "sweep": a.sweep, "rng": mc::RNG_NAME});
        let outputs = json!({"portfolios": reports});
        return Ok(Output::new("simulate", inputs, outputs, text)
            .with_csv(String::from_utf8(csv).expect("utf-8 csv")));
    }

    let effect = a.effect.ok_or_else(|| {
        CliError::Usage("--effect is required unless --portfolio is given".into())
    })?;
    let cfg = SimConfig {
        seed,
        trials: a.trials,
        model: a.model,
        effect,
        sd: a.sd,
        n: a.n.unwrap_or(100),
        alpha,
        threshold: a.threshold,
        k: a.k,
        condition_on_significant_first: a.condition_on_significant,
    };
    let r = mc::simulate(&cfg)?;
    let mut csv = Vec::new();
    mc::write_sweep_csv(&[SweepRow::from_sim(&cfg, &r)], &mut csv).expect("in-memory write");
    let mut text = format!(
        "model {} (rng {}, seed {})\nempirical = {} ({} / {} trials, se {})\nanalytic  = {}\nz = {:.3}\n",
        r.model,
        r.rng,
        r.seed,
        fmt6(r.empirical_rate),
        r.successes,
        r.trials,
        fmt6(r.binomial_se),
        fmt6(r.analytic_prediction),
        r.z_discrepancy
    );
    if let Some(expected) = r.expected_variance {
        text.push_str(&format!(
            "variance of simulated values = {} (expected {})\n",
            fmt6(r.sample_variance),
            fmt6(expected)
        ));
    }
    let inputs = serde_json::to_value(cfg).expect("config serializes");
    let outputs = serde_json::to_value(&r).expect("report serializes");
    Ok(Output::new("simulate", inputs, outputs, text)
        .with_csv(String::from_utf8(csv).expect("utf-8 csv")))
}

fn paper_repro() -> Result<Output, CliError> {
    let rows = repro::paper_rows()?;
    let ok = rows.iter().all(|r| r.matches);
    let text = repro::render_text(&rows);
    let csv = repro::render_csv(&rows);
    let outputs = json!({"rows": rows, "all_match": ok});
    let mut out = Output::new("paper-repro", json!({}), outputs, text).with_csv(csv);
    out.ok = ok;
    Ok(out)
}

fn plot_data(a: &PlotArgs) -> Result<Output, CliError> {
    let figure = if a.figure == 2 {
        plot::Figure::Replication
    } else {
        plot::Figure::Individuals
    };
    let mean = a.mean.unwrap_or(match figure {
        plot::Figure::Individuals => 2.0,
        plot::Figure::Replication => 1.96,
    });
    let study = StudySummary::new(a.n, a.sd, mean)?;
    let alpha = a.alpha.one_sided();
    let rows = plot::plot_data(&study, figure, a.points, alpha)?;
    let csv = plot::to_csv(&rows, figure);
    let inputs = json!({
        "figure": a.figure, "mean": mean, "sd": a.sd, "n": a.n, "points": a.points, "alpha": alpha,
    });
    let outputs = json!({
        "sem": study.sem(),
        "predictive_sem": (figure == plot::Figure::Replication)
            .then(|| study.sem() * std::f64::consts::SQRT_2),
        "markers": plot::markers(&study, figure, alpha)
            .into_iter()
            .map(|(label, x)| json!({"label": label, "x": x}))
            .collect::<Vec<_>>(),
        "rows": rows,
    });
    Ok(Output::new("plot-data", inputs, outputs, csv.clone()).with_csv(csv))
}

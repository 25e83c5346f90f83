//! Fixed recomputation of every published number in the running example.
//!
//! Each row carries the printed value, the recomputed value, and a pinned
//! reference the recomputation must land on. For `PASS` rows the reference
//! is the printed value itself. `NOTE` rows mark places where the printed
//! value is a rounding or transcription slip; their reference is the
//! independently derived value instead.

use serde::Serialize;

use crate::combine::{combination_report, ReportOptions};
use crate::error::Result;
use crate::gaussian::Probability;
use crate::inference::{
    self, confidence_limits, fraction_of_individuals_beyond, p_value_one_sided, posterior_from,
    prob_true_beyond, prob_true_within, proportion_probability, RangeOfInterest, StudySummary,
};
use crate::numfmt::num9;
use crate::replication::{replication_probability, required_sample_size, ReplicationQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flag {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "NOTE")]
    Note,
}

impl Flag {
    fn as_str(self) -> &'static str {
        match self {
            Flag::Pass => "PASS",
            Flag::Note => "NOTE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tolerance {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproRow {
    pub id: &'static str,
    pub quantity: &'static str,
    pub printed: f64,
    pub computed: f64,
    pub abs_diff: f64,
    pub flag: Flag,
    /// Value the recomputation is checked against.
    pub reference: f64,
    pub tolerance: f64,
    pub tolerance_kind: Tolerance,
    pub matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

struct Expected {
    id: &'static str,
    quantity: &'static str,
    printed: f64,
    flag: Flag,
    reference: f64,
    tolerance: f64,
    kind: Tolerance,
    note: Option<&'static str>,
}

fn pass(id: &'static str, quantity: &'static str, printed: f64, tolerance: f64) -> Expected {
    Expected {
        id,
        quantity,
        printed,
        flag: Flag::Pass,
        reference: printed,
        tolerance,
        kind: Tolerance::Absolute,
        note: None,
    }
}

fn note(
    id: &'static str,
    quantity: &'static str,
    printed: f64,
    reference: f64,
    tolerance: f64,
    why: &'static str,
) -> Expected {
    Expected {
        id,
        quantity,
        printed,
        flag: Flag::Note,
        reference,
        tolerance,
        kind: Tolerance::Absolute,
        note: Some(why),
    }
}

fn relative(mut s: Expected) -> Expected {
    s.kind = Tolerance::Relative;
    s
}

fn row(want: Expected, computed: f64) -> ReproRow {
    let err = (computed - want.reference).abs();
    let matches = match want.kind {
        Tolerance::Absolute => err <= want.tolerance,
        Tolerance::Relative => err <= want.tolerance * want.reference.abs(),
    };
    ReproRow {
        id: want.id,
        quantity: want.quantity,
        printed: want.printed,
        computed,
        abs_diff: (computed - want.printed).abs(),
        flag: want.flag,
        reference: want.reference,
        tolerance: want.tolerance,
        tolerance_kind: want.kind,
        matches,
        note: want.note,
    }
}

fn rep(effect: f64, n: u64, k: f64, alpha: f64) -> Result<f64> {
    Ok(replication_probability(&ReplicationQuery::new(effect, 10.0, n, k, alpha)?).value())
}

pub fn paper_rows() -> Result<Vec<ReproRow>> {
    let mut rows = Vec::new();

    // Replication probabilities and sample sizes
    rows.push(row(
        pass("Eq. 1", "replication prob, d 1.96, n 100, k 2", 0.283, 5e-4),
        rep(1.96, 100, 2.0, 0.025)?,
    ));
    rows.push(row(
        pass("Eq. 2", "replication prob, alpha 0.003824", 0.100, 5e-4),
        rep(1.96, 100, 2.0, 0.003_824)?,
    ));
    rows.push(row(
        pass("Eq. 3", "replication prob, n 404, k 2", 0.8, 5e-3),
        rep(1.96, 404, 2.0, 0.025)?,
    ));
    let k2 = required_sample_size(1.96, 10.0, 0.025, 0.8, 2.0)?;
    rows.push(row(
        pass("Eq. 4", "raw n, power 0.8, k 2", 408.6, 0.1),
        k2.raw_n,
    ));
    rows.push(row(
        pass("Eq. 4", "required n (ceiling), k 2", 409.0, 0.0),
        k2.required_n as f64,
    ));
    let k1 = required_sample_size(1.96, 10.0, 0.025, 0.8, 1.0)?;
    rows.push(row(
        pass("Eq. 5", "raw n, power 0.8, k 1", 204.3, 0.1),
        k1.raw_n,
    ));
    rows.push(row(
        note(
            "Eq. 5",
            "required n (ceiling), k 1",
            204.0,
            205.0,
            0.0,
            "printed n truncates 204.3; the ceiling keeps power >= target",
        ),
        k1.required_n as f64,
    ));
    rows.push(row(
        note(
            "Eq. 6",
            "replication prob, n 204, k 2",
            0.501,
            0.5078,
            5e-4,
            "recomputation gives 0.5078",
        ),
        rep(1.96, 204, 2.0, 0.025)?,
    ));
    let k3 = required_sample_size(1.96, 10.0, 0.025, 0.8, 3.0)?;
    rows.push(row(
        note(
            "Eq. 7",
            "raw n, power 0.8, k 3",
            602.9,
            612.9,
            0.1,
            "3 x 204.3 = 612.9; the surrounding text says about 613",
        ),
        k3.raw_n,
    ));
    rows.push(row(
        pass("Eq. 7", "required n (ceiling), k 3", 613.0, 0.0),
        k3.required_n as f64,
    ));
    rows.push(row(
        note(
            "Eq. 8",
            "replication prob, n 603, k 2",
            0.923,
            0.9255,
            5e-4,
            "recomputation gives 0.9255",
        ),
        rep(1.96, 603, 2.0, 0.025)?,
    ));
    rows.push(row(
        pass("Eq. 9", "replication prob, n 613, k 3", 0.800, 5e-4),
        rep(1.96, 613, 3.0, 0.025)?,
    ));
    let eq10 = required_sample_size(2.197, 10.0, 0.025, 0.8, 1.0)?;
    rows.push(row(
        pass("Eq. 10", "raw n, d 2.197, k 1", 162.6, 0.1),
        eq10.raw_n,
    ));
    rows.push(row(
        pass("Eq. 10", "required n (ceiling), d 2.197, k 1", 163.0, 0.0),
        eq10.required_n as f64,
    ));
    rows.push(row(
        note(
            "Eq. 11",
            "replication prob, d 2.2, n 163, k 3",
            0.367,
            0.3676,
            5e-4,
            "recomputation gives 0.36756; the printed value truncates rather than rounds",
        ),
        rep(2.2, 163, 3.0, 0.025)?,
    ));
    rows.push(row(
        pass("Eq. 12", "replication prob, d 2.2, n 489, k 3", 0.802, 5e-4),
        rep(2.2, 489, 3.0, 0.025)?,
    ));

    // Worked examples for the running study (mean 2, sd 10, n 100)
    let study = StudySummary::new(100, 10.0, 2.0)?;
    let post = posterior_from(&study);
    rows.push(row(
        pass("Example", "proportion 58/100", 0.58, 0.0),
        proportion_probability(58, 100)?.value(),
    ));
    rows.push(row(
        pass("Figure 1", "individuals above 0 (58% of area)", 0.58, 5e-3),
        fraction_of_individuals_beyond(&study, 0.0)?.value(),
    ));
    rows.push(row(
        pass("Example", "SEM 10/sqrt(100)", 1.0, 1e-12),
        inference::sem_of(&study),
    ));
    let ci = confidence_limits(&post, Probability::new(0.95)?)?;
    rows.push(row(
        pass("Example", "95% lower limit", 0.04, 5e-4),
        ci.lower(),
    ));
    rows.push(row(
        pass("Example", "95% upper limit", 3.96, 5e-4),
        ci.upper(),
    ));
    rows.push(row(
        pass("Example", "P(true mean > 0)", 0.9772, 5e-4),
        prob_true_beyond(&post, 0.0)?.value(),
    ));
    rows.push(row(
        pass("Example", "P(true mean > 2)", 0.5, 0.0),
        prob_true_beyond(&post, 2.0)?.value(),
    ));
    rows.push(row(
        pass("Example", "one-sided P vs 0", 0.0228, 5e-4),
        p_value_one_sided(&post, 0.0)?.value(),
    ));
    rows.push(row(
        note(
            "Example",
            "P(0 < true mean < 3.96)",
            0.9544,
            0.95225,
            5e-4,
            "printed value removes 0.0228 from both tails, but 3.96 lies 1.96 SEM above the mean",
        ),
        prob_true_within(&post, &RangeOfInterest::new(0.0, 3.96)?).value(),
    ));
    rows.push(row(
        pass("Example", "P(1 < true mean < 3)", 0.683, 5e-4),
        prob_true_within(&post, &RangeOfInterest::new(1.0, 3.0)?).value(),
    ));

    // Figure 2 (mean 1.96, sem 1)
    let fig2 = posterior_from(&StudySummary::new(100, 10.0, 1.96)?);
    rows.push(row(
        pass("Figure 2", "P(true mean > 1)", 0.831, 5e-4),
        prob_true_beyond(&fig2, 1.0)?.value(),
    ));
    let threshold = 1.959_963_984_540_054 * std::f64::consts::SQRT_2;
    rows.push(row(
        pass("Figure 2", "replication threshold (arrow C)", 2.77, 5e-3),
        threshold,
    ));
    rows.push(row(
        pass(
            "Figure 2",
            "z of arrow C on the widened curve",
            -0.573,
            5e-3,
        ),
        (1.96 - threshold) / std::f64::consts::SQRT_2,
    ));

    // Table 1
    let prior = StudySummary::new(204, 10.0, 1.96)?;
    let first = StudySummary::new(613, 11.0, 1.76)?;
    let standard = combination_report(&prior, &first, &ReportOptions::default())?;
    let swapped = combination_report(
        &prior,
        &first,
        &ReportOptions {
            paper_swap: true,
            ..ReportOptions::default()
        },
    )?;
    let p = &standard.posterior;
    rows.push(row(pass("Table 1", "posterior n", 817.0, 0.0), p.n as f64));
    rows.push(row(pass("Table 1", "posterior SD", 10.750306, 1e-6), p.sd));
    rows.push(row(
        pass("Table 1", "posterior mean", 1.8099388, 1e-6),
        p.mean_diff,
    ));
    let p_rows = [
        ("prior P value", 0.0025596),
        ("study P value", 0.000037254),
        ("posterior P value", 0.0000007460),
    ];
    for ((quantity, printed), col) in p_rows.into_iter().zip(standard.columns()) {
        rows.push(row(
            relative(pass("Table 1", quantity, printed, 1e-3)),
            col.p_value,
        ));
    }
    let rep_rows = [
        ("prior replication prob (k 3)", 0.365533481),
        ("study replication prob (k 2)", 0.799876067),
        ("posterior replication prob (k 2)", 0.925469612),
    ];
    for ((quantity, printed), col) in rep_rows.into_iter().zip(standard.columns()) {
        rows.push(row(
            pass("Table 1", quantity, printed, 1e-6),
            col.replication_probability,
        ));
    }
    let swap_rows = [
        (
            "prior 'Variance' row (swap)",
            0.700140042,
            "prior 'SEM' row (swap)",
            0.490196078,
        ),
        (
            "study 'Variance' row (swap)",
            0.444285815,
            "study 'SEM' row (swap)",
            0.197389886,
        ),
        (
            "posterior 'Variance' row (swap)",
            0.376105598,
            "posterior 'SEM' row (swap)",
            0.141455421,
        ),
    ];
    for ((vq, vp, sq, sp), col) in swap_rows.into_iter().zip(swapped.columns()) {
        rows.push(row(pass("Table 1", vq, vp, 1e-6), col.variance_of_mean));
        rows.push(row(pass("Table 1", sq, sp, 1e-6), col.sem));
    }
    let cl_rows = [
        (
            "prior upper CL (swap)",
            2.920784314,
            "prior lower CL (swap)",
            0.999215686,
        ),
        (
            "study upper CL (swap)",
            2.146884176,
            "study lower CL (swap)",
            1.373115824,
        ),
        (
            "posterior upper CL (swap)",
            2.087191426,
            "posterior lower CL (swap)",
            1.532686175,
        ),
    ];
    for ((uq, up, lq, lp), col) in cl_rows.into_iter().zip(swapped.columns()) {
        rows.push(row(pass("Table 1", uq, up, 1e-6), col.upper_cl));
        rows.push(row(pass("Table 1", lq, lp, 1e-6), col.lower_cl));
    }
    const STANDARD_CL: &str =
        "standard limits mean +/- 1.959964 x SEM; printed limits use 1.96 x SD^2/n";
    let std_rows = [
        ("prior upper CL (standard)", 2.920784314, 3.332249266),
        ("prior lower CL (standard)", 0.999215686, 0.587750734),
        ("study upper CL (standard)", 2.146884176, 2.630784197),
        ("study lower CL (standard)", 1.373115824, 0.889215803),
        ("posterior upper CL (standard)", 2.087191426, 2.547092228),
        ("posterior lower CL (standard)", 1.532686175, 1.072785373),
    ];
    for (i, (quantity, printed, derived)) in std_rows.into_iter().enumerate() {
        let col = standard.columns()[i / 2];
        let computed = if i % 2 == 0 {
            col.upper_cl
        } else {
            col.lower_cl
        };
        rows.push(row(
            note("Table 1", quantity, printed, derived, 1e-6, STANDARD_CL),
            computed,
        ));
    }

    Ok(rows)
}

fn num(x: f64) -> String {
    num9(x)
}

pub fn render_text(rows: &[ReproRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<9} {:<40} {:>14} {:>14} {:>12} {:<4} {}\n",
        "id", "quantity", "printed", "computed", "abs diff", "flag", "check"
    ));
    for r in rows {
        out.push_str(&format!(
            "{:<9} {:<40} {:>14} {:>14} {:>12} {:<4} {}\n",
            r.id,
            r.quantity,
            num(r.printed),
            num(r.computed),
            format!("{:.3e}", r.abs_diff),
            r.flag.as_str(),
            if r.matches { "ok" } else { "MISMATCH" },
        ));
    }
    let notes: Vec<&ReproRow> = rows.iter().filter(|r| r.flag == Flag::Note).collect();
    if !notes.is_empty() {
        out.push_str("\nnotes:\n");
        for r in notes {
            out.push_str(&format!(
                "  {} {}: expected {} ({})\n",
                r.id,
                r.quantity,
                num(r.reference),
                r.note.unwrap_or("")
            ));
        }
    }
    let passes = rows.iter().filter(|r| r.flag == Flag::Pass).count();
    let mismatches = rows.iter().filter(|r| !r.matches).count();
    out.push_str(&format!(
        "\n{} rows: {} PASS, {} NOTE, {}\n",
        rows.len(),
        passes,
        rows.len() - passes,
        if mismatches == 0 {
            "all match their pinned expectations".to_string()
        } else {
            format!("{mismatches} MISMATCH")
        }
    ));
    out
}

pub fn render_csv(rows: &[ReproRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "id",
        "quantity",
        "printed",
        "computed",
        "abs_diff",
        "flag",
        "reference",
        "tolerance",
        "tolerance_kind",
        "matches",
    ])
    .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.id.to_string(),
            r.quantity.to_string(),
            num(r.printed),
            num(r.computed),
            num(r.abs_diff),
            r.flag.as_str().to_string(),
            num(r.reference),
            num(r.tolerance),
            match r.tolerance_kind {
                Tolerance::Absolute => "absolute".to_string(),
                Tolerance::Relative => "relative".to_string(),
            },
            r.matches.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

//! Density curves behind the two distribution figures.
//!
//! Figure 1 overlays individual paired differences (scale `sd`) and study
//! means (scale `sem`). Figure 2 adds the predictive distribution of a
//! replicating study's mean (scale `sem·√2`). The x grid spans `mean ± 4·sd`
//! and the arrow positions are merged into it as labelled rows:
//! A at 0, B at 1, C at the replication threshold `z_(1−α)·sem·√2` and
//! D one unit above C.

use serde::Serialize;

use crate::error::{out_of_range, Result};
use crate::gaussian;
use crate::inference::StudySummary;
use crate::numfmt::num9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Individuals = 1,
    Replication = 2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub x: f64,
    pub individuals: f64,
    pub means: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predictive: Option<f64>,
    pub marker: Option<&'static str>,
}

pub fn markers(study: &StudySummary, figure: Figure, alpha: f64) -> Vec<(&'static str, f64)> {
    let mut out = vec![("A", 0.0), ("B", 1.0)];
    if figure == Figure::Replication {
        let c = -gaussian::quantile(alpha) * study.sem() * std::f64::consts::SQRT_2;
        out.push(("C", c));
        out.push(("D", c + 1.0));
    }
    out
}

fn density(x: f64, mean: f64, scale: f64) -> f64 {
    gaussian::pdf((x - mean) / scale) / scale
}

pub fn plot_data(
    study: &StudySummary,
    figure: Figure,
    points: usize,
    alpha: f64,
) -> Result<Vec<PlotRow>> {
    if points < 2 {
        return out_of_range("points", points as f64, "points >= 2");
    }
    crate::replication::check_alpha(alpha)?;
    let mean = study.mean_diff();
    let sd = study.sd();
    let sem = study.sem();
    let wide = sem * std::f64::consts::SQRT_2;
    let (lo, hi) = (mean - 4.0 * sd, mean + 4.0 * sd);
    let step = (hi - lo) / (points - 1) as f64;

    let mut xs: Vec<(f64, Option<&'static str>)> =
        (0..points).map(|i| (lo + i as f64 * step, None)).collect();
    for (label, x) in markers(study, figure, alpha) {
        match xs.iter_mut().find(|(gx, _)| *gx == x) {
            Some(slot) => slot.1 = Some(label),
            None => xs.push((x, Some(label))),
        }
    }
    xs.sort_by(|a, b| a.0.total_cmp(&b.0));

    Ok(xs
        .into_iter()
        .map(|(x, marker)| PlotRow {
            x,
            individuals: density(x, mean, sd),
            means: density(x, mean, sem),
            predictive: (figure == Figure::Replication).then(|| density(x, mean, wide)),
            marker,
        })
        .collect())
}

pub fn to_csv(rows: &[PlotRow], figure: Figure) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["x", "individuals", "means"];
    if figure == Figure::Replication {
        header.push("predictive");
    }
    header.push("marker");
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut rec = vec![num9(r.x), num9(r.individuals), num9(r.means)];
        if let Some(p) = r.predictive {
            rec.push(num9(p));
        }
        rec.push(r.marker.unwrap_or("").to_string());
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

use serde::Serialize;

use super::{fmt_f64, to_toml, FORMAT_VERSION};
use crate::evaluation::{EvaluationReport, SweepRow};

#[derive(Serialize)]
struct ReportDoc {
    version: i64,
    accessibility_n: usize,
    accessibility_sampled: usize,
    accessibility_requested: usize,
    under_sampled: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    visibility: Option<f64>,
    posture_score: f64,
    fatigue_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    outcome: Option<&'static str>,
    complete: bool,
    steps: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    per_step: Vec<StepDoc>,
}

#[derive(Serialize)]
struct StepDoc {
    step: usize,
    posture_score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    visible: Option<bool>,
}

/// TOML rendering of a report. `visibility` is omitted when the chain has no
/// gaze joint.
pub fn write_report(r: &EvaluationReport) -> String {
    let doc = ReportDoc {
        version: FORMAT_VERSION,
        accessibility_n: r.accessibility_n,
        accessibility_sampled: r.accessibility_sampled,
        accessibility_requested: r.accessibility_requested,
        under_sampled: r.under_sampled(),
        visibility: r.visibility,
        posture_score: r.posture_score,
        fatigue_residual: r.fatigue_residual,
        outcome: r.outcome.map(|o| o.as_str()),
        complete: r.complete,
        steps: r.steps,
        per_step: r
            .per_step
            .iter()
            .flatten()
            .map(|d| StepDoc {
                step: d.step,
                posture_score: d.posture_score,
                visible: d.visible,
            })
            .collect(),
    };
    to_toml(&doc)
}

/// One line per mannequin: `name,outcome,N,visibility,posture,fatigue`.
/// Missing values are left empty.
pub fn write_sweep_table(rows: &[SweepRow]) -> String {
    let mut out = String::from("name,outcome,N,visibility,posture,fatigue\n");
    for row in rows {
        let r = row.report.as_ref();
        let num = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.mannequin.name,
            row.outcome,
            r.map(|r| r.accessibility_n.to_string()).unwrap_or_default(),
            num(r.and_then(|r| r.visibility)),
            num(r.map(|r| r.posture_score)),
            num(r.map(|r| r.fatigue_residual)),
        ));
    }
    out
}

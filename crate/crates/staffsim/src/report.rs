//! Post-run reporting: summary statistics over the metric log and a
//! least-squares fit of per-task optimality against time.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::metrics::{MetricRow, OptimalitySample};

/// Ordinary least squares y = slope * x + intercept.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub n: usize,
}

/// Fit over (x, y) points; `None` with fewer than two distinct x values.
pub fn least_squares(points: &[(f64, f64)]) -> Option<Regression> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    Some(Regression {
        slope,
        intercept: mean_y - slope * mean_x,
        n,
    })
}

pub fn optimality_regression(samples: &[OptimalitySample]) -> Option<Regression> {
    let points: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (f64::from(s.step), s.optimality))
        .collect();
    least_squares(&points)
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: usize,
    pub final_mae_hard: f64,
    pub final_mae_soft: f64,
    pub final_mae_task_pref: f64,
    pub final_mae_teammate_pref: f64,
    pub final_unknown: usize,
    pub final_correct: usize,
    pub final_incorrect: usize,
    pub total_questions: usize,
    pub tasks_assigned: usize,
    pub optimality_fit: Option<Regression>,
}

pub fn summarize(rows: &[MetricRow], samples: &[OptimalitySample]) -> Option<RunSummary> {
    let last = rows.last()?;
    Some(RunSummary {
        steps: rows.len(),
        final_mae_hard: last.mae_hard,
        final_mae_soft: last.mae_soft,
        final_mae_task_pref: last.mae_task_pref,
        final_mae_teammate_pref: last.mae_teammate_pref,
        final_unknown: last.unknown,
        final_correct: last.correct,
        final_incorrect: last.incorrect,
        total_questions: rows.iter().map(|r| r.questions).sum(),
        tasks_assigned: samples.len(),
        optimality_fit: optimality_regression(samples),
    })
}

pub fn render_summary(s: &RunSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "steps                 {}", s.steps);
    let _ = writeln!(out, "final MAE hard        {:.4}", s.final_mae_hard);
    let _ = writeln!(out, "final MAE soft        {:.4}", s.final_mae_soft);
    let _ = writeln!(out, "final MAE task pref   {:.4}", s.final_mae_task_pref);
    let _ = writeln!(
        out,
        "final MAE mate pref   {:.4}",
        s.final_mae_teammate_pref
    );
    let _ = writeln!(out, "unknown attributes    {}", s.final_unknown);
    let _ = writeln!(out, "correct estimates     {}", s.final_correct);
    let _ = writeln!(out, "incorrect estimates   {}", s.final_incorrect);
    let _ = writeln!(out, "questions asked       {}", s.total_questions);
    let _ = writeln!(out, "tasks assigned        {}", s.tasks_assigned);
    match &s.optimality_fit {
        Some(r) => {
            let _ = writeln!(
                out,
                "optimality trend      slope {:+.6} intercept {:.4} (n = {})",
                r.slope, r.intercept, r.n
            );
        }
        None => {
            let _ = writeln!(out, "optimality trend      insufficient data");
        }
    }
    out
}

/// Plot-data files keyed by figure content: question counts per step,
/// knowledge state per step, MAE per step, optimality scatter.
pub fn figure_files(rows: &[MetricRow], samples: &[OptimalitySample]) -> Vec<(String, String)> {
    let mut questions = String::from("step,questions\n");
    let mut knowledge = String::from("step,unknown,correct,incorrect\n");
    let mut mae = String::from("step,mae_hard,mae_soft,mae_task_pref,mae_teammate_pref\n");
    for r in rows {
        let _ = writeln!(questions, "{},{}", r.step, r.questions);
        let _ = writeln!(
            knowledge,
            "{},{},{},{}",
            r.step, r.unknown, r.correct, r.incorrect
        );
        let _ = writeln!(
            mae,
            "{},{},{},{},{}",
            r.step, r.mae_hard, r.mae_soft, r.mae_task_pref, r.mae_teammate_pref
        );
    }
    let mut optimality = String::from("step,optimality\n");
    for s in samples {
        let _ = writeln!(optimality, "{},{}", s.step, s.optimality);
    }
    vec![
        ("fig_questions.csv".into(), questions),
        ("fig_knowledge.csv".into(), knowledge),
        ("fig_mae.csv".into(), mae),
        ("fig_optimality.csv".into(), optimality),
    ]
}

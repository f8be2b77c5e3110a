//! Per-step metric rows and their CSV encoding. Formatting is shortest
//! round-trip decimal, so identical runs produce identical bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use staffsim_core::{TaskId, Timestep};
use thiserror::Error;

pub const METRICS_HEADER: &str = "step,mae_hard,mae_soft,mae_task_pref,mae_teammate_pref,\
unknown,correct,incorrect,questions,mean_optimality,tasks_scheduled";

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct MetricRow {
    pub step: Timestep,
    pub mae_hard: f64,
    pub mae_soft: f64,
    pub mae_task_pref: f64,
    pub mae_teammate_pref: f64,
    pub unknown: usize,
    pub correct: usize,
    pub incorrect: usize,
    pub questions: usize,
    /// Mean optimality over tasks assigned this step; `None` when no
    /// assignment happened (empty CSV cell).
    pub mean_optimality: Option<f64>,
    pub tasks_scheduled: usize,
}

/// One per-task optimality measurement taken at assignment time.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct OptimalitySample {
    pub task: TaskId,
    pub step: Timestep,
    pub outcome: f64,
    pub optimality: f64,
}

pub fn metrics_to_csv(rows: &[MetricRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        let opt = r.mean_optimality.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            r.mae_hard,
            r.mae_soft,
            r.mae_task_pref,
            r.mae_teammate_pref,
            r.unknown,
            r.correct,
            r.incorrect,
            r.questions,
            opt,
            r.tasks_scheduled
        );
    }
    out
}

pub fn samples_to_csv(samples: &[OptimalitySample]) -> String {
    let mut out = String::from("task,step,outcome,optimality\n");
    for s in samples {
        let _ = writeln!(out, "{},{},{},{}", s.task, s.step, s.outcome, s.optimality);
    }
    out
}

#[derive(Error, Debug)]
pub enum CsvError {
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: {source}")]
    Parse {
        line: usize,
        column: &'static str,
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("missing or unexpected header: {0}")]
    Header(String),
}

fn field<T: FromStr>(s: &str, line: usize, column: &'static str) -> Result<T, CsvError>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    s.parse().map_err(|e: T::Err| CsvError::Parse {
        line,
        column,
        source: Box::new(e),
    })
}

pub fn metrics_from_csv(text: &str) -> Result<Vec<MetricRow>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == METRICS_HEADER => {}
        other => {
            return Err(CsvError::Header(
                other.map(|(_, h)| h.to_string()).unwrap_or_default(),
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 11 {
            return Err(CsvError::ColumnCount {
                line: i + 1,
                expected: 11,
                found: cols.len(),
            });
        }
        rows.push(MetricRow {
            step: field(cols[0], i + 1, "step")?,
            mae_hard: field(cols[1], i + 1, "mae_hard")?,
            mae_soft: field(cols[2], i + 1, "mae_soft")?,
            mae_task_pref: field(cols[3], i + 1, "mae_task_pref")?,
            mae_teammate_pref: field(cols[4], i + 1, "mae_teammate_pref")?,
            unknown: field(cols[5], i + 1, "unknown")?,
            correct: field(cols[6], i + 1, "correct")?,
            incorrect: field(cols[7], i + 1, "incorrect")?,
            questions: field(cols[8], i + 1, "questions")?,
            mean_optimality: if cols[9].is_empty() {
                None
            } else {
                Some(field(cols[9], i + 1, "mean_optimality")?)
            },
            tasks_scheduled: field(cols[10], i + 1, "tasks_scheduled")?,
        });
    }
    Ok(rows)
}

pub fn samples_from_csv(text: &str) -> Result<Vec<OptimalitySample>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "task,step,outcome,optimality")) => {}
        other => {
            return Err(CsvError::Header(
                other.map(|(_, h)| h.to_string()).unwrap_or_default(),
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(CsvError::ColumnCount {
                line: i + 1,
                expected: 4,
                found: cols.len(),
            });
        }
        rows.push(OptimalitySample {
            task: TaskId::new(cols[0]),
            step: field(cols[1], i + 1, "step")?,
            outcome: field(cols[2], i + 1, "outcome")?,
            optimality: field(cols[3], i + 1, "optimality")?,
        });
    }
    Ok(rows)
}

//! Evaluation metrics: ROC-AUC via the rank statistic, RMSE, accuracy, and
//! per-task report aggregation with JSON/CSV export.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DatasetRecord, TaskKind, TaskSchema};
use crate::model::BilstmModel;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need both classes present")]
    SingleClass,
    #[error("empty input")]
    Empty,
    #[error("no task was evaluable")]
    NothingEvaluable,
    #[error("model has {model} tasks but schema has {schema}")]
    TaskMismatch { model: usize, schema: usize },
    #[error("prediction failed: {0}")]
    Prediction(String),
}

/// Probability that a uniformly random positive is scored above a uniformly
/// random negative, ties credited half. Computed from average ranks
/// (Mann-Whitney U); agrees exactly with pairwise counting because both
/// routes produce the same half-integer numerator.
pub fn roc_auc(scores: &[f64], labels: &[f64]) -> Result<f64, MetricError> {
    if scores.len() != labels.len() {
        return Err(MetricError::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    assert!(
        labels.iter().all(|&y| y == 0.0 || y == 1.0),
        "labels must be 0 or 1"
    );
    assert!(scores.iter().all(|s| s.is_finite()), "scores must be finite");
    let n_pos = labels.iter().filter(|&&y| y == 1.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());

    // Walk runs of tied scores, assigning each member the average 1-based rank.
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        let avg_rank = (start + 1 + end + 1) as f64 / 2.0;
        for &i in &order[start..=end] {
            if labels[i] == 1.0 {
                rank_sum_pos += avg_rank;
            }
        }
        start = end + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos * n_neg) as f64)
}

/// Root mean square error, in the units of the targets.
pub fn rmse(preds: &[f64], targets: &[f64]) -> Result<f64, MetricError> {
    if preds.len() != targets.len() {
        return Err(MetricError::LengthMismatch {
            left: preds.len(),
            right: targets.len(),
        });
    }
    if preds.is_empty() {
        return Err(MetricError::Empty);
    }
    let sum_sq: f64 = preds
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok((sum_sq / preds.len() as f64).sqrt())
}

/// Fraction of entries where thresholding the score reproduces the label.
pub fn accuracy(scores: &[f64], labels: &[f64], threshold: f64) -> Result<f64, MetricError> {
    if scores.len() != labels.len() {
        return Err(MetricError::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    if scores.is_empty() {
        return Err(MetricError::Empty);
    }
    let hits = scores
        .iter()
        .zip(labels)
        .filter(|(s, &y)| (**s >= threshold) as u8 as f64 == y)
        .count();
    Ok(hits as f64 / scores.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetric {
    pub name: String,
    pub metric: String,
    pub value: f64,
}

/// Per-task metrics plus their mean and population standard deviation.
/// Classification tasks report ROC-AUC, regression tasks RMSE; tasks whose
/// unmasked labels hold a single class are listed in `skipped` rather than
/// scored as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tasks: Vec<TaskMetric>,
    pub mean: f64,
    pub std: f64,
    pub n_records: usize,
    pub skipped: Vec<String>,
}

impl EvalReport {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// CSV form of the same report: one `task,metric,value` row per task,
    /// `skipped` rows with an empty value, then `__mean__`, `__std__`, and
    /// `__n_records__` summary rows.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("task,metric,value\n");
        for t in &self.tasks {
            out.push_str(&format!("{},{},{}\n", t.name, t.metric, t.value));
        }
        for name in &self.skipped {
            out.push_str(&format!("{name},skipped,\n"));
        }
        let metric = self
            .tasks
            .first()
            .map(|t| t.metric.clone())
            .unwrap_or_default();
        out.push_str(&format!("__mean__,{},{}\n", metric, self.mean));
        out.push_str(&format!("__std__,{},{}\n", metric, self.std));
        out.push_str(&format!("__n_records__,count,{}\n", self.n_records));
        out
    }
}

/// Runs the model over every record and scores each task on its unmasked
/// labels. Masked-out entries contribute to nothing.
pub fn evaluate(
    model: &BilstmModel,
    records: &[DatasetRecord],
    schema: &TaskSchema,
) -> Result<EvalReport, MetricError> {
    if records.is_empty() {
        return Err(MetricError::NothingEvaluable);
    }
    let n_tasks = schema.n_tasks();
    if model.n_tasks() != n_tasks {
        return Err(MetricError::TaskMismatch {
            model: model.n_tasks(),
            schema: n_tasks,
        });
    }
    let mut predictions = Vec::with_capacity(records.len());
    for r in records {
        let p = model
            .predict(&r.smiles)
            .map_err(|e| MetricError::Prediction(e.to_string()))?;
        predictions.push(p);
    }

    let mut tasks = Vec::new();
    let mut skipped = Vec::new();
    for (k, (name, kind)) in schema.task_columns.iter().enumerate() {
        let mut scores = Vec::new();
        let mut labels = Vec::new();
        for (r, p) in records.iter().zip(&predictions) {
            if r.mask[k] {
                scores.push(p[k]);
                labels.push(r.labels[k]);
            }
        }
        let result = match kind {
            TaskKind::Classification => match roc_auc(&scores, &labels) {
                Ok(v) => Some(("roc_auc", v)),
                Err(MetricError::SingleClass) => None,
                Err(e) => return Err(e),
            },
            TaskKind::Regression => match rmse(&scores, &labels) {
                Ok(v) => Some(("rmse", v)),
                Err(MetricError::Empty) => None,
                Err(e) => return Err(e),
            },
        };
        match result {
            Some((metric, value)) => tasks.push(TaskMetric {
                name: name.clone(),
                metric: metric.to_string(),
                value,
            }),
            None => skipped.push(name.clone()),
        }
    }
    if tasks.is_empty() {
        return Err(MetricError::NothingEvaluable);
    }
    let values: Vec<f64> = tasks.iter().map(|t| t.value).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    Ok(EvalReport {
        tasks,
        mean,
        std: var.sqrt(),
        n_records: records.len(),
        skipped,
    })
}

//! Subcommand implementations and the error-to-exit-code mapping.

pub mod evaluate;
pub mod export;
pub mod gradcheck;
pub mod predict;
pub mod train;
pub mod vocab;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use toxseq::data::{DataError, TaskKind, TaskSchema};
use toxseq::metrics::{EvalReport, MetricError};
use toxseq::model::{BilstmModel, ModelError};
use toxseq::smiles::CodecError;
use toxseq::train::TrainError;

/// Every failure carries the exit code of its class: 2 configuration,
/// 3 data, 4 divergence, 5 gradient-check tolerance.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Divergence(String),
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Divergence(_) => 4,
            CliError::Tolerance(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg)
            | CliError::Data(msg)
            | CliError::Divergence(msg)
            | CliError::Tolerance(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::NonFiniteLoss { .. } => CliError::Divergence(e.to_string()),
            TrainError::RateOutOfRange(_)
            | TrainError::InvalidConfig(_)
            | TrainError::InvalidEps => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

/// Resolves `--preset` / `--schema` into a schema. Exactly one of the two
/// must be present unless a fallback is supplied by the caller.
pub fn load_schema(
    preset: &Option<String>,
    schema_file: &Option<PathBuf>,
) -> Result<TaskSchema, CliError> {
    match (preset, schema_file) {
        (Some(_), Some(_)) => Err(CliError::Config(
            "pass either --preset or --schema, not both".to_string(),
        )),
        (Some(name), None) => TaskSchema::preset(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset '{name}' (expected clintox, tox21, or freesolv)"
            ))
        }),
        (None, Some(path)) => {
            let text = read_to_string(path)?;
            let schema: TaskSchema = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("invalid schema file: {e}")))?;
            // Round-trip through the validated constructor.
            Ok(TaskSchema::new(
                &schema.name,
                &schema.smiles_column,
                schema.task_columns,
                schema.allow_missing,
            )?)
        }
        (None, None) => Err(CliError::Config(
            "a dataset schema is required: pass --preset or --schema".to_string(),
        )),
    }
}

/// Schema matching a saved model's own tasks, for evaluating without an
/// explicit preset: the task names double as column names.
pub fn schema_from_model(model: &BilstmModel) -> Result<TaskSchema, CliError> {
    let columns: Vec<(String, TaskKind)> = model
        .task_names
        .iter()
        .map(|n| (n.clone(), model.task_kind))
        .collect();
    let allow_missing = model.task_kind == TaskKind::Classification;
    Ok(TaskSchema::new("model", "smiles", columns, allow_missing)?)
}

/// The per-task table plus the "mean ± std" line every scoring command
/// prints.
pub fn print_report(report: &EvalReport) {
    println!("{:<24} {:<8} value", "task", "metric");
    for t in &report.tasks {
        println!("{:<24} {:<8} {:.4}", t.name, t.metric, t.value);
    }
    for name in &report.skipped {
        println!("{:<24} {:<8} (single class in labels)", name, "skipped");
    }
    println!(
        "mean {:.4} ± {:.4} over {} records",
        report.mean, report.std, report.n_records
    );
}
